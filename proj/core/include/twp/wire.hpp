#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace twp {

inline constexpr uint8_t kWireVersion = 1;
inline constexpr std::size_t kMessageSize = 6;
inline constexpr std::size_t kRecordSize = 15;

// One node index into the sorted roster; the roster never exceeds 256 nodes.
using NodeId = uint8_t;

enum class MessageType : uint8_t { Ping = 0, PingAck = 1, Ack = 2 };
enum class Direction : uint8_t { Send = 0, Recv = 1 };

const char* to_string(MessageType t);
const char* to_string(Direction d);

// The UDP probe datagram: version, type and a round identifier.  The sender
// identity is taken from the transport source address, not the payload.
struct TwpMessage {
  uint8_t version = kWireVersion;
  MessageType kind = MessageType::Ping;
  uint32_t seq = 0;

  bool operator==(const TwpMessage&) const = default;
};

// One send or receive event as it appears in a `.twplog` file.  The kind
// byte on disk packs the direction into bit 7 and the message type into
// bits 0-2, so a send and the matching receive stay distinguishable.
struct LogRecord {
  uint64_t timestamp_ms = 0;  // local clock, ms since Unix epoch
  uint32_t seq = 0;
  MessageType kind = MessageType::Ping;
  Direction dir = Direction::Send;
  NodeId src = 0;  // sender of the message
  NodeId dst = 0;  // receiver of the message

  bool operator==(const LogRecord&) const = default;
};

class CodecError : public std::runtime_error {
 public:
  enum class Kind { WrongLength, BadVersion, BadType, SrcEqualsDst };

  CodecError(Kind kind, const std::string& what, std::size_t offset = 0)
      : std::runtime_error(what), kind_(kind), offset_(offset) {}

  Kind kind() const { return kind_; }
  // Byte offset of the failure within the decoded input.
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

std::array<uint8_t, kMessageSize> encode_message(const TwpMessage& msg);
TwpMessage decode_message(std::span<const uint8_t> bytes);

std::array<uint8_t, kRecordSize> encode_record(const LogRecord& rec);
LogRecord decode_record(std::span<const uint8_t> bytes);

void append_record(std::vector<uint8_t>& out, const LogRecord& rec);

// Decodes a whole `.twplog` stream (concatenated 15-byte records, no
// header).  Errors carry the byte offset of the offending record.
std::vector<LogRecord> decode_record_stream(std::span<const uint8_t> bytes);

// Serial-number arithmetic over the 32-bit sequence space: true iff a
// precedes b, i.e. (b - a) mod 2^32 lies in [1, 2^31 - 1].  A distance of
// exactly 2^31 compares as not-less in either direction.
bool seq_less_than(uint32_t a, uint32_t b);

}  // namespace twp
