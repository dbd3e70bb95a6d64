#include "twp/wire.hpp"

namespace twp {

namespace {

constexpr uint8_t kDirBit = 0x80;
constexpr uint8_t kTypeMask = 0x07;

void put_u32le(uint8_t* p, uint32_t v) {
  p[0] = static_cast<uint8_t>(v);
  p[1] = static_cast<uint8_t>(v >> 8);
  p[2] = static_cast<uint8_t>(v >> 16);
  p[3] = static_cast<uint8_t>(v >> 24);
}

void put_u64le(uint8_t* p, uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
}

uint32_t get_u32le(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint64_t get_u64le(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = v << 8 | p[i];
  return v;
}

bool valid_type(uint8_t t) { return t <= 2; }

}  // namespace

const char* to_string(MessageType t) {
  switch (t) {
    case MessageType::Ping: return "PING";
    case MessageType::PingAck: return "PING-ACK";
    case MessageType::Ack: return "ACK";
  }
  return "?";
}

const char* to_string(Direction d) {
  return d == Direction::Send ? "send" : "recv";
}

std::array<uint8_t, kMessageSize> encode_message(const TwpMessage& msg) {
  std::array<uint8_t, kMessageSize> out{};
  out[0] = msg.version;
  out[1] = static_cast<uint8_t>(msg.kind);
  put_u32le(out.data() + 2, msg.seq);
  return out;
}

TwpMessage decode_message(std::span<const uint8_t> bytes) {
  if (bytes.size() != kMessageSize) {
    throw CodecError(CodecError::Kind::WrongLength,
                     "message length " + std::to_string(bytes.size()) +
                         ", expected " + std::to_string(kMessageSize));
  }
  if (bytes[0] != kWireVersion) {
    throw CodecError(CodecError::Kind::BadVersion,
                     "unsupported version byte " + std::to_string(bytes[0]),
                     0);
  }
  if (!valid_type(bytes[1])) {
    throw CodecError(CodecError::Kind::BadType,
                     "unknown message type byte " + std::to_string(bytes[1]),
                     1);
  }
  TwpMessage msg;
  msg.version = bytes[0];
  msg.kind = static_cast<MessageType>(bytes[1]);
  msg.seq = get_u32le(bytes.data() + 2);
  return msg;
}

std::array<uint8_t, kRecordSize> encode_record(const LogRecord& rec) {
  if (rec.src == rec.dst) {
    throw CodecError(CodecError::Kind::SrcEqualsDst,
                     "record src equals dst (" + std::to_string(rec.src) + ")");
  }
  std::array<uint8_t, kRecordSize> out{};
  put_u64le(out.data(), rec.timestamp_ms);
  put_u32le(out.data() + 8, rec.seq);
  out[12] = static_cast<uint8_t>(static_cast<uint8_t>(rec.kind) |
                                 (rec.dir == Direction::Recv ? kDirBit : 0));
  out[13] = rec.src;
  out[14] = rec.dst;
  return out;
}

LogRecord decode_record(std::span<const uint8_t> bytes) {
  if (bytes.size() != kRecordSize) {
    throw CodecError(CodecError::Kind::WrongLength,
                     "record length " + std::to_string(bytes.size()) +
                         ", expected " + std::to_string(kRecordSize));
  }
  uint8_t kind_byte = bytes[12];
  if (!valid_type(kind_byte & ~kDirBit)) {
    throw CodecError(CodecError::Kind::BadType,
                     "unknown record kind byte " + std::to_string(kind_byte),
                     12);
  }
  if (bytes[13] == bytes[14]) {
    throw CodecError(CodecError::Kind::SrcEqualsDst,
                     "record src equals dst (" + std::to_string(bytes[13]) + ")",
                     13);
  }
  LogRecord rec;
  rec.timestamp_ms = get_u64le(bytes.data());
  rec.seq = get_u32le(bytes.data() + 8);
  rec.kind = static_cast<MessageType>(kind_byte & kTypeMask);
  rec.dir = (kind_byte & kDirBit) ? Direction::Recv : Direction::Send;
  rec.src = bytes[13];
  rec.dst = bytes[14];
  return rec;
}

void append_record(std::vector<uint8_t>& out, const LogRecord& rec) {
  auto bytes = encode_record(rec);
  out.insert(out.end(), bytes.begin(), bytes.end());
}

std::vector<LogRecord> decode_record_stream(std::span<const uint8_t> bytes) {
  if (bytes.size() % kRecordSize != 0) {
    std::size_t tail_at = bytes.size() - bytes.size() % kRecordSize;
    throw CodecError(CodecError::Kind::WrongLength,
                     "truncated record at offset " + std::to_string(tail_at) +
                         " (" + std::to_string(bytes.size() - tail_at) +
                         " trailing bytes)",
                     tail_at);
  }
  std::vector<LogRecord> records;
  records.reserve(bytes.size() / kRecordSize);
  for (std::size_t off = 0; off < bytes.size(); off += kRecordSize) {
    try {
      records.push_back(decode_record(bytes.subspan(off, kRecordSize)));
    } catch (const CodecError& e) {
      throw CodecError(e.kind(),
                       "bad record at offset " + std::to_string(off) + ": " +
                           e.what(),
                       off + e.offset());
    }
  }
  return records;
}

bool seq_less_than(uint32_t a, uint32_t b) {
  uint32_t d = b - a;
  return d != 0 && d < 0x80000000u;
}

}  // namespace twp
