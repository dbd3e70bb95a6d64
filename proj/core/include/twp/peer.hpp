#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "twp/wire.hpp"

namespace twp {

// Circle-method round-robin tournament over the roster.  Every node has at
// most one partner per tick; over one full rotation (n-1 ticks for even n,
// n ticks for odd n via a dummy idle slot) each unordered pair meets exactly
// once.  Returns nullopt when `self` idles this tick (odd rosters only).
std::optional<NodeId> partner_at_tick(NodeId self, std::size_t roster_size,
                                      uint64_t tick);

// Which of the two nodes initiates rounds for this pair.  With
// d = (j - i) mod n, i initiates iff 1 <= d <= floor((n-1)/2), or n is even,
// d = n/2 and i < j.  Each node ends up initiating toward half the roster.
NodeId initiator_of(NodeId i, NodeId j, std::size_t roster_size);

class SameNodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PeerConfig {
  NodeId self_id = 0;
  std::size_t roster_size = 0;
  uint32_t probe_interval_ms = 10000;
  uint32_t pending_expiry_ms = 60000;
  uint32_t rotation_interval_s = 3600;

  void validate() const;  // roster_size >= 2, probe_interval_ms > 0
};

struct SendAction {
  NodeId to;
  TwpMessage msg;
};

struct LogSegment {
  uint64_t index = 0;
  std::vector<LogRecord> records;
};

// The participant state machine.  Transport-agnostic: the owner feeds it
// ticks and decoded datagrams and performs the sends it returns.  All calls
// must be serialized by a single logical owner.
class Peer {
 public:
  explicit Peer(PeerConfig cfg);

  // One probe interval elapsed.  If this node initiates toward the current
  // partner, allocates the next seq, logs the PING send and returns the
  // datagram to transmit.
  std::vector<SendAction> on_tick(uint64_t now_ms);

  // A datagram arrived from `from`.  Applies the PING -> PING-ACK -> ACK
  // exchange; unsolicited or late messages are dropped and counted, never
  // logged.
  std::vector<SendAction> on_message(const TwpMessage& msg, NodeId from,
                                     uint64_t now_ms);

  // Seals the active segment if rotation_interval_s of local time passed
  // since the previous seal.
  std::optional<LogSegment> rotate_if_due(uint64_t now_ms);
  LogSegment rotate_now();

  const PeerConfig& config() const { return cfg_; }
  uint64_t ticks() const { return tick_; }
  std::size_t pending_size() const { return pending_.size(); }
  const std::vector<LogRecord>& active_records() const { return active_; }
  uint64_t late_or_duplicate_count() const { return late_or_dup_; }
  uint64_t unknown_message_count() const { return unknown_; }

  // Restart/rejoin hook: resume the per-pair counter without replaying.
  void set_next_seq(NodeId peer, uint32_t seq) { next_seq_[peer] = seq; }

 private:
  struct PendingKey {
    NodeId peer;
    uint32_t seq;
    auto operator<=>(const PendingKey&) const = default;
  };
  struct PendingEntry {
    uint64_t sent_ms;
    MessageType awaiting;  // PingAck at the initiator, Ack at the responder
  };

  void log_event(MessageType kind, Direction dir, NodeId src, NodeId dst,
                 uint32_t seq, uint64_t now_ms);
  void evict_expired(uint64_t now_ms);

  PeerConfig cfg_;
  uint64_t tick_ = 0;
  std::map<NodeId, uint32_t> next_seq_;
  std::map<PendingKey, PendingEntry> pending_;
  std::vector<LogRecord> active_;
  uint64_t next_segment_ = 0;
  std::optional<uint64_t> last_rotation_ms_;
  uint64_t late_or_dup_ = 0;
  uint64_t unknown_ = 0;
};

}  // namespace twp
