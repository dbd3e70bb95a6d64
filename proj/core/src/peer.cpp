#include "twp/peer.hpp"

#include <stdexcept>

namespace twp {

void PeerConfig::validate() const {
  if (roster_size < 2) throw std::invalid_argument("roster_size must be >= 2");
  if (roster_size > 256) throw std::invalid_argument("roster_size must be <= 256");
  if (self_id >= roster_size) throw std::invalid_argument("self_id outside roster");
  if (probe_interval_ms == 0) throw std::invalid_argument("probe_interval_ms must be > 0");
}

Peer::Peer(PeerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Peer::log_event(MessageType kind, Direction dir, NodeId src, NodeId dst,
                     uint32_t seq, uint64_t now_ms) {
  active_.push_back(LogRecord{now_ms, seq, kind, dir, src, dst});
}

void Peer::evict_expired(uint64_t now_ms) {
  // Expired rounds are forgotten without a log event; the missing receive
  // shows up as a loss during analysis.
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (now_ms >= it->second.sent_ms &&
        now_ms - it->second.sent_ms > cfg_.pending_expiry_ms) {
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<SendAction> Peer::on_tick(uint64_t now_ms) {
  if (!last_rotation_ms_) last_rotation_ms_ = now_ms;
  evict_expired(now_ms);
  uint64_t tick = tick_++;

  auto partner = partner_at_tick(cfg_.self_id, cfg_.roster_size, tick);
  if (!partner) return {};
  if (initiator_of(cfg_.self_id, *partner, cfg_.roster_size) != cfg_.self_id)
    return {};

  uint32_t seq = next_seq_[*partner]++;
  log_event(MessageType::Ping, Direction::Send, cfg_.self_id, *partner, seq,
            now_ms);
  pending_[PendingKey{*partner, seq}] =
      PendingEntry{now_ms, MessageType::PingAck};
  return {SendAction{*partner, TwpMessage{kWireVersion, MessageType::Ping, seq}}};
}

std::vector<SendAction> Peer::on_message(const TwpMessage& msg, NodeId from,
                                         uint64_t now_ms) {
  if (!last_rotation_ms_) last_rotation_ms_ = now_ms;
  evict_expired(now_ms);
  NodeId self = cfg_.self_id;

  switch (msg.kind) {
    case MessageType::Ping: {
      log_event(MessageType::Ping, Direction::Recv, from, self, msg.seq, now_ms);
      log_event(MessageType::PingAck, Direction::Send, self, from, msg.seq,
                now_ms);
      pending_[PendingKey{from, msg.seq}] =
          PendingEntry{now_ms, MessageType::Ack};
      return {SendAction{from,
                         TwpMessage{kWireVersion, MessageType::PingAck, msg.seq}}};
    }
    case MessageType::PingAck: {
      auto it = pending_.find(PendingKey{from, msg.seq});
      if (it == pending_.end() || it->second.awaiting != MessageType::PingAck) {
        ++late_or_dup_;
        return {};
      }
      pending_.erase(it);
      log_event(MessageType::PingAck, Direction::Recv, from, self, msg.seq,
                now_ms);
      log_event(MessageType::Ack, Direction::Send, self, from, msg.seq, now_ms);
      return {SendAction{from,
                         TwpMessage{kWireVersion, MessageType::Ack, msg.seq}}};
    }
    case MessageType::Ack: {
      auto it = pending_.find(PendingKey{from, msg.seq});
      if (it == pending_.end() || it->second.awaiting != MessageType::Ack) {
        ++late_or_dup_;
        return {};
      }
      pending_.erase(it);
      log_event(MessageType::Ack, Direction::Recv, from, self, msg.seq, now_ms);
      return {};
    }
  }
  ++unknown_;
  return {};
}

std::optional<LogSegment> Peer::rotate_if_due(uint64_t now_ms) {
  if (!last_rotation_ms_) last_rotation_ms_ = now_ms;
  uint64_t interval_ms = uint64_t{cfg_.rotation_interval_s} * 1000;
  if (now_ms < *last_rotation_ms_ || now_ms - *last_rotation_ms_ < interval_ms)
    return std::nullopt;
  last_rotation_ms_ = now_ms;
  return rotate_now();
}

LogSegment Peer::rotate_now() {
  LogSegment seg;
  seg.index = next_segment_++;
  seg.records.swap(active_);
  return seg;
}

}  // namespace twp
