#include "twp/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "twp/peer.hpp"

namespace twp {

namespace {

constexpr double kZ99 = 2.576;
constexpr int64_t kDayMs = 86'400'000;

// Slot of an event within a round, keyed by (type, direction, at-initiator).
enum class Slot {
  PingSendA,
  PingRecvB,
  PingAckSendB,
  PingAckRecvA,
  AckSendA,
  AckRecvB,
};

std::optional<Slot> slot_of(const LogRecord& rec, NodeId a, NodeId b,
                            bool at_initiator) {
  if (at_initiator) {
    if (rec.kind == MessageType::Ping && rec.dir == Direction::Send &&
        rec.src == a && rec.dst == b)
      return Slot::PingSendA;
    if (rec.kind == MessageType::PingAck && rec.dir == Direction::Recv &&
        rec.src == b && rec.dst == a)
      return Slot::PingAckRecvA;
    if (rec.kind == MessageType::Ack && rec.dir == Direction::Send &&
        rec.src == a && rec.dst == b)
      return Slot::AckSendA;
  } else {
    if (rec.kind == MessageType::Ping && rec.dir == Direction::Recv &&
        rec.src == a && rec.dst == b)
      return Slot::PingRecvB;
    if (rec.kind == MessageType::PingAck && rec.dir == Direction::Send &&
        rec.src == b && rec.dst == a)
      return Slot::PingAckSendB;
    if (rec.kind == MessageType::Ack && rec.dir == Direction::Recv &&
        rec.src == a && rec.dst == b)
      return Slot::AckRecvB;
  }
  return std::nullopt;
}

std::optional<uint64_t>& slot_ref(TwpRound& r, Slot s) {
  switch (s) {
    case Slot::PingSendA: return r.ping_send_a;
    case Slot::PingRecvB: return r.ping_recv_b;
    case Slot::PingAckSendB: return r.ping_ack_send_b;
    case Slot::PingAckRecvA: return r.ping_ack_recv_a;
    case Slot::AckSendA: return r.ack_send_a;
    case Slot::AckRecvB: return r.ack_recv_b;
  }
  return r.ping_send_a;
}

int64_t diff(uint64_t later, uint64_t earlier) {
  return static_cast<int64_t>(later) - static_cast<int64_t>(earlier);
}

double half_width(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  return kZ99 * sample_sd(xs) / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace

MatchResult match_rounds(std::span<const LogRecord> log_i,
                         std::span<const LogRecord> log_j, NodeId i, NodeId j,
                         std::size_t roster_size) {
  NodeId a = initiator_of(i, j, roster_size);
  NodeId b = a == i ? j : i;
  std::span<const LogRecord> log_a = a == i ? log_i : log_j;
  std::span<const LogRecord> log_b = a == i ? log_j : log_i;

  std::map<uint32_t, TwpRound> rounds;
  auto ingest = [&](std::span<const LogRecord> log, bool at_initiator) {
    for (const auto& rec : log) {
      auto slot = slot_of(rec, a, b, at_initiator);
      if (!slot) continue;
      auto [it, inserted] = rounds.try_emplace(rec.seq);
      if (inserted) {
        it->second.initiator = a;
        it->second.responder = b;
        it->second.seq = rec.seq;
      }
      auto& cell = slot_ref(it->second, *slot);
      if (!cell) cell = rec.timestamp_ms;  // duplicates keep the first event
    }
  };
  ingest(log_a, true);
  ingest(log_b, false);

  MatchResult out;
  out.rounds.reserve(rounds.size());
  for (auto& [seq, round] : rounds) out.rounds.push_back(round);
  // Wrap-aware presentation order; map order already groups by raw value.
  std::stable_sort(out.rounds.begin(), out.rounds.end(),
                   [](const TwpRound& x, const TwpRound& y) {
                     return seq_less_than(x.seq, y.seq);
                   });

  for (const auto& round : out.rounds) {
    auto check = [&](const std::optional<uint64_t>& send,
                     const std::optional<uint64_t>& recv, MessageType kind,
                     NodeId src, NodeId dst, std::size_t& sent) {
      if (!send) return;
      ++sent;
      if (!recv) out.losses.push_back(LossEvent{round.seq, kind, src, dst});
    };
    check(round.ping_send_a, round.ping_recv_b, MessageType::Ping, a, b,
          out.sent_fwd);
    check(round.ping_ack_send_b, round.ping_ack_recv_a, MessageType::PingAck,
          b, a, out.sent_rev);
    check(round.ack_send_a, round.ack_recv_b, MessageType::Ack, a, b,
          out.sent_fwd);
  }
  return out;
}

RttPair compute_rtt(const TwpRound& round) {
  RttPair out;
  if (round.ping_send_a && round.ping_ack_recv_a)
    out.rtt_ab = diff(*round.ping_ack_recv_a, *round.ping_send_a);
  if (round.ping_ack_send_b && round.ack_recv_b)
    out.rtt_ba = diff(*round.ack_recv_b, *round.ping_ack_send_b);
  return out;
}

OnewaySet compute_oneway(const TwpRound& round) {
  OnewaySet out;
  if (round.ping_send_a && round.ping_recv_b)
    out.fwd = diff(*round.ping_recv_b, *round.ping_send_a);
  if (round.ping_ack_send_b && round.ping_ack_recv_a)
    out.rev = diff(*round.ping_ack_recv_a, *round.ping_ack_send_b);
  if (round.ack_send_a && round.ack_recv_b)
    out.fwd_check = diff(*round.ack_recv_b, *round.ack_send_a);
  return out;
}

double relative_asymmetry(double fwd_ms, double rev_ms) {
  if (!(fwd_ms > 0.0) || !(rev_ms > 0.0))
    throw NonPositiveDelayError("relative_asymmetry needs positive delays");
  return std::fabs(fwd_ms - rev_ms) / std::min(fwd_ms, rev_ms);
}

AsymmetrySummary asymmetry_summary(std::vector<double> values) {
  if (values.empty()) throw EmptyInputError("asymmetry_summary: no values");
  AsymmetrySummary s;
  s.count = values.size();
  s.mean = mean_of(values);
  s.sd = sample_sd(values);
  s.cv = s.mean > 0.0 ? s.sd / s.mean : 0.0;
  s.trimmed_mean = trimmed_mean_drop_top(values, 0.05);
  std::sort(values.begin(), values.end());
  s.q25 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.50);
  s.q75 = quantile_sorted(values, 0.75);
  s.q90 = quantile_sorted(values, 0.90);
  s.q95 = quantile_sorted(values, 0.95);
  s.q99 = quantile_sorted(values, 0.99);
  return s;
}

LinkStats descriptive_stats(std::vector<double> samples) {
  if (samples.empty()) throw EmptyInputError("descriptive_stats: no samples");
  LinkStats st;
  st.count = samples.size();
  st.mean_ms = mean_of(samples);
  st.sd_ms = sample_sd(samples);
  st.cv = st.mean_ms > 0.0 ? st.sd_ms / st.mean_ms : 0.0;
  std::sort(samples.begin(), samples.end());
  st.min_ms = samples.front();
  st.max_ms = samples.back();
  st.q25 = quantile_sorted(samples, 0.25);
  st.q50 = quantile_sorted(samples, 0.50);
  st.q75 = quantile_sorted(samples, 0.75);
  st.q90 = quantile_sorted(samples, 0.90);
  st.q95 = quantile_sorted(samples, 0.95);
  st.q99 = quantile_sorted(samples, 0.99);
  return st;
}

std::vector<DailyStats> daily_aggregate(std::span<const LinkSamples> links) {
  struct LinkDay {
    std::vector<double> rtt;
    std::size_t sent = 0, lost = 0;
  };
  std::map<int64_t, std::map<std::size_t, LinkDay>> days;
  for (std::size_t li = 0; li < links.size(); ++li) {
    for (const auto& [wall, rtt] : links[li].rtt)
      days[static_cast<int64_t>(wall) / kDayMs][li].rtt.push_back(rtt);
    for (const auto& [wall, lost] : links[li].messages) {
      auto& d = days[static_cast<int64_t>(wall) / kDayMs][li];
      ++d.sent;
      if (lost) ++d.lost;
    }
  }

  std::vector<DailyStats> out;
  for (auto& [day, per_link] : days) {
    std::vector<double> means, medians, cvs, losses;
    for (auto& [li, ld] : per_link) {
      if (!ld.rtt.empty()) {
        double m = mean_of(ld.rtt);
        means.push_back(m);
        medians.push_back(quantile(ld.rtt, 0.5));
        cvs.push_back(m > 0.0 ? sample_sd(ld.rtt) / m : 0.0);
      }
      if (ld.sent > 0)
        losses.push_back(static_cast<double>(ld.lost) /
                         static_cast<double>(ld.sent));
    }
    if (means.empty() && losses.empty()) continue;
    DailyStats ds;
    ds.day = day;
    ds.links = per_link.size();
    if (!means.empty()) {
      ds.mean_rtt = mean_of(means);
      ds.mean_rtt_hw = half_width(means);
      ds.median_rtt = mean_of(medians);
      ds.median_rtt_hw = half_width(medians);
      ds.mean_cv = mean_of(cvs);
      ds.mean_cv_hw = half_width(cvs);
    }
    if (!losses.empty()) {
      ds.mean_loss = mean_of(losses);
      ds.mean_loss_hw = half_width(losses);
    }
    out.push_back(ds);
  }
  return out;
}

std::vector<CdfPoint> cdf_points(std::vector<double> per_link_values) {
  if (per_link_values.empty()) throw EmptyInputError("cdf of no links");
  std::sort(per_link_values.begin(), per_link_values.end());
  double n = static_cast<double>(per_link_values.size());
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < per_link_values.size(); ++i) {
    double v = per_link_values[i];
    double frac = static_cast<double>(i + 1) / n;
    if (!out.empty() && out.back().value == v)
      out.back().fraction = frac;
    else
      out.push_back(CdfPoint{v, frac});
  }
  return out;
}

MeshAnalysis analyze_mesh(const std::vector<std::vector<LogRecord>>& node_logs,
                          std::size_t roster_size) {
  if (node_logs.size() != roster_size)
    throw std::invalid_argument("analyze_mesh: log count != roster size");

  std::map<std::pair<NodeId, NodeId>, LinkSamples> links;
  MeshAnalysis out;

  for (std::size_t i = 0; i < roster_size; ++i) {
    for (std::size_t j = i + 1; j < roster_size; ++j) {
      NodeId ni = static_cast<NodeId>(i), nj = static_cast<NodeId>(j);
      MatchResult mr =
          match_rounds(node_logs[i], node_logs[j], ni, nj, roster_size);
      if (mr.rounds.empty()) continue;

      NodeId a = mr.rounds.front().initiator;
      NodeId b = mr.rounds.front().responder;
      auto& fwd_link = links[{a, b}];
      auto& rev_link = links[{b, a}];
      fwd_link.src = a;
      fwd_link.dst = b;
      rev_link.src = b;
      rev_link.dst = a;

      PairAsymmetry pa;
      pa.a = a;
      pa.b = b;

      out.total_rounds += mr.rounds.size();
      out.total_losses += mr.losses.size();

      for (const auto& round : mr.rounds) {
        // Wall-clock key: the PING send, else the first known event.
        uint64_t wall = 0;
        for (auto ts : {round.ping_send_a, round.ping_recv_b,
                        round.ping_ack_send_b, round.ping_ack_recv_a,
                        round.ack_send_a, round.ack_recv_b}) {
          if (ts) {
            wall = *ts;
            break;
          }
        }

        RttPair rtt = compute_rtt(round);
        if (rtt.rtt_ab)
          fwd_link.rtt.emplace_back(wall, static_cast<double>(*rtt.rtt_ab));
        if (rtt.rtt_ba)
          rev_link.rtt.emplace_back(wall, static_cast<double>(*rtt.rtt_ba));

        OnewaySet ow = compute_oneway(round);
        auto add_oneway = [&](LinkSamples& link,
                              const std::optional<int64_t>& v) {
          if (!v) return;
          if (*v > 0)
            link.oneway.emplace_back(wall, static_cast<double>(*v));
          else
            ++link.nonpositive_oneway;
        };
        add_oneway(fwd_link, ow.fwd);
        add_oneway(rev_link, ow.rev);
        add_oneway(fwd_link, ow.fwd_check);

        if (ow.fwd && ow.rev) {
          if (*ow.fwd > 0 && *ow.rev > 0)
            pa.values.push_back(relative_asymmetry(
                static_cast<double>(*ow.fwd), static_cast<double>(*ow.rev)));
          else
            ++pa.excluded_nonpositive;
        }

        auto add_msg = [&](LinkSamples& link,
                           const std::optional<uint64_t>& send,
                           const std::optional<uint64_t>& recv) {
          if (send) link.messages.emplace_back(*send, !recv.has_value());
        };
        add_msg(fwd_link, round.ping_send_a, round.ping_recv_b);
        add_msg(rev_link, round.ping_ack_send_b, round.ping_ack_recv_a);
        add_msg(fwd_link, round.ack_send_a, round.ack_recv_b);
      }
      out.pairs.push_back(std::move(pa));
    }
  }

  for (auto& [key, link] : links) {
    out.links.push_back(std::move(link));
  }
  for (const auto& link : out.links) {
    if (link.rtt.empty()) continue;
    std::vector<double> samples;
    samples.reserve(link.rtt.size());
    for (const auto& [wall, v] : link.rtt) samples.push_back(v);
    LinkStats st = descriptive_stats(std::move(samples));
    st.src = link.src;
    st.dst = link.dst;
    std::size_t lost = 0;
    for (const auto& [wall, l] : link.messages) lost += l ? 1 : 0;
    st.loss_fraction = link.messages.empty()
                           ? 0.0
                           : static_cast<double>(lost) /
                                 static_cast<double>(link.messages.size());
    out.stats.push_back(st);
  }
  return out;
}

}  // namespace twp
