#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "twp/stats.hpp"
#include "twp/wire.hpp"

namespace twp {

class NonPositiveDelayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One matched PING / PING-ACK / ACK triple.  Timestamps live in their
// owner's local clock: the a_* ones at the initiator, b_* at the responder.
struct TwpRound {
  NodeId initiator = 0;
  NodeId responder = 0;
  uint32_t seq = 0;
  std::optional<uint64_t> ping_send_a;
  std::optional<uint64_t> ping_recv_b;
  std::optional<uint64_t> ping_ack_send_b;
  std::optional<uint64_t> ping_ack_recv_a;
  std::optional<uint64_t> ack_send_a;
  std::optional<uint64_t> ack_recv_b;
};

struct LossEvent {
  uint32_t seq = 0;
  MessageType kind = MessageType::Ping;
  NodeId src = 0;
  NodeId dst = 0;
};

struct MatchResult {
  std::vector<TwpRound> rounds;  // ordered by seq (wrap-aware)
  std::vector<LossEvent> losses;
  // Messages seen as sent, per direction: first = initiator->responder.
  std::size_t sent_fwd = 0;
  std::size_t sent_rev = 0;
};

// Joins two nodes' logs on (pair, seq, type, direction).  A send without
// the matching receive in the counterpart log is a loss event.
MatchResult match_rounds(std::span<const LogRecord> log_i,
                         std::span<const LogRecord> log_j, NodeId i, NodeId j,
                         std::size_t roster_size);

struct RttPair {
  std::optional<int64_t> rtt_ab;  // measured at the initiator
  std::optional<int64_t> rtt_ba;  // measured at the responder
};

// Same-node clock differences only; no synchronization premise.
RttPair compute_rtt(const TwpRound& round);

struct OnewaySet {
  std::optional<int64_t> fwd;        // PING:     recv@B - send@A
  std::optional<int64_t> rev;        // PING-ACK: recv@A - send@B
  std::optional<int64_t> fwd_check;  // ACK:      recv@B - send@A
};

// Cross-node differences; meaningful only under synchronized clocks, so
// values may be negative and are kept signed.
OnewaySet compute_oneway(const TwpRound& round);

// |fwd - rev| / min(fwd, rev); both delays must be strictly positive.
double relative_asymmetry(double fwd_ms, double rev_ms);

struct AsymmetrySummary {
  std::size_t count = 0;
  double mean = 0, sd = 0, cv = 0;
  double q25 = 0, median = 0, q75 = 0, q90 = 0, q95 = 0, q99 = 0;
  double trimmed_mean = 0;  // top 5% excluded
};

AsymmetrySummary asymmetry_summary(std::vector<double> values);

struct LinkStats {
  NodeId src = 0;
  NodeId dst = 0;
  std::size_t count = 0;
  double mean_ms = 0, sd_ms = 0, cv = 0;
  double min_ms = 0, max_ms = 0;
  double q25 = 0, q50 = 0, q75 = 0, q90 = 0, q95 = 0, q99 = 0;
  double loss_fraction = 0;
};

// count/mean/sd/cv/min/max/quantiles of one directed link's samples;
// loss_fraction is filled by the caller.
LinkStats descriptive_stats(std::vector<double> samples);

// Raw per-directed-link material the aggregations run on.
struct LinkSamples {
  NodeId src = 0;
  NodeId dst = 0;
  std::vector<std::pair<uint64_t, double>> rtt;     // (wall ms, rtt ms)
  std::vector<std::pair<uint64_t, double>> oneway;  // positive samples only
  std::vector<std::pair<uint64_t, bool>> messages;  // (wall ms, lost)
  std::size_t nonpositive_oneway = 0;
};

struct DailyStats {
  int64_t day = 0;  // UTC day index, wall_ms / 86'400'000
  std::size_t links = 0;
  double mean_rtt = 0, mean_rtt_hw = 0;
  double median_rtt = 0, median_rtt_hw = 0;
  double mean_cv = 0, mean_cv_hw = 0;
  double mean_loss = 0, mean_loss_hw = 0;
};

// Across-link means of per-link daily statistics with 99% normal-
// approximation half-widths (z = 2.576); half-width 0 for a single link.
std::vector<DailyStats> daily_aggregate(std::span<const LinkSamples> links);

struct CdfPoint {
  double value = 0;
  double fraction = 0;  // cumulative, duplicates collapse to the higher one
};

std::vector<CdfPoint> cdf_points(std::vector<double> per_link_values);

// Per-pair asymmetry material.
struct PairAsymmetry {
  NodeId a = 0;
  NodeId b = 0;
  std::vector<double> values;
  std::size_t excluded_nonpositive = 0;
};

// Whole-mesh analysis over every unordered pair's logs.
struct MeshAnalysis {
  std::vector<LinkSamples> links;  // directed, ordered (src, dst)
  std::vector<LinkStats> stats;    // same order as links
  std::vector<PairAsymmetry> pairs;
  std::size_t total_rounds = 0;
  std::size_t total_losses = 0;
};

MeshAnalysis analyze_mesh(const std::vector<std::vector<LogRecord>>& node_logs,
                          std::size_t roster_size);

}  // namespace twp
