#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "twp/coordinator.hpp"
#include "twp/distfit.hpp"
#include "twp/peer.hpp"
#include "twp/rng.hpp"

namespace twp {

// Per-node clock error: local = true + offset + drift's accumulated part.
struct SimClock {
  double offset_ms = 0.0;
  double drift_ppm = 0.0;

  // Rounded to the record's millisecond grid, clamped to 0 at the epoch
  // because the log field is unsigned.
  uint64_t local_time(double true_ms) const;
};

// Delay model for one direction of one link: a fixed value or a fitted
// family.  Random draws below 1 ms are resampled; the observed floor of
// real RTTs is 1 ms.
struct DelayModel {
  std::optional<double> constant_ms;
  std::optional<DistParams> dist;

  void validate() const;
  double sample_delay(Rng& rng) const;
};

struct LinkModel {
  DelayModel delay;
  double loss_prob = 0.0;  // per message, this direction

  void validate() const;
};

// Loss draw first; a lost message consumes no delay draw.
std::optional<double> transmit(const LinkModel& link, double send_true_ms,
                               Rng& rng);

struct SimConfig {
  std::size_t n_nodes = 0;
  uint32_t probe_interval_ms = 10000;
  uint64_t ticks = 0;
  uint64_t seed = 0;
  // Epoch of the experiment in wall-clock ms (keeps timestamps positive).
  uint64_t start_ms = 0;
  std::optional<uint32_t> rotate_s;
  std::vector<SimClock> clocks;                          // size n_nodes
  std::map<std::pair<NodeId, NodeId>, LinkModel> links;  // every ordered pair

  void validate() const;
  const LinkModel& link(NodeId src, NodeId dst) const;

  static SimConfig from_text(const std::string& text);
  static SimConfig from_file(const std::string& path);
};

struct SimResult {
  std::vector<std::vector<LogSegment>> segments;  // per node, index order
  Roster roster;
  std::size_t messages_sent = 0;
  std::size_t messages_lost = 0;

  std::vector<LogRecord> node_records(std::size_t node) const;
  std::vector<uint8_t> node_log_bytes(std::size_t node) const;
};

// Discrete-event execution of real Peer state machines over the link
// models; bit-identical output for identical config and seed.
SimResult run_scenario(const SimConfig& config);

}  // namespace twp
