#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "twp/analysis.hpp"
#include "twp/rng.hpp"

namespace twp {

class ClusterError : public std::runtime_error {
 public:
  enum class Kind { TooFewSamples, TooFewPoints, DimensionMismatch,
                    MissingDirection };
  ClusterError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// One directed link's z-score standardized feature vector.
struct FeatureVector {
  NodeId src = 0;
  NodeId dst = 0;
  std::vector<double> values;
};

struct FeatureBuild {
  std::vector<FeatureVector> vectors;
  std::vector<std::string> dims;    // names of the dimensions kept
  std::vector<double> dim_mean;     // pre-standardization, kept dims
  std::vector<double> dim_sd;
  std::vector<std::size_t> kept;    // indices into stats, parallel to vectors
  std::vector<std::string> warnings;
  std::vector<std::string> skipped;  // links with too few samples
};

// Features per directed link: mean, q25, q50, q75, q90, q99, cv, loss;
// constant dimensions are dropped before standardization.  Links with
// fewer than 30 samples are skipped with a reason.
FeatureBuild build_features(std::span<const LinkStats> stats);

struct GmmModel {
  std::size_t k = 0;
  std::size_t dims = 0;
  std::vector<double> weights;
  std::vector<std::vector<double>> means;      // k x dims
  std::vector<std::vector<double>> variances;  // k x dims, floored at 1e-6
  double log_likelihood = 0.0;
  std::vector<double> ll_history;  // per-iteration, nondecreasing
};

// Diagonal-covariance EM: k-means++ init, E/M until the log-likelihood
// gain drops below 1e-6 or 200 iterations, best of `restarts` runs.
GmmModel em_fit(std::span<const FeatureVector> vectors, std::size_t k,
                std::size_t restarts, uint64_t seed);

struct Assignment {
  std::size_t cluster = 0;
  std::vector<double> responsibilities;  // sums to 1
};

Assignment assign(const GmmModel& model, std::span<const double> values);

// Relabels components 0..k-1 in ascending order of their members' mean RTT
// so summaries read like c1..ck.  `labels` holds component indices per
// vector, parallel to `stats_of_vectors`.
std::vector<std::size_t> relabel_by_mean_rtt(
    std::span<const std::size_t> labels,
    std::span<const LinkStats> stats_of_vectors, std::size_t k);

struct ClusterRow {
  std::string label;  // "c1".."ck" or "Global"
  std::size_t n_links = 0;
  double pct_links = 0;
  double mean_rtt_ms = 0;
  double mean_cv = 0;
  double loss_pct = 0;
};

// Per-cluster unweighted means over member links plus a Global row.
std::vector<ClusterRow> cluster_summary(
    std::span<const std::size_t> labels,
    std::span<const LinkStats> stats_of_vectors, std::size_t k);

struct Crosstab {
  std::size_t k = 0;
  // counts[i][j] for i <= j: unordered pairs whose directions landed in
  // clusters i and j.
  std::vector<std::vector<std::size_t>> counts;
  // Per cluster: share of its links whose pair partner is in the same
  // cluster, in percent.
  std::vector<double> diagonal_pct;
};

// Both directions of every pair must be present in `labels`.
Crosstab direction_crosstab(std::span<const FeatureVector> vectors,
                            std::span<const std::size_t> labels,
                            std::size_t k);

}  // namespace twp
