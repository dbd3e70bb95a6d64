#include "twp/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace twp {

namespace {

constexpr double kVarianceFloor = 1e-6;
constexpr double kLlTol = 1e-6;
constexpr int kMaxIters = 200;
constexpr std::size_t kMinLinkSamples = 30;

double logsumexp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double log_diag_gauss(std::span<const double> x, std::span<const double> mean,
                      std::span<const double> var) {
  double ll = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    double diff = x[d] - mean[d];
    ll += -0.5 * (std::log(2.0 * M_PI * var[d]) + diff * diff / var[d]);
  }
  return ll;
}

}  // namespace

FeatureBuild build_features(std::span<const LinkStats> stats) {
  static const char* kDimNames[] = {"mean_ms", "q25", "q50",  "q75",
                                    "q90",     "q99", "cv",   "loss"};
  constexpr std::size_t kDims = 8;

  FeatureBuild out;
  std::vector<std::array<double, kDims>> raw;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const LinkStats& s = stats[i];
    if (s.count < kMinLinkSamples) {
      out.skipped.push_back("link " + std::to_string(s.src) + "->" +
                            std::to_string(s.dst) + ": only " +
                            std::to_string(s.count) + " samples");
      continue;
    }
    raw.push_back({s.mean_ms, s.q25, s.q50, s.q75, s.q90, s.q99, s.cv,
                   s.loss_fraction});
    out.kept.push_back(i);
  }
  if (raw.empty())
    throw ClusterError(ClusterError::Kind::TooFewSamples,
                       "no link has enough samples");

  double n = static_cast<double>(raw.size());
  std::array<double, kDims> mean{}, sd{};
  for (const auto& v : raw)
    for (std::size_t d = 0; d < kDims; ++d) mean[d] += v[d];
  for (std::size_t d = 0; d < kDims; ++d) mean[d] /= n;
  for (const auto& v : raw)
    for (std::size_t d = 0; d < kDims; ++d)
      sd[d] += (v[d] - mean[d]) * (v[d] - mean[d]);
  for (std::size_t d = 0; d < kDims; ++d)
    sd[d] = n > 1 ? std::sqrt(sd[d] / (n - 1.0)) : 0.0;

  std::vector<std::size_t> keep_dims;
  for (std::size_t d = 0; d < kDims; ++d) {
    if (sd[d] > 0.0) {
      keep_dims.push_back(d);
      out.dims.push_back(kDimNames[d]);
      out.dim_mean.push_back(mean[d]);
      out.dim_sd.push_back(sd[d]);
    } else {
      out.warnings.push_back(std::string("dimension ") + kDimNames[d] +
                             " is constant, dropped");
    }
  }
  if (keep_dims.empty())
    throw ClusterError(ClusterError::Kind::TooFewSamples,
                       "all feature dimensions are constant");

  for (std::size_t i = 0; i < raw.size(); ++i) {
    FeatureVector fv;
    fv.src = stats[out.kept[i]].src;
    fv.dst = stats[out.kept[i]].dst;
    for (std::size_t kd = 0; kd < keep_dims.size(); ++kd) {
      std::size_t d = keep_dims[kd];
      fv.values.push_back((raw[i][d] - mean[d]) / sd[d]);
    }
    out.vectors.push_back(std::move(fv));
  }
  return out;
}

namespace {

GmmModel em_once(std::span<const FeatureVector> vecs, std::size_t k,
                 Rng& rng) {
  std::size_t n = vecs.size();
  std::size_t dims = vecs[0].values.size();

  // k-means++ seeding over the standardized points.
  std::vector<std::size_t> centers;
  centers.push_back(uniform_below(rng, n));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    const auto& last = vecs[centers.back()].values;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dist = 0.0;
      for (std::size_t d = 0; d < dims; ++d) {
        double diff = vecs[i].values[d] - last[d];
        dist += diff * diff;
      }
      d2[i] = std::min(d2[i], dist);
      total += d2[i];
    }
    std::size_t next = 0;
    if (total > 0.0) {
      double r = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          next = i;
          break;
        }
      }
    } else {
      next = uniform_below(rng, n);
    }
    centers.push_back(next);
  }

  // Initial parameters: centers as means, pooled variance, equal weights.
  std::vector<double> pooled_var(dims, 0.0), pooled_mean(dims, 0.0);
  for (const auto& v : vecs)
    for (std::size_t d = 0; d < dims; ++d) pooled_mean[d] += v.values[d];
  for (std::size_t d = 0; d < dims; ++d) pooled_mean[d] /= static_cast<double>(n);
  for (const auto& v : vecs)
    for (std::size_t d = 0; d < dims; ++d) {
      double diff = v.values[d] - pooled_mean[d];
      pooled_var[d] += diff * diff;
    }
  for (std::size_t d = 0; d < dims; ++d) {
    pooled_var[d] = std::max(pooled_var[d] / static_cast<double>(n),
                             kVarianceFloor);
  }

  GmmModel m;
  m.k = k;
  m.dims = dims;
  m.weights.assign(k, 1.0 / static_cast<double>(k));
  for (std::size_t c = 0; c < k; ++c) {
    m.means.push_back(vecs[centers[c]].values);
    m.variances.push_back(pooled_var);
  }

  std::vector<std::vector<double>> resp(n, std::vector<double>(k));
  std::vector<double> logp(k);
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < kMaxIters; ++iter) {
    // E step
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c)
        logp[c] = std::log(m.weights[c]) +
                  log_diag_gauss(vecs[i].values, m.means[c], m.variances[c]);
      double lse = logsumexp(logp);
      ll += lse;
      for (std::size_t c = 0; c < k; ++c)
        resp[i][c] = std::exp(logp[c] - lse);
    }
    m.ll_history.push_back(ll);
    m.log_likelihood = ll;
    if (ll - prev_ll < kLlTol) break;
    prev_ll = ll;

    // M step
    for (std::size_t c = 0; c < k; ++c) {
      double nk = 0.0;
      for (std::size_t i = 0; i < n; ++i) nk += resp[i][c];
      m.weights[c] = nk / static_cast<double>(n);
      // A starved component keeps its parameters; its weight already
      // pushes it out of the mixture.
      if (nk <= 1e-12) continue;
      for (std::size_t d = 0; d < dims; ++d) {
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += resp[i][c] * vecs[i].values[d];
        mu /= nk;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double diff = vecs[i].values[d] - mu;
          var += resp[i][c] * diff * diff;
        }
        var = std::max(var / nk, kVarianceFloor);
        m.means[c][d] = mu;
        m.variances[c][d] = var;
      }
    }
  }
  return m;
}

}  // namespace

GmmModel em_fit(std::span<const FeatureVector> vectors, std::size_t k,
                std::size_t restarts, uint64_t seed) {
  if (k < 1) throw ClusterError(ClusterError::Kind::TooFewPoints, "k must be >= 1");
  if (vectors.size() < k)
    throw ClusterError(ClusterError::Kind::TooFewPoints,
                       std::to_string(vectors.size()) + " points for k=" +
                           std::to_string(k));
  if (restarts < 1) restarts = 1;

  Rng master(seed);
  GmmModel best;
  bool have = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng run_rng(master());
    GmmModel m = em_once(vectors, k, run_rng);
    if (!have || m.log_likelihood > best.log_likelihood) {
      best = std::move(m);
      have = true;
    }
  }
  return best;
}

Assignment assign(const GmmModel& model, std::span<const double> values) {
  if (values.size() != model.dims)
    throw ClusterError(ClusterError::Kind::DimensionMismatch,
                       "vector has " + std::to_string(values.size()) +
                           " dims, model has " + std::to_string(model.dims));
  std::vector<double> logp(model.k);
  for (std::size_t c = 0; c < model.k; ++c)
    logp[c] = std::log(model.weights[c]) +
              log_diag_gauss(values, model.means[c], model.variances[c]);
  double lse = logsumexp(logp);
  Assignment a;
  a.responsibilities.resize(model.k);
  for (std::size_t c = 0; c < model.k; ++c)
    a.responsibilities[c] = std::exp(logp[c] - lse);
  a.cluster = static_cast<std::size_t>(
      std::max_element(a.responsibilities.begin(), a.responsibilities.end()) -
      a.responsibilities.begin());
  return a;
}

std::vector<std::size_t> relabel_by_mean_rtt(
    std::span<const std::size_t> labels,
    std::span<const LinkStats> stats_of_vectors, std::size_t k) {
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> cnt(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sum[labels[i]] += stats_of_vectors[i].mean_ms;
    ++cnt[labels[i]];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double ma = cnt[a] ? sum[a] / static_cast<double>(cnt[a])
                       : std::numeric_limits<double>::infinity();
    double mb = cnt[b] ? sum[b] / static_cast<double>(cnt[b])
                       : std::numeric_limits<double>::infinity();
    return ma < mb;
  });
  std::vector<std::size_t> remap(k);
  for (std::size_t pos = 0; pos < k; ++pos) remap[order[pos]] = pos;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = remap[labels[i]];
  return out;
}

std::vector<ClusterRow> cluster_summary(
    std::span<const std::size_t> labels,
    std::span<const LinkStats> stats_of_vectors, std::size_t k) {
  if (labels.size() != stats_of_vectors.size())
    throw ClusterError(ClusterError::Kind::DimensionMismatch,
                       "labels and stats differ in length");
  std::vector<ClusterRow> rows(k + 1);
  double n = static_cast<double>(labels.size());
  for (std::size_t c = 0; c < k; ++c) rows[c].label = "c" + std::to_string(c + 1);
  rows[k].label = "Global";

  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t r : {labels[i], static_cast<std::size_t>(k)}) {
      rows[r].n_links += 1;
      rows[r].mean_rtt_ms += stats_of_vectors[i].mean_ms;
      rows[r].mean_cv += stats_of_vectors[i].cv;
      rows[r].loss_pct += stats_of_vectors[i].loss_fraction * 100.0;
    }
  }
  for (auto& row : rows) {
    if (row.n_links == 0) continue;
    double c = static_cast<double>(row.n_links);
    row.pct_links = 100.0 * c / n;
    row.mean_rtt_ms /= c;
    row.mean_cv /= c;
    row.loss_pct /= c;
  }
  rows[k].pct_links = 100.0;
  return rows;
}

Crosstab direction_crosstab(std::span<const FeatureVector> vectors,
                            std::span<const std::size_t> labels,
                            std::size_t k) {
  if (vectors.size() != labels.size())
    throw ClusterError(ClusterError::Kind::DimensionMismatch,
                       "vectors and labels differ in length");
  std::map<std::pair<NodeId, NodeId>, std::size_t> by_link;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    by_link[{vectors[i].src, vectors[i].dst}] = labels[i];

  Crosstab ct;
  ct.k = k;
  ct.counts.assign(k, std::vector<std::size_t>(k, 0));
  std::vector<std::size_t> links_in(k, 0), paired_in(k, 0);

  for (const auto& [link, label] : by_link) {
    ++links_in[label];
    auto rev = by_link.find({link.second, link.first});
    if (rev == by_link.end())
      throw ClusterError(ClusterError::Kind::MissingDirection,
                         "link " + std::to_string(link.second) + "->" +
                             std::to_string(link.first) + " missing");
    if (link.first < link.second) {
      std::size_t ci = std::min(label, rev->second);
      std::size_t cj = std::max(label, rev->second);
      ++ct.counts[ci][cj];
    }
    if (rev->second == label) ++paired_in[label];
  }
  ct.diagonal_pct.resize(k);
  for (std::size_t c = 0; c < k; ++c)
    ct.diagonal_pct[c] = links_in[c] == 0
                             ? 0.0
                             : 100.0 * static_cast<double>(paired_in[c]) /
                                   static_cast<double>(links_in[c]);
  return ct;
}

}  // namespace twp
