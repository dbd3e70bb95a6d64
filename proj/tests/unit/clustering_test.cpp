#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "twp/clustering.hpp"
#include "twp/distfit.hpp"

using namespace twp;

namespace {

// The five archetypes of the published clustering: mean RTT (ms), CV,
// loss (fraction).
struct Archetype {
  double mean_ms;
  double cv;
  double loss;
};
const Archetype kArchetypes[5] = {
    {49.0, 1.12, 0.0022},  {131.0, 6.37, 0.0040}, {167.0, 0.33, 0.0030},
    {269.0, 0.96, 0.0012}, {358.0, 0.44, 0.0140},
};

// Synthesizes one directed link's stats from an archetype: quantiles come
// from the Gamma with that mean and CV, jittered a few percent per link.
LinkStats synth_link(const Archetype& a, NodeId src, NodeId dst, Rng& rng,
                     double jitter = 0.03) {
  auto jit = [&](double v) { return v * (1.0 + jitter * (2.0 * uniform01(rng) - 1.0)); };
  double mean = jit(a.mean_ms);
  double cv = jit(a.cv);
  double shape = 1.0 / (cv * cv);
  DistParams gamma{DistFamily::Gamma, shape, mean / shape, 0, 0};

  LinkStats s;
  s.src = src;
  s.dst = dst;
  s.count = 400;
  s.mean_ms = mean;
  s.cv = cv;
  s.sd_ms = mean * cv;
  s.q25 = quantile_of(gamma, 0.25);
  s.q50 = quantile_of(gamma, 0.50);
  s.q75 = quantile_of(gamma, 0.75);
  s.q90 = quantile_of(gamma, 0.90);
  s.q95 = quantile_of(gamma, 0.95);
  s.q99 = quantile_of(gamma, 0.99);
  s.min_ms = 1.0;
  s.max_ms = s.q99 * 2.0;
  s.loss_fraction = std::max(0.0, jit(a.loss));
  return s;
}

// 200 directed links as 100 pairs; each pair drawn from one archetype.
// `perturbed_pairs` pairs get their reverse direction from a different
// archetype.
struct Mesh {
  std::vector<LinkStats> stats;
  std::vector<std::size_t> truth;  // archetype index per directed link
};

Mesh synth_mesh(uint64_t seed, std::size_t perturbed_pairs = 0) {
  Rng rng(seed);
  Mesh mesh;
  std::size_t pair_index = 0;
  for (std::size_t p = 0; p < 100; ++p) {
    std::size_t arch = p % 5;
    NodeId a = static_cast<NodeId>(2 * pair_index);
    NodeId b = static_cast<NodeId>(2 * pair_index + 1);
    ++pair_index;
    std::size_t rev_arch =
        p < perturbed_pairs ? (arch + 2) % 5 : arch;
    mesh.stats.push_back(synth_link(kArchetypes[arch], a, b, rng));
    mesh.truth.push_back(arch);
    mesh.stats.push_back(synth_link(kArchetypes[rev_arch], b, a, rng));
    mesh.truth.push_back(rev_arch);
  }
  return mesh;
}

}  // namespace

TEST_CASE("identical links produce identical feature vectors") {
  Rng rng(21);
  LinkStats one = synth_link(kArchetypes[0], 0, 1, rng, 0.0);
  LinkStats two = one;
  two.src = 1;
  two.dst = 0;
  LinkStats other = synth_link(kArchetypes[3], 2, 3, rng, 0.0);
  LinkStats other2 = synth_link(kArchetypes[1], 3, 2, rng, 0.0);
  FeatureBuild fb = build_features(std::vector<LinkStats>{one, two, other,
                                                          other2});
  REQUIRE(fb.vectors.size() == 4);
  CHECK(fb.vectors[0].values == fb.vectors[1].values);
  CHECK(fb.vectors[0].values != fb.vectors[2].values);
}

TEST_CASE("standardized dimensions have zero mean and unit sd") {
  Mesh mesh = synth_mesh(22);
  FeatureBuild fb = build_features(mesh.stats);
  REQUIRE(fb.vectors.size() == 200);
  REQUIRE(fb.vectors[0].values.size() == 8);
  for (std::size_t d = 0; d < 8; ++d) {
    double mean = 0, ss = 0;
    for (const auto& v : fb.vectors) mean += v.values[d];
    mean /= 200.0;
    for (const auto& v : fb.vectors)
      ss += (v.values[d] - mean) * (v.values[d] - mean);
    double sd = std::sqrt(ss / 199.0);
    CHECK(std::fabs(mean) < 1e-9);
    CHECK(std::fabs(sd - 1.0) < 1e-9);
  }
}

TEST_CASE("constant dimensions are dropped with a warning") {
  Mesh mesh = synth_mesh(23);
  for (auto& s : mesh.stats) s.loss_fraction = 0.01;  // constant loss
  FeatureBuild fb = build_features(mesh.stats);
  CHECK(fb.vectors[0].values.size() == 7);
  REQUIRE(fb.warnings.size() == 1);
  CHECK(fb.warnings[0].find("loss") != std::string::npos);
}

TEST_CASE("links with too few samples are skipped with a reason") {
  Mesh mesh = synth_mesh(24);
  mesh.stats[5].count = 10;
  FeatureBuild fb = build_features(mesh.stats);
  CHECK(fb.vectors.size() == 199);
  REQUIRE(fb.skipped.size() == 1);
  CHECK(fb.skipped[0].find("10 samples") != std::string::npos);
}

TEST_CASE("k=1 reduces to the data mean and variance") {
  std::vector<FeatureVector> vecs;
  Rng rng(25);
  for (int i = 0; i < 50; ++i)
    vecs.push_back(FeatureVector{0, 1, {uniform01(rng), 3.0 * uniform01(rng)}});
  GmmModel model = em_fit(vecs, 1, 3, 99);
  REQUIRE(model.k == 1);
  CHECK(model.weights[0] == doctest::Approx(1.0));
  for (std::size_t d = 0; d < 2; ++d) {
    double mean = 0;
    for (const auto& v : vecs) mean += v.values[d];
    mean /= 50.0;
    double var = 0;
    for (const auto& v : vecs)
      var += (v.values[d] - mean) * (v.values[d] - mean);
    var /= 50.0;
    CHECK(model.means[0][d] == doctest::Approx(mean).epsilon(1e-9));
    CHECK(model.variances[0][d] == doctest::Approx(var).epsilon(1e-9));
  }
}

TEST_CASE("two well-separated 1-D clusters are found") {
  Rng rng(26);
  DistParams lo{DistFamily::Normal, 0, 0.5, -5.0, 0};
  DistParams hi{DistFamily::Normal, 0, 0.5, 5.0, 0};
  std::vector<FeatureVector> vecs;
  for (int i = 0; i < 100; ++i) {
    vecs.push_back(FeatureVector{0, 1, {sample_one(lo, rng)}});
    vecs.push_back(FeatureVector{1, 0, {sample_one(hi, rng)}});
  }
  GmmModel model = em_fit(vecs, 2, 5, 4242);
  std::vector<double> means{model.means[0][0], model.means[1][0]};
  std::sort(means.begin(), means.end());
  CHECK(std::fabs(means[0] + 5.0) < 0.2);
  CHECK(std::fabs(means[1] - 5.0) < 0.2);
}

TEST_CASE("archetype mesh is recovered with at least 90% agreement") {
  Mesh mesh = synth_mesh(27);
  FeatureBuild fb = build_features(mesh.stats);
  GmmModel model = em_fit(fb.vectors, 5, 10, 20100);
  std::vector<std::size_t> labels;
  for (const auto& v : fb.vectors) labels.push_back(assign(model, v.values).cluster);

  // build_features sorts canonically; map truth through the same order.
  std::vector<std::size_t> truth;
  for (std::size_t idx : fb.kept) truth.push_back(mesh.truth[idx]);

  double agreement = test::best_label_agreement(truth, labels, 5);
  CHECK(agreement >= 0.90);
}

TEST_CASE("assign is a probability simplex and peaks at component means") {
  Mesh mesh = synth_mesh(28);
  FeatureBuild fb = build_features(mesh.stats);
  GmmModel model = em_fit(fb.vectors, 5, 10, 555);

  Rng rng(29);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x;
    for (std::size_t d = 0; d < model.dims; ++d)
      x.push_back(4.0 * (2.0 * uniform01(rng) - 1.0));
    Assignment a = assign(model, x);
    double sum = 0;
    for (double r : a.responsibilities) sum += r;
    CHECK(std::fabs(sum - 1.0) < 1e-12);
    CHECK(a.cluster < model.k);
  }

  for (std::size_t c = 0; c < model.k; ++c) {
    Assignment a = assign(model, model.means[c]);
    CHECK(a.cluster == c);
  }

  GmmModel k1 = em_fit(fb.vectors, 1, 1, 1);
  Assignment only = assign(k1, fb.vectors[0].values);
  CHECK(only.responsibilities[0] == 1.0);

  std::vector<double> wrong_dims{1.0, 2.0};
  CHECK_THROWS_AS(assign(model, wrong_dims), ClusterError);
}

TEST_CASE("cluster summary of a single cluster equals the global row") {
  Mesh mesh = synth_mesh(30);
  std::vector<std::size_t> labels(mesh.stats.size(), 0);
  auto rows = cluster_summary(labels, mesh.stats, 1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n_links == rows[1].n_links);
  CHECK(rows[0].mean_rtt_ms == doctest::Approx(rows[1].mean_rtt_ms));
  CHECK(rows[0].mean_cv == doctest::Approx(rows[1].mean_cv));
  CHECK(rows[0].loss_pct == doctest::Approx(rows[1].loss_pct));
  CHECK(rows[0].pct_links == doctest::Approx(100.0));
}

TEST_CASE("cluster summary recovers the archetype rows within 10%") {
  Mesh mesh = synth_mesh(31);
  FeatureBuild fb = build_features(mesh.stats);
  GmmModel model = em_fit(fb.vectors, 5, 10, 31337);
  std::vector<std::size_t> labels;
  for (const auto& v : fb.vectors)
    labels.push_back(assign(model, v.values).cluster);

  std::vector<LinkStats> kept;
  for (std::size_t idx : fb.kept) kept.push_back(mesh.stats[idx]);
  labels = relabel_by_mean_rtt(labels, kept, 5);
  auto rows = cluster_summary(labels, kept, 5);
  REQUIRE(rows.size() == 6);

  double pct_total = 0;
  for (std::size_t c = 0; c < 5; ++c) {
    // Ascending-mean labels line up with the ascending archetype means.
    CHECK(std::fabs(rows[c].mean_rtt_ms - kArchetypes[c].mean_ms) /
              kArchetypes[c].mean_ms <
          0.10);
    CHECK(std::fabs(rows[c].loss_pct - kArchetypes[c].loss * 100.0) <
          0.5);
    pct_total += rows[c].pct_links;
  }
  CHECK(pct_total == doctest::Approx(100.0));
  CHECK(rows[5].label == "Global");
}

TEST_CASE("crosstab of a symmetric mesh is purely diagonal") {
  Mesh mesh = synth_mesh(32);
  FeatureBuild fb = build_features(mesh.stats);
  GmmModel model = em_fit(fb.vectors, 5, 10, 99);
  std::vector<std::size_t> labels;
  for (const auto& v : fb.vectors)
    labels.push_back(assign(model, v.values).cluster);
  Crosstab ct = direction_crosstab(fb.vectors, labels, 5);

  std::size_t diag = 0, off = 0, total = 0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i; j < 5; ++j) {
      total += ct.counts[i][j];
      if (i == j)
        diag += ct.counts[i][j];
      else
        off += ct.counts[i][j];
    }
  CHECK(total == 100);
  CHECK(off == 0);
  CHECK(diag == 100);
  for (std::size_t c = 0; c < 5; ++c) CHECK(ct.diagonal_pct[c] == 100.0);
}

TEST_CASE("a single split pair lands in exactly one off-diagonal cell") {
  std::vector<FeatureVector> vecs;
  std::vector<std::size_t> labels;
  for (std::size_t p = 0; p < 10; ++p) {
    NodeId a = static_cast<NodeId>(2 * p), b = static_cast<NodeId>(2 * p + 1);
    vecs.push_back(FeatureVector{a, b, {0.0}});
    vecs.push_back(FeatureVector{b, a, {0.0}});
    std::size_t cluster = p % 2;
    labels.push_back(cluster);
    labels.push_back(cluster);
  }
  labels[1] = 1;  // split pair 0 across c0/c1 (pair 0 was all-c0)
  Crosstab ct = direction_crosstab(vecs, labels, 2);
  CHECK(ct.counts[0][1] == 1);
  CHECK(ct.counts[0][0] == 4);
  CHECK(ct.counts[1][1] == 5);
}

TEST_CASE("perturbed mesh produces strictly positive off-diagonal mass") {
  Mesh mesh = synth_mesh(33, 10);  // 10% of pairs directionally perturbed
  FeatureBuild fb = build_features(mesh.stats);
  GmmModel model = em_fit(fb.vectors, 5, 10, 77);
  std::vector<std::size_t> labels;
  for (const auto& v : fb.vectors)
    labels.push_back(assign(model, v.values).cluster);
  Crosstab ct = direction_crosstab(fb.vectors, labels, 5);
  std::size_t off = 0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) off += ct.counts[i][j];
  CHECK(off >= 10);
  bool some_diag_below_100 = false;
  for (double pct : ct.diagonal_pct)
    if (pct < 100.0) some_diag_below_100 = true;
  CHECK(some_diag_below_100);
}

TEST_CASE("crosstab demands both directions") {
  std::vector<FeatureVector> vecs{FeatureVector{0, 1, {0.0}}};
  std::vector<std::size_t> labels{0};
  CHECK_THROWS_AS(direction_crosstab(vecs, labels, 1), ClusterError);
}

TEST_CASE("log-likelihood never decreases within a run") {
  Rng rng(34);
  for (int dataset = 0; dataset < 100; ++dataset) {
    std::vector<FeatureVector> vecs;
    std::size_t n = 20 + rng() % 60;
    std::size_t dims = 1 + rng() % 4;
    for (std::size_t i = 0; i < n; ++i) {
      FeatureVector v;
      v.src = static_cast<NodeId>(i % 200);
      v.dst = static_cast<NodeId>((i + 1) % 200);
      for (std::size_t d = 0; d < dims; ++d)
        v.values.push_back(10.0 * (2.0 * uniform01(rng) - 1.0));
      vecs.push_back(v);
    }
    std::size_t k = 1 + rng() % 4;
    if (vecs.size() < k) continue;
    GmmModel model = em_fit(vecs, k, 1, rng());
    REQUIRE(!model.ll_history.empty());
    for (std::size_t i = 1; i < model.ll_history.size(); ++i) {
      CHECK(model.ll_history[i] >=
            model.ll_history[i - 1] - 1e-8 * std::fabs(model.ll_history[i]));
    }
    CHECK(model.log_likelihood == model.ll_history.back());

    for (const auto& v : vecs) {
      Assignment a = assign(model, v.values);
      double sum = 0;
      for (double r : a.responsibilities) sum += r;
      CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("variance floor holds after every fit") {
  Mesh mesh = synth_mesh(35);
  FeatureBuild fb = build_features(mesh.stats);
  for (std::size_t k : {1ul, 3ul, 5ul, 8ul}) {
    GmmModel model = em_fit(fb.vectors, k, 3, k * 100);
    for (const auto& comp : model.variances)
      for (double v : comp) CHECK(v >= 1e-6);
  }
}

TEST_CASE("input order does not change the model or the assignments") {
  Mesh mesh = synth_mesh(36);
  FeatureBuild fb1 = build_features(mesh.stats);

  std::vector<LinkStats> shuffled = mesh.stats;
  Rng rng(37);
  for (std::size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[uniform_below(rng, i)]);
  FeatureBuild fb2 = build_features(shuffled);

  REQUIRE(fb1.vectors.size() == fb2.vectors.size());
  for (std::size_t i = 0; i < fb1.vectors.size(); ++i) {
    CHECK(fb1.vectors[i].src == fb2.vectors[i].src);
    CHECK(fb1.vectors[i].dst == fb2.vectors[i].dst);
    CHECK(fb1.vectors[i].values == fb2.vectors[i].values);
  }

  GmmModel m1 = em_fit(fb1.vectors, 5, 5, 4040);
  GmmModel m2 = em_fit(fb2.vectors, 5, 5, 4040);
  CHECK(m1.log_likelihood == m2.log_likelihood);
  for (std::size_t i = 0; i < fb1.vectors.size(); ++i)
    CHECK(assign(m1, fb1.vectors[i].values).cluster ==
          assign(m2, fb2.vectors[i].values).cluster);
}
