#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "io_util.hpp"
#include "twp/clustering.hpp"
#include "twp/csv.hpp"

namespace twp::cli {

namespace {

struct ClusterArgs {
  std::string stats_path;
  std::size_t k = 5;
  std::size_t restarts = 10;
  uint64_t seed = 0;
  bool seed_given = false;
  std::string out = "clusters.csv,crosstab.csv";
  std::string summary_out;
};

std::vector<LinkStats> load_link_stats(const std::string& path) {
  CsvTable t;
  try {
    t = read_csv(path);
  } catch (const CsvError& e) {
    throw DataError(e.what());
  }
  std::vector<LinkStats> stats;
  try {
    std::size_t c_src = t.column("src"), c_dst = t.column("dst");
    std::size_t c_count = t.column("count"), c_mean = t.column("mean_ms");
    std::size_t c_sd = t.column("sd_ms"), c_cv = t.column("cv");
    std::size_t c_min = t.column("min_ms"), c_max = t.column("max_ms");
    std::size_t c_q25 = t.column("q25"), c_q50 = t.column("q50");
    std::size_t c_q75 = t.column("q75"), c_q90 = t.column("q90");
    std::size_t c_q95 = t.column("q95"), c_q99 = t.column("q99");
    std::size_t c_loss = t.column("loss_fraction");
    for (const auto& row : t.rows) {
      LinkStats s;
      s.src = static_cast<NodeId>(std::stoul(row[c_src]));
      s.dst = static_cast<NodeId>(std::stoul(row[c_dst]));
      s.count = std::stoull(row[c_count]);
      s.mean_ms = std::stod(row[c_mean]);
      s.sd_ms = std::stod(row[c_sd]);
      s.cv = std::stod(row[c_cv]);
      s.min_ms = std::stod(row[c_min]);
      s.max_ms = std::stod(row[c_max]);
      s.q25 = std::stod(row[c_q25]);
      s.q50 = std::stod(row[c_q50]);
      s.q75 = std::stod(row[c_q75]);
      s.q90 = std::stod(row[c_q90]);
      s.q95 = std::stod(row[c_q95]);
      s.q99 = std::stod(row[c_q99]);
      s.loss_fraction = std::stod(row[c_loss]);
      stats.push_back(s);
    }
  } catch (const CsvError& e) {
    throw DataError(path + ": " + e.what());
  } catch (const std::exception& e) {
    throw DataError(path + ": bad numeric field: " + e.what());
  }
  if (stats.empty()) throw DataError(path + ": no links");
  return stats;
}

std::string summary_text(const std::vector<ClusterRow>& rows) {
  std::ostringstream out;
  out << "cluster  links%   mean_rtt_ms   cv       loss%\n";
  for (const auto& r : rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-8s %-8.5g %-13.6g %-8.4g %.4g\n",
                  r.label.c_str(), r.pct_links, r.mean_rtt_ms, r.mean_cv,
                  r.loss_pct);
    out << buf;
  }
  return out.str();
}

void write_summary_csv(const std::string& path,
                       const std::vector<ClusterRow>& rows) {
  CsvTable t;
  t.header = {"cluster", "n_links", "pct_links", "mean_rtt_ms", "cv",
              "loss_pct"};
  for (const auto& r : rows)
    t.rows.push_back({r.label, std::to_string(r.n_links),
                      format_double(r.pct_links), format_double(r.mean_rtt_ms),
                      format_double(r.mean_cv), format_double(r.loss_pct)});
  write_csv(path, t);
}

void write_crosstab_csv(const std::string& path, const Crosstab& ct) {
  CsvTable t;
  t.header = {"row"};
  for (std::size_t j = 0; j < ct.k; ++j)
    t.header.push_back("c" + std::to_string(j + 1));
  for (std::size_t i = 0; i < ct.k; ++i) {
    std::vector<std::string> row{"c" + std::to_string(i + 1)};
    for (std::size_t j = 0; j < ct.k; ++j)
      row.push_back(j < i ? "" : std::to_string(ct.counts[i][j]));
    t.rows.push_back(row);
  }
  std::vector<std::string> diag{"diagonal_pct"};
  for (std::size_t j = 0; j < ct.k; ++j)
    diag.push_back(format_double(ct.diagonal_pct[j]));
  t.rows.push_back(diag);
  write_csv(path, t);
}

void run_cluster(const ClusterArgs& args) {
  require_seed_in_ci(args.seed_given, "cluster");

  auto comma = args.out.find(',');
  if (comma == std::string::npos)
    throw UsageError("--out wants two comma-separated paths: "
                     "clusters.csv,crosstab.csv");
  std::string clusters_path = args.out.substr(0, comma);
  std::string crosstab_path = args.out.substr(comma + 1);

  std::vector<LinkStats> stats = load_link_stats(args.stats_path);
  FeatureBuild features;
  GmmModel model;
  try {
    features = build_features(stats);
    model = em_fit(features.vectors, args.k, args.restarts, args.seed);
  } catch (const ClusterError& e) {
    throw DataError(e.what());
  }
  for (const auto& w : features.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& s : features.skipped) std::cerr << "skipped: " << s << '\n';

  std::vector<std::size_t> labels;
  std::vector<double> max_resp;
  for (const auto& v : features.vectors) {
    Assignment a = assign(model, v.values);
    labels.push_back(a.cluster);
    max_resp.push_back(a.responsibilities[a.cluster]);
  }

  std::vector<LinkStats> kept_stats;
  for (std::size_t idx : features.kept) kept_stats.push_back(stats[idx]);
  labels = relabel_by_mean_rtt(labels, kept_stats, args.k);

  CsvTable t;
  t.header = {"src", "dst", "cluster", "responsibility"};
  for (std::size_t i = 0; i < features.vectors.size(); ++i) {
    t.rows.push_back({std::to_string(features.vectors[i].src),
                      std::to_string(features.vectors[i].dst),
                      "c" + std::to_string(labels[i] + 1),
                      format_double(max_resp[i])});
  }
  write_csv(clusters_path, t);

  auto rows = cluster_summary(labels, kept_stats, args.k);
  std::cout << summary_text(rows);
  if (!args.summary_out.empty()) write_summary_csv(args.summary_out, rows);

  try {
    Crosstab ct = direction_crosstab(features.vectors, labels, args.k);
    write_crosstab_csv(crosstab_path, ct);
  } catch (const ClusterError& e) {
    throw DataError(e.what());
  }
}

}  // namespace

void setup_cluster(CLI::App& app) {
  auto args = std::make_shared<ClusterArgs>();
  CLI::App* cmd = app.add_subcommand(
      "cluster", "EM-cluster directed links by their descriptive statistics");
  cmd->add_option("--stats", args->stats_path, "link_stats.csv from analyze")
      ->required();
  cmd->add_option("--k", args->k, "Cluster count")->check(CLI::Range(1, 64));
  cmd->add_option("--restarts", args->restarts, "Seeded EM restarts");
  cmd->add_option("--seed", args->seed, "Master RNG seed");
  cmd->add_option("--out", args->out,
                  "Two comma-separated paths: assignments,crosstab");
  cmd->add_option("--summary-out", args->summary_out,
                  "Also write the cluster summary table as CSV");
  cmd->callback([args, cmd]() {
    args->seed_given = cmd->count("--seed") > 0;
    run_cluster(*args);
  });
}

}  // namespace twp::cli
