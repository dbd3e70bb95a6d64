#include <algorithm>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "io_util.hpp"
#include "twp/analysis.hpp"
#include "twp/clustering.hpp"
#include "twp/csv.hpp"
#include "twp/distfit.hpp"

namespace twp::cli {

namespace {

struct ReportArgs {
  std::string logs_dir;
  std::string roster_path;
  std::string out;
  std::size_t k = 5;
  std::size_t restarts = 10;
  double subsample_fraction = 0.001;
  uint64_t seed = 0;
  bool seed_given = false;
};

void run_report(const ReportArgs& args) {
  require_seed_in_ci(args.seed_given, "report");

  Roster roster = load_roster(args.roster_path);
  auto logs = load_mesh_logs(args.logs_dir, roster.size());
  MeshAnalysis mesh = analyze_mesh(logs, roster.size());

  std::ostringstream out;
  out << "TWP experiment report\n";
  out << "=====================\n\n";
  out << "nodes: " << roster.size() << "\n";
  out << "probe interval: " << roster.interval_ms << " ms\n";
  out << "matched rounds: " << mesh.total_rounds << "\n";
  out << "message losses: " << mesh.total_losses << "\n";
  out << "directed links with samples: " << mesh.stats.size() << "\n\n";

  std::vector<double> rtt_all;
  for (const auto& link : mesh.links)
    for (const auto& [wall, v] : link.rtt) rtt_all.push_back(v);

  if (!mesh.stats.empty()) {
    std::vector<double> means, losses;
    for (const auto& s : mesh.stats) {
      means.push_back(s.mean_ms);
      losses.push_back(s.loss_fraction);
    }
    out << "RTT samples: " << rtt_all.size() << "\n";
    out << "global mean RTT: " << format_double(mean_of(rtt_all)) << " ms\n";
    out << "mean of per-link mean RTT: " << format_double(mean_of(means))
        << " ms\n";
    out << "mean loss fraction: " << format_double(mean_of(losses)) << "\n\n";
  }

  out << "Daily aggregates (99% half-widths)\n";
  out << "day  links  mean_rtt(hw)  median_rtt(hw)  cv(hw)  loss(hw)\n";
  for (const auto& d : daily_aggregate(mesh.links)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%-4lld %-6zu %.6g(%.3g)  %.6g(%.3g)  %.4g(%.3g)  %.4g(%.3g)\n",
                  static_cast<long long>(d.day), d.links, d.mean_rtt,
                  d.mean_rtt_hw, d.median_rtt, d.median_rtt_hw, d.mean_cv,
                  d.mean_cv_hw, d.mean_loss, d.mean_loss_hw);
    out << buf;
  }
  out << "\n";

  std::vector<double> pooled_asym;
  for (const auto& pair : mesh.pairs)
    pooled_asym.insert(pooled_asym.end(), pair.values.begin(),
                       pair.values.end());
  if (!pooled_asym.empty()) {
    AsymmetrySummary s = asymmetry_summary(pooled_asym);
    out << "Relative asymmetry (" << s.count << " samples)\n";
    out << "mean " << format_double(s.mean) << ", sd " << format_double(s.sd)
        << ", cv " << format_double(s.cv) << "\n";
    out << "q25 " << format_double(s.q25) << ", median "
        << format_double(s.median) << ", q75 " << format_double(s.q75)
        << ", q90 " << format_double(s.q90) << ", q95 "
        << format_double(s.q95) << ", q99 " << format_double(s.q99) << "\n";
    out << "trimmed mean (top 5% excluded): "
        << format_double(s.trimmed_mean) << "\n\n";
  }

  if (rtt_all.size() >= 30) {
    std::vector<double> fit_data = rtt_all;
    if (args.subsample_fraction < 1.0 &&
        subsample_count(rtt_all.size(), args.subsample_fraction) >= 1000) {
      Rng rng(args.seed);
      fit_data = subsample(rtt_all, args.subsample_fraction, rng);
    }
    auto families = all_families();
    RankResult ranked = rank_fits(fit_data, families);
    out << "Distribution fits on " << fit_data.size()
        << " pooled RTT samples (ascending Anderson-Darling)\n";
    for (const auto& r : ranked.ranked) {
      out << "  " << family_name(r.params.family) << ": A2 "
          << format_double(r.ad_stat);
      if (r.params.shape != 0.0) out << ", shape " << format_double(r.params.shape);
      out << ", scale " << format_double(r.params.scale);
      if (r.params.location != 0.0)
        out << ", location " << format_double(r.params.location);
      if (r.params.threshold != 0.0)
        out << ", threshold " << format_double(r.params.threshold);
      out << "\n";
    }
    for (const auto& s : ranked.skipped)
      out << "  " << family_name(s.family) << ": skipped (" << s.reason
          << ")\n";
    out << "\n";
  }

  if (mesh.stats.size() >= args.k && args.k >= 1) {
    try {
      FeatureBuild features = build_features(mesh.stats);
      if (features.vectors.size() >= args.k) {
        GmmModel model =
            em_fit(features.vectors, args.k, args.restarts, args.seed);
        std::vector<std::size_t> labels;
        for (const auto& v : features.vectors)
          labels.push_back(assign(model, v.values).cluster);
        std::vector<LinkStats> kept;
        for (std::size_t idx : features.kept) kept.push_back(mesh.stats[idx]);
        labels = relabel_by_mean_rtt(labels, kept, args.k);

        out << "Link clusters (k=" << args.k << ", " << args.restarts
            << " restarts, log-likelihood "
            << format_double(model.log_likelihood) << ")\n";
        out << "cluster  links%   mean_rtt_ms  cv       loss%\n";
        for (const auto& r : cluster_summary(labels, kept, args.k)) {
          char buf[128];
          std::snprintf(buf, sizeof buf, "%-8s %-8.5g %-12.6g %-8.4g %.4g\n",
                        r.label.c_str(), r.pct_links, r.mean_rtt_ms, r.mean_cv,
                        r.loss_pct);
          out << buf;
        }
        try {
          Crosstab ct = direction_crosstab(features.vectors, labels, args.k);
          out << "\nDirection cross-tabulation (unordered pairs, upper "
                 "triangle)\n";
          for (std::size_t i = 0; i < ct.k; ++i) {
            out << "c" << i + 1 << ":";
            for (std::size_t j = 0; j < ct.k; ++j) {
              if (j < i)
                out << "      ";
              else {
                char buf[16];
                std::snprintf(buf, sizeof buf, " %5zu", ct.counts[i][j]);
                out << buf;
              }
            }
            out << "\n";
          }
          out << "same-cluster share per cluster:";
          for (std::size_t j = 0; j < ct.k; ++j)
            out << " " << format_double(ct.diagonal_pct[j]) << "%";
          out << "\n";
        } catch (const ClusterError&) {
          out << "\n(direction cross-tabulation skipped: some link is "
                 "missing its reverse direction)\n";
        }
      }
    } catch (const ClusterError& e) {
      out << "clustering skipped: " << e.what() << "\n";
    }
  }

  write_file_text(args.out, out.str());
}

}  // namespace

void setup_report(CLI::App& app) {
  auto args = std::make_shared<ReportArgs>();
  CLI::App* cmd = app.add_subcommand(
      "report", "One-file text summary of a whole experiment");
  cmd->add_option("--logs", args->logs_dir,
                  "Directory holding <node_id>/<segment>.twplog")
      ->required();
  cmd->add_option("--roster", args->roster_path, "Roster file")->required();
  cmd->add_option("--out", args->out, "Report file")->required();
  cmd->add_option("--k", args->k, "Cluster count");
  cmd->add_option("--restarts", args->restarts, "EM restarts");
  cmd->add_option("--subsample", args->subsample_fraction,
                  "Subsample fraction for the distribution fits");
  cmd->add_option("--seed", args->seed, "RNG seed");
  cmd->callback([args, cmd]() {
    args->seed_given = cmd->count("--seed") > 0;
    run_report(*args);
  });
}

}  // namespace twp::cli
