#include <algorithm>
#include <filesystem>
#include <memory>

#include "commands.hpp"
#include "io_util.hpp"
#include "twp/analysis.hpp"
#include "twp/csv.hpp"
#include "twp/stats.hpp"

namespace twp::cli {

namespace fs = std::filesystem;

namespace {

struct AnalyzeArgs {
  std::string logs_dir;
  std::string roster_path;
  std::string out_dir;
  double trim_q = 1.0;  // exploratory upper trim on per-link RTT samples
  std::string rtt_out;
};

std::string link_name(NodeId src, NodeId dst) {
  return std::to_string(src) + "," + std::to_string(dst);
}

void write_link_stats(const fs::path& path,
                      const std::vector<LinkStats>& stats) {
  CsvTable t;
  t.header = {"src", "dst", "count", "mean_ms", "sd_ms", "cv",
              "min_ms", "max_ms", "q25", "q50", "q75", "q90", "q95", "q99",
              "loss_fraction"};
  for (const auto& s : stats) {
    t.rows.push_back({std::to_string(s.src), std::to_string(s.dst),
                      std::to_string(s.count), format_double(s.mean_ms),
                      format_double(s.sd_ms), format_double(s.cv),
                      format_double(s.min_ms), format_double(s.max_ms),
                      format_double(s.q25), format_double(s.q50),
                      format_double(s.q75), format_double(s.q90),
                      format_double(s.q95), format_double(s.q99),
                      format_double(s.loss_fraction)});
  }
  write_csv(path.string(), t);
}

void write_daily(const fs::path& path, const std::vector<DailyStats>& days) {
  CsvTable t;
  t.header = {"day", "links", "mean_rtt_ms", "mean_rtt_hw",
              "median_rtt_ms", "median_rtt_hw", "mean_cv", "mean_cv_hw",
              "mean_loss", "mean_loss_hw"};
  for (const auto& d : days) {
    t.rows.push_back({std::to_string(d.day), std::to_string(d.links),
                      format_double(d.mean_rtt), format_double(d.mean_rtt_hw),
                      format_double(d.median_rtt),
                      format_double(d.median_rtt_hw), format_double(d.mean_cv),
                      format_double(d.mean_cv_hw), format_double(d.mean_loss),
                      format_double(d.mean_loss_hw)});
  }
  write_csv(path.string(), t);
}

void write_cdf(const fs::path& path, std::vector<double> values) {
  CsvTable t;
  t.header = {"value", "cum_fraction"};
  for (const auto& p : cdf_points(std::move(values)))
    t.rows.push_back({format_double(p.value), format_double(p.fraction)});
  write_csv(path.string(), t);
}

void write_asymmetry(const fs::path& path, const MeshAnalysis& mesh) {
  CsvTable t;
  t.header = {"scope", "a", "b", "count", "mean", "sd", "cv",
              "q25", "median", "q75", "q90", "q95", "q99",
              "trimmed_mean", "excluded_nonpositive"};
  auto row_of = [](const std::string& scope, const std::string& a,
                   const std::string& b, const AsymmetrySummary& s,
                   std::size_t excluded) {
    return std::vector<std::string>{
        scope, a, b, std::to_string(s.count), format_double(s.mean),
        format_double(s.sd), format_double(s.cv), format_double(s.q25),
        format_double(s.median), format_double(s.q75), format_double(s.q90),
        format_double(s.q95), format_double(s.q99),
        format_double(s.trimmed_mean), std::to_string(excluded)};
  };

  std::vector<double> pooled;
  std::size_t pooled_excluded = 0;
  for (const auto& pair : mesh.pairs) {
    pooled.insert(pooled.end(), pair.values.begin(), pair.values.end());
    pooled_excluded += pair.excluded_nonpositive;
  }
  if (!pooled.empty())
    t.rows.push_back(row_of("global", "", "", asymmetry_summary(pooled),
                            pooled_excluded));
  for (const auto& pair : mesh.pairs) {
    if (pair.values.empty()) continue;
    t.rows.push_back(row_of("pair", std::to_string(pair.a),
                            std::to_string(pair.b),
                            asymmetry_summary(pair.values),
                            pair.excluded_nonpositive));
  }
  write_csv(path.string(), t);
}

void run_analyze(const AnalyzeArgs& args) {
  Roster roster = load_roster(args.roster_path);
  auto logs = load_mesh_logs(args.logs_dir, roster.size());
  MeshAnalysis mesh = analyze_mesh(logs, roster.size());

  if (args.trim_q < 1.0) {
    // Exploratory output only: drops the upper tail per link and recomputes.
    std::vector<LinkStats> trimmed;
    for (const auto& link : mesh.links) {
      if (link.rtt.empty()) continue;
      std::vector<double> samples;
      for (const auto& [wall, v] : link.rtt) samples.push_back(v);
      double cut = quantile(samples, args.trim_q);
      std::erase_if(samples, [&](double v) { return v > cut; });
      LinkStats st = descriptive_stats(std::move(samples));
      st.src = link.src;
      st.dst = link.dst;
      trimmed.push_back(st);
    }
    for (auto& st : trimmed) {
      for (const auto& full : mesh.stats)
        if (full.src == st.src && full.dst == st.dst)
          st.loss_fraction = full.loss_fraction;
    }
    mesh.stats = std::move(trimmed);
  }

  fs::path out(args.out_dir);
  fs::create_directories(out);
  write_link_stats(out / "link_stats.csv", mesh.stats);
  write_daily(out / "daily.csv", daily_aggregate(mesh.links));

  auto metric = [&](auto getter) {
    std::vector<double> vs;
    for (const auto& s : mesh.stats) vs.push_back(getter(s));
    return vs;
  };
  if (!mesh.stats.empty()) {
    write_cdf(out / "cdf_mean.csv",
              metric([](const LinkStats& s) { return s.mean_ms; }));
    write_cdf(out / "cdf_q99.csv",
              metric([](const LinkStats& s) { return s.q99; }));
    write_cdf(out / "cdf_cv.csv",
              metric([](const LinkStats& s) { return s.cv; }));
    write_cdf(out / "cdf_loss.csv",
              metric([](const LinkStats& s) { return s.loss_fraction; }));
    write_cdf(out / "cdf_min.csv",
              metric([](const LinkStats& s) { return s.min_ms; }));
    write_cdf(out / "cdf_max.csv",
              metric([](const LinkStats& s) { return s.max_ms; }));
  }
  std::vector<double> pair_asym;
  for (const auto& pair : mesh.pairs)
    if (!pair.values.empty()) pair_asym.push_back(mean_of(pair.values));
  if (!pair_asym.empty())
    write_cdf(out / "cdf_asymmetry.csv", std::move(pair_asym));
  write_asymmetry(out / "asymmetry.csv", mesh);

  if (!args.rtt_out.empty()) {
    CsvTable t;
    t.header = {"src", "dst", "wall_ms", "rtt_ms"};
    for (const auto& link : mesh.links)
      for (const auto& [wall, v] : link.rtt)
        t.rows.push_back({std::to_string(link.src), std::to_string(link.dst),
                          std::to_string(wall), format_double(v)});
    write_csv(args.rtt_out, t);
  }
}

}  // namespace

void setup_analyze(CLI::App& app) {
  auto args = std::make_shared<AnalyzeArgs>();
  CLI::App* cmd = app.add_subcommand(
      "analyze", "Derive RTT, one-way delay, loss and asymmetry tables");
  cmd->add_option("--logs", args->logs_dir,
                  "Directory holding <node_id>/<segment>.twplog")
      ->required();
  cmd->add_option("--roster", args->roster_path, "Roster file")->required();
  cmd->add_option("--out", args->out_dir, "Output directory")->required();
  cmd->add_option("--trim-q", args->trim_q,
                  "Exploratory: drop per-link RTTs above this quantile")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--rtt-out", args->rtt_out,
                  "Also dump every RTT sample to this CSV (fit input)");
  cmd->callback([args]() { run_analyze(*args); });
}

}  // namespace twp::cli
