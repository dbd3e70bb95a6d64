#include <algorithm>
#include <filesystem>
#include <memory>

#include "commands.hpp"
#include "io_util.hpp"
#include "twp/csv.hpp"
#include "twp/distfit.hpp"

namespace twp::cli {

namespace fs = std::filesystem;

namespace {

struct FitArgs {
  std::string input;
  std::string families = "all";
  double subsample_fraction = 1.0;
  uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  std::string plot_data_dir;
};

// Accepts either a CSV with an `rtt_ms` column or one bare value per line
// (the synth output).
std::vector<double> load_values(const std::string& path) {
  std::string text = read_file_text(path);
  std::vector<double> values;
  std::istringstream in(text);
  std::string first_line;
  if (!std::getline(in, first_line)) throw DataError(path + ": empty input");

  char* end = nullptr;
  double v = std::strtod(first_line.c_str(), &end);
  const char* tail_end = first_line.c_str() + first_line.size();
  bool bare = end != first_line.c_str() &&
              std::all_of(static_cast<const char*>(end), tail_end,
                          [](char c) {
                            return std::isspace(static_cast<unsigned char>(c));
                          });
  if (bare) {
    values.push_back(v);
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        values.push_back(std::stod(line));
      } catch (const std::exception&) {
        throw DataError(path + ": bad value at line " +
                        std::to_string(line_no));
      }
    }
    return values;
  }

  CsvTable t = parse_csv(text);
  std::size_t col;
  try {
    col = t.column("rtt_ms");
  } catch (const CsvError&) {
    col = 0;
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    try {
      values.push_back(std::stod(t.rows[r][col]));
    } catch (const std::exception&) {
      throw DataError(path + ": bad value in data row " + std::to_string(r + 1));
    }
  }
  return values;
}

std::vector<DistFamily> parse_families(const std::string& spec) {
  if (spec == "all") return all_families();
  std::vector<DistFamily> out;
  std::istringstream in(spec);
  std::string name;
  while (std::getline(in, name, ',')) {
    auto f = family_from_string(name);
    if (!f) throw UsageError("unknown family '" + name + "'");
    out.push_back(*f);
  }
  if (out.empty()) throw UsageError("no families given");
  return out;
}

void write_fit_csv(const std::string& path, const RankResult& result,
                   std::size_t n_used) {
  CsvTable t;
  t.header = {"rank", "family", "location", "shape", "scale", "threshold",
              "ad_stat", "n", "status"};
  std::size_t rank = 1;
  for (const auto& r : result.ranked) {
    t.rows.push_back({std::to_string(rank++), family_name(r.params.family),
                      format_double(r.params.location),
                      format_double(r.params.shape),
                      format_double(r.params.scale),
                      format_double(r.params.threshold),
                      format_double(r.ad_stat), std::to_string(r.n), "ok"});
  }
  for (const auto& s : result.skipped) {
    std::string reason = s.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    t.rows.push_back({"", family_name(s.family), "", "", "", "", "",
                      std::to_string(n_used), "skipped: " + reason});
  }
  write_csv(path, t);
}

void write_plot_data(const std::string& dir, const RankResult& result,
                     std::vector<double> data) {
  std::sort(data.begin(), data.end());
  fs::create_directories(dir);
  std::size_t n = data.size();
  std::size_t points = std::min<std::size_t>(n, 1000);
  for (const auto& r : result.ranked) {
    CsvTable t;
    t.header = {"p", "empirical_q", "model_q"};
    for (std::size_t k = 0; k < points; ++k) {
      std::size_t i = k * (n - 1) / (points > 1 ? points - 1 : 1);
      double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      t.rows.push_back({format_double(p), format_double(data[i]),
                        format_double(quantile_of(r.params, p))});
    }
    std::string name = family_name(r.params.family);
    std::replace(name.begin(), name.end(), ' ', '_');
    write_csv((fs::path(dir) / ("plot_" + name + ".csv")).string(), t);
  }
}

void run_fit(const FitArgs& args) {
  if (args.subsample_fraction < 1.0) require_seed_in_ci(args.seed_given, "fit");
  auto families = parse_families(args.families);
  std::vector<double> values = load_values(args.input);
  if (args.subsample_fraction < 1.0) {
    Rng rng(args.seed);
    try {
      values = subsample(values, args.subsample_fraction, rng);
    } catch (const DistError& e) {
      throw UsageError(e.what());
    }
  }
  RankResult result = rank_fits(values, families);
  write_fit_csv(args.out, result, values.size());
  if (!args.plot_data_dir.empty())
    write_plot_data(args.plot_data_dir, result, std::move(values));
}

}  // namespace

void setup_fit(CLI::App& app) {
  auto args = std::make_shared<FitArgs>();
  CLI::App* cmd = app.add_subcommand(
      "fit", "Fit delay distribution families and rank by Anderson-Darling");
  cmd->add_option("--input", args->input,
                  "CSV with an rtt_ms column, or one value per line")
      ->required();
  cmd->add_option("--families", args->families,
                  "'all' or comma-separated family names");
  cmd->add_option("--subsample", args->subsample_fraction,
                  "Random subsample fraction in (0, 1]")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", args->seed, "RNG seed for the subsample");
  cmd->add_option("--out", args->out, "Ranked fit table")->required();
  cmd->add_option("--plot-data", args->plot_data_dir,
                  "Directory for probability-plot (empirical, model) pairs");
  cmd->callback([args, cmd]() {
    args->seed_given = cmd->count("--seed") > 0;
    run_fit(*args);
  });
}

}  // namespace twp::cli
