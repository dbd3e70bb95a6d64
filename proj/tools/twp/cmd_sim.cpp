#include <filesystem>
#include <memory>

#include "commands.hpp"
#include "io_util.hpp"
#include "twp/simnet.hpp"

namespace twp::cli {

namespace fs = std::filesystem;

namespace {

struct SimArgs {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  bool seed_given = false;
};

void run_sim(const SimArgs& args) {
  require_seed_in_ci(args.seed_given, "sim");

  SimConfig config;
  try {
    config = SimConfig::from_file(args.config_path);
  } catch (const std::invalid_argument& e) {
    throw DataError(args.config_path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw DataError(args.config_path + ": " + e.what());
  }
  if (args.seed_given) config.seed = args.seed;

  SimResult result = run_scenario(config);

  fs::create_directories(args.out_dir);
  write_file_text(fs::path(args.out_dir) / "roster.txt",
                  result.roster.to_file_text());
  for (std::size_t node = 0; node < config.n_nodes; ++node) {
    fs::path dir = fs::path(args.out_dir) / std::to_string(node);
    fs::create_directories(dir);
    for (const auto& seg : result.segments[node]) {
      std::vector<uint8_t> bytes;
      bytes.reserve(seg.records.size() * kRecordSize);
      for (const auto& rec : seg.records) append_record(bytes, rec);
      write_file_bytes(dir / (std::to_string(seg.index) + ".twplog"), bytes);
    }
  }
}

}  // namespace

void setup_sim(CLI::App& app) {
  auto args = std::make_shared<SimArgs>();
  CLI::App* sim = app.add_subcommand(
      "sim", "Run a deterministic simulated measurement mesh");
  sim->add_option("--config", args->config_path, "Scenario config file")
      ->required();
  sim->add_option("--out-dir", args->out_dir,
                  "Output directory for per-node logs and the roster")
      ->required();
  sim->add_option("--seed", args->seed,
                  "RNG seed; overrides the config file's seed");
  sim->callback([args, sim]() {
    args->seed_given = sim->count("--seed") > 0;
    run_sim(*args);
  });
}

}  // namespace twp::cli
