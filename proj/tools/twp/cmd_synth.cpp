#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "io_util.hpp"
#include "twp/csv.hpp"
#include "twp/distfit.hpp"

namespace twp::cli {

namespace {

struct SynthArgs {
  std::string family = "gamma";
  double shape = 0.0;
  double scale = 0.0;
  double location = 0.0;
  double threshold = 0.0;
  std::size_t n = 0;
  uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
};

void run_synth(const SynthArgs& args) {
  require_seed_in_ci(args.seed_given, "synth");
  auto family = family_from_string(args.family);
  if (!family) throw UsageError("unknown family '" + args.family + "'");

  DistParams p;
  p.family = *family;
  p.shape = args.shape;
  p.scale = args.scale;
  p.location = args.location;
  p.threshold = args.threshold;
  try {
    p.validate();
  } catch (const DistError& e) {
    throw UsageError(e.what());
  }

  Rng rng(args.seed);
  std::ostringstream out;
  for (std::size_t i = 0; i < args.n; ++i)
    out << format_double(sample_one(p, rng)) << '\n';
  if (args.out.empty())
    std::cout << out.str();
  else
    write_file_text(args.out, out.str());
}

}  // namespace

void setup_synth(CLI::App& app) {
  auto args = std::make_shared<SynthArgs>();
  CLI::App* cmd = app.add_subcommand(
      "synth", "Generate synthetic delays from a fitted family");
  cmd->add_option("--family", args->family, "Distribution family")->required();
  cmd->add_option("--shape", args->shape, "Shape (Gamma/Weibull)");
  cmd->add_option("--scale", args->scale, "Scale")->required();
  cmd->add_option("--location", args->location,
                  "Location (lognormal/loglogistic/normal)");
  cmd->add_option("--threshold", args->threshold,
                  "Threshold (3-parameter families, shifted exponential)");
  cmd->add_option("--n", args->n, "Number of values")->required();
  cmd->add_option("--seed", args->seed, "RNG seed");
  cmd->add_option("--out", args->out, "Output file (default stdout)");
  cmd->callback([args, cmd]() {
    args->seed_given = cmd->count("--seed") > 0;
    run_synth(*args);
  });
}

}  // namespace twp::cli
