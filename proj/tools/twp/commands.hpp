#pragma once

#include <CLI11.hpp>

namespace twp::cli {

void setup_coord(CLI::App& app);
void setup_peer(CLI::App& app);
void setup_sim(CLI::App& app);
void setup_analyze(CLI::App& app);
void setup_fit(CLI::App& app);
void setup_synth(CLI::App& app);
void setup_cluster(CLI::App& app);
void setup_report(CLI::App& app);

}  // namespace twp::cli
