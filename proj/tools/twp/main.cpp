#include <exception>
#include <iostream>

#include "commands.hpp"
#include "io_util.hpp"
#include "twp/csv.hpp"
#include "twp/wire.hpp"

int main(int argc, char** argv) {
  CLI::App app{"twp - Three-Way Ping measurement and characterization suite"};
  app.require_subcommand(1);

  twp::cli::setup_coord(app);
  twp::cli::setup_peer(app);
  twp::cli::setup_sim(app);
  twp::cli::setup_analyze(app);
  twp::cli::setup_fit(app);
  twp::cli::setup_synth(app);
  twp::cli::setup_cluster(app);
  twp::cli::setup_report(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? twp::cli::kExitOk : twp::cli::kExitUsage;
  } catch (const twp::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return twp::cli::kExitUsage;
  } catch (const twp::cli::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return twp::cli::kExitData;
  } catch (const twp::CodecError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return twp::cli::kExitData;
  } catch (const twp::CsvError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return twp::cli::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return twp::cli::kExitRuntime;
  }
  return twp::cli::kExitOk;
}
