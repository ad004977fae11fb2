#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covert_relay/experiments.hpp"

namespace cr = covert_relay;

int main(int argc, char** argv) {
  CLI::App app{"Ergodic secrecy-rate sweeps for covert untrusted-relay transmission"};
  std::string preset;
  std::string config_path;
  std::string scheme;
  std::string willies;
  std::string sweep;
  std::string out_path;
  std::vector<std::string> sets;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  bool timing = false;

  app.add_option("--preset", preset, "Figure preset")->check(CLI::IsMember(cr::preset_names()));
  app.add_option("--config", config_path, "Flat key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--scheme", scheme, "two_hop | two_hop_multi_relay | direct");
  app.add_option("--willies", willies, "single | non_colluding | colluding");
  app.add_option("--trials", trials, "Monte Carlo trials per sweep point");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--sweep", sweep, "var=start:step:stop or var=v1,v2,... (P in dBW, N_s, d_sr, J, W, epsilon)");
  app.add_option("--set", sets, "Extra key=value override, repeatable");
  app.add_option("--out", out_path, "CSV output path (stdout when omitted)");
  app.add_flag("--timing", timing, "Record wall-clock milliseconds per row");
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::string> overrides;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      for (std::string line; std::getline(in, line);) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) overrides.push_back(line);
      }
    }
    if (!scheme.empty()) overrides.push_back("scheme=" + scheme);
    if (!willies.empty()) overrides.push_back("willie_model=" + willies);
    if (app.count("--trials")) overrides.push_back("trials=" + std::to_string(trials));
    if (app.count("--seed")) overrides.push_back("seed=" + std::to_string(seed));
    if (!sweep.empty()) overrides.push_back("sweep=" + sweep);
    if (timing) overrides.push_back("timing=true");
    overrides.insert(overrides.end(), sets.begin(), sets.end());

    std::vector<cr::SweepResult> results;
    if (!preset.empty()) {
      results = cr::run_preset(preset, overrides);
    } else {
      cr::ExperimentConfig c;
      for (const auto& o : overrides) cr::apply_assignment(c, o);
      results = cr::run_sweep(c);
    }
    if (out_path.empty()) {
      cr::write_csv(results, std::cout);
    } else {
      cr::emit_csv(results, out_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
