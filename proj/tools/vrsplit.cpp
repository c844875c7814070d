// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "vrsplit/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-user tiled 360 VR streaming planner over a rate-splitting downlink"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", case_filter = "all", scheme_filter = "all";
  std::uint64_t seed = 0;
  int realizations = 0;
  double scale_ladder = 0;

  auto* run = app.add_subcommand("run", "Run the experiment matrix from a config file");
  run->add_option("--config", config_path, "JSON config path")->required();
  run->add_option("--case", case_filter, "pp|ip|up|all");
  run->add_option("--scheme", scheme_filter, "proposed|sdma-opt|sdma-zf|ofdma-mrt|all");
  run->add_option("--seed", seed, "override base seed");
  run->add_option("--realizations", realizations, "override realization count");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--scale-ladder", scale_ladder, "divide ladder rates (and delta) by this factor");

  std::string in_dir, axis, plot_out;
  auto* plot = app.add_subcommand("plot-data", "Aggregate results into tidy per-figure CSVs");
  plot->add_option("--in", in_dir, "directory containing results.csv")->required();
  plot->add_option("--axis", axis, "M|L|eps|P")->required();
  plot->add_option("--out", plot_out, "output file (default <in>/plot_<axis>.csv)");

  std::string chan_out;
  int chan_antennas = 0;
  auto* dump = app.add_subcommand("dump-channel", "Sample and dump a channel realization");
  dump->add_option("--config", config_path, "JSON config path")->required();
  dump->add_option("--seed", seed, "realization seed")->required();
  dump->add_option("--antennas", chan_antennas, "override antenna count");
  dump->add_option("--out", chan_out, "output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      vrsplit::ExperimentConfig cfg = vrsplit::load_config(config_path);
      if (case_filter != "all") cfg.cases = {vrsplit::fov_case_from_string(case_filter)};
      if (scheme_filter != "all") cfg.schemes = {vrsplit::scheme_from_string(scheme_filter)};
      if (seed != 0) cfg.seed_base = seed;
      if (realizations > 0) cfg.realizations = realizations;
      if (scale_ladder > 0) cfg.ladder_scale = scale_ladder;
      vrsplit::ExperimentRunner runner(cfg, out_dir);
      const auto rows = runner.run();
      int failures = 0;
      for (const auto& r : rows)
        if (r.status != "ok") ++failures;
      std::cout << rows.size() << " rows -> " << out_dir << "/results.csv";
      if (failures > 0) std::cout << " (" << failures << " failed solves)";
      std::cout << "\n";
      return runner.all_ok() ? 0 : 1;
    }
    if (plot->parsed()) {
      const auto rows = vrsplit::read_results_csv(in_dir + "/results.csv");
      if (plot_out.empty()) plot_out = in_dir + "/plot_" + axis + ".csv";
      std::ofstream out(plot_out);
      if (!out) throw std::runtime_error("cannot open " + plot_out);
      vrsplit::emit_plot_data(rows, axis, out);
      std::cout << plot_out << "\n";
      return 0;
    }
    if (dump->parsed()) {
      vrsplit::ExperimentConfig cfg = vrsplit::load_config(config_path);
      const int M = chan_antennas > 0 ? chan_antennas : cfg.antennas.front();
      vrsplit::SystemConfig radio(
          M, static_cast<int>(cfg.user_ids.size()), cfg.subcarriers, cfg.bandwidth_hz,
          cfg.power_w.front(), cfg.noise_w,
          cfg.pathloss.empty() ? std::vector<double>(cfg.user_ids.size(), 1.0)
                               : cfg.pathloss);
      const auto state = vrsplit::sample_channels(radio, seed);
      std::ofstream out(chan_out);
      if (!out) throw std::runtime_error("cannot open " + chan_out);
      vrsplit::dump_channel(state, radio, out);
      std::cout << chan_out << "\n";
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
