// SPDX-License-Identifier: Apache-2.0
//
// cfisac run --config exp.json [--out results.csv]
// cfisac sweep-power | sweep-gamma [--preset desk|full] [--drops N] [--seed S] --out results.csv
// cfisac validate [--preset desk|full] [--seed S] [--inject-delay-fault]
// cfisac summarize --csv results.csv
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cfisac/harness.hpp"

namespace {

using namespace cfisac;

SystemConfig preset(const std::string& name) {
  if (name == "desk") return desk_preset();
  if (name == "full") return full_preset();
  throw std::invalid_argument("unknown preset \"" + name + "\"");
}

int run_and_report(ExperimentConfig config) {
  const int total = config.drops;
  const auto rows = run_experiment(config, [total](int d) {
    std::cerr << "drop " << d + 1 << "/" << total << " done\n";
  });
  if (config.output_path.empty()) {
    write_csv(rows, std::cout);
  } else {
    std::cerr << "wrote " << rows.size() << " rows to " << config.output_path << "\n";
  }
  print_summary(summarize(rows), std::cerr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free ISAC transmit/receive beamforming experiments"};
  app.require_subcommand(1);

  std::string config_path, out_path, preset_name = "desk", csv_path;
  int drops = 20;
  std::uint64_t seed = 1;
  bool inject = false;

  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON file");
  run->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "CSV output (overrides output_path)");

  auto add_sweep = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--preset", preset_name, "desk or full")->check(CLI::IsMember({"desk", "full"}));
    s->add_option("--drops", drops, "Monte-Carlo drops")->check(CLI::PositiveNumber);
    s->add_option("--seed", seed, "Experiment seed");
    s->add_option("--out", out_path, "CSV output")->required();
    return s;
  };
  auto* sweep_power = add_sweep("sweep-power", "Radar SINR against the per-AP power budget");
  auto* sweep_gamma = add_sweep("sweep-gamma", "Radar SINR against the communication SINR target");

  auto* val = app.add_subcommand("validate", "Module-level oracles on one drop");
  val->add_option("--preset", preset_name, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  val->add_option("--seed", seed, "Drop seed");
  val->add_flag("--inject-delay-fault", inject, "Offset one target delay in the model by a sample");

  auto* summ = app.add_subcommand("summarize", "Per-scheme means of a result CSV");
  summ->add_option("--csv", csv_path, "Result CSV")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig c = load_experiment_config(config_path);
      if (!out_path.empty()) c.output_path = out_path;
      return run_and_report(c);
    }
    if (*sweep_power || *sweep_gamma) {
      ExperimentConfig c;
      c.base = preset(preset_name);
      c.drops = drops;
      c.seed = seed;
      c.output_path = out_path;
      const bool desk = preset_name == "desk";
      if (*sweep_power) {
        c.axis = SweepAxis::Power;
        c.axis_values = {25, 30, 35, 40};
        if (desk) c.base.set_uniform_sinr_db(-10.0);
      } else {
        c.axis = SweepAxis::CommSinr;
        c.axis_values = desk ? std::vector<double>{-10, -5, 0} : std::vector<double>{6, 8, 10, 12, 14};
      }
      return run_and_report(c);
    }
    if (*val) {
      ValidationOptions opts;
      opts.seed = seed;
      opts.inject_delay_fault = inject;
      bool all = true;
      for (const ValidationCheck& c : validate(preset(preset_name), opts)) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " measured=" << c.measured
                  << " threshold=" << c.threshold << " (" << c.detail << ")\n";
        all = all && c.passed;
      }
      return all ? 0 : 1;
    }
    if (*summ) {
      print_summary(summarize(read_csv_file(csv_path)), std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
