// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo experiment driver: JSON configuration, per-drop runs of every
// scheme along one sweep axis, CSV output and its summary.
//
// CSV columns, in order:
//   drop_id,scheme,P_dBm,Gamma_dB,radar_sinr_dB,min_comm_sinr_dB,outer_iters,converged,wall_ms,seed
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cfisac/optimizer.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

enum class Scheme { Proposed, SpatialBf, NoRbf, RadarOnly };
enum class SweepAxis { Power, CommSinr };

const char* to_string(Scheme scheme);
const char* to_string(SweepAxis axis);
Scheme parse_scheme(const std::string& name);
SweepAxis parse_sweep_axis(const std::string& name);

struct ExperimentConfig {
  SystemConfig base = desk_preset();
  SweepAxis axis = SweepAxis::Power;
  std::vector<double> axis_values{35.0};  // dBm for power, dB for comm_sinr
  std::vector<Scheme> schemes{Scheme::Proposed, Scheme::SpatialBf, Scheme::NoRbf,
                              Scheme::RadarOnly};
  int drops = 20;
  std::uint64_t seed = 1;
  std::string output_path;
  // Off by default so that identical configs give byte-identical CSV files.
  bool record_wall_time = false;

  void validate() const;
  // Base config with the swept quantity set to axis_values[i].
  SystemConfig system_at(std::size_t i) const;
};

// JSON keys mirror the field names above; `base` is either a preset name
// ("desk", "full") or an object (optionally with "preset") of SystemConfig
// keys. Unknown keys are rejected with std::invalid_argument.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

struct ResultRow {
  int drop_id = 0;
  Scheme scheme = Scheme::Proposed;
  double P_dBm = 0.0;
  double Gamma_dB = 0.0;
  double radar_sinr_dB = 0.0;
  double min_comm_sinr_dB = 0.0;
  int outer_iters = 0;
  // True when the run ended with a feasible design (converged, or stopped at
  // the iteration cap after ascending); infeasible and aborted runs are false.
  bool converged = false;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  // Not written to CSV.
  RunStatus status = RunStatus::SolverFailure;
  int axis_index = 0;
};

std::uint64_t drop_seed(std::uint64_t base_seed, int drop_id);

// Draws the scenario and symbol block of one drop.
SensingModel make_drop(const SystemConfig& config, std::uint64_t seed);

// Runs every axis value and scheme of one drop.
std::vector<ResultRow> run_drop(const ExperimentConfig& config, int drop_id);

// Runs all drops (in parallel up to CFISAC_THREADS workers), sorts rows by
// (drop_id, axis value, scheme) and writes the CSV atomically when
// output_path is set. `progress`, if given, is called once per finished drop.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      const std::function<void(int)>& progress = {});

int worker_threads();

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);
// Write to a temporary file in the same directory, then rename.
void write_csv_file(const std::vector<ResultRow>& rows, const std::string& path);

// Parsed CSV row; throws std::runtime_error naming the line on bad input.
std::vector<ResultRow> read_csv(std::istream& in);
std::vector<ResultRow> read_csv_file(const std::string& path);

struct SummaryRow {
  std::string scheme;
  double P_dBm = 0.0;
  double Gamma_dB = 0.0;
  int count = 0;  // converged rows averaged
  int total = 0;
  double mean_radar_sinr_dB = 0.0;
  double std_radar_sinr_dB = 0.0;
  double mean_min_comm_sinr_dB = 0.0;
};

// dB-domain mean and sample standard deviation over converged rows, grouped
// by (scheme, P_dBm, Gamma_dB) in order of first appearance.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
void print_summary(const std::vector<SummaryRow>& summary, std::ostream& out);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ValidationOptions {
  std::uint64_t seed = 7;
  // Test hook: build the sensing model with target delay of AP 0 off by one.
  bool inject_delay_fault = false;
  int monte_carlo_trials = 20000;
};

// Module-level oracles on one small drop.
std::vector<ValidationCheck> validate(const SystemConfig& config, const ValidationOptions& options = {});

}  // namespace cfisac
