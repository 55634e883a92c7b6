// SPDX-License-Identifier: Apache-2.0
#include "cfisac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace cfisac {

using nlohmann::json;

namespace {

constexpr double kSinrTol = 1e-6;
constexpr double kPowerTol = 1e-8;

const char* const kCsvHeader =
    "drop_id,scheme,P_dBm,Gamma_dB,radar_sinr_dB,min_comm_sinr_dB,outer_iters,converged,wall_ms,"
    "seed";

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; })) {
      throw std::invalid_argument(where + ": unknown key \"" + it.key() + "\"");
    }
  }
}

SystemConfig preset_by_name(const std::string& name) {
  if (name == "desk") return desk_preset();
  if (name == "full") return full_preset();
  throw std::invalid_argument("unknown preset \"" + name + "\" (expected desk or full)");
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

SystemConfig parse_system_config(const json& j) {
  if (j.is_string()) return preset_by_name(j.get<std::string>());
  if (!j.is_object()) throw std::invalid_argument("base: expected a preset name or an object");
  reject_unknown(j,
                 {"preset", "B", "K", "Nt", "Nr", "L", "fc", "bandwidth", "fs", "sigma2_c",
                  "sigma2_r", "rician_K_dB", "pl_exp_sense", "pl_exp_comm", "P_b", "P_dBm",
                  "Gamma_k", "Gamma_dB", "rcs_var", "target_speed", "sensing_ap_offset",
                  "ring_inner_radius", "ring_outer_radius", "user_radius", "clutter_extra_loss_dB"},
                 "base");
  SystemConfig c = j.contains("preset") ? preset_by_name(j.at("preset").get<std::string>())
                                        : desk_preset();
  read_if(j, "B", c.num_tx_aps);
  read_if(j, "K", c.num_users);
  read_if(j, "Nt", c.tx_antennas);
  read_if(j, "Nr", c.rx_antennas);
  read_if(j, "L", c.block_length);
  read_if(j, "fc", c.carrier_hz);
  read_if(j, "bandwidth", c.bandwidth_hz);
  read_if(j, "fs", c.sampling_hz);
  read_if(j, "sigma2_c", c.comm_noise_w);
  read_if(j, "sigma2_r", c.radar_noise_w);
  read_if(j, "rician_K_dB", c.rician_k_db);
  read_if(j, "pl_exp_sense", c.sensing_pl_exponent);
  read_if(j, "pl_exp_comm", c.comm_pl_exponent);
  read_if(j, "rcs_var", c.rcs_variance);
  read_if(j, "target_speed", c.target_speed);
  read_if(j, "sensing_ap_offset", c.sensing_ap_offset_m);
  read_if(j, "ring_inner_radius", c.ring_inner_m);
  read_if(j, "ring_outer_radius", c.ring_outer_m);
  read_if(j, "user_radius", c.user_radius_m);
  read_if(j, "clutter_extra_loss_dB", c.clutter_extra_loss_db);

  // Budgets and targets follow the (possibly changed) counts unless given.
  const double p_dbm = c.power_budget_w.empty() ? 35.0 : watt_to_dbm(c.power_budget_w.front());
  const double g_db = c.sinr_target.empty() ? 0.0 : to_db(c.sinr_target.front());
  if (j.contains("P_b") && j.contains("P_dBm")) {
    throw std::invalid_argument("base: give either P_b or P_dBm, not both");
  }
  if (j.contains("Gamma_k") && j.contains("Gamma_dB")) {
    throw std::invalid_argument("base: give either Gamma_k or Gamma_dB, not both");
  }
  if (j.contains("P_b")) {
    c.power_budget_w = j.at("P_b").get<std::vector<double>>();
  } else {
    c.set_uniform_power_dbm(j.contains("P_dBm") ? j.at("P_dBm").get<double>() : p_dbm);
  }
  if (j.contains("Gamma_k")) {
    c.sinr_target = j.at("Gamma_k").get<std::vector<double>>();
  } else {
    c.set_uniform_sinr_db(j.contains("Gamma_dB") ? j.at("Gamma_dB").get<double>() : g_db);
  }
  c.validate();
  return c;
}

std::string format_fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  std::string s = os.str();
  if (s == "-" + std::string("0.") + std::string(digits, '0')) s.erase(0, 1);
  return s;
}

double parse_double(const std::string& s, int line, const char* column) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("line " + std::to_string(line) + ": bad " + column + " value \"" + s +
                           "\"");
}

long long parse_integer(const std::string& s, int line, const char* column) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("line " + std::to_string(line) + ": bad " + column + " value \"" + s +
                           "\"");
}

}  // namespace

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Proposed: return "proposed";
    case Scheme::SpatialBf: return "spatial_bf";
    case Scheme::NoRbf: return "no_rbf";
    case Scheme::RadarOnly: return "radar_only";
  }
  return "unknown";
}

const char* to_string(SweepAxis axis) {
  return axis == SweepAxis::Power ? "power" : "comm_sinr";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::Proposed, Scheme::SpatialBf, Scheme::NoRbf, Scheme::RadarOnly}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown scheme \"" + name + "\"");
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "power") return SweepAxis::Power;
  if (name == "comm_sinr") return SweepAxis::CommSinr;
  throw std::invalid_argument("unknown sweep_axis \"" + name + "\" (expected power or comm_sinr)");
}

void ExperimentConfig::validate() const {
  base.validate();
  if (drops < 1) throw std::invalid_argument("ExperimentConfig: drops must be >= 1");
  if (axis_values.empty()) throw std::invalid_argument("ExperimentConfig: axis_values is empty");
  for (std::size_t i = 1; i < axis_values.size(); ++i) {
    if (!(axis_values[i] > axis_values[i - 1])) {
      throw std::invalid_argument("ExperimentConfig: axis_values must be strictly increasing");
    }
  }
  if (schemes.empty()) throw std::invalid_argument("ExperimentConfig: schemes is empty");
}

SystemConfig ExperimentConfig::system_at(std::size_t i) const {
  SystemConfig c = base;
  if (axis == SweepAxis::Power) {
    c.set_uniform_power_dbm(axis_values.at(i));
  } else {
    c.set_uniform_sinr_db(axis_values.at(i));
  }
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown(j,
                 {"base", "sweep_axis", "axis_values", "schemes", "drops", "seed", "output_path",
                  "record_wall_time"},
                 "config");
  ExperimentConfig c;
  try {
    if (j.contains("base")) c.base = parse_system_config(j.at("base"));
    if (j.contains("sweep_axis")) c.axis = parse_sweep_axis(j.at("sweep_axis").get<std::string>());
    read_if(j, "axis_values", c.axis_values);
    if (j.contains("schemes")) {
      c.schemes.clear();
      for (const auto& s : j.at("schemes")) c.schemes.push_back(parse_scheme(s.get<std::string>()));
    }
    read_if(j, "drops", c.drops);
    read_if(j, "seed", c.seed);
    read_if(j, "output_path", c.output_path);
    read_if(j, "record_wall_time", c.record_wall_time);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_experiment_config(ss.str());
}

std::uint64_t drop_seed(std::uint64_t base_seed, int drop_id) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(drop_id));
}

SensingModel make_drop(const SystemConfig& config, std::uint64_t seed) {
  const Scenario sc = generate_scenario(config, derive_seed(seed, 0));
  Rng rng(derive_seed(seed, 1));
  const SymbolBlock sb = draw_symbols(rng, config.num_users, config.tx_antennas,
                                      config.block_length,
                                      observation_length(sc, config.block_length));
  return build_sensing_model(sc, sb);
}

std::vector<ResultRow> run_drop(const ExperimentConfig& config, int drop_id) {
  using Clock = std::chrono::steady_clock;
  const std::uint64_t seed = drop_seed(config.seed, drop_id);
  // Geometry, channels and symbols depend on neither P nor Gamma, so every
  // axis value of a drop sees the same realization.
  const SensingModel model = make_drop(config.system_at(0), seed);
  std::vector<ResultRow> rows;
  for (std::size_t a = 0; a < config.axis_values.size(); ++a) {
    const SystemConfig sys = config.system_at(a);
    const auto t0 = Clock::now();
    const InitResult init = initialize_beamformers(model.scenario, sys);
    const double init_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    for (Scheme scheme : config.schemes) {
      const auto start = Clock::now();
      RunResult r;
      switch (scheme) {
        case Scheme::Proposed: r = run_proposed(model, sys, init); break;
        case Scheme::SpatialBf: r = baseline_spatial_bf(model, sys, init); break;
        case Scheme::NoRbf: r = baseline_no_rbf(model, sys, init); break;
        case Scheme::RadarOnly: r = baseline_radar_only(model, sys, init); break;
      }
      ResultRow row;
      row.drop_id = drop_id;
      row.scheme = scheme;
      row.axis_index = static_cast<int>(a);
      row.P_dBm = watt_to_dbm(*std::max_element(sys.power_budget_w.begin(), sys.power_budget_w.end()));
      row.Gamma_dB = to_db(*std::max_element(sys.sinr_target.begin(), sys.sinr_target.end()));
      row.outer_iters = static_cast<int>(r.trace.iterations.size());
      row.status = r.status;
      row.seed = seed;
      const bool ran = r.status == RunStatus::Converged || r.status == RunStatus::MaxIterations;
      row.converged = ran;
      if (ran) {
        // Re-check feasibility at emission.
        bool ok = true;
        for (int b = 0; b < r.W.num_tx_aps(); ++b) {
          ok = ok && r.W.power(b) <= sys.power_budget_w[b] * (1.0 + kPowerTol);
        }
        if (scheme != Scheme::RadarOnly) {
          for (int k = 0; k < model.scenario.num_users(); ++k) {
            ok = ok && comm_sinr(r.W, model.scenario, k) >= sys.sinr_target[k] * (1.0 - kSinrTol);
          }
        }
        row.converged = ok;
        row.radar_sinr_dB = to_db(r.radar_sinr);
        row.min_comm_sinr_dB = to_db(r.min_comm_sinr);
      } else {
        row.radar_sinr_dB = std::numeric_limits<double>::quiet_NaN();
        row.min_comm_sinr_dB = std::numeric_limits<double>::quiet_NaN();
      }
      if (config.record_wall_time) {
        row.wall_ms =
            init_ms + std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

int worker_threads() {
  const char* env = std::getenv("CFISAC_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw std::invalid_argument("CFISAC_THREADS must be a positive integer");
  return static_cast<int>(std::min<long>(n, 256));
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      const std::function<void(int)>& progress) {
  config.validate();
  const int workers = std::min(worker_threads(), config.drops);
  std::vector<std::vector<ResultRow>> per_drop(config.drops);
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto work = [&]() {
    for (int d = next++; d < config.drops; d = next++) {
      try {
        per_drop[d] = run_drop(config, d);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(mu);
        progress(d);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ResultRow> rows;
  for (auto& d : per_drop) rows.insert(rows.end(), d.begin(), d.end());
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.drop_id != b.drop_id) return a.drop_id < b.drop_id;
    if (a.axis_index != b.axis_index) return a.axis_index < b.axis_index;
    return static_cast<int>(a.scheme) < static_cast<int>(b.scheme);
  });
  if (!config.output_path.empty()) write_csv_file(rows, config.output_path);
  return rows;
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const ResultRow& r : rows) {
    out << r.drop_id << ',' << to_string(r.scheme) << ',' << format_fixed(r.P_dBm, 4) << ','
        << format_fixed(r.Gamma_dB, 4) << ',' << format_fixed(r.radar_sinr_dB, 6) << ','
        << format_fixed(r.min_comm_sinr_dB, 6) << ',' << r.outer_iters << ','
        << (r.converged ? "true" : "false") << ',' << format_fixed(r.wall_ms, 3) << ',' << r.seed
        << "\n";
  }
}

void write_csv_file(const std::vector<ResultRow>& rows, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    write_csv(rows, f);
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move output into place at " + path + ": " + ec.message());
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line)) throw std::runtime_error("line 1: empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::runtime_error("line 1: unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 10) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected 10 fields, got " +
                               std::to_string(f.size()));
    }
    ResultRow r;
    r.drop_id = static_cast<int>(parse_integer(f[0], lineno, "drop_id"));
    try {
      r.scheme = parse_scheme(f[1]);
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": unknown scheme \"" + f[1] + "\"");
    }
    r.P_dBm = parse_double(f[2], lineno, "P_dBm");
    r.Gamma_dB = parse_double(f[3], lineno, "Gamma_dB");
    r.radar_sinr_dB = parse_double(f[4], lineno, "radar_sinr_dB");
    r.min_comm_sinr_dB = parse_double(f[5], lineno, "min_comm_sinr_dB");
    r.outer_iters = static_cast<int>(parse_integer(f[6], lineno, "outer_iters"));
    if (f[7] != "true" && f[7] != "false") {
      throw std::runtime_error("line " + std::to_string(lineno) + ": converged must be true/false");
    }
    r.converged = f[7] == "true";
    r.wall_ms = parse_double(f[8], lineno, "wall_ms");
    try {
      std::size_t used = 0;
      if (f[9].empty() || f[9][0] == '-') throw std::invalid_argument("sign");
      r.seed = std::stoull(f[9], &used);
      if (used != f[9].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": bad seed value \"" + f[9] + "\"");
    }
    if (r.converged && !std::isfinite(r.radar_sinr_dB)) {
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": converged row needs a finite radar_sinr_dB");
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<ResultRow> read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_csv(f);
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> comm;
  for (const ResultRow& r : rows) {
    const std::string name = to_string(r.scheme);
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
      return s.scheme == name && s.P_dBm == r.P_dBm && s.Gamma_dB == r.Gamma_dB;
    });
    std::size_t idx;
    if (it == out.end()) {
      out.push_back({name, r.P_dBm, r.Gamma_dB});
      values.emplace_back();
      comm.emplace_back();
      idx = out.size() - 1;
    } else {
      idx = static_cast<std::size_t>(it - out.begin());
    }
    ++out[idx].total;
    if (r.converged) {
      values[idx].push_back(r.radar_sinr_dB);
      comm[idx].push_back(r.min_comm_sinr_dB);
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = values[i];
    out[i].count = static_cast<int>(v.size());
    if (v.empty()) {
      out[i].mean_radar_sinr_dB = out[i].std_radar_sinr_dB = out[i].mean_min_comm_sinr_dB =
          std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    out[i].mean_radar_sinr_dB = mean;
    out[i].std_radar_sinr_dB = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    double cm = 0.0;
    for (double x : comm[i]) cm += x;
    out[i].mean_min_comm_sinr_dB = cm / static_cast<double>(comm[i].size());
  }
  return out;
}

void print_summary(const std::vector<SummaryRow>& summary, std::ostream& out) {
  out << "scheme,P_dBm,Gamma_dB,count,total,mean_radar_sinr_dB,std_radar_sinr_dB,"
         "mean_min_comm_sinr_dB\n";
  for (const SummaryRow& s : summary) {
    out << s.scheme << ',' << format_fixed(s.P_dBm, 4) << ',' << format_fixed(s.Gamma_dB, 4) << ','
        << s.count << ',' << s.total << ',' << format_fixed(s.mean_radar_sinr_dB, 6) << ','
        << format_fixed(s.std_radar_sinr_dB, 6) << ',' << format_fixed(s.mean_min_comm_sinr_dB, 6)
        << "\n";
  }
}

}  // namespace cfisac
