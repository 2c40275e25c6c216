#include "msrate/cli.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "msrate/certify.h"
#include "msrate/errors.h"
#include "msrate/model.h"
#include "msrate/rnvi.h"
#include "msrate/simulate.h"

namespace msrate::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

unsigned thread_budget() {
  if (const char* env = std::getenv("MSRATE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Writes through a temporary file and renames, so readers never observe a
// partially written output.
void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + tmp.string());
    f << content;
    if (!f) throw ConfigError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) row += ',';
    row += c;
    first = false;
  }
  return row + '\n';
}

std::string fmt4(double v) {
  if (!std::isfinite(v)) return format_number(v);
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// FNV-1a, 64 bit.
std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream s;
  s << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

struct Manifest {
  std::string command;
  json parameters = json::object();
  std::string config_hash;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void write(const fs::path& dir) const {
    json doc;
    doc["command"] = command;
    doc["parameters"] = parameters;
    doc["config_hash"] = config_hash;
    doc["outputs"] = outputs;
    doc["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_atomically(dir / "manifest.json", doc.dump(2) + "\n");
  }
};

struct RnviFlags {
  double tau_start = kDefaultTauStart;
  double tau_end = kDefaultTauEnd;
  int tau_count = kDefaultTauCount;
  double epsilon = kDefaultEpsilon;
  int max_inner_iters = kDefaultMaxInnerIters;

  void add_to(CLI::App& app) {
    app.add_option("--tau-start", tau_start, "First (largest) regularization parameter")
        ->capture_default_str();
    app.add_option("--tau-end", tau_end, "Last (smallest) regularization parameter")
        ->capture_default_str();
    app.add_option("--tau-count", tau_count, "Number of geometric grid points")
        ->capture_default_str();
    app.add_option("--epsilon", epsilon, "Frobenius residual tolerance")->capture_default_str();
    app.add_option("--max-inner-iters", max_inner_iters, "Iteration cap per stage")
        ->capture_default_str();
  }

  RnviConfig config() const {
    RnviConfig cfg;
    cfg.tau_grid = default_tau_grid(tau_start, tau_end, tau_count);
    cfg.epsilon = epsilon;
    cfg.max_inner_iters = max_inner_iters;
    return cfg;
  }

  json to_json() const {
    return {{"tau_start", tau_start}, {"tau_end", tau_end},
            {"tau_count", tau_count}, {"epsilon", epsilon},
            {"max_inner_iters", max_inner_iters}};
  }
};

struct Certified {
  ContinuationResult result;
  BoundsCertificate cert;
};

Certified certify_spec(const SystemSpec& spec, const RnviFlags& flags) {
  Certified c;
  c.result = run_continuation(spec, flags.config());
  c.cert = aggregate(spec, c.result);
  return c;
}

std::string per_tau_csv(const SystemSpec& spec, const ContinuationResult& result) {
  std::string out =
      "tau,J_low,J_up,rho_low,rho_up,Delta,lambda_max_Pinv,inner_iters,converged\n";
  const double nan = std::nan("");
  for (const FixedPointRecord& rec : result.records) {
    StageBounds b{nan, nan, nan, nan, nan, nan, false};
    if (rec.converged) b = bounds_at(spec, rec);
    out += csv_row({format_number(rec.tau), format_number(b.J_low), format_number(b.J_up),
                    format_number(std::exp(b.J_low / 2.0)), format_number(std::exp(b.J_up / 2.0)),
                    format_number(b.Delta), format_number(b.lambda_max_Pinv),
                    std::to_string(rec.inner_iters), rec.converged ? "1" : "0"});
  }
  return out;
}

std::string certificate_csv(const BoundsCertificate& c) {
  return "J_low,J_up,rho_low,rho_up,tau_low,tau_up\n" +
         csv_row({format_number(c.J_low_best), format_number(c.J_up_best),
                  format_number(c.rho_low), format_number(c.rho_up), format_number(c.tau_low),
                  format_number(c.tau_up)});
}

std::string gain_csv(const Matrix& K) {
  std::string out;
  for (int i = 0; i < K.rows(); ++i) {
    for (int j = 0; j < K.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_number(K(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string energy_csv(const MomentTrajectory& traj) {
  std::string out = "k,energy\n";
  for (std::size_t k = 0; k < traj.energies.size(); ++k) {
    out += csv_row({std::to_string(k), format_number(traj.energies[k])});
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
}

// ------------------------------------------------------------- commands

struct CheckArgs {
  std::string config;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const SystemSpec spec = load_spec(a.config);
  const ValidationReport r = validate(spec);
  out << "n = " << spec.n() << ", m = " << spec.m() << ", sigma = " << format_number(spec.sigma())
      << "\n"
      << "stacked_rank = " << r.stacked_rank << "\n"
      << "C_A = " << format_number(r.C_A) << "\n"
      << "R0_min_eig = " << format_number(r.R0_min_eig) << "\n"
      << "nondegenerate = " << (r.nondegenerate ? "true" : "false") << "\n";
  return r.nondegenerate ? kExitOk : kExitDomain;
}

struct BoundsArgs {
  std::string config;
  std::string out_dir;
  RnviFlags rnvi;
};

int cmd_bounds(const BoundsArgs& a, std::ostream& out) {
  Manifest manifest;
  manifest.command = "bounds";
  manifest.config_hash = content_hash(read_file(a.config));
  manifest.parameters = {{"config", a.config}, {"out", a.out_dir}, {"rnvi", a.rnvi.to_json()}};

  const SystemSpec spec = load_spec(a.config);
  const Certified c = certify_spec(spec, a.rnvi);

  const fs::path dir = a.out_dir;
  ensure_dir(dir);
  write_atomically(dir / "per_tau.csv", per_tau_csv(spec, c.result));
  write_atomically(dir / "certificate.csv", certificate_csv(c.cert));
  write_atomically(dir / "gain.csv", gain_csv(c.cert.K_up));
  manifest.outputs = {"per_tau.csv", "certificate.csv", "gain.csv"};
  manifest.write(dir);

  const auto converged = std::count_if(c.result.records.begin(), c.result.records.end(),
                                       [](const FixedPointRecord& r) { return r.converged; });
  out << "stages converged: " << converged << "/" << c.result.records.size() << "\n"
      << "J* in [" << fmt4(c.cert.J_low_best) << ", " << fmt4(c.cert.J_up_best) << "]\n"
      << "rho* in [" << fmt4(c.cert.rho_low) << ", " << fmt4(c.cert.rho_up) << "]\n"
      << "tau_low = " << format_number(c.cert.tau_low)
      << ", tau_up = " << format_number(c.cert.tau_up) << "\n";
  return kExitOk;
}

struct SweepArgs {
  std::string config;
  std::string out_dir;
  std::string mode;
  std::vector<double> values;
  std::vector<double> linspace;
  RnviFlags rnvi;
};

std::vector<double> sweep_values(const SweepArgs& a) {
  if (!a.values.empty() && !a.linspace.empty()) {
    throw ConfigError("use either --values or --linspace, not both");
  }
  if (!a.linspace.empty()) {
    if (a.linspace.size() != 3) throw ConfigError("--linspace expects start,end,count");
    const double lo = a.linspace[0];
    const double hi = a.linspace[1];
    const double count_d = a.linspace[2];
    const int count = static_cast<int>(count_d);
    if (count < 1 || count != count_d) throw ConfigError("--linspace count must be a positive integer");
    if (count == 1) return {lo};
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    }
    v.back() = hi;
    return v;
  }
  if (a.values.empty()) throw ConfigError("sweep requires a non-empty value list");
  return a.values;
}

struct SweepRow {
  double value = 0;
  double rho_low = std::nan("");
  double rho_up = std::nan("");
  double J_low = std::nan("");
  double J_up = std::nan("");
  std::string status = "ok";
  std::string per_tau_file;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  Manifest manifest;
  manifest.command = "sweep";
  manifest.config_hash = content_hash(read_file(a.config));

  const SystemSpec base = load_spec(a.config);
  if (a.mode != "sigma" && a.mode != "theta") throw ConfigError("--mode must be sigma or theta");
  const std::vector<double> values = sweep_values(a);
  const RnviConfig check_cfg = a.rnvi.config();  // surface grid errors before any work
  check_cfg.validate(base.n());
  const unsigned threads = thread_budget();
  manifest.parameters = {{"config", a.config}, {"out", a.out_dir},  {"mode", a.mode},
                         {"values", values},   {"threads", threads}, {"rnvi", a.rnvi.to_json()}};

  const fs::path dir = a.out_dir;
  ensure_dir(dir);

  std::vector<SweepRow> rows(values.size());
  auto solve_one = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.value = values[i];
    std::ostringstream name;
    name << "per_tau_" << std::setw(3) << std::setfill('0') << i << ".csv";
    try {
      const SystemSpec spec =
          a.mode == "sigma" ? with_sigma(base, row.value) : scale_A(base, row.value);
      const Certified c = certify_spec(spec, a.rnvi);
      row.rho_low = c.cert.rho_low;
      row.rho_up = c.cert.rho_up;
      row.J_low = c.cert.J_low_best;
      row.J_up = c.cert.J_up_best;
      write_atomically(dir / name.str(), per_tau_csv(spec, c.result));
      row.per_tau_file = name.str();
    } catch (const Error& e) {
      row.status = e.what();
      std::replace(row.status.begin(), row.status.end(), ',', ';');
    }
  };

  const std::size_t workers = std::min<std::size_t>(threads, values.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < values.size(); ++i) solve_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < values.size(); i = next++) solve_one(i);
      });
    }
  }

  std::string csv = "value,rho_low,rho_up,J_low,J_up,width,status\n";
  out << std::setw(10) << a.mode << "   bounds for rho*\n";
  for (const SweepRow& row : rows) {
    csv += csv_row({format_number(row.value), format_number(row.rho_low),
                    format_number(row.rho_up), format_number(row.J_low), format_number(row.J_up),
                    format_number(row.rho_up - row.rho_low), row.status});
    out << std::setw(10) << fmt4(row.value) << "   ";
    if (row.status == "ok") {
      out << "[" << fmt4(row.rho_low) << ", " << fmt4(row.rho_up) << "]\n";
    } else {
      out << "failed: " << row.status << "\n";
    }
    if (!row.per_tau_file.empty()) manifest.outputs.push_back(row.per_tau_file);
  }
  write_atomically(dir / "sweep.csv", csv);
  manifest.outputs.insert(manifest.outputs.begin(), "sweep.csv");
  manifest.write(dir);
  return kExitOk;
}

struct SimulateArgs {
  std::string config;
  std::string out_dir;
  std::string gain_path;
  bool gain_from_bounds = false;
  std::vector<double> x0;
  int horizon = 60;
  int num_traj = 10000;
  std::uint64_t seed = 42;
  int fit_start = 10;
  std::optional<int> fit_end;
  RnviFlags rnvi;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  Manifest manifest;
  manifest.command = "simulate";
  manifest.config_hash = content_hash(read_file(a.config));
  const SystemSpec spec = load_spec(a.config);

  if (a.gain_path.empty() == !a.gain_from_bounds) {
    throw ConfigError("give exactly one of --gain or --gain-from-bounds");
  }
  SimConfig cfg;
  cfg.x0 = a.x0;
  cfg.horizon = a.horizon;
  cfg.num_traj = a.num_traj;
  cfg.seed = a.seed;
  cfg.fit_window = {std::min(a.fit_start, a.horizon - 1), a.fit_end.value_or(a.horizon)};
  cfg.K = a.gain_from_bounds ? certify_spec(spec, a.rnvi).cert.K_up : read_gain_csv(a.gain_path);
  cfg.validate(spec);

  const unsigned threads = thread_budget();
  manifest.parameters = {{"config", a.config},
                         {"out", a.out_dir},
                         {"gain", a.gain_from_bounds ? json("from-bounds") : json(a.gain_path)},
                         {"x0", cfg.x0},
                         {"horizon", cfg.horizon},
                         {"num_traj", cfg.num_traj},
                         {"seed", cfg.seed},
                         {"fit_window", {cfg.fit_window.first, cfg.fit_window.second}},
                         {"threads", threads}};
  if (a.gain_from_bounds) manifest.parameters["rnvi"] = a.rnvi.to_json();

  MomentTrajectory exact = propagate_exact(spec, cfg.K, cfg.x0, cfg.horizon);
  MomentTrajectory mc = monte_carlo(spec, cfg, threads);
  const double rate = closed_loop_rate(spec, cfg.K);
  const double reference = rate > 0.0 ? 2.0 * std::log(rate) : -std::numeric_limits<double>::infinity();

  const fs::path dir = a.out_dir;
  ensure_dir(dir);
  write_atomically(dir / "energy_exact.csv", energy_csv(exact));
  write_atomically(dir / "energy_mc.csv", energy_csv(mc));
  manifest.outputs = {"energy_exact.csv", "energy_mc.csv"};
  if (a.gain_from_bounds) {
    write_atomically(dir / "gain.csv", gain_csv(cfg.K));
    manifest.outputs.push_back("gain.csv");
  }

  for (MomentTrajectory* t : {&exact, &mc}) {
    if (t->diverged) {
      err << "energy overflow: trajectory truncated at step " << t->energies.size() << "\n";
      manifest.write(dir);
      return kExitDomain;
    }
    const SlopeFit fit = fit_slope(*t, cfg.fit_window);
    t->slope = fit.slope;
    t->slope_stderr = fit.standard_error;
  }
  std::string csv = "kind,slope,stderr,reference\n";
  csv += csv_row({"exact", format_number(exact.slope), format_number(exact.slope_stderr),
                  format_number(reference)});
  csv += csv_row({"monte_carlo", format_number(mc.slope), format_number(mc.slope_stderr),
                  format_number(reference)});
  write_atomically(dir / "slopes.csv", csv);
  manifest.outputs.push_back("slopes.csv");
  manifest.write(dir);

  out << "closed-loop rate rho(K) = " << format_number(rate) << "\n"
      << "2 log rho(K)            = " << format_number(reference) << "\n"
      << "exact slope             = " << format_number(exact.slope) << "\n"
      << "monte carlo slope       = " << format_number(mc.slope) << " +/- "
      << format_number(mc.slope_stderr) << "\n";
  return kExitOk;
}

struct RateArgs {
  std::string config;
  std::string gain_path;
};

int cmd_rate(const RateArgs& a, std::ostream& out) {
  const SystemSpec spec = load_spec(a.config);
  const Matrix K = read_gain_csv(a.gain_path);
  const double rho = closed_loop_rate(spec, K);
  out << "rho(K) = " << format_number(rho) << "\n"
      << "2 log rho(K) = " << format_number(rho > 0.0 ? 2.0 * std::log(rho) : -INFINITY) << "\n"
      << "verdict = " << (rho >= 1.0 ? "not mean-square stable (rho >= 1)" : "mean-square stable")
      << "\n";
  return kExitOk;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const DimensionMismatch*>(&e) ||
      dynamic_cast<const InvalidSigma*>(&e) || dynamic_cast<const ConfigError*>(&e)) {
    return kExitUsage;
  }
  return kExitDomain;
}

}  // namespace

void write_gain_csv(const fs::path& path, const Matrix& K) { write_atomically(path, gain_csv(K)); }

Matrix read_gain_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || std::string_view(end).find_first_not_of(" \t") != std::string_view::npos) {
        throw ParseError("gain file: cannot parse '" + cell + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("gain file is empty: " + path.string());
  try {
    return Matrix::from_rows(rows);
  } catch (const Error& e) {
    throw ParseError(std::string("gain file: ") + e.what());
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified bounds on the optimal mean-square stabilizing rate"};
  app.name("msrate");
  app.require_subcommand(1);

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "Validate a config (rank condition and constants)");
  check_cmd->add_option("--config", check.config, "System config (JSON)")->required();

  BoundsArgs bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Run RNVI continuation and certify rho*");
  bounds_cmd->add_option("--config", bounds.config, "System config (JSON)")->required();
  bounds_cmd->add_option("--out", bounds.out_dir, "Output directory")->required();
  bounds.rnvi.add_to(*bounds_cmd);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Certify rho* across sigma or theta values");
  sweep_cmd->add_option("--config", sweep.config, "System config (JSON)")->required();
  sweep_cmd->add_option("--out", sweep.out_dir, "Output directory")->required();
  sweep_cmd->add_option("--mode", sweep.mode, "sigma or theta")
      ->required()
      ->check(CLI::IsMember({"sigma", "theta"}));
  sweep_cmd->add_option("--values", sweep.values, "Comma-separated values")->delimiter(',');
  sweep_cmd->add_option("--linspace", sweep.linspace, "start,end,count")->delimiter(',');
  sweep.rnvi.add_to(*sweep_cmd);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Exact and Monte Carlo mean-square energy");
  sim_cmd->add_option("--config", sim.config, "System config (JSON)")->required();
  sim_cmd->add_option("--out", sim.out_dir, "Output directory")->required();
  sim_cmd->add_option("--gain", sim.gain_path, "Gain CSV (m rows of n values)");
  sim_cmd->add_flag("--gain-from-bounds", sim.gain_from_bounds,
                    "Compute K_up with a fresh bounds run");
  sim_cmd->add_option("--x0", sim.x0, "Initial state, comma separated")
      ->required()
      ->delimiter(',');
  sim_cmd->add_option("--horizon", sim.horizon)->capture_default_str();
  sim_cmd->add_option("--num-traj", sim.num_traj)->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--fit-start", sim.fit_start)->capture_default_str();
  sim_cmd->add_option("--fit-end", sim.fit_end, "Defaults to the horizon");
  sim.rnvi.add_to(*sim_cmd);

  RateArgs rate;
  auto* rate_cmd = app.add_subcommand("rate", "Mean-square rate of u = -Kx");
  rate_cmd->add_option("--config", rate.config, "System config (JSON)")->required();
  rate_cmd->add_option("--gain", rate.gain_path, "Gain CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*check_cmd) return cmd_check(check, out);
    if (*bounds_cmd) return cmd_bounds(bounds, out);
    if (*sweep_cmd) return cmd_sweep(sweep, out);
    if (*sim_cmd) return cmd_simulate(sim, out, err);
    if (*rate_cmd) return cmd_rate(rate, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace msrate::cli
