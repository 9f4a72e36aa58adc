// Command-line front end: convergence studies, Aldous diagnostics, master
// equation comparisons, kernel checks and mean-field solves, driven by a
// JSON config file. See README.md for the config schema.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cgedg/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cgedg;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  return j;
}

std::map<std::string, double> param_map(const json& j) {
  std::map<std::string, double> out;
  if (j.contains("params"))
    for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
      out[it.key()] = it.value().get<double>();
  return out;
}

KernelSpec kernel_spec(const json& j) {
  KernelSpec spec;
  if (j.contains("kernel")) {
    spec.name = j["kernel"].value("name", "expdiff");
    spec.params = param_map(j["kernel"]);
  }
  return spec;
}

StudyConfig study_config(const json& j) {
  StudyConfig config;
  config.kernel = kernel_spec(j);
  config.rho = j.value("rho", 1.0);
  if (j.contains("density")) {
    config.density.name = j["density"].value("name", "exponential");
    config.density.params = param_map(j["density"]);
    if (config.density.name == "tabulated") {
      const auto file = j["density"].at("file").get<std::string>();
      std::ifstream table(file);
      if (!table) throw std::runtime_error("cannot open density table: " + file);
      std::string line;
      std::getline(table, line);  // header row
      while (std::getline(table, line)) {
        double mass = 0.0, value = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf", &mass, &value) == 2)
          config.density.table.emplace_back(mass, value);
      }
    }
  }
  if (j.contains("schedule"))
    for (const auto& e : j["schedule"]) {
      ScheduleEntry entry;
      entry.l = e.at("L").get<long>();
      entry.eps = e.at("eps").get<double>();
      entry.n = e.contains("N") ? e["N"].get<long>()
                                : static_cast<long>(std::llround(
                                      config.rho * entry.l / entry.eps));
      config.schedule.push_back(entry);
    }
  config.replicas = j.value("replicas", 64L);
  config.seed = j.value("seed", std::uint64_t{1});
  config.threads = j.value("threads", 1);
  if (j.contains("checkpoints"))
    for (const auto& t : j["checkpoints"])
      config.checkpoints.push_back(t.get<double>());
  if (j.contains("solver")) {
    config.solver_mass_cap = j["solver"].value("mass_cap", 16.0);
    config.solver_dt_max = j["solver"].value("dt_max", 0.02);
  }
  return config;
}

std::ofstream open_out(const std::string& dir, const std::string& name,
                       bool binary = false) {
  fs::create_directories(dir);
  const auto path = fs::path(dir) / name;
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  return out;
}

int cmd_converge(const StudyConfig& config) {
  const auto validation = validate(config);
  for (const auto& w : validation.warnings) std::cerr << "warning: " << w << "\n";

  std::ofstream file;
  if (!config.out_dir.empty()) file = open_out(config.out_dir, "convergence.csv");
  std::ostream& os = config.out_dir.empty() ? std::cout : file;
  write_convergence_header(os);
  // rows stream out as each schedule entry finishes
  auto result = run_convergence(config, [&os](const ConvergenceRow& row) {
    write_convergence_row(row, os);
    os.flush();
  });
  std::cerr << "solver boundary leak: " << result.solver_boundary_leak << "\n";
  return 0;
}

int cmd_aldous(const json& j, const StudyConfig& config) {
  if (!j.contains("aldous"))
    throw std::runtime_error("config needs an \"aldous\" section");
  const auto& a = j["aldous"];
  std::vector<double> deltas;
  for (const auto& d : a.at("deltas")) deltas.push_back(d.get<double>());
  const double t0 = a.value("t0", 0.5);
  ScheduleEntry entry;
  entry.l = a.at("entry").at("L").get<long>();
  entry.eps = a.at("entry").at("eps").get<double>();
  entry.n = a["entry"].contains("N")
                ? a["entry"]["N"].get<long>()
                : static_cast<long>(
                      std::llround(config.rho * entry.l / entry.eps));

  auto result = aldous_diagnostic(config, entry, deltas, t0);
  if (!config.out_dir.empty()) {
    auto os = open_out(config.out_dir, "aldous.csv");
    write_aldous_csv(result, os);
  } else {
    write_aldous_csv(result, std::cout);
  }
  return result.pass ? 0 : 3;
}

int cmd_oracle(const json& j, const StudyConfig& config) {
  if (!j.contains("oracle"))
    throw std::runtime_error("config needs an \"oracle\" section");
  OracleConfig oc;
  oc.kernel = config.kernel;
  oc.replicas = config.replicas;
  oc.seed = config.seed;
  oc.threads = config.threads;
  oc.state_guard = j["oracle"].value("guard", std::size_t{1000000});
  for (const auto& inst : j["oracle"].at("instances")) {
    OracleInstance oi;
    oi.n = inst.at("N").get<long>();
    oi.l = inst.at("L").get<long>();
    oi.eps = inst.value("eps", 1.0);
    for (const auto& v : inst.at("initial")) oi.initial.push_back(v.get<long>());
    for (const auto& t : inst.at("times")) oi.times.push_back(t.get<double>());
    oc.instances.push_back(oi);
  }
  auto rows = run_oracle_suite(oc);
  if (!config.out_dir.empty()) {
    auto os = open_out(config.out_dir, "oracle.jsonl");
    write_oracle_jsonl(rows, os);
  } else {
    write_oracle_jsonl(rows, std::cout);
  }
  bool all_ok = true;
  for (const auto& r : rows) all_ok = all_ok && std::abs(r.z) <= 3.0;
  return all_ok ? 0 : 3;
}

int cmd_check_kernel(const StudyConfig& config) {
  const Kernel kernel = make_kernel(config.kernel);
  std::ostringstream lines;

  const auto growth = check_growth_bound(kernel);
  write_check_jsonl("growth", growth.worst, growth.max_ratio, kernel.c_k, growth.pass, lines);
  const auto deriv = check_derivative_bounds(kernel);
  write_check_jsonl("deriv_d1", deriv.worst, deriv.max_d1_excess, 0.0,
                    deriv.max_d1_excess <= 0.0, lines);
  write_check_jsonl("deriv_d2", deriv.worst, deriv.max_d2_excess, 0.0,
                    deriv.max_d2_excess <= 0.0, lines);
  write_check_jsonl("deriv_d12", deriv.worst, deriv.max_d12_excess, 0.0,
                    deriv.max_d12_excess <= 0.0, lines);
  write_check_jsonl("deriv_boundary", deriv.worst, deriv.max_boundary, 1e-12,
                    deriv.max_boundary <= 1e-12, lines);
  for (const auto& m : {power_moment(0.5), entropy_moment()}) {
    const auto rep = check_admissible(m);
    write_check_jsonl("admissible_" + m.name, {0, 0, 0},
                      std::max(rep.max_sub_ratio, rep.max_ctrl_ratio), 1.0,
                      rep.pass_a0, lines);
  }
  const auto riem = riemann_check(kernel.phi, 0.01, 3000);
  write_check_jsonl("riemann_phi", {0, 0, 0},
                    std::abs(riem.sum - riem.integral), riem.bound,
                    std::abs(riem.sum - riem.integral) <= riem.bound + 1e-12,
                    lines);

  if (!config.out_dir.empty()) {
    auto os = open_out(config.out_dir, "checks.jsonl");
    os << lines.str();
  }
  std::cout << lines.str();
  const bool ok = growth.pass && deriv.pass;
  std::cout << (ok ? "kernel checks passed\n" : "kernel checks FAILED\n");
  return ok ? 0 : 3;
}

int cmd_solve(const StudyConfig& config) {
  if (config.schedule.empty())
    throw std::runtime_error("solve needs one schedule entry for (L, eps)");
  const auto& entry = config.schedule.front();
  const Kernel kernel = make_kernel(config.kernel);
  const auto density = make_density(config.density);

  GridMeasure c0 =
      discretize_density_bulk(density, entry.n, entry.l, entry.eps)
          .resized(static_cast<std::size_t>(
              std::lround(config.solver_mass_cap / entry.eps)));
  c0.kind = GridMeasure::Kind::Density;

  SolveOptions opts;
  opts.dt_max = config.solver_dt_max;
  const double t_end = config.checkpoints.back();
  auto res = solve(c0, kernel, t_end, config.checkpoints, opts);

  const std::string dir = config.out_dir.empty() ? "." : config.out_dir;
  auto bin = open_out(dir, "trajectory.bin", true);
  auto index = open_out(dir, "trajectory.jsonl");
  write_trajectory(res.trajectory, 0, bin, index);
  auto report = open_out(dir, "solver_report.json");
  report << "{\"boundary_leak\":" << res.report.boundary_leak
         << ",\"clipped\":" << res.report.clipped
         << ",\"steps\":" << res.report.steps
         << ",\"rejected_steps\":" << res.report.rejected_steps
         << ",\"dt_min\":" << (res.report.steps > 0 ? res.report.dt_min : 0.0)
         << ",\"dt_max_used\":" << res.report.dt_max_used
         << ",\"leak_flagged\":" << (res.leak_flagged ? "true" : "false")
         << "}\n";
  std::cout << "solver finished: " << res.report.steps << " steps, leak "
            << res.report.boundary_leak << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exchange-driven growth simulation lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long replicas = -1;
  long long seed = -1;
  int threads = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--replicas", replicas, "override replica count");
    cmd->add_option("--seed", seed, "override master seed");
    cmd->add_option("--threads", threads, "worker threads for replica runs");
  };

  auto* converge = app.add_subcommand("converge", "mean-field convergence study");
  auto* aldous = app.add_subcommand("aldous", "time-regularity diagnostic");
  auto* oracle = app.add_subcommand("oracle", "Monte Carlo vs master equation");
  auto* check = app.add_subcommand("check-kernel", "kernel assumption checks");
  auto* solve_cmd = app.add_subcommand("solve", "deterministic mean-field solve");
  for (auto* cmd : {converge, aldous, oracle, check, solve_cmd}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    const json j = load_json(config_path);
    StudyConfig config = study_config(j);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (replicas > 0) config.replicas = replicas;
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    if (threads > 0) config.threads = threads;

    if (converge->parsed()) return cmd_converge(config);
    if (aldous->parsed()) return cmd_aldous(j, config);
    if (oracle->parsed()) return cmd_oracle(j, config);
    if (check->parsed()) return cmd_check_kernel(config);
    if (solve_cmd->parsed()) return cmd_solve(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
