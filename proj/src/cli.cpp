// Copyright 2026 The qhit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qhit/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "qhit/hitting.hpp"
#include "qhit/parallel.hpp"
#include "qhit/serialize.hpp"
#include "qhit/trajectories.hpp"
#include "qhit/walks.hpp"

namespace qhit::cli {
namespace {

std::string csv_quote(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

struct ChainSpec {
  std::string kind;
  std::size_t items = 0;   // grover-restricted N
  std::size_t qubits = 0;  // grover-full
  std::size_t marked = 0;
  std::size_t length = 0;  // cycle L
  std::string p_path;
  std::size_t start = 0;
  std::size_t target = 0;
  std::string channel_path;
  std::string rho_path;
  std::string target_path;
};

struct RunSpec {
  ChainSpec chain;
  std::optional<double> p;
  std::string sigma_path;
  std::size_t mc_n = 1000;
  std::uint64_t seed = 20240101;
  std::size_t max_steps = 1'000'000;
  std::string grid = "0.01:1:0.01";
  std::size_t sweep_mc_n = 0;
  std::string metric = "steps";
  std::string format = "json";
  std::string solver = "dense";
  double tol = 1e-10;
  std::size_t max_terms = 10'000'000;
  std::string out_dir;
};

Json chain_provenance(const ChainSpec& c) {
  Json j{{"kind", c.kind}};
  if (c.kind == "grover-restricted") j["N"] = c.items;
  if (c.kind == "grover-full") {
    j["qubits"] = c.qubits;
    j["marked"] = c.marked;
  }
  if (c.kind == "cycle") j["L"] = c.length;
  if (c.kind == "classical") {
    j["P"] = c.p_path;
    j["start"] = c.start;
    j["target"] = c.target;
  }
  if (c.kind == "channel") {
    j["channel"] = c.channel_path;
    j["rho"] = c.rho_path;
    j["target"] = c.target_path;
  }
  return j;
}

void require_option(bool present, const std::string& chain, const std::string& flag) {
  if (!present) throw InputError("--chain " + chain + " requires " + flag);
}

Chain build_chain(const ChainSpec& c) {
  if (c.kind == "grover-restricted") {
    require_option(c.items > 0, c.kind, "--N");
    return grover_restricted(c.items);
  }
  if (c.kind == "grover-full") {
    require_option(c.qubits > 0, c.kind, "--qubits");
    return grover_full(c.qubits, c.marked);
  }
  if (c.kind == "cycle") {
    require_option(c.length > 0, c.kind, "--L");
    return coined_cycle(c.length);
  }
  if (c.kind == "classical") {
    require_option(!c.p_path.empty(), c.kind, "--P");
    const RealMatrix p = stochastic_from_json(load_json_file(c.p_path));
    return classical_embed(p, c.start, c.target);
  }
  require_option(!c.channel_path.empty(), c.kind, "--channel");
  require_option(!c.rho_path.empty(), c.kind, "--rho");
  require_option(!c.target_path.empty(), c.kind, "--target-file");
  Channel e = channel_from_json(load_json_file(c.channel_path));
  DensityMatrix rho = state_from_json(load_json_file(c.rho_path));
  TargetSubspace t = target_from_json(load_json_file(c.target_path));
  if (rho.dim() != e.dim() || t.dim() != e.dim()) {
    throw InputError("channel, state and target files disagree on dim");
  }
  return Chain{"channel " + c.channel_path, std::move(e), std::move(t), std::move(rho)};
}

StepDistribution build_sigma(const RunSpec& spec) {
  if (!spec.sigma_path.empty()) {
    if (spec.p) throw InputError("--p and --sigma are mutually exclusive");
    return step_distribution_from_json(load_json_file(spec.sigma_path));
  }
  return StepDistribution::geometric(spec.p.value_or(1.0));
}

Json solver_provenance(const RunSpec& spec) {
  Json j{{"name", spec.solver}};
  if (spec.solver == "neumann") {
    j["tol"] = spec.tol;
    j["max_terms"] = spec.max_terms;
  } else {
    const HittingOptions defaults;
    j["margin_threshold"] = defaults.margin_threshold;
    j["singular_condition"] = defaults.linalg.singular_condition;
    j["residual_tol"] = defaults.linalg.solve_residual;
  }
  return j;
}

HittingResult evaluate(const Chain& chain, const StepDistribution& sigma, const RunSpec& spec) {
  if (spec.solver == "neumann") {
    return generalized_hitting_time_neumann(chain.channel, sigma, chain.target, chain.initial,
                                            spec.tol, spec.max_terms);
  }
  return generalized_hitting_time(chain.channel, sigma, chain.target, chain.initial);
}

Json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

Json optional_number(const std::optional<double>& v) {
  return v ? number_or_string(*v) : Json(nullptr);
}

int fail_precondition(const std::string& command, const Json& provenance, const std::string& reason,
                      double radius, std::ostream& out) {
  Json rec = provenance;
  rec["command"] = command;
  rec["status"] = "precondition_violated";
  rec["reason"] = reason;
  rec["spectral_radius"] = number_or_string(radius);
  rec["value"] = "inf";
  out << rec.dump() << "\n";
  return kPreconditionViolated;
}

Json base_record(const RunSpec& spec, const StepDistribution& sigma) {
  return Json{{"chain", chain_provenance(spec.chain)},
              {"sigma", step_distribution_to_json(sigma)},
              {"solver", solver_provenance(spec)}};
}

int cmd_analytic(const RunSpec& spec, std::ostream& out) {
  const Chain chain = build_chain(spec.chain);
  const StepDistribution sigma = build_sigma(spec);
  Json rec = base_record(spec, sigma);
  rec["chain"]["id"] = chain.id;
  const auto t0 = std::chrono::steady_clock::now();
  HittingResult res;
  try {
    res = evaluate(chain, sigma, spec);
  } catch (const PreconditionViolated& e) {
    return fail_precondition("analytic", rec, e.what(), e.spectral_radius(), out);
  } catch (const NonConvergent& e) {
    return fail_precondition("analytic", rec, e.what(), 1.0, out);
  } catch (const SingularSystem& e) {
    return fail_precondition("analytic", rec, e.what(), 1.0, out);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (spec.format == "csv") {
    out << "chain,sigma,value,measurement_rounds,precondition_margin,method,wall_time_s\n";
    out << csv_quote(chain.id) << ',' << csv_quote(step_distribution_to_json(sigma).dump()) << ','

        << format_number(res.value) << ',' << format_number(res.measurement_rounds) << ','
        << (res.precondition_margin ? format_number(*res.precondition_margin) : "") << ','
        << to_string(res.method) << ',' << format_number(wall) << "\n";
    return kOk;
  }
  rec["command"] = "analytic";
  rec["status"] = "ok";
  rec["value"] = res.value;
  rec["measurement_rounds"] = res.measurement_rounds;
  rec["precondition_margin"] = optional_number(res.precondition_margin);
  rec["method"] = to_string(res.method);
  rec["stats"] = Json{{"iterations", res.stats.iterations},
                      {"residual", res.stats.residual},
                      {"condition_estimate", number_or_string(res.stats.condition_estimate)},
                      {"margin_converged", res.stats.margin_converged},
                      {"krylov_dimension", res.stats.krylov_dimension}};
  rec["wall_time_s"] = wall;
  out << rec.dump() << "\n";
  return kOk;
}

int cmd_montecarlo(const RunSpec& spec, std::ostream& out) {
  if (spec.mc_n < 2) throw InputError("--n must be at least 2");
  const Chain chain = build_chain(spec.chain);
  const ProtocolConfig cfg{build_sigma(spec), spec.max_steps, spec.seed};
  Json rec = base_record(spec, cfg.sigma);
  rec.erase("solver");
  rec["chain"]["id"] = chain.id;
  rec["command"] = "montecarlo";
  rec["n"] = spec.mc_n;
  rec["seed"] = spec.seed;
  rec["max_steps"] = spec.max_steps;
  HittingEstimate est;
  try {
    est = estimate_hitting(chain.channel, chain.target, chain.initial, cfg, spec.mc_n);
  } catch (const StatisticalFailure& e) {
    rec["status"] = "all_censored";
    rec["reason"] = e.what();
    rec["censored_count"] = spec.mc_n;
    out << rec.dump() << "\n";
    return kStatisticalFailure;
  }
  if (spec.format == "csv") {
    out << "chain,n,seed,max_steps,mean,stderr,censored_count\n";
    out << csv_quote(chain.id) << ',' << spec.mc_n << ',' << spec.seed << ',' << spec.max_steps << ','
        << format_number(est.mean) << ',' << format_number(est.standard_error) << ','
        << est.censored_count << "\n";
    return kOk;
  }
  rec["status"] = "ok";
  rec["mean"] = est.mean;
  rec["stderr"] = number_or_string(est.standard_error);
  rec["censored_count"] = est.censored_count;
  out << rec.dump() << "\n";
  return kOk;
}

int cmd_sweep(const RunSpec& spec, std::ostream& out) {
  if (!spec.sigma_path.empty() || spec.p) throw InputError("sweep takes --grid, not --p/--sigma");
  if (spec.metric != "steps" && spec.metric != "rounds") throw InputError("--metric must be steps or rounds");
  const std::vector<double> grid = parse_grid(spec.grid);
  const Chain chain = build_chain(spec.chain);
  SweepTable table;
  table.has_mc = spec.sweep_mc_n > 0;
  table.rows.resize(grid.size());
  parallel_for(grid.size(), default_thread_count(), [&](std::size_t i) {
    SweepRow& row = table.rows[i];
    row.p = grid[i];
    const StepDistribution sigma = StepDistribution::geometric(grid[i]);
    try {
      const HittingResult res = evaluate(chain, sigma, spec);
      row.analytic = spec.metric == "rounds" ? res.measurement_rounds : res.value;
    } catch (const PreconditionViolated&) {
      row.analytic = std::numeric_limits<double>::infinity();
      row.status = "precondition_violated";
    } catch (const NonConvergent&) {
      row.analytic = std::numeric_limits<double>::infinity();
      row.status = "non_convergent";
    }
    if (table.has_mc) {
      const ProtocolConfig cfg{sigma, spec.max_steps, spec.seed};
      try {
        const HittingEstimate est =
            estimate_hitting(chain.channel, chain.target, chain.initial, cfg, spec.sweep_mc_n, 1);
        row.mc_mean = est.mean;
        row.mc_stderr = est.standard_error;
      } catch (const StatisticalFailure&) {
        row.mc_mean = std::numeric_limits<double>::infinity();
        row.mc_stderr = std::numeric_limits<double>::infinity();
      }
    }
  });
  table.argmin_p = std::numeric_limits<double>::quiet_NaN();
  table.min_value = std::numeric_limits<double>::infinity();
  for (const SweepRow& row : table.rows) {
    if (row.analytic < table.min_value) {
      table.min_value = row.analytic;
      table.argmin_p = row.p;
    }
  }
  const Json prov = base_record(spec, StepDistribution::geometric(1.0));
  Json header{{"command", "sweep"},
              {"chain", prov["chain"]},
              {"chain_id", chain.id},
              {"sigma", "geometric(p) over grid " + spec.grid},
              {"metric", spec.metric},
              {"solver", prov["solver"]}};
  if (table.has_mc) {
    header["mc"] = Json{{"n", spec.sweep_mc_n}, {"seed", spec.seed}, {"max_steps", spec.max_steps}};
  }
  if (spec.format == "csv") {
    table.comments.push_back(header.dump());
    out << format_sweep_csv(table);
    return kOk;
  }
  Json rows = Json::array();
  for (const SweepRow& row : table.rows) {
    Json r{{"p", row.p}, {"analytic", number_or_string(row.analytic)}, {"status", row.status}};
    if (table.has_mc) {
      r["mc_mean"] = optional_number(row.mc_mean);
      r["mc_stderr"] = optional_number(row.mc_stderr);
    }
    rows.push_back(std::move(r));
  }
  header["rows"] = std::move(rows);
  header["summary"] = Json{{"argmin_p", number_or_string(table.argmin_p)},
                           {"min_value", number_or_string(table.min_value)}};
  out << header.dump() << "\n";
  return kOk;
}

int cmd_export(const RunSpec& spec, std::ostream& out) {
  if (spec.out_dir.empty()) throw InputError("export requires --out");
  const Chain chain = build_chain(spec.chain);
  const std::filesystem::path dir(spec.out_dir);
  std::filesystem::create_directories(dir);
  const auto write = [&](const char* name, const Json& j) {
    std::ofstream f(dir / name);
    if (!f) throw InputError((dir / name).string() + ": cannot write");
    f << j.dump(1) << "\n";
  };
  write("channel.json", channel_to_json(chain.channel));
  write("state.json", state_to_json(chain.initial));
  write("target.json", target_to_json(chain.target));
  out << Json{{"command", "export"}, {"chain", chain_provenance(spec.chain)}, {"chain_id", chain.id},
              {"out", dir.string()}, {"status", "ok"}}
             .dump()
      << "\n";
  return kOk;
}

void add_chain_options(CLI::App* cmd, RunSpec& spec) {
  cmd->add_option("--chain", spec.chain.kind, "Chain source")
      ->required()
      ->check(CLI::IsMember({"grover-restricted", "grover-full", "cycle", "classical", "channel"}));
  cmd->add_option("--N", spec.chain.items, "Number of items (grover-restricted)");
  cmd->add_option("--qubits", spec.chain.qubits, "Number of qubits (grover-full)");
  cmd->add_option("--marked", spec.chain.marked, "Marked item (grover-full)");
  cmd->add_option("--L", spec.chain.length, "Cycle length (cycle)");
  cmd->add_option("--P", spec.chain.p_path, "Stochastic matrix JSON (classical)");
  cmd->add_option("--start", spec.chain.start, "Start state (classical)");
  cmd->add_option("--target", spec.chain.target, "Target state (classical)");
  cmd->add_option("--channel", spec.chain.channel_path, "Channel JSON (channel)");
  cmd->add_option("--rho", spec.chain.rho_path, "Initial state JSON (channel)");
  cmd->add_option("--target-file", spec.chain.target_path, "Target subspace JSON (channel)");
}

void add_solver_options(CLI::App* cmd, RunSpec& spec) {
  cmd->add_option("--solver", spec.solver, "dense or neumann")->check(CLI::IsMember({"dense", "neumann"}));
  cmd->add_option("--tol", spec.tol, "Neumann tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-terms", spec.max_terms, "Neumann term budget");
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  const auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw InputError("--grid: cannot parse '" + s + "'");
    }
  };
  if (spec.find(':') != std::string::npos) {
    std::stringstream ss(spec);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c)) {
      throw InputError("--grid: expected start:stop:step");
    }
    const double lo = to_double(a), hi = to_double(b), step = to_double(c);
    if (!(step > 0.0) || hi < lo) throw InputError("--grid: need step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) {
      grid.push_back(std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12);
    }
  } else {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(to_double(item));
    std::sort(grid.begin(), grid.end());
  }
  for (double p : grid) {
    if (!(p > 0.0 && p <= 1.0)) throw InputError("--grid: probabilities must lie in (0, 1]");
  }
  if (grid.empty()) throw InputError("--grid: empty");
  return grid;
}

std::string format_sweep_csv(const SweepTable& table) {
  std::ostringstream out;
  for (const std::string& c : table.comments) out << "# " << c << "\n";
  out << (table.has_mc ? "p,analytic,mc_mean,mc_stderr,status\n" : "p,analytic,status\n");
  const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const SweepRow& r : table.rows) {
    out << format_number(r.p) << ',' << format_number(r.analytic) << ',';
    if (table.has_mc) out << opt(r.mc_mean) << ',' << opt(r.mc_stderr) << ',';
    out << r.status << "\n";
  }
  out << format_number(table.argmin_p) << ',' << format_number(table.min_value) << ','
      << (table.has_mc ? ",," : "") << "argmin\n";
  return out.str();
}

SweepTable parse_sweep_csv(const std::string& text) {
  SweepTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool summary_seen = false;
  const auto num = [&](const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw InputError("sweep csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      table.comments.push_back(line.substr(2));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!header_seen) {
      if (line == "p,analytic,mc_mean,mc_stderr,status") {
        table.has_mc = true;
      } else if (line != "p,analytic,status") {
        throw InputError("sweep csv line " + std::to_string(line_no) + ": unexpected header");
      }
      header_seen = true;
      continue;
    }
    const std::size_t expected = table.has_mc ? 5 : 3;
    if (cells.size() != expected) {
      throw InputError("sweep csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(expected) + " columns");
    }
    if (cells.back() == "argmin") {
      table.argmin_p = num(cells[0]);
      table.min_value = num(cells[1]);
      summary_seen = true;
      continue;
    }
    SweepRow row;
    row.p = num(cells[0]);
    row.analytic = num(cells[1]);
    if (table.has_mc) {
      if (!cells[2].empty()) row.mc_mean = num(cells[2]);
      if (!cells[3].empty()) row.mc_stderr = num(cells[3]);
    }
    row.status = cells.back();
    table.rows.push_back(std::move(row));
  }
  if (!header_seen || !summary_seen) throw InputError("sweep csv: missing header or summary row");
  return table;
}

SweepTable rounded(const SweepTable& table) {
  const auto r = [](double v) { return std::isnan(v) ? v : std::stod(format_number(v)); };
  SweepTable out = table;
  for (SweepRow& row : out.rows) {
    row.p = r(row.p);
    row.analytic = r(row.analytic);
    if (row.mc_mean) row.mc_mean = r(*row.mc_mean);
    if (row.mc_stderr) row.mc_stderr = r(*row.mc_stderr);
  }
  out.argmin_p = r(out.argmin_p);
  out.min_value = r(out.min_value);
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hitting times of discrete-time quantum Markov chains"};
  app.require_subcommand(1);
  RunSpec spec;

  CLI::App* analytic = app.add_subcommand("analytic", "Evaluate the hitting-time formula");
  CLI::App* montecarlo = app.add_subcommand("montecarlo", "Estimate by simulating the measure-evolve protocol");
  CLI::App* sweep = app.add_subcommand("sweep", "Tabulate the hitting time over a grid of geometric p");
  CLI::App* exporter = app.add_subcommand("export", "Write a chain as channel/state/target JSON files");

  double p_value = 1.0;
  for (CLI::App* cmd : {analytic, montecarlo, sweep, exporter}) add_chain_options(cmd, spec);
  for (CLI::App* cmd : {analytic, montecarlo}) {
    cmd->add_option("--p", p_value, "Geometric measurement probability")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--sigma", spec.sigma_path, "Explicit step distribution JSON");
    cmd->add_option("--format", spec.format)->check(CLI::IsMember({"json", "csv"}));
  }
  add_solver_options(analytic, spec);
  add_solver_options(sweep, spec);
  montecarlo->add_option("--n", spec.mc_n, "Number of trajectories");
  for (CLI::App* cmd : {montecarlo, sweep}) {
    cmd->add_option("--seed", spec.seed, "Base RNG seed");
    cmd->add_option("--max-steps", spec.max_steps, "Per-trajectory budget of chain steps")
        ->check(CLI::PositiveNumber);
  }
  sweep->add_option("--grid", spec.grid, "start:stop:step or comma list");
  sweep->add_option("--mc-n", spec.sweep_mc_n, "Trajectories per row (0 = analytic only)");
  sweep->add_option("--metric", spec.metric, "steps (E applications) or rounds (failed measurements)")
      ->check(CLI::IsMember({"steps", "rounds"}));
  spec.format = "json";
  std::string sweep_format = "csv";
  sweep->add_option("--format", sweep_format)->check(CLI::IsMember({"json", "csv"}));
  exporter->add_option("--out", spec.out_dir, "Output directory")->required();

  std::vector<std::string> argv_storage{"qhit"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (analytic->parsed()) {
      if (analytic->count("--p") > 0) spec.p = p_value;
      return cmd_analytic(spec, out);
    }
    if (montecarlo->parsed()) {
      if (montecarlo->count("--p") > 0) spec.p = p_value;
      return cmd_montecarlo(spec, out);
    }
    if (sweep->parsed()) {
      spec.format = sweep_format;
      return cmd_sweep(spec, out);
    }
    return cmd_export(spec, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const ValidationError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const DimensionError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace qhit::cli
