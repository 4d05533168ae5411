#include "supermann/cli.hpp"

#include "supermann/errors.hpp"
#include "supermann/instance_io.hpp"
#include "supermann/rng.hpp"
#include "supermann/trace_io.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace supermann::cli {

using nlohmann::json;

namespace {

template <class T> bool one_of(const T &value, const std::vector<T> &options) {
  return std::find(options.begin(), options.end(), value) != options.end();
}

std::string join(const std::vector<std::string> &items, const char *sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i)
    out += (i ? sep : "") + items[i];
  return out;
}

Vector parse_point(const std::string &text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    values.push_back(parse_double(item));
  if (values.empty())
    throw UsageError("--x0 needs comma-separated numbers");
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

std::pair<std::string, double> parse_assignment(const std::string &text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError("expected key=value, got '" + text + "'");
  return {text.substr(0, eq), parse_double(text.substr(eq + 1))};
}

void add_spec_options(CLI::App &app, RunSpec &s) {
  app.add_option("--problem", s.problem, "problem: " + join(problem_names(), ", "));
  app.add_option("--method", s.method, "km or supermann");
  app.add_option("--direction", s.direction, "zero, broyden or rbroyden");
  app.add_option("--preset", s.preset, "mpc, scs or custom");
  app.add_option("--set", s.overrides, "solver setting key=value (repeatable)");
  app.add_option("--seed", s.seed, "instance seed");
  app.add_option("--time-limit", s.time_limit, "wall-clock limit per run in seconds");
  app.add_option("--m", s.m, "rows (lasso, cone-program)");
  app.add_option("--n", s.n, "columns (lasso, cone-program)");
  app.add_option("--K", s.K, "actuators (masses)");
  app.add_option("--N", s.N, "horizon (masses)");
  app.add_option("--nu", s.nu, "l1 weight (lasso)");
  app.add_option("--density", s.density, "density of A (cone-program)");
  app.add_option("--cond", s.cond, "condition number of A (cone-program)");
  app.add_option("--residual-tol", s.residual_tol, "primal/dual/gap tolerance (cone-program)");
  app.add_option("--x0", s.x0, "starting point (cones, ball-line, soc) or initial state (masses)");
  app.add_option("--instance", s.instance, "instance JSON produced by export-instance");
  app.add_option("--trace", s.trace, "trace CSV path");
  app.add_option("--summary", s.summary, "summary JSON path");
  app.add_option("--trajectory", s.trajectory, "trajectory CSV path (masses)");
}

// Parses args (without program name) with CLI11.
void parse_app(CLI::App &app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  app.parse(args);
}

void validate_spec(const RunSpec &s) {
  if (!s.instance && !one_of(s.problem, problem_names()))
    throw UsageError("unknown problem '" + s.problem + "' (expected " +
                     join(problem_names(), ", ") + ")");
  if (!one_of<std::string>(s.method, {"km", "supermann"}))
    throw UsageError("unknown method '" + s.method + "' (expected km, supermann)");
  direction_kind_from_name(s.direction);
  SolverConfig::preset(s.preset);
  if (s.time_limit && !(*s.time_limit > 0.0))
    throw UsageError("--time-limit must be positive");
}

std::string method_label(const RunSpec &s) {
  return s.method == "km" ? "km" : "supermann-" + s.direction;
}

std::filesystem::path output_path(const std::optional<std::string> &given,
                                  const std::string &fallback_name) {
  std::filesystem::path p = given ? std::filesystem::path(*given)
                                  : std::filesystem::path(default_output_dir()) / fallback_name;
  if (p.has_parent_path())
    std::filesystem::create_directories(p.parent_path());
  return p;
}

// Expands "--config file.json" into explicit flags; flags given on the
// command line win over the file.
std::vector<std::string> expand_config(const std::vector<std::string> &args) {
  std::vector<std::string> out;
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size())
        throw UsageError("--config needs a file name");
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (!config)
    return out;
  const json j = read_json(*config);
  if (!j.is_object())
    throw UsageError("config file must hold a JSON object");
  auto given = [&](const std::string &flag) {
    return std::any_of(out.begin(), out.end(), [&](const std::string &a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  auto scalar = [](const json &v) -> std::string {
    if (v.is_string())
      return v.get<std::string>();
    if (v.is_number_float())
      return format_double(v.get<double>());
    if (v.is_number() || v.is_boolean())
      return v.dump();
    throw UsageError("config values must be scalars or arrays of scalars");
  };
  std::vector<std::string> extra;
  for (const auto &[key, value] : j.items()) {
    const std::string flag = "--" + (key == "specs" ? std::string("spec") : key);
    if (given(flag))
      continue;
    if (value.is_array()) {
      for (const auto &v : value) {
        extra.push_back(flag);
        extra.push_back(scalar(v));
      }
    } else {
      extra.push_back(flag);
      extra.push_back(scalar(value));
    }
  }
  // subcommand name stays first
  out.insert(out.begin() + (out.empty() ? 0 : 1), extra.begin(), extra.end());
  return out;
}

json counters_json(const AveragedOperator &op) {
  json j = json::object();
  j["T_evals"] = op.evaluations();
  for (const auto &[name, value] : op.counters())
    j[name] = value;
  return j;
}

} // namespace

std::string default_output_dir() {
  const char *env = std::getenv("SUPERMANN_OUTPUT_DIR");
  return env && *env ? env : ".";
}

ProblemInstance build_instance(const RunSpec &s) {
  validate_spec(s);
  if (s.instance)
    return import_instance(read_json(*s.instance));
  std::optional<Vector> x0;
  if (s.x0)
    x0 = parse_point(*s.x0);
  if (s.problem == "cones")
    return build_cones_example(x0);
  if (s.problem == "ball-line")
    return build_ball_line_example(x0);
  if (s.problem == "soc")
    return build_soc_example(x0);
  if (s.problem == "lasso")
    return build_lasso(s.m.value_or(150), s.n.value_or(500), s.nu.value_or(1e-2), s.seed);
  if (s.problem == "cone-program") {
    ConeProgramOptions o;
    o.m = s.m.value_or(o.m);
    o.n = s.n.value_or(o.n);
    o.density = s.density.value_or(o.density);
    o.cond = s.cond.value_or(o.cond);
    o.tol = s.residual_tol.value_or(o.tol);
    o.seed = s.seed;
    return build_cone_program(o);
  }
  MassesOptions o;
  o.K = s.K.value_or(o.K);
  o.N = s.N.value_or(o.N);
  o.seed = s.seed;
  o.initial_state = x0;
  return build_oscillating_masses(o);
}

SolverConfig solver_config(const RunSpec &s, const ProblemInstance &inst) {
  SolverConfig cfg = SolverConfig::preset(s.preset);
  if (inst.preferred_tol_rel)
    cfg.tol_rel = *inst.preferred_tol_rel;
  for (const auto &o : s.overrides) {
    const auto [key, value] = parse_assignment(o);
    cfg.set(key, value);
  }
  if (s.time_limit)
    cfg.time_limit_s = *s.time_limit;
  cfg.validate();
  return cfg;
}

RunOutcome solve(const RunSpec &s, ProblemInstance &inst) {
  const SolverConfig cfg = solver_config(s, inst);
  inst.op->reset_counters();
  SolveOptions options;
  options.extra_stop = inst.extra_stop;
  RunOutcome outcome;
  if (s.method == "km") {
    outcome.result = km_solve(*inst.op, inst.x0, constant_lambda(cfg.lambda), cfg, options);
  } else {
    auto dirs = make_direction_provider(direction_kind_from_name(s.direction), inst.op->dim(),
                                        cfg.memory, cfg.theta_bar);
    outcome.result = supermann_solve(*inst.op, inst.x0, *dirs, cfg, options);
  }
  outcome.counters = counters_json(*inst.op);
  outcome.cost_counter = inst.op->cost_counter();
  outcome.cost = inst.op->cost();
  return outcome;
}

json summary_json(const RunOutcome &outcome) {
  json j = summary_to_json(outcome.result.summary);
  j["reason"] = outcome.result.summary.reason;
  j["counters"] = outcome.counters;
  return j;
}

RunSpec parse_spec(const std::string &flags) {
  RunSpec spec;
  CLI::App app("run specification");
  add_spec_options(app, spec);
  parse_app(app, CLI::detail::split_up(flags));
  validate_spec(spec);
  return spec;
}

const std::vector<std::string> &compare_columns() {
  static const std::vector<std::string> cols{
      "spec",   "problem",    "method",        "direction", "seed",    "status",
      "iterations", "T_evals", "linear_solves", "matvecs",   "L_calls", "final_residual"};
  return cols;
}

namespace {

int exit_code(Status s) { return s == Status::Converged ? 0 : 2; }

int cmd_run(const RunSpec &s, std::ostream &out) {
  ProblemInstance inst = build_instance(s);
  const RunOutcome outcome = solve(s, inst);
  const std::string stem = inst.name + "_" + method_label(s);
  write_trace_csv(output_path(s.trace, stem + "_trace.csv").string(), outcome.result.trace);
  json summary = summary_json(outcome);
  if (inst.report)
    summary["report"] = inst.report(outcome.result.x);
  for (const auto &w : outcome.result.summary.warnings)
    summary["warnings"].push_back(w);
  write_json(output_path(s.summary, stem + "_summary.json").string(), summary);
  if (s.trajectory) {
    const auto *oc = std::get_if<OptimalControl>(&inst.data);
    if (!oc)
      throw UsageError("--trajectory is only available for optimal control problems");
    std::ofstream f(output_path(s.trajectory, "").string(), std::ios::binary);
    write_trajectory_csv(f, *oc, outcome.result.x.head(oc->input_dim()));
  }
  out << summary.dump() << '\n';
  return exit_code(outcome.result.summary.status);
}

std::string counter_field(const json &counters, const char *name) {
  return counters.contains(name) ? std::to_string(counters[name].get<std::uint64_t>()) : "";
}

std::string csv_quote(const std::string &s) {
  if (s.find_first_of(",\"") == std::string::npos)
    return s;
  std::string q = "\"";
  for (char c : s)
    q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

int cmd_compare(const std::vector<std::string> &spec_strings,
                const std::optional<std::string> &output, std::ostream &out) {
  if (spec_strings.empty())
    throw UsageError("compare needs at least one --spec");
  std::vector<RunSpec> specs;
  std::vector<ProblemInstance> instances;
  for (const auto &text : spec_strings) {
    try {
      specs.push_back(parse_spec(text));
      instances.push_back(build_instance(specs.back()));
      solver_config(specs.back(), instances.back());
    } catch (const CLI::ParseError &e) {
      throw UsageError("compare aborted: spec '" + text + "': " + e.what());
    } catch (const std::exception &e) {
      throw UsageError("compare aborted: spec '" + text + "': " + e.what());
    }
  }
  std::ostringstream table;
  table << join(compare_columns(), ",") << '\n';
  int code = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const RunOutcome o = solve(specs[i], instances[i]);
    const auto &sum = o.result.summary;
    table << csv_quote(spec_strings[i]) << ',' << instances[i].name << ',' << specs[i].method
          << ',' << (specs[i].method == "km" ? "" : specs[i].direction) << ',' << specs[i].seed
          << ',' << status_name(sum.status) << ',' << sum.iterations << ',' << sum.T_evals << ','
          << counter_field(o.counters, "linear_solves") << ','
          << counter_field(o.counters, "matvecs") << ',' << counter_field(o.counters, "L_calls")
          << ',' << format_double(sum.final_residual) << '\n';
    code = std::max(code, exit_code(sum.status));
  }
  std::ofstream f(output_path(output, "compare.csv"), std::ios::binary);
  f << table.str();
  out << table.str();
  return code;
}

struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

const std::vector<std::string> &problem_grid_keys() {
  static const std::vector<std::string> keys{"m",       "n",    "K",   "N",          "nu",
                                             "density", "cond", "seed", "residual_tol"};
  return keys;
}

void apply_grid_value(RunSpec &s, const std::string &key, const std::string &value) {
  auto as_int = [&]() {
    const double v = parse_double(value);
    if (v != std::floor(v) || v <= 0)
      throw UsageError("grid value for " + key + " must be a positive integer, got '" + value + "'");
    return static_cast<int>(v);
  };
  if (key == "m")
    s.m = as_int();
  else if (key == "n")
    s.n = as_int();
  else if (key == "K")
    s.K = as_int();
  else if (key == "N")
    s.N = as_int();
  else if (key == "seed")
    s.seed = static_cast<std::uint64_t>(as_int());
  else if (key == "nu")
    s.nu = parse_double(value);
  else if (key == "density")
    s.density = parse_double(value);
  else if (key == "cond")
    s.cond = parse_double(value);
  else if (key == "residual_tol")
    s.residual_tol = parse_double(value);
  else
    s.overrides.push_back(key + "=" + value);
}

struct SweepResult {
  bool converged = false;
  long iterations = 0;
  std::uint64_t T_evals = 0, cost = 0;
  std::string cost_counter;
  std::string error;
};

int cmd_sweep(const RunSpec &base, const std::vector<std::string> &grid_flags, int seeds,
              const std::string &methods_flag, const std::optional<std::string> &output,
              std::ostream &out) {
  if (seeds < 1)
    throw UsageError("--seeds must be positive");
  std::vector<GridAxis> axes;
  for (const auto &g : grid_flags) {
    const auto eq = g.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == g.size())
      throw UsageError("--grid expects KEY=v1,v2,..., got '" + g + "'");
    GridAxis axis{g.substr(0, eq), {}};
    std::stringstream ss(g.substr(eq + 1));
    std::string v;
    while (std::getline(ss, v, ','))
      axis.values.push_back(v);
    if (axis.values.empty())
      throw UsageError("--grid " + axis.key + " has no values");
    if (!one_of(axis.key, problem_grid_keys()) && !one_of(axis.key, SolverConfig::keys()))
      throw UsageError("unknown grid key '" + axis.key + "'");
    axes.push_back(std::move(axis));
  }
  std::vector<std::string> methods;
  {
    std::stringstream ss(methods_flag);
    std::string m;
    while (std::getline(ss, m, ','))
      methods.push_back(m);
  }
  if (methods.empty())
    throw UsageError("--methods must list km and/or supermann");

  // enumerate cells (first axis slowest) and validate every value up front
  std::size_t cells = 1;
  for (const auto &a : axes)
    cells *= a.values.size();
  std::vector<RunSpec> cell_specs;
  std::vector<std::vector<std::string>> cell_values;
  for (std::size_t c = 0; c < cells; ++c) {
    RunSpec s = base;
    std::vector<std::string> values(axes.size());
    std::size_t rest = c;
    for (std::size_t a = axes.size(); a-- > 0;) {
      values[a] = axes[a].values[rest % axes[a].values.size()];
      rest /= axes[a].values.size();
    }
    for (std::size_t a = 0; a < axes.size(); ++a)
      apply_grid_value(s, axes[a].key, values[a]);
    for (const auto &m : methods) {
      RunSpec probe = s;
      probe.method = m;
      validate_spec(probe);
    }
    SolverConfig cfg = SolverConfig::preset(s.preset);
    for (const auto &o : s.overrides) {
      const auto [k, v] = parse_assignment(o);
      cfg.set(k, v);
    }
    cfg.validate();
    cell_specs.push_back(std::move(s));
    cell_values.push_back(std::move(values));
  }

  const std::size_t per_cell = static_cast<std::size_t>(seeds) * methods.size();
  const std::size_t tasks = cells * per_cell;
  std::vector<SweepResult> results(tasks);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < tasks; ++t) {
    const std::size_t cell = t / per_cell, j = (t % per_cell) / methods.size(),
                      mi = t % methods.size();
    RunSpec s = cell_specs[cell];
    s.method = methods[mi];
    s.seed = derive_seed(derive_seed(cell_specs[cell].seed, cell), j);
    SweepResult &r = results[t];
    try {
      ProblemInstance inst = build_instance(s);
      const RunOutcome o = solve(s, inst);
      r.converged = o.result.summary.status == Status::Converged;
      r.iterations = o.result.summary.iterations;
      r.T_evals = o.result.summary.T_evals;
      r.cost = o.cost;
      r.cost_counter = o.cost_counter;
    } catch (const std::exception &e) {
      r.error = e.what();
    }
  }
  for (const auto &r : results)
    if (!r.error.empty())
      throw UsageError("sweep run failed: " + r.error);

  std::ostringstream table;
  for (const auto &a : axes)
    table << a.key << ',';
  table << "method,runs,converged,iterations_avg,iterations_max,T_evals_avg,T_evals_max,"
           "cost_counter,cost_avg,cost_max\n";
  int code = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      long conv = 0;
      double it_sum = 0, te_sum = 0, cost_sum = 0;
      long it_max = 0;
      std::uint64_t te_max = 0, cost_max = 0;
      std::string counter;
      for (int j = 0; j < seeds; ++j) {
        const auto &r = results[c * per_cell + static_cast<std::size_t>(j) * methods.size() + mi];
        conv += r.converged;
        it_sum += static_cast<double>(r.iterations);
        te_sum += static_cast<double>(r.T_evals);
        cost_sum += static_cast<double>(r.cost);
        it_max = std::max(it_max, r.iterations);
        te_max = std::max(te_max, r.T_evals);
        cost_max = std::max(cost_max, r.cost);
        counter = r.cost_counter;
      }
      if (conv < seeds)
        code = 2;
      RunSpec label = cell_specs[c];
      label.method = methods[mi];
      for (const auto &v : cell_values[c])
        table << v << ',';
      table << method_label(label) << ',' << seeds << ',' << conv << ','
            << format_double(it_sum / seeds) << ',' << it_max << ','
            << format_double(te_sum / seeds) << ',' << te_max << ',' << counter << ','
            << format_double(cost_sum / seeds) << ',' << cost_max << '\n';
    }
  }
  std::ofstream f(output_path(output, "sweep.csv"), std::ios::binary);
  f << table.str();
  out << table.str();
  return code;
}

int cmd_export(const RunSpec &s, const std::optional<std::string> &output, std::ostream &out) {
  const ProblemInstance inst = build_instance(s);
  const auto path = output_path(output, inst.name + "_instance.json");
  write_json(path.string(), export_instance(inst));
  out << path.string() << '\n';
  return 0;
}

} // namespace

int run_cli(const std::vector<std::string> &raw_args, std::ostream &out, std::ostream &err) {
  try {
    const std::vector<std::string> args = expand_config(raw_args);
    CLI::App app("SuperMann fixed-point solver benchmarks", "supermann");
    app.require_subcommand(1);

    RunSpec run_spec;
    auto *run = app.add_subcommand("run", "solve one problem and write trace and summary");
    add_spec_options(*run, run_spec);

    std::vector<std::string> spec_strings;
    std::optional<std::string> compare_out;
    auto *compare = app.add_subcommand("compare", "run several specs and tabulate their costs");
    compare->add_option("--spec", spec_strings, "flags of one run (repeatable)");
    compare->add_option("--output", compare_out, "comparison CSV path");

    RunSpec sweep_spec;
    std::vector<std::string> grid;
    int seeds = 1;
    std::string methods = "km,supermann";
    std::optional<std::string> sweep_out;
    auto *sweep = app.add_subcommand("sweep", "run a parameter grid and aggregate avg/max");
    add_spec_options(*sweep, sweep_spec);
    sweep->add_option("--grid", grid, "KEY=v1,v2,... (repeatable)");
    sweep->add_option("--seeds", seeds, "seeds per cell");
    sweep->add_option("--methods", methods, "comma-separated methods");
    sweep->add_option("--output", sweep_out, "aggregated CSV path");

    RunSpec export_spec;
    std::optional<std::string> export_out;
    auto *exp = app.add_subcommand("export-instance", "write instance data as JSON");
    add_spec_options(*exp, export_spec);
    exp->add_option("--output", export_out, "instance JSON path");

    try {
      parse_app(app, args);
    } catch (const CLI::CallForHelp &) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp &) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError &e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }

    if (run->parsed())
      return cmd_run(run_spec, out);
    if (compare->parsed())
      return cmd_compare(spec_strings, compare_out, out);
    if (sweep->parsed())
      return cmd_sweep(sweep_spec, grid, seeds, methods, sweep_out, out);
    return cmd_export(export_spec, export_out, out);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConstructionError &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError &e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

} // namespace supermann::cli
