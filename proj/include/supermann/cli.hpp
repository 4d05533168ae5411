#pragma once

#include "supermann/engine.hpp"
#include "supermann/problems.hpp"

#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace supermann::cli {

/// Everything needed to build one problem and solve it.
struct RunSpec {
  std::string problem = "cones";
  std::string method = "supermann"; ///< km | supermann
  std::string direction = "rbroyden";
  std::string preset = "mpc";
  std::vector<std::string> overrides; ///< "key=value" solver settings
  std::uint64_t seed = 1;
  std::optional<double> time_limit;

  // problem parameters (unset ones fall back to builder defaults)
  std::optional<int> m, n, K, N;
  std::optional<double> nu, density, cond, residual_tol;
  std::optional<std::string> x0;       ///< comma-separated start point
  std::optional<std::string> instance; ///< JSON instance file to import

  // outputs
  std::optional<std::string> trace, summary, trajectory;
};

/// Builds the instance named by the spec (or imports it).
ProblemInstance build_instance(const RunSpec &spec);
/// Preset plus overrides, validated; problem preferences applied when the
/// user did not set tol_rel.
SolverConfig solver_config(const RunSpec &spec, const ProblemInstance &inst);

struct RunOutcome {
  SolveResult result;
  nlohmann::json counters; ///< problem-specific counters after the solve
  std::string cost_counter;
  std::uint64_t cost = 0;
};

/// Solves a built instance (counters are reset first).
RunOutcome solve(const RunSpec &spec, ProblemInstance &inst);

/// Summary JSON with the extra keys "reason" and "counters".
nlohmann::json summary_json(const RunOutcome &outcome);

/// Parses a flag string such as "--problem lasso --m 150" into a spec.
RunSpec parse_spec(const std::string &flags);

/// Entry point shared by the executable and the tests. Returns the process
/// exit code: 0 converged, 2 not converged, 1 usage error.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Default output directory: $SUPERMANN_OUTPUT_DIR, or "." when unset.
std::string default_output_dir();

/// Column order of the compare table.
const std::vector<std::string> &compare_columns();

} // namespace supermann::cli
