#pragma once

#include "supermann/problems.hpp"

#include <iosfwd>
#include <json.hpp>
#include <string>

namespace supermann {

/// Matrices up to this many entries are stored as flat row-major arrays;
/// larger ones as (row, col, value) triplets of the nonzeros.
inline constexpr Index kDenseEntryLimit = 1000000;

nlohmann::json matrix_to_json(const Matrix &M);
Matrix matrix_from_json(const nlohmann::json &j);
nlohmann::json vector_to_json(const Vector &v);
Vector vector_from_json(const nlohmann::json &j);

/// Self-describing JSON of the instance data (lasso, cone-program, masses or
/// any optimal-control problem). Throws UsageError for the analytic examples,
/// which have no data to freeze.
nlohmann::json export_instance(const ProblemInstance &inst);
/// Rebuilds an instance from export_instance output.
ProblemInstance import_instance(const nlohmann::json &j);

/// One row per stage t = 0..N: t, x_t entries, then u_t entries (empty at t = N).
void write_trajectory_csv(std::ostream &out, const OptimalControl &prob, const Vector &u);

} // namespace supermann
