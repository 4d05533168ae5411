#pragma once

#include "supermann/engine.hpp"

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

namespace supermann {

/// Shortest round-trip decimal form ("%.17g"); non-finite values as nan/inf.
std::string format_double(double v);
double parse_double(const std::string &text);

inline constexpr const char *kTraceHeader =
    "k,kind,tau,backtracks,rho,norm_Rx,norm_d,eta,r_safe,T_evals";

/// One row per record; rho is left empty when absent.
void write_trace_csv(std::ostream &out, const std::vector<StepRecord> &trace);
void write_trace_csv(const std::string &path, const std::vector<StepRecord> &trace);
/// Throws UsageError on a malformed file.
std::vector<StepRecord> read_trace_csv(std::istream &in);
std::vector<StepRecord> read_trace_csv(const std::string &path);

nlohmann::json summary_to_json(const Summary &s);
/// Reads the core keys; unknown keys are ignored.
Summary summary_from_json(const nlohmann::json &j);

void write_json(const std::string &path, const nlohmann::json &j);
nlohmann::json read_json(const std::string &path);

} // namespace supermann
