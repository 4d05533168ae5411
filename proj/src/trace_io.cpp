#include "supermann/trace_io.hpp"

#include "supermann/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace supermann {

std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string &text) {
  if (text.empty())
    throw UsageError("expected a number, got an empty field");
  char *end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size())
    throw UsageError("malformed number '" + text + "'");
  return v;
}

namespace {

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ','))
    fields.push_back(field);
  if (!line.empty() && line.back() == ',')
    fields.emplace_back();
  return fields;
}

long parse_long(const std::string &text) {
  const double v = parse_double(text);
  if (v != std::floor(v))
    throw UsageError("expected an integer, got '" + text + "'");
  return static_cast<long>(v);
}

} // namespace

void write_trace_csv(std::ostream &out, const std::vector<StepRecord> &trace) {
  out << kTraceHeader << '\n';
  for (const auto &r : trace) {
    out << r.k << ',' << step_kind_code(r.kind) << ',' << format_double(r.tau) << ','
        << r.backtracks << ',' << (r.rho ? format_double(*r.rho) : std::string()) << ','
        << format_double(r.norm_Rx) << ',' << format_double(r.norm_d) << ','
        << format_double(r.eta) << ',' << format_double(r.r_safe) << ',' << r.T_evals << '\n';
  }
}

void write_trace_csv(const std::string &path, const std::vector<StepRecord> &trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw UsageError("cannot open '" + path + "' for writing");
  write_trace_csv(out, trace);
}

std::vector<StepRecord> read_trace_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw UsageError("trace CSV header mismatch");
  std::vector<StepRecord> trace;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const auto f = split_csv(line);
    if (f.size() != 10)
      throw UsageError("trace CSV row has " + std::to_string(f.size()) + " fields");
    StepRecord r;
    r.k = parse_long(f[0]);
    r.kind = step_kind_from_code(f[1]);
    r.tau = parse_double(f[2]);
    r.backtracks = static_cast<int>(parse_long(f[3]));
    if (!f[4].empty())
      r.rho = parse_double(f[4]);
    r.norm_Rx = parse_double(f[5]);
    r.norm_d = parse_double(f[6]);
    r.eta = parse_double(f[7]);
    r.r_safe = parse_double(f[8]);
    r.T_evals = static_cast<std::uint64_t>(parse_long(f[9]));
    trace.push_back(r);
  }
  return trace;
}

std::vector<StepRecord> read_trace_csv(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw UsageError("cannot open '" + path + "'");
  return read_trace_csv(in);
}

nlohmann::json summary_to_json(const Summary &s) {
  nlohmann::json j;
  j["status"] = status_name(s.status);
  j["iterations"] = s.iterations;
  j["T_evals"] = s.T_evals;
  j["final_residual"] = s.final_residual;
  j["k0_steps"] = s.k0_steps;
  j["k1_steps"] = s.k1_steps;
  j["k2_steps"] = s.k2_steps;
  j["fallback_steps"] = s.fallback_steps;
  j["wall_time_s"] = s.wall_time_s;
  return j;
}

Summary summary_from_json(const nlohmann::json &j) {
  Summary s;
  try {
    s.status = status_from_name(j.at("status").get<std::string>());
    s.iterations = j.at("iterations").get<long>();
    s.T_evals = j.at("T_evals").get<std::uint64_t>();
    s.final_residual = j.at("final_residual").get<double>();
    s.k0_steps = j.at("k0_steps").get<long>();
    s.k1_steps = j.at("k1_steps").get<long>();
    s.k2_steps = j.at("k2_steps").get<long>();
    s.fallback_steps = j.at("fallback_steps").get<long>();
    s.wall_time_s = j.at("wall_time_s").get<double>();
    if (j.contains("reason"))
      s.reason = j["reason"].get<std::string>();
  } catch (const nlohmann::json::exception &e) {
    throw UsageError(std::string("malformed summary JSON: ") + e.what());
  }
  return s;
}

void write_json(const std::string &path, const nlohmann::json &j) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw UsageError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw UsageError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw UsageError("malformed JSON in '" + path + "': " + e.what());
  }
}

} // namespace supermann
