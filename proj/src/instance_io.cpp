#include "supermann/instance_io.hpp"

#include "supermann/errors.hpp"
#include "supermann/rng.hpp"
#include "supermann/trace_io.hpp"

#include <ostream>

namespace supermann {

using nlohmann::json;

json matrix_to_json(const Matrix &M) {
  json j{{"rows", M.rows()}, {"cols", M.cols()}};
  if (M.size() <= kDenseEntryLimit) {
    j["layout"] = "row-major";
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(M.size()));
    for (Index i = 0; i < M.rows(); ++i)
      for (Index k = 0; k < M.cols(); ++k)
        data.push_back(M(i, k));
    j["data"] = std::move(data);
  } else {
    j["layout"] = "triplets";
    auto entries = json::array();
    for (Index i = 0; i < M.rows(); ++i)
      for (Index k = 0; k < M.cols(); ++k)
        if (M(i, k) != 0.0)
          entries.push_back({i, k, M(i, k)});
    j["entries"] = std::move(entries);
  }
  return j;
}

Matrix matrix_from_json(const json &j) {
  try {
    const Index rows = j.at("rows").get<Index>(), cols = j.at("cols").get<Index>();
    if (rows < 0 || cols < 0)
      throw UsageError("matrix dimensions must be nonnegative");
    Matrix M = Matrix::Zero(rows, cols);
    const auto layout = j.at("layout").get<std::string>();
    if (layout == "row-major") {
      const auto &data = j.at("data");
      if (static_cast<Index>(data.size()) != rows * cols)
        throw UsageError("matrix data length does not match rows * cols");
      for (Index i = 0; i < rows; ++i)
        for (Index k = 0; k < cols; ++k)
          M(i, k) = data[static_cast<std::size_t>(i * cols + k)].get<double>();
    } else if (layout == "triplets") {
      for (const auto &e : j.at("entries")) {
        const Index i = e.at(0).get<Index>(), k = e.at(1).get<Index>();
        if (i < 0 || i >= rows || k < 0 || k >= cols)
          throw UsageError("matrix triplet out of range");
        M(i, k) = e.at(2).get<double>();
      }
    } else {
      throw UsageError("unknown matrix layout '" + layout + "'");
    }
    return M;
  } catch (const json::exception &e) {
    throw UsageError(std::string("malformed matrix: ") + e.what());
  }
}

json vector_to_json(const Vector &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json &j) {
  try {
    const auto data = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(data.data(), static_cast<Index>(data.size()));
  } catch (const json::exception &e) {
    throw UsageError(std::string("malformed vector: ") + e.what());
  }
}

namespace {

json layout_to_json(const std::vector<ConeBlock> &cone) {
  auto j = json::array();
  for (const auto &b : cone)
    j.push_back({{"kind", cone_kind_name(b.kind)}, {"dim", b.dim}});
  return j;
}

std::vector<ConeBlock> layout_from_json(const json &j) {
  std::vector<ConeBlock> cone;
  for (const auto &b : j)
    cone.push_back({cone_kind_from_name(b.at("kind").get<std::string>()), b.at("dim").get<Index>()});
  return cone;
}

} // namespace

json export_instance(const ProblemInstance &inst) {
  json header{{"problem", inst.name},
              {"seed", inst.seed},
              {"generator", std::string(Rng::kName)},
              {"metadata", inst.metadata}};
  json data;
  if (const auto *p = std::get_if<Lasso>(&inst.data)) {
    header["dimensions"] = {{"m", p->A.rows()}, {"n", p->A.cols()}};
    data = {{"A", matrix_to_json(p->A)}, {"b", vector_to_json(p->b)}, {"nu", p->nu}};
  } else if (const auto *p = std::get_if<ConeProgram>(&inst.data)) {
    header["dimensions"] = {{"m", p->m()}, {"n", p->n()}};
    header["cone"] = layout_to_json(p->cone);
    data = {{"A", matrix_to_json(p->A)}, {"b", vector_to_json(p->b)}, {"c", vector_to_json(p->c)}};
    if (!inst.known_fixed_points.empty())
      data["planted_fixed_point"] = vector_to_json(inst.known_fixed_points.front());
    if (inst.metadata.contains("residual_tol"))
      data["residual_tol"] = inst.metadata["residual_tol"];
  } else if (const auto *p = std::get_if<OptimalControl>(&inst.data)) {
    header["dimensions"] = {{"nx", p->nx()}, {"nu", p->nu()}, {"horizon", p->horizon}};
    data = {{"A", matrix_to_json(p->A)},        {"B", matrix_to_json(p->B)},
            {"x0", vector_to_json(p->x0)},      {"q_diag", vector_to_json(p->q_diag)},
            {"u_lo", vector_to_json(p->u_lo)},  {"u_hi", vector_to_json(p->u_hi)},
            {"x_lo", vector_to_json(p->x_lo)},  {"x_hi", vector_to_json(p->x_hi)}};
  } else {
    throw UsageError("problem '" + inst.name + "' has no exportable data");
  }
  return {{"header", header}, {"data", data}};
}

ProblemInstance import_instance(const json &j) {
  try {
    const auto &header = j.at("header");
    const auto &data = j.at("data");
    const auto name = header.at("problem").get<std::string>();
    const auto seed = header.value("seed", std::uint64_t{0});
    ProblemInstance inst;
    if (name == "lasso") {
      Lasso p{matrix_from_json(data.at("A")), vector_from_json(data.at("b")),
              data.at("nu").get<double>()};
      inst = lasso_instance(std::move(p), seed);
    } else if (name == "cone-program") {
      ConeProgram p{matrix_from_json(data.at("A")), vector_from_json(data.at("b")),
                    vector_from_json(data.at("c")), layout_from_json(header.at("cone"))};
      std::optional<Vector> planted;
      if (data.contains("planted_fixed_point"))
        planted = vector_from_json(data["planted_fixed_point"]);
      inst = cone_program_instance(std::move(p), seed, data.value("residual_tol", 1e-6), planted);
    } else {
      if (!data.contains("B"))
        throw UsageError("instance '" + name + "' is not an exportable problem");
      OptimalControl p;
      p.A = matrix_from_json(data.at("A"));
      p.B = matrix_from_json(data.at("B"));
      p.horizon = header.at("dimensions").at("horizon").get<int>();
      p.x0 = vector_from_json(data.at("x0"));
      p.q_diag = vector_from_json(data.at("q_diag"));
      p.u_lo = vector_from_json(data.at("u_lo"));
      p.u_hi = vector_from_json(data.at("u_hi"));
      p.x_lo = vector_from_json(data.at("x_lo"));
      p.x_hi = vector_from_json(data.at("x_hi"));
      inst = optimal_control_instance(std::move(p), name, seed);
    }
    if (header.contains("metadata"))
      for (const auto &[key, value] : header["metadata"].items())
        if (!inst.metadata.contains(key))
          inst.metadata[key] = value;
    return inst;
  } catch (const json::exception &e) {
    throw UsageError(std::string("malformed instance file: ") + e.what());
  }
}

void write_trajectory_csv(std::ostream &out, const OptimalControl &prob, const Vector &u) {
  if (u.size() != prob.input_dim())
    throw UsageError("trajectory: input sequence has the wrong length");
  const Vector x = prob.simulate(u);
  out << 't';
  for (Index i = 0; i < prob.nx(); ++i)
    out << ",x" << i;
  for (Index i = 0; i < prob.nu(); ++i)
    out << ",u" << i;
  out << '\n';
  for (int t = 0; t <= prob.horizon; ++t) {
    out << t;
    const Vector xt = t == 0 ? prob.x0 : Vector(x.segment((t - 1) * prob.nx(), prob.nx()));
    for (Index i = 0; i < prob.nx(); ++i)
      out << ',' << format_double(xt(i));
    for (Index i = 0; i < prob.nu(); ++i)
      out << ',' << (t < prob.horizon ? format_double(u(t * prob.nu() + i)) : std::string());
    out << '\n';
  }
}

} // namespace supermann
