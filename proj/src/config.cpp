#include "conelq/config.hpp"

#include <json.hpp>
#include <set>

#include "conelq/errors.hpp"

namespace conelq {

using nlohmann::json;

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::Solve: return "solve";
    case Mode::Simulate: return "simulate";
    case Mode::Verify: return "verify";
    case Mode::Oracle: return "oracle";
    case Mode::Gap: return "gap";
  }
  return "?";
}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw SchemaError("config: " + path + ": " + what);
}

[[noreturn]] void value_error(const std::string& path, const std::string& what) {
  throw ConfigValueError("config: " + path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& known) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) schema_error(path + "." + it.key(), "unknown field");
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) schema_error(path, "expected an integer");
  return v.get<int>();
}

Vector as_vector(const json& v, const std::string& path, int dim) {
  if (!v.is_array()) schema_error(path, "expected an array of numbers");
  Vector out((int)v.size());
  for (int i = 0; i < (int)v.size(); ++i) out(i) = as_number(v[i], path + "[" + std::to_string(i) + "]");
  if (dim >= 0 && out.size() != dim)
    value_error(path, "expected length " + std::to_string(dim));
  return out;
}

Matrix as_matrix(const json& v, const std::string& path, int rows, int cols) {
  if (!v.is_array() || v.empty()) schema_error(path, "expected an array of rows");
  int r = (int)v.size();
  Vector first = as_vector(v[0], path + "[0]", -1);
  Matrix out(r, (int)first.size());
  out.row(0) = first;
  for (int i = 1; i < r; ++i) {
    Vector row = as_vector(v[i], path + "[" + std::to_string(i) + "]", (int)first.size());
    out.row(i) = row;
  }
  if (rows >= 0 && (out.rows() != rows || out.cols() != cols))
    value_error(path, "expected shape " + std::to_string(rows) + "x" + std::to_string(cols));
  return out;
}

// Scalar or per-interval array.
std::vector<double> scalar_table(const json& v, const std::string& path, int n) {
  if (v.is_number()) return std::vector<double>(n, v.get<double>());
  if (!v.is_array()) schema_error(path, "expected a number or array");
  if ((int)v.size() != n) value_error(path, "expected " + std::to_string(n) + " entries");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = as_number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

// Vector or per-interval array of vectors.
std::vector<Vector> vector_table(const json& v, const std::string& path, int n, int dim) {
  if (!v.is_array() || v.empty()) schema_error(path, "expected an array");
  if (v[0].is_number()) return std::vector<Vector>(n, as_vector(v, path, dim));
  if ((int)v.size() != n) value_error(path, "expected " + std::to_string(n) + " entries");
  std::vector<Vector> out;
  for (int i = 0; i < n; ++i) out.push_back(as_vector(v[i], path + "[" + std::to_string(i) + "]", dim));
  return out;
}

// Matrix or per-interval array of matrices.
std::vector<Matrix> matrix_table(const json& v, const std::string& path, int n, int dim) {
  if (!v.is_array() || v.empty()) schema_error(path, "expected an array");
  if (v[0].is_array() && !v[0].empty() && v[0][0].is_number())
    return std::vector<Matrix>(n, as_matrix(v, path, dim, dim));
  if ((int)v.size() != n) value_error(path, "expected " + std::to_string(n) + " entries");
  std::vector<Matrix> out;
  for (int i = 0; i < n; ++i)
    out.push_back(as_matrix(v[i], path + "[" + std::to_string(i) + "]", dim, dim));
  return out;
}

Cone parse_cone(const json& v, const std::string& path, int dim) {
  if (!v.is_object()) schema_error(path, "expected an object");
  reject_unknown(v, path, {"type", "vectors"});
  std::string type = require(v, path, "type").get<std::string>();
  std::vector<Vector> vecs;
  if (v.contains("vectors")) {
    const json& arr = v["vectors"];
    if (!arr.is_array()) schema_error(path + ".vectors", "expected an array");
    for (int i = 0; i < (int)arr.size(); ++i)
      vecs.push_back(as_vector(arr[i], path + ".vectors[" + std::to_string(i) + "]", dim));
  }
  if (type == "full") return Cone::full_space(dim);
  if (type == "zero") return Cone::zero(dim);
  if (type == "orthant") return Cone::nonnegative_orthant(dim);
  if (type == "rays") return Cone::rays(dim, vecs);
  if (type == "halfspaces") return Cone::halfspaces(dim, vecs);
  if (type == "subspace") return Cone::subspace(dim, vecs);
  value_error(path + ".type", "unknown cone type '" + type + "'");
}

Mode parse_mode(const json& v, const std::string& path) {
  std::string m = v.get<std::string>();
  if (m == "solve") return Mode::Solve;
  if (m == "simulate") return Mode::Simulate;
  if (m == "verify") return Mode::Verify;
  if (m == "oracle") return Mode::Oracle;
  if (m == "gap") return Mode::Gap;
  value_error(path, "unknown mode '" + m + "'");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("config: top level must be an object");
  reject_unknown(root, "$", {"schema_version", "mode", "problem", "sim", "oracle", "tolerances"});

  int schema_version = as_int(require(root, "$", "schema_version"), "schema_version");
  if (schema_version != 1) value_error("schema_version", "unsupported version");
  Mode mode = parse_mode(require(root, "$", "mode"), "mode");

  const json& prob = require(root, "$", "problem");
  if (!prob.is_object()) schema_error("problem", "expected an object");
  reject_unknown(prob, "problem", {"x0", "horizon", "n_steps", "market", "cone", "cost"});
  double x0 = as_number(require(prob, "problem", "x0"), "problem.x0");
  double horizon = as_number(require(prob, "problem", "horizon"), "problem.horizon");
  if (horizon <= 0.0) value_error("problem.horizon", "must be positive");
  int n_steps = as_int(require(prob, "problem", "n_steps"), "problem.n_steps");
  if (n_steps < 1) value_error("problem.n_steps", "must be at least 1");
  TimeGrid grid(horizon, n_steps);

  const json& mkt = require(prob, "problem", "market");
  if (!mkt.is_object()) schema_error("problem.market", "expected an object");
  reject_unknown(mkt, "problem.market", {"r", "b", "sigma", "nondegeneracy_k"});
  const json& bj = require(mkt, "problem.market", "b");
  // deduce dimension from the first b vector
  int dim;
  if (bj.is_array() && !bj.empty() && bj[0].is_number())
    dim = (int)bj.size();
  else if (bj.is_array() && !bj.empty())
    dim = (int)bj[0].size();
  else
    schema_error("problem.market.b", "expected a vector or array of vectors");
  if (dim < 1) value_error("problem.market.b", "dimension must be at least 1");
  auto r = scalar_table(require(mkt, "problem.market", "r"), "problem.market.r", n_steps);
  auto b = vector_table(bj, "problem.market.b", n_steps, dim);
  auto sigma =
      matrix_table(require(mkt, "problem.market", "sigma"), "problem.market.sigma", n_steps, dim);
  double ndk = mkt.contains("nondegeneracy_k")
                   ? as_number(mkt["nondegeneracy_k"], "problem.market.nondegeneracy_k")
                   : 1e-10;
  if (ndk <= 0.0) value_error("problem.market.nondegeneracy_k", "must be positive");
  MarketModel market(grid, dim, r, b, sigma, ndk);

  Cone cone = parse_cone(require(prob, "problem", "cone"), "problem.cone", dim);

  const json& cst = require(prob, "problem", "cost");
  if (!cst.is_object()) schema_error("problem.cost", "expected an object");
  reject_unknown(cst, "problem.cost", {"a", "c", "Q", "S", "R"});
  double a = as_number(require(cst, "problem.cost", "a"), "problem.cost.a");
  if (a <= 0.0) value_error("problem.cost.a", "must be positive");
  double c = cst.contains("c") ? as_number(cst["c"], "problem.cost.c") : 0.0;
  QuadraticCost cost = QuadraticCost::zero_running(grid, dim, a, c);
  if (cst.contains("Q")) cost.Q = scalar_table(cst["Q"], "problem.cost.Q", n_steps);
  if (cst.contains("S")) cost.S = vector_table(cst["S"], "problem.cost.S", n_steps, dim);
  if (cst.contains("R")) cost.R = matrix_table(cst["R"], "problem.cost.R", n_steps, dim);
  try {
    cost.validate(grid, dim);
  } catch (const std::exception& e) {
    value_error("problem.cost", e.what());
  }

  SimConfig sim;
  if (root.contains("sim")) {
    const json& s = root["sim"];
    if (!s.is_object()) schema_error("sim", "expected an object");
    reject_unknown(s, "sim", {"n_paths", "seed", "scheme", "antithetic"});
    if (s.contains("n_paths")) sim.n_paths = as_int(s["n_paths"], "sim.n_paths");
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned() && !s["seed"].is_number_integer())
        schema_error("sim.seed", "expected an integer");
      sim.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("scheme")) {
      std::string sch = s["scheme"].get<std::string>();
      if (sch == "euler")
        sim.scheme = Scheme::Euler;
      else if (sch == "exact_exponential")
        sim.scheme = Scheme::ExactExponential;
      else
        value_error("sim.scheme", "unknown scheme '" + sch + "'");
    }
    if (s.contains("antithetic")) {
      if (!s["antithetic"].is_boolean()) schema_error("sim.antithetic", "expected a boolean");
      sim.antithetic = s["antithetic"].get<bool>();
    }
    try {
      sim.validate();
    } catch (const std::exception& e) {
      value_error("sim", e.what());
    }
  }

  OracleConfig oracle;
  if (root.contains("oracle")) {
    const json& o = root["oracle"];
    if (!o.is_object()) schema_error("oracle", "expected an object");
    reject_unknown(o, "oracle", {"noise", "gh_nodes", "n_steps"});
    if (o.contains("noise")) {
      std::string nm = o["noise"].get<std::string>();
      if (nm == "binomial")
        oracle.dp.noise = NoiseModel::Binomial;
      else if (nm == "gauss_hermite")
        oracle.dp.noise = NoiseModel::GaussHermite;
      else
        value_error("oracle.noise", "unknown noise model '" + nm + "'");
    }
    if (o.contains("gh_nodes")) oracle.dp.gh_nodes = as_int(o["gh_nodes"], "oracle.gh_nodes");
    if (oracle.dp.gh_nodes < 2) value_error("oracle.gh_nodes", "need at least two nodes");
    if (o.contains("n_steps")) oracle.n_steps = as_int(o["n_steps"], "oracle.n_steps");
    if (oracle.n_steps < 1) value_error("oracle.n_steps", "must be at least 1");
  } else if (dim > 2) {
    oracle.dp.noise = NoiseModel::GaussHermite;
  }

  Tolerances tol;
  if (root.contains("tolerances")) {
    const json& t = root["tolerances"];
    if (!t.is_object()) schema_error("tolerances", "expected an object");
    reject_unknown(t, "tolerances", {"check", "gap_sigmas"});
    if (t.contains("check")) tol.check = as_number(t["check"], "tolerances.check");
    if (t.contains("gap_sigmas")) tol.gap_sigmas = as_number(t["gap_sigmas"], "tolerances.gap_sigmas");
    if (tol.check <= 0.0) value_error("tolerances.check", "must be positive");
    if (tol.gap_sigmas <= 0.0) value_error("tolerances.gap_sigmas", "must be positive");
  }

  return RunConfig{schema_version, mode, ConeQRMProblem(market, cone, a, x0),
                   cost,           sim,  oracle,
                   tol};
}

}  // namespace conelq
