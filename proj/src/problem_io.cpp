#include "rsg/problem_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rsg/errors.hpp"

namespace rsg {

using Eigen::MatrixXd;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(Errc::kParseError, what); }

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + ": expected a number");
  return v.get<double>();
}

bool is_flat(const json& v) {
  if (!v.is_array()) return false;
  for (const auto& e : v)
    if (!e.is_number()) return false;
  return true;
}

ScalarField scalar_field(const std::vector<const json*>& per_regime, double T, const std::string& key) {
  std::vector<std::vector<double>> nodes;
  bool sampled = false;
  for (std::size_t i = 0; i < per_regime.size(); ++i) {
    const std::string where = key + " (regime " + std::to_string(i + 1) + ")";
    const json* v = per_regime[i];
    if (!v) {
      nodes.push_back({0.0});
    } else if (v->is_number()) {
      nodes.push_back({v->get<double>()});
    } else if (is_flat(*v) && v->size() >= 2) {
      sampled = true;
      std::vector<double> s;
      for (const auto& e : *v) s.push_back(e.get<double>());
      nodes.push_back(std::move(s));
    } else {
      fail(where + ": expected a number or an array of at least two time samples");
    }
  }
  if (!sampled) {
    std::vector<double> c;
    for (auto& n : nodes) c.push_back(n[0]);
    return ScalarField::constant(std::move(c));
  }
  return ScalarField::sampled(std::move(nodes), T);
}

/// One constant r x c value: a number (multiple of the identity when square),
/// a flat array of r*c entries (row-major) or nested rows.
bool matrix_value(const json& v, int r, int c, MatrixXd& out) {
  out = MatrixXd::Zero(r, c);
  if (v.is_number()) {
    const double x = v.get<double>();
    if (r == c) {
      out = x * MatrixXd::Identity(r, c);
      return true;
    }
    if (r * c == 1) {
      out(0, 0) = x;
      return true;
    }
    return false;
  }
  if (is_flat(v) && static_cast<int>(v.size()) == r * c) {
    for (int k = 0; k < r * c; ++k) out(k / c, k % c) = v[k].get<double>();
    return true;
  }
  if (v.is_array() && r > 1 && static_cast<int>(v.size()) == r) {
    for (int a = 0; a < r; ++a) {
      if (!is_flat(v[a]) || static_cast<int>(v[a].size()) != c) return false;
      for (int b = 0; b < c; ++b) out(a, b) = v[a][b].get<double>();
    }
    return true;
  }
  return false;
}

MatrixField matrix_field(const std::vector<const json*>& per_regime, int r, int c, double T, const std::string& key) {
  std::vector<std::vector<MatrixXd>> nodes;
  bool sampled = false;
  for (std::size_t i = 0; i < per_regime.size(); ++i) {
    const std::string where = key + " (regime " + std::to_string(i + 1) + ")";
    const json* v = per_regime[i];
    MatrixXd val;
    if (!v) {
      nodes.push_back({MatrixXd::Zero(r, c)});
    } else if (matrix_value(*v, r, c, val)) {
      nodes.push_back({val});
    } else if (v->is_array() && v->size() >= 2) {
      sampled = true;
      std::vector<MatrixXd> s;
      for (const auto& e : *v) {
        if (!matrix_value(e, r, c, val))
          fail(where + ": time sample is not a " + std::to_string(r) + " x " + std::to_string(c) + " value");
        s.push_back(val);
      }
      nodes.push_back(std::move(s));
    } else {
      fail(where + ": expected a " + std::to_string(r) + " x " + std::to_string(c) + " value or time samples");
    }
  }
  if (!sampled) {
    std::vector<MatrixXd> cst;
    for (auto& n : nodes) cst.push_back(n[0]);
    return MatrixField::constant(std::move(cst));
  }
  return MatrixField::sampled(std::move(nodes), T);
}

std::vector<const json*> entries(const json& section, const char* key, int m) {
  std::vector<const json*> out(m, nullptr);
  for (int i = 0; i < m; ++i) {
    const json& e = section[i];
    if (e.contains(key)) out[i] = &e[key];
  }
  return out;
}

std::vector<double> terminal(const json& section, const char* key, int m, const std::string& name) {
  std::vector<double> out(m, 0.0);
  for (int i = 0; i < m; ++i)
    if (section[i].contains(key)) out[i] = number(section[i][key], name + "." + key);
  return out;
}

json regime_section(const json& doc, const char* key, int m) {
  if (!doc.contains(key)) return json(std::vector<json>(m, json::object()));
  const json& s = doc[key];
  if (!s.is_array() || static_cast<int>(s.size()) != m)
    fail(std::string(key) + ": expected an array with one object per regime");
  for (const auto& e : s)
    if (!e.is_object()) fail(std::string(key) + ": entries must be objects");
  return s;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(where + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace

ProblemSpec parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("top level must be an object");
  reject_unknown(doc,
                 {"generator", "horizon", "steps", "dims", "x0", "initial_regime", "terminal_cost", "dynamics",
                  "follower_cost", "leader_cost", "leader_control"},
                 "problem");

  if (!doc.contains("generator") || !doc["generator"].is_array()) fail("generator: expected a square array");
  const json& gj = doc["generator"];
  const int m = static_cast<int>(gj.size());
  if (m == 0) fail("generator: empty");
  MatrixXd rates(m, m);
  for (int i = 0; i < m; ++i) {
    if (!is_flat(gj[i]) || static_cast<int>(gj[i].size()) != m) fail("generator: expected a square array");
    for (int j = 0; j < m; ++j) rates(i, j) = gj[i][j].get<double>();
  }

  Dims dims;
  if (doc.contains("dims")) {
    const json& d = doc["dims"];
    if (!d.is_object()) fail("dims: expected an object");
    reject_unknown(d, {"m0", "m1", "m2"}, "dims");
    auto dim = [&](const char* k, int& out) {
      if (!d.contains(k)) return;
      if (!d[k].is_number_integer() || d[k].get<int>() < 1) fail(std::string("dims.") + k + ": expected an integer >= 1");
      out = d[k].get<int>();
    };
    dim("m0", dims.m0);
    dim("m1", dims.m1);
    dim("m2", dims.m2);
  }

  ProblemSpec s = ProblemSpec::zero(Generator::validate(rates), 1.0, 1000, dims);
  if (doc.contains("horizon")) s.T = number(doc["horizon"], "horizon");
  if (!(s.T > 0)) fail("horizon: must be positive");
  if (doc.contains("steps")) {
    if (!doc["steps"].is_number_integer() || doc["steps"].get<long long>() < 1) fail("steps: expected an integer >= 1");
    s.N = doc["steps"].get<int>();
  }
  if (doc.contains("x0")) s.x0 = number(doc["x0"], "x0");
  if (doc.contains("initial_regime")) {
    const json& r = doc["initial_regime"];
    if (!r.is_number_integer() || r.get<int>() < 1 || r.get<int>() > m)
      fail("initial_regime: expected an integer in 1.." + std::to_string(m));
    s.initial_regime = r.get<int>() - 1;
  }
  if (doc.contains("terminal_cost")) {
    const json& t = doc["terminal_cost"];
    if (t == "quadratic") s.terminal_form = TerminalForm::kQuadratic;
    else if (t == "linear") s.terminal_form = TerminalForm::kLinear;
    else fail("terminal_cost: expected \"quadratic\" or \"linear\"");
  }

  const double T = s.T;
  const json dyn = regime_section(doc, "dynamics", m);
  for (const auto& e : dyn)
    reject_unknown(e, {"A", "Abar", "C", "Cbar", "b", "sigma", "B_L", "B_F1", "B_F2", "D_L", "D_F1", "D_F2"},
                   "dynamics");
  s.dyn.A = scalar_field(entries(dyn, "A", m), T, "dynamics.A");
  s.dyn.Abar = scalar_field(entries(dyn, "Abar", m), T, "dynamics.Abar");
  s.dyn.C = scalar_field(entries(dyn, "C", m), T, "dynamics.C");
  s.dyn.Cbar = scalar_field(entries(dyn, "Cbar", m), T, "dynamics.Cbar");
  s.dyn.b = scalar_field(entries(dyn, "b", m), T, "dynamics.b");
  s.dyn.sigma = scalar_field(entries(dyn, "sigma", m), T, "dynamics.sigma");
  s.dyn.B_L = matrix_field(entries(dyn, "B_L", m), 1, dims.m0, T, "dynamics.B_L");
  s.dyn.B_F1 = matrix_field(entries(dyn, "B_F1", m), 1, dims.m1, T, "dynamics.B_F1");
  s.dyn.B_F2 = matrix_field(entries(dyn, "B_F2", m), 1, dims.m2, T, "dynamics.B_F2");
  s.dyn.D_L = matrix_field(entries(dyn, "D_L", m), 1, dims.m0, T, "dynamics.D_L");
  s.dyn.D_F1 = matrix_field(entries(dyn, "D_F1", m), 1, dims.m1, T, "dynamics.D_F1");
  s.dyn.D_F2 = matrix_field(entries(dyn, "D_F2", m), 1, dims.m2, T, "dynamics.D_F2");

  const json fc = regime_section(doc, "follower_cost", m);
  for (const auto& e : fc) reject_unknown(e, {"Q", "Qbar", "R1", "R2", "S", "G", "Gbar"}, "follower_cost");
  s.follower.Q = scalar_field(entries(fc, "Q", m), T, "follower_cost.Q");
  s.follower.Qbar = scalar_field(entries(fc, "Qbar", m), T, "follower_cost.Qbar");
  s.follower.R1 = matrix_field(entries(fc, "R1", m), dims.m1, dims.m1, T, "follower_cost.R1");
  s.follower.R2 = matrix_field(entries(fc, "R2", m), dims.m2, dims.m2, T, "follower_cost.R2");
  s.follower.S = matrix_field(entries(fc, "S", m), dims.m1, dims.m2, T, "follower_cost.S");
  s.follower.G = terminal(fc, "G", m, "follower_cost");
  s.follower.Gbar = terminal(fc, "Gbar", m, "follower_cost");

  const json lc = regime_section(doc, "leader_cost", m);
  for (const auto& e : lc) reject_unknown(e, {"Q", "Qbar", "R", "G", "Gbar"}, "leader_cost");
  s.leader.Q = scalar_field(entries(lc, "Q", m), T, "leader_cost.Q");
  s.leader.Qbar = scalar_field(entries(lc, "Qbar", m), T, "leader_cost.Qbar");
  s.leader.R = matrix_field(entries(lc, "R", m), dims.m0, dims.m0, T, "leader_cost.R");
  s.leader.G = terminal(lc, "G", m, "leader_cost");
  s.leader.Gbar = terminal(lc, "Gbar", m, "leader_cost");

  if (doc.contains("leader_control")) {
    const json& uc = doc["leader_control"];
    if (!uc.is_array() || static_cast<int>(uc.size()) != m)
      fail("leader_control: expected an array with one entry per regime");
    std::vector<const json*> ptrs;
    for (const auto& e : uc) ptrs.push_back(&e);
    s.leader_control = matrix_field(ptrs, dims.m0, 1, T, "leader_control");
  }

  validate(s);
  return s;
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

}  // namespace rsg
