#include "shapelab/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "shapelab/errors.hpp"

namespace shapelab {

namespace {

using expr::ScalarExpr;

ScalarExpr P(std::string_view s) { return expr::parse(s); }

struct Spec {
  std::string name;
  std::vector<std::string> constants;
  std::vector<std::string> functions;
};

const std::vector<Spec>& specs() {
  static const std::vector<Spec> s = {
      {"monge", {"c"}, {"psi"}},
      {"moulding", {}, {"phi", "psi"}},
      {"quadric", {"a", "b", "c"}, {}},
      {"dupin", {"a", "b", "c"}, {}},
      {"conf_revolution", {"a", "b", "c"}, {"p", "q"}},
      {"two_param", {"a", "c"}, {}},
      {"one_param", {"c"}, {}},
      {"hyperquadric", {"n", "a1", "a2", "a3", "a4"}, {}},
  };
  return s;
}

const Spec& find_spec(const std::string& name) {
  for (const auto& s : specs())
    if (s.name == name) return s;
  throw ValidationError("unknown example '" + name + "'");
}

int hyperquadric_n(const ExampleParams& p) {
  auto it = p.constants.find("n");
  const double n = it == p.constants.end() ? 3.0 : it->second;
  if (n != 2.0 && n != 3.0) throw ValidationError("hyperquadric: n must be 2 or 3");
  return static_cast<int>(n);
}

ExampleParams merged(const std::string& name, const ExampleParams& given) {
  const Spec& spec = find_spec(name);
  for (const auto& [k, v] : given.constants) {
    if (std::find(spec.constants.begin(), spec.constants.end(), k) == spec.constants.end())
      throw ValidationError("example '" + name + "' has no constant '" + k + "'");
    if (!std::isfinite(v)) throw ValidationError("example '" + name + "': constant '" + k + "' is not finite");
  }
  for (const auto& [k, v] : given.functions) {
    if (std::find(spec.functions.begin(), spec.functions.end(), k) == spec.functions.end())
      throw ValidationError("example '" + name + "' has no function '" + k + "'");
    for (const auto& free : v.free_names())
      if (free != "R2")
        throw ValidationError("example '" + name + "': function '" + k + "' must depend on R2 only, found '" + free + "'");
  }
  ExampleParams out = default_params(name);
  if (name == "hyperquadric" && given.constants.count("n")) {
    ExampleParams n_only;
    n_only.constants["n"] = given.constants.at("n");
    out = default_params(name);
    out.constants["n"] = given.constants.at("n");
    if (hyperquadric_n(n_only) == 2) {
      out.constants.erase("a4");
      out.constants["a1"] = 1;
      out.constants["a2"] = 2;
      out.constants["a3"] = 3;
    }
  }
  for (const auto& [k, v] : given.constants) out.constants[k] = v;
  for (const auto& [k, v] : given.functions) out.functions[k] = v;
  if (name == "hyperquadric" && hyperquadric_n(out) == 2 && out.constants.count("a4"))
    throw ValidationError("hyperquadric with n = 2 takes a1..a3");
  return out;
}

ScalarExpr instantiate(ScalarExpr e, const ExampleParams& p) {
  for (const auto& [name, f] : p.functions) e = e.substitute(name, f);
  return e.bind(p.constants);
}

std::vector<double> roots(const ExampleParams& p, int n) {
  std::vector<double> a;
  for (int s = 1; s <= n + 1; ++s) a.push_back(p.constants.at("a" + std::to_string(s)));
  return a;
}

// P(R) = prod (R - a_s) in the coordinate R<axis+1>.
ScalarExpr hyper_poly(const std::vector<double>& a, int axis) {
  ScalarExpr prod = ScalarExpr::constant(1.0);
  for (double r : a) prod = prod * (ScalarExpr::coordinate(axis) - r);
  return prod;
}

}  // namespace

const std::vector<std::string>& example_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& s : specs()) n.push_back(s.name);
    return n;
  }();
  return names;
}

ExampleParams default_params(const std::string& name) {
  find_spec(name);
  ExampleParams p;
  if (name == "monge") {
    p.constants = {{"c", 0.3}};
    p.functions = {{"psi", P("1 + 0.1*sin(R2)")}};
  } else if (name == "moulding") {
    p.functions = {{"phi", P("0.1*sin(R2)")}, {"psi", P("1 + 0.1*cos(R2)")}};
  } else if (name == "quadric") {
    p.constants = {{"a", -6}, {"b", 11}, {"c", -6}};
  } else if (name == "dupin") {
    p.constants = {{"a", 1}, {"b", -0.5}, {"c", -2}};
  } else if (name == "conf_revolution") {
    p.constants = {{"a", 1}, {"b", -0.5}, {"c", -2}};
    p.functions = {{"p", P("1 + 0.1*sin(R2)")}};
  } else if (name == "two_param") {
    p.constants = {{"a", 0.2}, {"c", 0.8}};
  } else if (name == "one_param") {
    p.constants = {{"c", 0.5}};
  } else if (name == "hyperquadric") {
    p.constants = {{"n", 3}, {"a1", 0}, {"a2", 1}, {"a3", 2}, {"a4", 3}};
  }
  return p;
}

GridDomain default_domain(const std::string& name, const ExampleParams& params, int samples) {
  GridDomain d;
  if (name == "monge" || name == "moulding") {
    d.lo = {0.3, 0.0};
    d.hi = {1.2, 1.0};
  } else if (name == "quadric") {
    d.lo = {1.0, 2.0};
    d.hi = {2.0, 3.0};
  } else if (name == "dupin" || name == "conf_revolution") {
    d.lo = {2.0, 0.0};
    d.hi = {3.0, 1.0};
  } else if (name == "two_param") {
    d.lo = {4.5, 2.0};
    d.hi = {5.5, 3.0};
  } else if (name == "one_param") {
    d.lo = {0.0, 0.0};
    d.hi = {1.0, 1.0};
  } else if (name == "hyperquadric") {
    const ExampleParams p = merged(name, params);
    const int n = hyperquadric_n(p);
    const auto a = roots(p, n);
    for (int i = 1; i <= n; ++i) {
      d.lo.push_back(a[i - 1]);
      d.hi.push_back(a[i]);
    }
  } else {
    find_spec(name);
  }
  const int count = samples > 0 ? samples : (d.lo.size() == 3 ? 24 : 64);
  d.count.assign(d.lo.size(), count);
  return d;
}

ExampleBundle make_example(const std::string& name, const ExampleParams& given,
                           const std::optional<GridDomain>& domain) {
  ExampleBundle b;
  b.name = name;
  b.params = merged(name, given);
  b.domain = domain ? *domain : default_domain(name, b.params);
  const ExampleParams& p = b.params;
  std::vector<ScalarExpr> G;
  ScalarExpr a, bb;

  if (name == "monge") {
    G = {P("1/(1 + c/cos(R1)^2)"), P("sin(R1)^2/psi")};
    a = P("0");
    bb = P("cos(R1)/sin(R1)");
    b.family_dim = {1, 1};
    b.ode_description = "d2 k1 = 0, d1 k2 / (k1 - k2) = cot(R1)";
  } else if (name == "moulding") {
    G = {P("1"), P("sin(R1 + phi)^2/psi")};
    a = P("0");
    bb = P("cos(R1 + phi)/sin(R1 + phi)");
    b.family_dim = {0, 1};
    b.ode_description = "d2 k1 = 0, d1 k2 / (k1 - k2) = cot(R1 + phi(R2))";
  } else if (name == "quadric") {
    G = {P("(R2 - R1)/(4*(R1^3 + a*R1^2 + b*R1 + c))"), P("-(R2 - R1)/(4*(R2^3 + a*R2^2 + b*R2 + c))")};
    a = P("1/(2*(R2 - R1))");
    bb = P("1/(2*(R1 - R2))");
    b.family_dim = {3, 0};
  } else if (name == "dupin") {
    G = {P("1/((R1 - R2)^2*(a*R1^2 + b*R1 + c))"), P("-1/((R1 - R2)^2*(a*R2^2 + b*R2 + c + 1))")};
    a = P("1/(R1 - R2)");
    bb = P("1/(R2 - R1)");
    b.family_dim = {3, 0};
  } else if (name == "conf_revolution") {
    G = {P("p^2/((R1 - R2)^2*(a*R1^2 + b*R1 + c))"),
         P("-(p + dp*(R1 - R2))^2/((R1 - R2)^2*(a*R2^2 + b*R2 + c + p^2))")};
    a = P("1/(R1 - R2) + dp/p");
    bb = P("1/(R2 - R1) + dp/(p + dp*(R1 - R2))");
    const ScalarExpr dp = expr::differentiate(p.functions.at("p"), "R2");
    for (auto& g : G) g = g.substitute("dp", dp);
    a = a.substitute("dp", dp);
    bb = bb.substitute("dp", dp);
    b.family_dim = {3, 0};
  } else if (name == "two_param") {
    G = {P("(R1 - R2)/((R1 + R2)^2*(a*R1^2 - R1 + c))"), P("-(R1 - R2)/((R1 + R2)^2*(a*R2^2 - R2 + c))")};
    a = P("1/(2*(R2 - R1)) - 1/(R1 + R2)");
    bb = P("1/(2*(R1 - R2)) - 1/(R1 + R2)");
    b.family_dim = {2, 0};
  } else if (name == "one_param") {
    G = {P("2/(cosh(R1 + R2)^2*(1 + c))"), P("2/(cosh(R1 + R2)^2*(1 - c))")};
    a = P("-tanh(R1 + R2)");
    bb = P("-tanh(R1 + R2)");
    b.family_dim = {1, 0};
  } else if (name == "hyperquadric") {
    const int n = hyperquadric_n(p);
    const auto r = roots(p, n);
    b.family_dim = {n + 1, 0};
    b.codazzi.n = n;
    b.codazzi.chi.assign(n, std::vector<ScalarField>(n, constant_field(0.0)));
    for (int i = 0; i < n; ++i) {
      ScalarExpr num = ScalarExpr::constant(1.0);
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        num = num * (ScalarExpr::coordinate(i) - ScalarExpr::coordinate(k));
        b.codazzi.chi[i][k] = 1.0 / (2.0 * (ScalarExpr::coordinate(k) - ScalarExpr::coordinate(i)));
      }
      G.push_back(-num / (4.0 * hyper_poly(r, i)));
    }
  }

  std::vector<ScalarField> fields;
  for (auto& g : G) fields.emplace_back(instantiate(g, p));
  b.metric = DiagonalMetric(std::move(fields), Grid::from_domain(b.domain));
  if (name != "hyperquadric") {
    a = instantiate(a, p);
    bb = instantiate(bb, p);
    b.codazzi = CodazziCoeffs::from_ab(a, bb);
  }
  if (name != "monge" && name != "moulding") b.curvatures = closed_form_curvatures(name, p);
  return b;
}

CurvatureField closed_form_curvatures(const std::string& name, const ExampleParams& given) {
  const ExampleParams p = merged(name, given);
  std::vector<ScalarExpr> k;
  if (name == "monge") {
    throw ValidationError("monge has no closed-form radii; they solve d2 k1 = 0, d1 k2 / (k1 - k2) = cot(R1)");
  } else if (name == "moulding") {
    throw ValidationError(
        "moulding has no closed-form radii; they solve d2 k1 = 0, d1 k2 / (k1 - k2) = cot(R1 + phi(R2))");
  } else if (name == "quadric") {
    k = {P("1/(R1*sqrt(R1*R2))"), P("1/(R2*sqrt(R1*R2))")};
  } else if (name == "dupin") {
    k = {P("R2"), P("R1")};
  } else if (name == "conf_revolution") {
    const ScalarExpr pf = p.functions.at("p");
    const ScalarExpr q = p.functions.count("q") ? p.functions.at("q") : 1.0 / pf;
    const ScalarExpr dp = expr::differentiate(pf, "R2");
    const ScalarExpr dq = expr::differentiate(q, "R2");
    const ScalarExpr d = ScalarExpr::coordinate(0) - ScalarExpr::coordinate(1);
    k = {q, q + dq * pf * d / (pf + dp * d)};
  } else if (name == "two_param") {
    k = {P("(R1 + R2)^2/(R1^2.5*R2^1.5)"), P("(R1 + R2)^2/(R1^1.5*R2^2.5)")};
  } else if (name == "one_param") {
    k = {P("cosh(R1 + R2)^2"), P("-cosh(R1 + R2)^2")};
  } else if (name == "hyperquadric") {
    const int n = hyperquadric_n(p);
    ScalarExpr prod = ScalarExpr::constant(1.0);
    for (int i = 0; i < n; ++i) prod = prod * ScalarExpr::coordinate(i);
    for (int i = 0; i < n; ++i) k.push_back(1.0 / (ScalarExpr::coordinate(i) * expr::sqrt(prod)));
  }
  CurvatureField out;
  for (auto& e : k) out.k.emplace_back(instantiate(e, p));
  return out;
}

ExampleParams random_params(const std::string& name, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int attempt = 0; attempt < 200; ++attempt) {
    ExampleParams p = default_params(name);
    auto& c = p.constants;
    auto& f = p.functions;
    if (name == "monge") {
      c["c"] = 0.5 + 0.5 * u(rng);
      f["psi"] = 1.0 + (0.5 + 0.5 * u(rng)) * expr::pow(ScalarExpr::coordinate(1), 2.0);
    } else if (name == "moulding") {
      f["phi"] = (0.2 * u(rng)) * expr::sin(ScalarExpr::coordinate(1));
      f["psi"] = 1.0 + (0.25 + 0.25 * u(rng)) * expr::cos(ScalarExpr::coordinate(1));
    } else if (name == "quadric") {
      const double r1 = 1 + 0.04 * u(rng), r2 = 2 + 0.04 * u(rng), r3 = 3 + 0.04 * u(rng);
      c["a"] = -(r1 + r2 + r3);
      c["b"] = r1 * r2 + r1 * r3 + r2 * r3;
      c["c"] = -r1 * r2 * r3;
    } else if (name == "dupin" || name == "conf_revolution") {
      c["a"] += 0.1 * u(rng);
      c["b"] += 0.1 * u(rng);
      c["c"] += 0.1 * u(rng);
      if (name == "conf_revolution")
        f["p"] = 1.0 + (0.1 + 0.1 * u(rng)) * expr::sin(ScalarExpr::coordinate(1));
    } else if (name == "two_param") {
      c["a"] += 0.01 * u(rng);
      c["c"] += 0.03 * u(rng);
    } else if (name == "one_param") {
      c["c"] = 0.8 * u(rng);
    } else if (name == "hyperquadric") {
      for (int s = 1; s <= 4; ++s) c["a" + std::to_string(s)] = (s - 1) + 0.04 * u(rng);
    } else {
      find_spec(name);
    }
    try {
      const ExampleBundle b = make_example(name, p, default_domain(name, default_params(name)));
      if (b.metric.riemannian()) return p;
    } catch (const ValidationError&) {
    }
  }
  throw ValidationError("no admissible random parameters found for '" + name + "'");
}

}  // namespace shapelab
