#include "shapelab/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shapelab/io.hpp"

namespace shapelab {

double ResidualReport::max() const {
  double m = 0.0;
  for (const auto& e : equations) m = std::max(m, e.max);
  return m;
}

double ResidualReport::mean() const {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& e : equations) {
    total += e.mean * static_cast<double>(e.count);
    n += e.count;
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

bool ResidualReport::passes(double tol) const {
  std::size_t counted = 0;
  for (const auto& e : equations) counted += e.count;
  return counted > 0 && max() <= tol;
}

nlohmann::json ResidualReport::to_json() const {
  nlohmann::json j;
  j["title"] = title;
  j["max"] = max();
  j["mean"] = mean();
  j["excluded"] = excluded;
  j["nodes"] = grid.size();
  j["grid"] = grid.describe();
  auto& eqs = j["equations"] = nlohmann::json::array();
  for (const auto& e : equations) eqs.push_back({{"name", e.name}, {"max", e.max}, {"mean", e.mean}, {"count", e.count}});
  if (!notes.empty()) j["notes"] = notes;
  return j;
}

void ResidualReport::write_csv(const std::string& path) const {
  std::string out;
  for (int a = 0; a < grid.dim(); ++a) out += "R" + std::to_string(a + 1) + ",";
  out += "residual\n";
  char buf[64];
  for (std::size_t i = 0; i < grid.size() && i < node_residual.size(); ++i) {
    const auto p = grid.point(i);
    for (double x : p) {
      std::snprintf(buf, sizeof buf, "%.17g,", x);
      out += buf;
    }
    if (std::isnan(node_residual[i])) {
      out += "nan\n";
    } else {
      std::snprintf(buf, sizeof buf, "%.17g\n", node_residual[i]);
      out += buf;
    }
  }
  write_file_atomic(path, out);
}

ReportBuilder::ReportBuilder(std::string title, Grid grid, std::vector<std::string> equation_names)
    : title_(std::move(title)),
      grid_(std::move(grid)),
      names_(std::move(equation_names)),
      values_(names_.size(), std::vector<double>(grid_.size(), std::numeric_limits<double>::quiet_NaN())),
      excluded_(grid_.size(), 0) {}

void ReportBuilder::set(std::size_t equation, std::size_t node, double value) {
  values_[equation][node] = std::isfinite(value) ? std::abs(value) : std::numeric_limits<double>::infinity();
}

ResidualReport ReportBuilder::finish() const {
  ResidualReport r;
  r.title = title_;
  r.grid = grid_;
  r.notes = notes_;
  const std::size_t n = grid_.size();
  // A node that produced a non-finite residual is treated as singular.
  std::vector<char> dropped = excluded_;
  for (const auto& eq : values_)
    for (std::size_t i = 0; i < n; ++i)
      if (std::isinf(eq[i])) dropped[i] = 1;
  r.node_residual.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t e = 0; e < names_.size(); ++e) {
    EquationStats s;
    s.name = names_[e];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = values_[e][i];
      if (dropped[i] || std::isnan(v)) continue;
      s.max = std::max(s.max, v);
      total += v;
      ++s.count;
      r.node_residual[i] = std::isnan(r.node_residual[i]) ? v : std::max(r.node_residual[i], v);
    }
    s.mean = s.count ? total / static_cast<double>(s.count) : 0.0;
    r.equations.push_back(s);
  }
  for (std::size_t i = 0; i < n; ++i) r.excluded += dropped[i] ? 1 : 0;
  return r;
}

}  // namespace shapelab
