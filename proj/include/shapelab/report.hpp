#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "shapelab/grid.hpp"

namespace shapelab {

struct EquationStats {
  std::string name;
  double max = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};

/// Per-equation residual statistics over a grid. Nodes where any residual is
/// non-finite, or that a check excludes on purpose, are left out of every
/// statistic and counted in `excluded`.
struct ResidualReport {
  std::string title;
  Grid grid;
  std::vector<EquationStats> equations;
  std::size_t excluded = 0;
  /// Max over equations at each node, NaN where excluded.
  std::vector<double> node_residual;
  std::vector<std::string> notes;

  double max() const;
  double mean() const;
  /// max() <= tol with at least one node counted.
  bool passes(double tol) const;
  nlohmann::json to_json() const;
  /// One row per node: coordinates then the residual.
  void write_csv(const std::string& path) const;
};

class ReportBuilder {
 public:
  ReportBuilder(std::string title, Grid grid, std::vector<std::string> equation_names);

  /// Safe to call concurrently for distinct nodes. Stores |value|.
  void set(std::size_t equation, std::size_t node, double value);
  void exclude(std::size_t node) { excluded_[node] = 1; }
  void note(std::string text) { notes_.push_back(std::move(text)); }
  std::size_t equation_count() const { return names_.size(); }

  ResidualReport finish() const;

 private:
  std::string title_;
  Grid grid_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> values_;
  std::vector<char> excluded_;
  std::vector<std::string> notes_;
};

}  // namespace shapelab
