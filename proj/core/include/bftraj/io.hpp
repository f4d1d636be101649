#pragma once

// Artifact plumbing shared by the command-line tools: the synthetic
// fit-comparison dataset, CSV readers/writers for sampled data and
// trajectories, and minimal SVG line plots.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "bftraj/ocp.hpp"

namespace bft {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uniformly sampled scalar signal.
struct DataSet {
  std::vector<double> t;
  Eigen::VectorXd y;
};

// Deterministic trend-plus-harmonics signal for the fit comparisons:
// y(t) = 0.8 t + 0.3 sin(2*pi*3 t + 0.4) + 0.15 cos(2*pi*7 t) + noise,
// sampled at 100 Hz on [0, 1], Gaussian noise sigma = 0.01 drawn by
// Box-Muller from std::mt19937 (bit-stable across platforms).
DataSet synthetic_dataset(unsigned seed = 1);

// Two-column "t,y" CSV. The reader throws CsvError on a malformed header,
// non-numeric fields, or a non-uniform time grid.
void write_dataset_csv(std::ostream& os, const DataSet& data);
DataSet read_dataset_csv(std::istream& is);

// Trajectory table "t, x_1..x_m, u_1..u_m, dx_1..dx_m" at the given times.
void write_trajectory_csv(std::ostream& os, const DecisionLayout& layout,
                          const Eigen::VectorXd& d, const std::vector<double>& times);

// One line plot; series share the x axis and get distinct stroke colors
// with a small legend.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};
void write_svg_plot(std::ostream& os, const std::string& title,
                    const std::vector<PlotSeries>& series);

}  // namespace bft
