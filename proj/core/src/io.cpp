#include "bftraj/io.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace bft {

namespace {
constexpr double kPi = 3.14159265358979323846;

double parse_field(const std::string& field, int line_no) {
  size_t pos = 0;
  double v;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw CsvError("csv line " + std::to_string(line_no) + ": not a number: '" + field +
                   "'");
  }
  while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
  if (pos != field.size())
    throw CsvError("csv line " + std::to_string(line_no) + ": trailing junk: '" + field +
                   "'");
  return v;
}
}  // namespace

DataSet synthetic_dataset(unsigned seed) {
  std::mt19937 rng(seed);
  auto gauss = [&rng]() {
    // Box-Muller; distribution objects are not bit-stable across standard
    // libraries, the raw transform is.
    const double u1 =
        (static_cast<double>(rng()) + 1.0) / (static_cast<double>(rng.max()) + 2.0);
    const double u2 = static_cast<double>(rng()) / (static_cast<double>(rng.max()) + 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  };
  DataSet ds;
  const int n = 100;  // 100 Hz on [0, 1]
  ds.t.resize(n + 1);
  ds.y.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    ds.t[static_cast<size_t>(k)] = t;
    ds.y(k) = 0.8 * t + 0.3 * std::sin(2 * kPi * 3 * t + 0.4) +
              0.15 * std::cos(2 * kPi * 7 * t) + 0.01 * gauss();
  }
  return ds;
}

void write_dataset_csv(std::ostream& os, const DataSet& data) {
  os << "t,y\n" << std::setprecision(17);
  for (size_t k = 0; k < data.t.size(); ++k)
    os << data.t[k] << ',' << data.y(static_cast<int>(k)) << '\n';
}

DataSet read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw CsvError("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,y") throw CsvError("csv: expected header 't,y', got '" + line + "'");
  DataSet ds;
  std::vector<double> ys;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw CsvError("csv line " + std::to_string(line_no) + ": expected two fields");
    ds.t.push_back(parse_field(line.substr(0, comma), line_no));
    ys.push_back(parse_field(line.substr(comma + 1), line_no));
  }
  if (ds.t.size() < 2) throw CsvError("csv: need at least two samples");
  const double step = ds.t[1] - ds.t[0];
  if (step <= 0) throw CsvError("csv: time must be strictly increasing");
  for (size_t k = 1; k < ds.t.size(); ++k)
    if (std::abs(ds.t[k] - ds.t[k - 1] - step) > 1e-9 * std::max(1.0, std::abs(step)))
      throw CsvError("csv: non-uniform time grid at row " + std::to_string(k + 1));
  ds.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<int>(ys.size()));
  return ds;
}

void write_trajectory_csv(std::ostream& os, const DecisionLayout& layout,
                          const Eigen::VectorXd& d, const std::vector<double>& times) {
  const int m_x = static_cast<int>(layout.state_specs.size());
  const int m_u = static_cast<int>(layout.control_specs.size());
  os << "t";
  for (int i = 0; i < m_x; ++i) os << ",x_" << (i + 1);
  for (int j = 0; j < m_u; ++j) os << ",u_" << (j + 1);
  for (int i = 0; i < m_x; ++i) os << ",dx_" << (i + 1);
  os << '\n' << std::setprecision(17);
  for (double t : times) {
    const TrajectoryPoint pt = eval_trajectory(layout, d, t);
    os << t;
    for (int i = 0; i < m_x; ++i) os << ',' << pt.x(i);
    for (int j = 0; j < m_u; ++j) os << ',' << pt.u(j);
    for (int i = 0; i < m_x; ++i) os << ',' << pt.xdot(i);
    os << '\n';
  }
}

void write_svg_plot(std::ostream& os, const std::string& title,
                    const std::vector<PlotSeries>& series) {
  const int width = 760, height = 420;
  const int ml = 60, mr = 20, mt = 40, mb = 40;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto sx = [&](double v) {
    return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr);
  };
  auto sy = [&](double v) {
    return height - mb - (v - ymin) / (ymax - ymin) * (height - mt - mb);
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b"};
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
     << height << "'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-family='sans-serif'"
     << " font-size='16'>" << title << "</text>\n";
  // axes
  os << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr << "' y2='"
     << height - mb << "' stroke='black'/>\n";
  os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << height - mb
     << "' stroke='black'/>\n";
  os << std::setprecision(6);
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + k * (xmax - xmin) / 4;
    const double yv = ymin + k * (ymax - ymin) / 4;
    os << "<text x='" << sx(xv) << "' y='" << height - mb + 18
       << "' text-anchor='middle' font-family='sans-serif' font-size='11'>" << xv
       << "</text>\n";
    os << "<text x='" << ml - 6 << "' y='" << sy(yv) + 4
       << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << yv
       << "</text>\n";
  }
  int ci = 0;
  for (const auto& s : series) {
    const char* color = colors[ci % 6];
    os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    os << std::setprecision(8);
    for (size_t k = 0; k < s.x.size(); ++k)
      os << sx(s.x[k]) << ',' << sy(s.y[k]) << ' ';
    os << "'/>\n";
    os << "<text x='" << width - mr - 10 << "' y='" << mt + 16 * ci + 12
       << "' text-anchor='end' font-family='sans-serif' font-size='12' fill='" << color
       << "'>" << s.label << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
}

}  // namespace bft
