#include "bftraj/mixed.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace bft {

namespace {

bool same_spec(const BasisSpec& a, const BasisSpec& b) {
  return a.bernstein_order == b.bernstein_order && a.harmonics == b.harmonics &&
         a.include_dc == b.include_dc && a.horizon == b.horizon;
}

}  // namespace

MixedSeries::MixedSeries(BasisSpec spec, Eigen::MatrixXd g, Eigen::RowVectorXd a0,
                         Eigen::MatrixXd cos_coeffs, Eigen::MatrixXd sin_coeffs)
    : spec_(std::move(spec)),
      g_(std::move(g)),
      a0_(std::move(a0)),
      cos_(std::move(cos_coeffs)),
      sin_(std::move(sin_coeffs)) {
  spec_.validate();
  const auto m = g_.cols();
  const auto nh = static_cast<Eigen::Index>(spec_.harmonics.size());
  if (g_.rows() != spec_.bernstein_order + 1 || a0_.cols() != m || cos_.rows() != nh ||
      cos_.cols() != m || sin_.rows() != nh || sin_.cols() != m)
    throw std::invalid_argument("MixedSeries: coefficient shapes inconsistent with spec");
  if (!g_.allFinite() || !a0_.allFinite() || !cos_.allFinite() || !sin_.allFinite())
    throw std::invalid_argument("MixedSeries: non-finite coefficient");
  if (!spec_.include_dc && a0_.size() > 0 && a0_.cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("MixedSeries: a0 must be zero when include_dc is false");
}

MixedSeries MixedSeries::zero(const BasisSpec& spec, int dims) {
  const auto nh = static_cast<Eigen::Index>(spec.harmonics.size());
  return MixedSeries(spec, Eigen::MatrixXd::Zero(spec.bernstein_order + 1, dims),
                     Eigen::RowVectorXd::Zero(dims), Eigen::MatrixXd::Zero(nh, dims),
                     Eigen::MatrixXd::Zero(nh, dims));
}

MixedSeries MixedSeries::construct_from_decomposition(
    const std::function<Eigen::VectorXd(double)>& f,
    const std::function<Eigen::VectorXd(double)>& p, const BasisSpec& spec, int quad_points) {
  spec.validate();
  if (quad_points <= 0) quad_points = std::max(256, 8 * spec.max_harmonic());
  if (quad_points <= 2 * spec.max_harmonic())
    throw std::invalid_argument("construct_from_decomposition: quad_points too small");
  const double t_f = spec.horizon;
  const int n = spec.bernstein_order;
  const int m = static_cast<int>(f(0.0).size());
  const int nh = static_cast<int>(spec.harmonics.size());

  const Eigen::VectorXd p0 = p(0.0), p1 = p(t_f);
  double scale = std::max(1.0, std::max(p0.cwiseAbs().maxCoeff(), p1.cwiseAbs().maxCoeff()));
  if ((p0 - p1).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("construct_from_decomposition: p is not periodic on [0, t_f]");

  Eigen::MatrixXd g(n + 1, m);
  for (int k = 0; k <= n; ++k) {
    const double t = (n == 0) ? 0.0 : k * t_f / n;
    g.row(k) = (f(t) - p(t)).transpose();
  }

  // Composite trapezoid; p periodic makes the endpoint halving equivalent
  // to a plain sum of p at quad_points uniform samples.
  Eigen::RowVectorXd a0 = Eigen::RowVectorXd::Zero(m);
  Eigen::MatrixXd ac = Eigen::MatrixXd::Zero(nh, m);
  Eigen::MatrixXd bs = Eigen::MatrixXd::Zero(nh, m);
  const double h = t_f / quad_points;
  for (int i = 0; i < quad_points; ++i) {
    const double t = i * t_f / quad_points;
    const Eigen::RowVectorXd pt = p(t).transpose();
    a0 += pt;
    for (int j = 0; j < nh; ++j) {
      auto [c, s] = fourier_eval(spec.harmonics[static_cast<size_t>(j)], t, t_f);
      ac.row(j) += c * pt;
      bs.row(j) += s * pt;
    }
  }
  const double fac = 2.0 / t_f * h;
  a0 *= fac;
  ac *= fac;
  bs *= fac;
  if (!spec.include_dc) {
    // Fold the mean of p into the Bernstein part so T_n still reproduces f.
    g.rowwise() += 0.5 * a0;
    a0.setZero();
  }
  return MixedSeries(spec, std::move(g), std::move(a0), std::move(ac), std::move(bs));
}

MixedSeries MixedSeries::from_flat(const BasisSpec& spec, const Eigen::MatrixXd& coeffs) {
  spec.validate();
  if (coeffs.rows() != spec.coeff_count())
    throw std::invalid_argument("MixedSeries::from_flat: wrong coefficient count");
  const int n = spec.bernstein_order;
  const int nh = static_cast<int>(spec.harmonics.size());
  const auto m = coeffs.cols();
  Eigen::MatrixXd g = coeffs.topRows(n + 1);
  Eigen::RowVectorXd a0 = Eigen::RowVectorXd::Zero(m);
  int row = n + 1;
  if (spec.include_dc) a0 = coeffs.row(row++);
  Eigen::MatrixXd ac(nh, m), bs(nh, m);
  for (int j = 0; j < nh; ++j) {
    ac.row(j) = coeffs.row(row + j);
    bs.row(j) = coeffs.row(row + nh + j);
  }
  return MixedSeries(spec, std::move(g), std::move(a0), std::move(ac), std::move(bs));
}

Eigen::MatrixXd MixedSeries::to_flat() const {
  Eigen::MatrixXd out(spec_.coeff_count(), dims());
  out.topRows(g_.rows()) = g_;
  int row = static_cast<int>(g_.rows());
  if (spec_.include_dc) out.row(row++) = a0_;
  const Eigen::Index nh = cos_.rows();
  for (Eigen::Index j = 0; j < nh; ++j) {
    out.row(row + j) = cos_.row(j);
    out.row(row + nh + j) = sin_.row(j);
  }
  return out;
}

Eigen::VectorXd MixedSeries::eval(double t) const {
  if (t < 0.0 || t > spec_.horizon)
    throw std::domain_error("MixedSeries::eval: t outside [0, t_f]");
  Eigen::VectorXd out =
      g_.transpose() * bernstein_eval_all(spec_.bernstein_order, t, spec_.horizon);
  out += 0.5 * a0_.transpose();
  for (size_t j = 0; j < spec_.harmonics.size(); ++j) {
    auto [c, s] = fourier_eval(spec_.harmonics[j], t, spec_.horizon);
    out += c * cos_.row(static_cast<Eigen::Index>(j)).transpose() +
           s * sin_.row(static_cast<Eigen::Index>(j)).transpose();
  }
  return out;
}

Eigen::VectorXd MixedSeries::eval_derivative(double t) const {
  if (t < 0.0 || t > spec_.horizon)
    throw std::domain_error("MixedSeries::eval_derivative: t outside [0, t_f]");
  const int n = spec_.bernstein_order;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dims());
  if (n >= 1) {
    // Order-(n-1) derivative coefficients: (n/t_f) (g_{k+1} - g_k).
    Eigen::MatrixXd dg = (n / spec_.horizon) * (g_.bottomRows(n) - g_.topRows(n));
    out = dg.transpose() * bernstein_eval_all(n - 1, t, spec_.horizon);
  }
  for (size_t j = 0; j < spec_.harmonics.size(); ++j) {
    const int k = spec_.harmonics[j];
    const double w = 2.0 * M_PI * k / spec_.horizon;
    auto [c, s] = fourier_eval(k, t, spec_.horizon);
    out += w * (-s * cos_.row(static_cast<Eigen::Index>(j)).transpose() +
                c * sin_.row(static_cast<Eigen::Index>(j)).transpose());
  }
  return out;
}

Eigen::VectorXd MixedSeries::integral() const {
  const auto [w, dc_weight] = integration_weights(spec_);
  return w * g_.colwise().sum().transpose() + dc_weight * a0_.transpose();
}

MixedSeries MixedSeries::antiderivative() const {
  const int n = spec_.bernstein_order;
  const double t_f = spec_.horizon;
  const int m = dims();
  const int nh = static_cast<int>(spec_.harmonics.size());
  BasisSpec out_spec = spec_;
  out_spec.bernstein_order = n + 1;
  out_spec.include_dc = false;

  // Bernstein part: G_j = (t_f/(n+1)) sum_{k<j} g_k.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n + 2, m);
  Eigen::RowVectorXd run = Eigen::RowVectorXd::Zero(m);
  for (int j = 1; j <= n + 1; ++j) {
    run += g_.row(j - 1);
    G.row(j) = t_f / (n + 1) * run;
  }
  // DC part (a0/2) t: the ramp t equals sum_j (j t_f/(n+1)) b_{j,n+1}.
  for (int j = 0; j <= n + 1; ++j) G.row(j) += (j * t_f / (n + 1)) * (0.5 * a0_);
  // Harmonics: a cos + b sin integrates to (a/w) sin - (b/w) cos + b/w.
  Eigen::MatrixXd ac(nh, m), bs(nh, m);
  for (int j = 0; j < nh; ++j) {
    const double w = 2.0 * M_PI * spec_.harmonics[static_cast<size_t>(j)] / t_f;
    ac.row(j) = -sin_.row(j) / w;
    bs.row(j) = cos_.row(j) / w;
    G.rowwise() += sin_.row(j) / w;  // constant making F(0) = 0
  }
  return MixedSeries(out_spec, std::move(G), Eigen::RowVectorXd::Zero(m), std::move(ac),
                     std::move(bs));
}

MixedSeries MixedSeries::operator+(const MixedSeries& other) const {
  if (!same_spec(spec_, other.spec_) || dims() != other.dims())
    throw std::invalid_argument("MixedSeries::operator+: incompatible series");
  return MixedSeries(spec_, g_ + other.g_, a0_ + other.a0_, cos_ + other.cos_,
                     sin_ + other.sin_);
}

MixedSeries MixedSeries::scaled(double factor) const {
  return MixedSeries(spec_, factor * g_, factor * a0_, factor * cos_, factor * sin_);
}

void MixedSeries::write_csv(std::ostream& os) const {
  os << "# mixed-series nB=" << spec_.bernstein_order << " dc=" << (spec_.include_dc ? 1 : 0)
     << " tf=" << spec_.horizon << " nt=" << spec_.node_count << " dims=" << dims()
     << " harmonics=";
  for (size_t j = 0; j < spec_.harmonics.size(); ++j)
    os << (j ? ";" : "") << spec_.harmonics[j];
  os << "\n";
  const Eigen::MatrixXd flat = to_flat();
  os.precision(17);
  for (Eigen::Index r = 0; r < flat.rows(); ++r) {
    for (Eigen::Index c = 0; c < flat.cols(); ++c) os << (c ? "," : "") << flat(r, c);
    os << "\n";
  }
}

MixedSeries MixedSeries::read_csv(std::istream& is) {
  std::string header;
  std::getline(is, header);
  BasisSpec spec;
  int dims = 0;
  auto field = [&header](const std::string& key) {
    auto pos = header.find(key + "=");
    if (pos == std::string::npos)
      throw std::invalid_argument("MixedSeries::read_csv: missing field " + key);
    return header.substr(pos + key.size() + 1);
  };
  spec.bernstein_order = std::stoi(field("nB"));
  spec.include_dc = std::stoi(field("dc")) != 0;
  spec.horizon = std::stod(field("tf"));
  spec.node_count = std::stoi(field("nt"));
  dims = std::stoi(field("dims"));
  {
    std::istringstream hs(field("harmonics"));
    std::string tok;
    while (std::getline(hs, tok, ';')) {
      if (tok.empty() || !std::isdigit(static_cast<unsigned char>(tok[0]))) break;
      spec.harmonics.push_back(std::stoi(tok));
    }
  }
  Eigen::MatrixXd flat(spec.coeff_count(), dims);
  std::string line;
  for (Eigen::Index r = 0; r < flat.rows(); ++r) {
    if (!std::getline(is, line))
      throw std::invalid_argument("MixedSeries::read_csv: truncated file");
    std::istringstream ls(line);
    std::string tok;
    for (Eigen::Index c = 0; c < flat.cols(); ++c) {
      if (!std::getline(ls, tok, ','))
        throw std::invalid_argument("MixedSeries::read_csv: short row");
      flat(r, c) = std::stod(tok);
    }
  }
  return from_flat(spec, flat);
}

}  // namespace bft
