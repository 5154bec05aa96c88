#include "nct/heat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace nct {

HeatSpectrum::HeatSpectrum(const GeometricOperators& ops, const WeightNu& nu, const TruncationBox& box)
    : ops_(&ops), nu_(&nu), box_(box) {
  box_.validate();
  if (box_.dim != ops.dim()) throw Error(ErrorKind::DimensionMismatch, "heat box vs metric dimension", box_.dim);
  if (box_.cardinality() > ops.max_rows())
    throw Error(ErrorKind::ResourceCap,
                "heat box has " + std::to_string(box_.cardinality()) + " points, above the row cap",
                static_cast<double>(box_.cardinality()));
  auto steps = ops.steps();
  auto pieces = LatticeDomain::components(box_, steps, ops.max_rows());
  lambda_cut_ = std::numeric_limits<double>::infinity();
  const int inner = box_.inner_radius();
  for (auto& piece : pieces) {
    Block b;
    b.domain = std::make_shared<const LatticeDomain>(std::move(piece));
    Eigen::MatrixXcd a = ops.compress_Ag(*b.domain);
    double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    double defect = (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
    if (defect > 1e-10) throw Error(ErrorKind::NotSelfAdjoint, "compressed A_g is not Hermitian", defect);
    b.vectors = 0.5 * (a + a.adjoint());
    hermitian_eigen(b.vectors, b.values);
    const auto n = b.vectors.rows();
    b.shell_mass = Eigen::VectorXd::Zero(n);
    for (Eigen::Index p = 0; p < n; ++p)
      if (b.domain->point(static_cast<std::size_t>(p)).max_abs() > inner)
        b.shell_mass += b.vectors.row(p).cwiseAbs2().transpose();
    for (Eigen::Index i = 0; i < n; ++i)
      if (b.shell_mass(i) > 0.01) {
        lambda_cut_ = std::min(lambda_cut_, b.values(i));
        break;
      }
    total_ += b.domain->size();
    blocks_.push_back(std::move(b));
  }
}

bool HeatSpectrum::reliable(double t) const {
  if (!std::isfinite(lambda_cut_)) return true;
  return std::exp(-t * lambda_cut_) * static_cast<double>(total_) < 1e-10;
}

std::vector<std::vector<cplx>> HeatSpectrum::left_diagonals(const FourierElement& y) const {
  std::vector<std::vector<cplx>> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(diagonal_weights(b, left_mult_matrix(ops_->theta(), y, *b.domain, *b.domain)));
  return out;
}

std::vector<cplx> HeatSpectrum::diagonal_weights(const Block& b, const Eigen::MatrixXcd& left) const {
  Eigen::MatrixXcd lq = left * b.vectors;
  std::vector<cplx> d(static_cast<std::size_t>(b.vectors.cols()));
  for (Eigen::Index i = 0; i < b.vectors.cols(); ++i) d[static_cast<std::size_t>(i)] = b.vectors.col(i).dot(lq.col(i));
  return d;
}

HeatTraceSample HeatSpectrum::sample(const std::vector<std::vector<cplx>>& diag, double t) const {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "heat time must be positive", t);
  cplx value = 0.0;
  double estimate = 0.0;
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const auto& b = blocks_[bi];
    for (Eigen::Index i = 0; i < b.values.size(); ++i) {
      double e = std::exp(-t * b.values(i));
      value += e * diag[bi][static_cast<std::size_t>(i)];
      estimate += b.shell_mass(i) * std::abs(diag[bi][static_cast<std::size_t>(i)]) * e;
    }
  }
  HeatTraceSample s;
  s.t = t;
  s.value = value.real();
  s.imag = value.imag();
  s.truncation_error_estimate = estimate;
  s.reliable = reliable(t);
  s.box = box_;
  return s;
}

HeatTraceSample HeatSpectrum::heat_trace(const FourierElement& x, double t) const {
  const auto& th = ops_->theta();
  return sample(left_diagonals(twisted_mul(th, twisted_mul(th, nu_->nu_sqrt, x), nu_->nu_inv_sqrt)), t);
}

std::vector<HeatTraceSample> HeatSpectrum::heat_trace(const FourierElement& x, std::span<const double> t_grid) const {
  const auto& th = ops_->theta();
  auto diag = left_diagonals(twisted_mul(th, twisted_mul(th, nu_->nu_sqrt, x), nu_->nu_inv_sqrt));
  std::vector<double> ts(t_grid.begin(), t_grid.end());
  std::sort(ts.begin(), ts.end());
  std::vector<HeatTraceSample> out;
  for (double t : ts) out.push_back(sample(diag, t));
  return out;
}

HeatTraceSample HeatSpectrum::heat_trace_Ag(const FourierElement& y, double t) const {
  return sample(left_diagonals(y), t);
}

HeatTraceSample HeatSpectrum::heat_trace_laplacian_form(const FourierElement& x, double t) const {
  const auto& th = ops_->theta();
  std::vector<std::vector<cplx>> diag;
  for (const auto& b : blocks_) {
    Eigen::MatrixXcd s = left_mult_matrix(th, nu_->nu_inv_sqrt, *b.domain, *b.domain);
    Eigen::MatrixXcd lx = left_mult_matrix(th, x, *b.domain, *b.domain);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(s);
    diag.push_back(diagonal_weights(b, lu.solve(lx * s)));
  }
  return sample(diag, t);
}

FourierElement HeatSpectrum::mode_term(const LatticeIndex& n, double t) const {
  if (!box_.contains(n)) throw Error(ErrorKind::InvalidArgument, "mode index outside the heat box", n.max_abs());
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "heat time must be positive", t);
  const Block* home = nullptr;
  for (const auto& b : blocks_)
    if (b.domain->contains(n)) {
      home = &b;
      break;
    }
  auto shifted = std::make_shared<const LatticeDomain>(home->domain->shifted(n));
  CompressedGeometry cg = ops_->compress(shifted);
  std::vector<double> s(static_cast<std::size_t>(n.dim()));
  for (int i = 0; i < n.dim(); ++i) s[static_cast<std::size_t>(i)] = n[i];
  Eigen::MatrixXcd m = cg.x_of_s(s) + cg.Ag + cg.V_of_s(s);
  SpectralDecomposition spec(shifted, std::move(m));
  Eigen::VectorXcd h = spec.apply([t](double l) { return cplx(std::exp(-t * l)); }, shifted->unit(LatticeIndex(n.dim())));
  return shifted->element(h);
}

cplx HeatSpectrum::mode_reconstruction(const FourierElement& y, double t, int radius) const {
  cplx sum = 0.0;
  for (const auto& b : blocks_)
    for (const auto& n : b.domain->points())
      if (n.max_abs() <= radius) sum += trace_tau(twisted_mul(ops_->theta(), y, mode_term(n, t)));
  return sum;
}

namespace {

double tau_conjugated(const FourierElement& x, const FourierElement& ik, const WeightNu& nu, const ThetaMatrix& th) {
  return std::real(trace_tau(twisted_mul(th, x, twisted_mul(th, twisted_mul(th, nu.nu_inv_sqrt, ik), nu.nu_sqrt))));
}

double log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double model_prediction(const InvariantTable& table, const FourierElement& x, const WeightNu& nu,
                        const ThetaMatrix& theta, double t) {
  double sum = 0.0;
  for (const auto& [k, e] : table.entries)
    if (k % 2 == 0) sum += std::pow(t, 0.5 * k) * tau_conjugated(x, e.value, nu, theta);
  return sum;
}

AsymptoticFit fit_asymptotics(const std::vector<HeatTraceSample>& samples, const InvariantTable& table,
                              const FourierElement& x, const WeightNu& nu, const ThetaMatrix& theta) {
  const int d = table.dim;
  std::vector<const HeatTraceSample*> use;
  for (const auto& s : samples)
    if (s.reliable) use.push_back(&s);
  std::sort(use.begin(), use.end(), [](auto* a, auto* b) { return a->t < b->t; });
  if (use.size() < 5)
    throw Error(ErrorKind::InvalidArgument, "ill-conditioned fit: fewer than five samples in the reliable t-window",
                static_cast<double>(use.size()));

  const auto m = static_cast<Eigen::Index>(use.size());
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd y(m), yw(m);
  AsymptoticFit fit;
  for (Eigen::Index i = 0; i < m; ++i) {
    double t = use[static_cast<std::size_t>(i)]->t;
    double w = 1.0 / std::sqrt(t);
    fit.t_grid.push_back(t);
    y(i) = std::pow(t, 0.5 * d) * use[static_cast<std::size_t>(i)]->value;
    a.row(i) << w, w * t, w * t * t;
    yw(i) = w * y(i);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  fit.condition_number = sv(0) / sv(sv.size() - 1);
  if (!(fit.condition_number < 1e10))
    throw Error(ErrorKind::Tolerance, "ill-conditioned fit: widen the t-window", fit.condition_number);
  Eigen::VectorXd c = svd.solve(yw);
  fit.coefficients = {c(0), c(1), c(2)};
  Eigen::VectorXd model(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double t = fit.t_grid[static_cast<std::size_t>(i)];
    model(i) = c(0) + c(1) * t + c(2) * t * t;
  }
  fit.residual_norm = (y - model).norm();

  for (const auto& [k, e] : table.entries) {
    if (k % 2 != 0 || k > 4) continue;
    double p = tau_conjugated(x, e.value, nu, theta);
    double ck = c(k / 2);
    fit.predicted[k] = p;
    fit.relative_deviation[k] = p != 0.0 ? std::abs(ck - p) / std::abs(p) : std::abs(ck - p);
    fit.floored_deviation[k] = std::abs(ck - p) / std::max(std::abs(p), 1.0);
  }

  double p0 = fit.predicted.count(0) ? fit.predicted[0] : c(0);
  double p2 = fit.predicted.count(2) ? fit.predicted[2] : 0.0;
  std::vector<double> lx, ly;
  for (Eigen::Index i = 0; i < m; ++i) {
    double t = fit.t_grid[static_cast<std::size_t>(i)];
    double r = std::abs(y(i) - p0 - p2 * t);
    fit.remainder_max = std::max(fit.remainder_max, r);
    if (r > 0.0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(r));
    }
  }
  fit.remainder_exponent = log_slope(lx, ly);
  return fit;
}

PoissonReport poisson_gaussian(int dim, double t, int R) {
  if (dim < 1 || !(t > 0.0) || R < 0) throw Error(ErrorKind::InvalidArgument, "bad Gaussian lattice sum request", t);
  // Smallest terms first.
  double one = 0.0;
  for (int n = R; n >= 1; --n) one += 2.0 * std::exp(-t * n * n);
  one += 1.0;
  double dual = 0.0;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (int k = 64; k >= 1; --k) dual += 2.0 * std::exp(-pi2 * k * k / t);
  const double root = std::sqrt(std::numbers::pi / t);
  PoissonReport r;
  r.t = t;
  r.lattice_sum = std::pow(one, dim);
  r.integral_term = std::pow(root, dim);
  r.remainder = r.lattice_sum - r.integral_term;
  r.predicted_remainder = std::pow(root, dim) * (std::pow(1.0 + dual, dim) - 1.0);
  r.diff = std::abs(r.remainder - r.predicted_remainder);
  return r;
}

PoissonReport poisson_function(const std::function<double(double)>& f, double integral, double t, int R) {
  if (!(t > 0.0) || R < 0) throw Error(ErrorKind::InvalidArgument, "bad lattice sum request", t);
  double sum = f(0.0);
  for (int n = 1; n <= R; ++n) sum += f(t * n) + f(-t * n);
  PoissonReport r;
  r.t = t;
  r.lattice_sum = sum;
  r.integral_term = integral / t;
  r.remainder = sum - r.integral_term;
  r.diff = std::abs(r.remainder);
  return r;
}

double remainder_decay_exponent(const std::vector<PoissonReport>& reports) {
  std::vector<double> lx, ly;
  for (const auto& r : reports)
    if (r.remainder != 0.0) {
      lx.push_back(std::log(r.t));
      ly.push_back(std::log(std::abs(r.remainder)));
    }
  return log_slope(lx, ly);
}

std::function<double(double)> good_slice(const InvariantEngine& engine, int k, std::vector<double> direction) {
  return [&engine, k, direction = std::move(direction)](double r) {
    std::vector<double> s(direction.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = r * direction[i];
    return std::real(trace_tau(engine.contour_integrate(k, s, false).good[static_cast<std::size_t>(k)]));
  };
}

double exponent_splitting_remainder(const HeatSpectrum& heat, const InvariantEngine& engine, const LatticeIndex& n,
                                    std::span<const double> t_values) {
  const int d = n.dim();
  std::vector<double> s(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) s[static_cast<std::size_t>(i)] = n[i];
  const int inner = engine.box().inner_radius();
  double worst = 0.0;
  for (double t : t_values) {
    FourierElement h = heat.mode_term(n, t).restricted(inner);
    ContourResult cr = engine.contour_integrate_at_time(2 * d, s, t);
    FourierElement g(d);
    for (const auto& gk : cr.good) g += gk;
    worst = std::max(worst, (h - g.restricted(inner)).norm());
  }
  return worst;
}

std::string heat_csv(const std::vector<HeatTraceSample>& samples, int dim, const std::function<double(double)>& model,
                     const std::string& header_comment) {
  std::vector<const HeatTraceSample*> rows;
  for (const auto& s : samples) rows.push_back(&s);
  std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->t < b->t; });
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "t,trace,scaled_trace,model_prediction,residual,truncation_error_estimate\n";
  char buf[256];
  for (const auto* s : rows) {
    double scaled = std::pow(s->t, 0.5 * dim) * s->value;
    double pred = model ? model(s->t) : std::numeric_limits<double>::quiet_NaN();
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s->t, s->value, scaled, pred, scaled - pred,
                  s->truncation_error_estimate);
    out << buf;
  }
  return out.str();
}

}  // namespace nct
