#include "nct/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nct/quadrature.hpp"

namespace nct {

namespace {

std::vector<LatticeIndex> union_support(std::initializer_list<const std::vector<FourierElement>*> groups,
                                        std::initializer_list<const FourierElement*> singles = {}) {
  std::vector<LatticeIndex> out;
  for (const auto* g : groups)
    for (const auto& e : *g)
      for (const auto& [n, c] : e.terms()) out.push_back(n);
  for (const auto* e : singles)
    for (const auto& [n, c] : e->terms()) out.push_back(n);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<LatticeIndex> with_negatives_and_zero(std::vector<LatticeIndex> pts, int dim) {
  std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) pts.push_back(-pts[i]);
  pts.push_back(LatticeIndex(dim));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

Eigen::MatrixXcd block_matrix(const std::vector<Eigen::MatrixXcd>& blocks, int d) {
  const Eigen::Index n = blocks.front().rows();
  Eigen::MatrixXcd m(d * n, d * n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m.block(i * n, j * n, n, n) = blocks[static_cast<std::size_t>(i * d + j)];
  return m;
}

double relative_defect(const ThetaMatrix& theta, const FourierElement& a) {
  return self_adjoint_defect(theta, a) / std::max(1.0, a.norm());
}

// Compressions of the (g^-1)_ij on a domain.
std::vector<Eigen::MatrixXcd> inverse_blocks(const MetricTensor& g, const LatticeDomain& dom) {
  const int d = g.dim();
  std::vector<Eigen::MatrixXcd> blocks;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) blocks.push_back(left_mult_matrix(g.theta, g.ginv(i, j), dom, dom));
  return blocks;
}

Eigen::MatrixXcd quadratic_form(const std::vector<Eigen::MatrixXcd>& blocks, std::span<const double> s) {
  const int d = static_cast<int>(s.size());
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(blocks.front().rows(), blocks.front().cols());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double c = s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)];
      if (c != 0.0) x += c * blocks[static_cast<std::size_t>(i * d + j)];
    }
  return 0.5 * (x + x.adjoint());
}

DomainPtr inverse_domain(const MetricTensor& g) {
  auto steps = union_support({&g.inverse_entries});
  return std::make_shared<const LatticeDomain>(LatticeDomain::reachable(g.box, steps, g.max_rows));
}

}  // namespace

std::vector<LatticeIndex> MetricTensor::steps() const { return union_support({&entries}); }

int MetricTensor::support_radius() const {
  int r = 0;
  for (const auto& e : entries) r = std::max(r, e.support_radius());
  return r;
}

bool MetricTensor::is_flat() const {
  const int d = dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const auto& e = g(i, j);
      if (i == j) {
        if (e.size() != 1 || !e.terms()[0].first.is_zero() || e.terms()[0].second != cplx(1.0)) return false;
      } else if (!e.empty()) {
        return false;
      }
    }
  return true;
}

MetricTensor validate_and_invert_metric(const ThetaMatrix& theta, std::vector<FourierElement> entries,
                                        const TruncationBox& box, const MetricOptions& options) {
  const int d = theta.dim();
  box.validate();
  if (box.dim != d) throw Error(ErrorKind::DimensionMismatch, "box vs theta dimension", box.dim);
  if (entries.size() != static_cast<std::size_t>(d * d))
    throw Error(ErrorKind::DimensionMismatch, "metric needs d*d entries", static_cast<double>(entries.size()));
  for (auto& e : entries) {
    if (e.empty()) e = FourierElement(d);
    if (e.dim() != d) throw Error(ErrorKind::DimensionMismatch, "metric entry dimension", e.dim());
  }

  MetricTensor g;
  g.theta = theta;
  g.box = box;
  g.entries = std::move(entries);
  g.max_rows = options.max_rows;

  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double def = relative_defect(theta, g.g(i, j));
      if (def > 1e-12)
        throw Error(ErrorKind::NotSelfAdjoint,
                    "metric entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") is not self-adjoint", def);
      double asym = (g.g(i, j) - g.g(j, i)).norm();
      if (asym > 1e-12)
        throw Error(ErrorKind::NotSelfAdjoint,
                    "metric entries (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") and its transpose differ", asym);
    }

  auto steps = g.steps();
  auto dom = std::make_shared<const LatticeDomain>(LatticeDomain::reachable(box, steps, options.max_rows));
  if (dom->size() * static_cast<std::size_t>(d) > options.max_rows)
    throw Error(ErrorKind::ResourceCap, "block compression of the metric exceeds the row cap",
                static_cast<double>(dom->size() * static_cast<std::size_t>(d)));

  std::vector<Eigen::MatrixXcd> blocks;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) blocks.push_back(left_mult_matrix(theta, g.g(i, j), *dom, *dom));
  Eigen::MatrixXcd big = block_matrix(blocks, d);
  Eigen::MatrixXcd q = 0.5 * (big + big.adjoint());
  Eigen::VectorXd lam;
  hermitian_eigen(q, lam);
  g.positivity_margin = lam(0);
  if (!(lam(0) > 0.0)) throw Error(ErrorKind::NotPositive, "block compression of the metric is not positive", lam(0));
  g.inverse_min_eigenvalue = 1.0 / lam(lam.size() - 1);
  g.inverse_max_eigenvalue = 1.0 / lam(0);

  const Eigen::Index n = static_cast<Eigen::Index>(dom->size());
  const auto origin = static_cast<Eigen::Index>(*dom->find(LatticeIndex(d)));
  g.inverse_entries.assign(static_cast<std::size_t>(d * d), FourierElement(d));
  const int readback = box.inner_radius();
  for (int k = 0; k < d; ++k) {
    // Column k of the inverse block matrix applied to the unit in block k.
    Eigen::VectorXcd rhs = q.adjoint().col(k * n + origin);
    Eigen::VectorXcd x = q * (lam.cwiseInverse().cast<cplx>().asDiagonal() * rhs);
    for (int i = 0; i < d; ++i)
      g.inverse_entries[static_cast<std::size_t>(i * d + k)] = dom->element(x.segment(i * n, n), readback);
  }
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      double def = relative_defect(theta, g.ginv(i, k));
      if (def > options.adjoint_tolerance)
        throw Error(ErrorKind::Tolerance, "inverse metric entry is not self-adjoint", def);
    }
  for (int i = 0; i < d; ++i)
    for (int k = i; k < d; ++k) {
      FourierElement avg = 0.5 * (hermitian_part(theta, g.ginv(i, k)) + hermitian_part(theta, g.ginv(k, i)));
      g.inverse_entries[static_cast<std::size_t>(i * d + k)] = avg;
      g.inverse_entries[static_cast<std::size_t>(k * d + i)] = avg;
    }

  double res = 0.0;
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      FourierElement s(d);
      for (int j = 0; j < d; ++j) s += twisted_mul(theta, g.g(i, j), g.ginv(j, k));
      if (i == k) s -= FourierElement::constant(d, 1.0);
      res = std::max(res, s.norm());
    }
  g.inverse_residual = res;
  if (res > options.inverse_tolerance) throw Error(ErrorKind::Tolerance, "metric inversion residual too large", res);
  return g;
}

MetricTensor flat_metric(const ThetaMatrix& theta, const TruncationBox& box) {
  const int d = theta.dim();
  std::vector<FourierElement> e(static_cast<std::size_t>(d * d), FourierElement(d));
  for (int i = 0; i < d; ++i) e[static_cast<std::size_t>(i * d + i)] = FourierElement::constant(d, 1.0);
  return validate_and_invert_metric(theta, std::move(e), box);
}

MetricTensor conformal_metric(const ThetaMatrix& theta, const FourierElement& h, const TruncationBox& box,
                              const MetricOptions& options) {
  const int d = theta.dim();
  std::vector<FourierElement> e(static_cast<std::size_t>(d * d), FourierElement(d));
  for (int i = 0; i < d; ++i) e[static_cast<std::size_t>(i * d + i)] = h;
  return validate_and_invert_metric(theta, std::move(e), box, options);
}

// ---------------------------------------------------------------------------
// nu

FourierElement nu_sphere_reduction(const MetricTensor& g, int sphere_nodes) {
  const int d = g.dim();
  auto dom = inverse_domain(g);
  auto blocks = inverse_blocks(g, *dom);
  const auto origin = static_cast<Eigen::Index>(*dom->find(LatticeIndex(d)));
  SphereRule rule = sphere_rule(d, sphere_nodes);
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dom->size()));
  Eigen::VectorXd lam;
  for (std::size_t k = 0; k < rule.points.size(); ++k) {
    Eigen::MatrixXcd x = quadratic_form(blocks, rule.points[k]);
    hermitian_eigen(x, lam);
    if (!(lam(0) > 0.0)) throw Error(ErrorKind::NotPositive, "x(u) compression is not positive on the sphere", lam(0));
    Eigen::VectorXcd c = x.row(origin).adjoint();
    for (Eigen::Index i = 0; i < lam.size(); ++i) c(i) *= std::pow(lam(i), -0.5 * d);
    acc += rule.weights[k] * (x * c);
  }
  acc *= std::pow(std::numbers::pi, -0.5 * d) * std::tgamma(0.5 * d) / 2.0;
  return dom->element(acc, g.box.inner_radius());
}

FourierElement nu_tensor_hermite(const MetricTensor& g, int nodes) {
  const int d = g.dim();
  auto dom = inverse_domain(g);
  auto blocks = inverse_blocks(g, *dom);
  const auto origin = static_cast<Eigen::Index>(*dom->find(LatticeIndex(d)));
  QuadratureRule gh = gauss_hermite(nodes);
  const double sigma = std::sqrt(2.0 / (g.inverse_min_eigenvalue + g.inverse_max_eigenvalue));
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dom->size()));
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> t(static_cast<std::size_t>(d));
  Eigen::VectorXd lam;
  while (true) {
    double w = 1.0, r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      double y = gh.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      w *= gh.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      r2 += y * y;
      t[static_cast<std::size_t>(i)] = sigma * y;
    }
    Eigen::MatrixXcd x = quadratic_form(blocks, t);
    hermitian_eigen(x, lam);
    Eigen::VectorXcd c = x.row(origin).adjoint();
    for (Eigen::Index i = 0; i < lam.size(); ++i) c(i) *= std::exp(r2 - lam(i));
    acc += w * (x * c);
    int j = d - 1;
    while (j >= 0 && idx[static_cast<std::size_t>(j)] == nodes - 1) {
      idx[static_cast<std::size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
    ++idx[static_cast<std::size_t>(j)];
  }
  acc *= std::pow(sigma * sigma / std::numbers::pi, 0.5 * d);
  return dom->element(acc, g.box.inner_radius());
}

WeightNu compute_nu(const MetricTensor& g, const NuQuadrature& quad) {
  const int d = g.dim();
  WeightNu out;
  FourierElement b = nu_sphere_reduction(g, quad.sphere_nodes);
  if (quad.cross_check) {
    FourierElement a = nu_tensor_hermite(g, quad.hermite_nodes);
    out.quadrature_residual = (a - b).norm();
    if (*out.quadrature_residual > quad.tolerance)
      throw Error(ErrorKind::Tolerance, "sphere and Hermite evaluations of nu disagree", *out.quadrature_residual);
  }
  double def = relative_defect(g.theta, b);
  if (def > quad.tolerance) throw Error(ErrorKind::Tolerance, "nu is not self-adjoint", def);
  out.nu = hermitian_part(g.theta, b);

  auto steps = union_support({}, {&out.nu});
  auto dom = std::make_shared<const LatticeDomain>(LatticeDomain::reachable(g.box, steps, g.max_rows));
  SpectralDecomposition spec(compress_left_mult(g.theta, out.nu, dom));
  out.min_eigenvalue = spec.min_eigenvalue();
  if (!(out.min_eigenvalue > 0.0)) throw Error(ErrorKind::NotPositive, "nu is not positive", out.min_eigenvalue);
  const int r = g.box.inner_radius();
  auto read = [&](const ScalarFunction& f) { return hermitian_part(g.theta, functional_calculus(spec, f).restricted(r)); };
  out.nu_sqrt = read(ScalarFunction::sqrt());
  out.nu_inv_sqrt = read(ScalarFunction::inv_sqrt());
  out.nu_inv = read(ScalarFunction::inverse());

  const FourierElement one = FourierElement::constant(d, 1.0);
  out.sqrt_residual = (twisted_mul(g.theta, out.nu_sqrt, out.nu_sqrt) - out.nu).norm();
  out.inverse_residual = std::max((twisted_mul(g.theta, out.nu_sqrt, out.nu_inv_sqrt) - one).norm(),
                                  (twisted_mul(g.theta, out.nu, out.nu_inv) - one).norm());
  if (out.sqrt_residual > quad.tolerance) throw Error(ErrorKind::Tolerance, "nu^{1/2} squared differs from nu", out.sqrt_residual);
  if (out.inverse_residual > quad.tolerance)
    throw Error(ErrorKind::Tolerance, "powers of nu fail the product check", out.inverse_residual);
  return out;
}

FourierElement build_x_of_s(const MetricTensor& g, std::span<const double> s) {
  const int d = g.dim();
  if (static_cast<int>(s.size()) != d) throw Error(ErrorKind::DimensionMismatch, "s vs metric dimension", static_cast<double>(s.size()));
  FourierElement x(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double c = s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)];
      if (c != 0.0) x += c * g.ginv(i, j);
    }
  return x;
}

// ---------------------------------------------------------------------------
// Operators

FourierElement OperatorDescription::apply(const ThetaMatrix& theta, const FourierElement& y) const {
  FourierElement out(y.dim());
  for (const auto& term : terms) {
    FourierElement v = y;
    for (auto it = term.factors.rbegin(); it != term.factors.rend(); ++it) {
      if (it->kind == OperatorFactor::Kind::Multiply)
        v = twisted_mul(theta, it->element, v);
      else
        v = partial_deriv(it->axis, v);
    }
    out += term.scale * v;
  }
  return out;
}

Eigen::MatrixXcd CompressedGeometry::x_of_s(std::span<const double> s) const { return quadratic_form(x_blocks, s); }

Eigen::MatrixXcd CompressedGeometry::V_of_s(std::span<const double> s) const {
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(Ag.rows(), Ag.cols());
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] != 0.0) v += s[i] * A[i];
  return v;
}

GeometricOperators::GeometricOperators(const MetricTensor& g, const WeightNu& nu)
    : theta_(g.theta), p_(nu.nu_inv_sqrt), flat_(g.is_flat()), max_rows_(g.max_rows) {
  const int d = dim();
  const int r = g.box.inner_radius();
  w_.resize(static_cast<std::size_t>(d * d));
  a_.resize(w_.size());
  b_.resize(w_.size());
  x_.resize(w_.size());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      w_[idx(i, j)] = hermitian_part(theta_, mul(mul(nu.nu_sqrt, g.ginv(i, j)), nu.nu_sqrt).restricted(r));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      FourierElement avg = 0.5 * (w_[idx(i, j)] + w_[idx(j, i)]);
      w_[idx(i, j)] = avg;
      w_[idx(j, i)] = avg;
    }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      a_[idx(i, j)] = mul(p_, w_[idx(i, j)]);
      b_[idx(i, j)] = mul(w_[idx(i, j)], p_);
      x_[idx(i, j)] = mul(a_[idx(i, j)], p_);
      consistency_defect_ = std::max(consistency_defect_, (x_[idx(i, j)] - g.ginv(i, j)).norm());
    }
}

std::vector<LatticeIndex> GeometricOperators::steps() const { return union_support({&w_, &a_, &b_, &x_}, {&p_}); }

FourierElement GeometricOperators::x_of_s(std::span<const double> s) const {
  const int d = dim();
  if (static_cast<int>(s.size()) != d) throw Error(ErrorKind::DimensionMismatch, "s vs operator dimension", static_cast<double>(s.size()));
  FourierElement x(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double c = s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)];
      if (c != 0.0) x += c * x_[idx(i, j)];
    }
  return x;
}

FourierElement GeometricOperators::apply_Ag(const FourierElement& y) const {
  const int d = dim();
  FourierElement u = mul(p_, y);
  std::vector<FourierElement> du;
  for (int j = 0; j < d; ++j) du.push_back(partial_deriv(j, u));
  FourierElement acc(d);
  for (int i = 0; i < d; ++i) {
    FourierElement inner(d);
    for (int j = 0; j < d; ++j) inner += mul(w_[idx(i, j)], du[static_cast<std::size_t>(j)]);
    acc += partial_deriv(i, inner);
  }
  return mul(p_, acc);
}

FourierElement GeometricOperators::apply_Ai(int i, const FourierElement& y) const {
  const int d = dim();
  if (i < 0 || i >= d) throw Error(ErrorKind::InvalidArgument, "operator index out of range", i);
  FourierElement u = mul(p_, y);
  FourierElement acc(d);
  FourierElement second(d);
  for (int j = 0; j < d; ++j) {
    acc += mul(a_[idx(i, j)], partial_deriv(j, u));
    second += partial_deriv(j, mul(b_[idx(j, i)], y));
  }
  return acc + mul(p_, second);
}

FourierElement GeometricOperators::apply_V(std::span<const double> s, const FourierElement& y) const {
  const int d = dim();
  if (static_cast<int>(s.size()) != d) throw Error(ErrorKind::DimensionMismatch, "s vs operator dimension", static_cast<double>(s.size()));
  FourierElement acc(d);
  for (int i = 0; i < d; ++i)
    if (s[static_cast<std::size_t>(i)] != 0.0) acc += s[static_cast<std::size_t>(i)] * apply_Ai(i, y);
  return acc;
}

OperatorDescription GeometricOperators::describe_Ag() const {
  using K = OperatorFactor::Kind;
  OperatorDescription desc;
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      desc.terms.push_back({1.0,
                            {{K::Multiply, p_, 0},
                             {K::Derive, FourierElement(dim()), i},
                             {K::Multiply, w_[idx(i, j)], 0},
                             {K::Derive, FourierElement(dim()), j},
                             {K::Multiply, p_, 0}}});
  return desc;
}

OperatorDescription GeometricOperators::describe_V(std::span<const double> s) const {
  using K = OperatorFactor::Kind;
  OperatorDescription desc;
  for (int i = 0; i < dim(); ++i) {
    double si = s[static_cast<std::size_t>(i)];
    if (si == 0.0) continue;
    for (int j = 0; j < dim(); ++j) {
      desc.terms.push_back({si, {{K::Multiply, a_[idx(i, j)], 0}, {K::Derive, FourierElement(dim()), j}, {K::Multiply, p_, 0}}});
      desc.terms.push_back({si, {{K::Multiply, p_, 0}, {K::Derive, FourierElement(dim()), j}, {K::Multiply, b_[idx(j, i)], 0}}});
    }
  }
  return desc;
}

CompressedGeometry GeometricOperators::compress(DomainPtr domain) const {
  const int d = dim();
  const LatticeDomain& D = *domain;
  CompressedGeometry cg;
  cg.domain = domain;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) cg.x_blocks.push_back(left_mult_matrix(theta_, x_[idx(i, j)], D, D));

  cg.Ag = compress_Ag(D);

  std::vector<LatticeIndex> v_offsets = p_.support();
  for (const auto* group : {&a_, &b_})
    for (const auto& e : *group) {
      auto s = e.support();
      v_offsets.insert(v_offsets.end(), s.begin(), s.end());
    }
  LatticeDomain EV = D.dilated(with_negatives_and_zero(std::move(v_offsets), d), max_rows_);
  Eigen::MatrixXcd pv_in = left_mult_matrix(theta_, p_, EV, D);
  Eigen::MatrixXcd pv_out = left_mult_matrix(theta_, p_, D, EV);
  for (int i = 0; i < d; ++i) {
    Eigen::MatrixXcd ai = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(D.size()), static_cast<Eigen::Index>(D.size()));
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXcd dj = derivation_diagonal(EV, j).cast<cplx>();
      ai += left_mult_matrix(theta_, a_[idx(i, j)], D, EV) * dj.asDiagonal() * pv_in;
      ai += pv_out * dj.asDiagonal() * left_mult_matrix(theta_, b_[idx(j, i)], EV, D);
    }
    cg.A.push_back(std::move(ai));
  }
  return cg;
}

Eigen::MatrixXcd GeometricOperators::compress_Ag(const LatticeDomain& D) const {
  const int d = dim();
  // A_g = p sum D_i w_ij D_j p, factored through the dilation of D by supp(p).
  auto p_offsets = with_negatives_and_zero(p_.support(), d);
  LatticeDomain EA = D.dilated(p_offsets, max_rows_);
  Eigen::MatrixXcd p_in = left_mult_matrix(theta_, p_, EA, D);
  Eigen::MatrixXcd p_out = left_mult_matrix(theta_, p_, D, EA);
  Eigen::MatrixXcd middle = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(EA.size()), static_cast<Eigen::Index>(EA.size()));
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXcd di = derivation_diagonal(EA, i).cast<cplx>();
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXcd dj = derivation_diagonal(EA, j).cast<cplx>();
      middle += di.asDiagonal() * left_mult_matrix(theta_, w_[idx(i, j)], EA, EA) * dj.asDiagonal();
    }
  }
  return p_out * middle * p_in;
}

DomainPtr GeometricOperators::working_domain(const TruncationBox& box) const {
  auto s = steps();
  return std::make_shared<const LatticeDomain>(LatticeDomain::reachable(box, s, max_rows_));
}

double conjugation_identity_residual(const GeometricOperators& ops, const LatticeIndex& n,
                                     std::span<const FourierElement> probes) {
  const auto& theta = ops.theta();
  FourierElement en = FourierElement::delta(n);
  FourierElement en_star = adjoint(theta, en);
  std::vector<double> s(static_cast<std::size_t>(n.dim()));
  for (int i = 0; i < n.dim(); ++i) s[static_cast<std::size_t>(i)] = n[i];
  FourierElement xn = ops.x_of_s(s);
  double worst = 0.0;
  for (const auto& y : probes) {
    FourierElement lhs = twisted_mul(theta, ops.apply_Ag(twisted_mul(theta, y, en)), en_star);
    FourierElement rhs = twisted_mul(theta, xn, y) + ops.apply_Ag(y) + ops.apply_V(s, y);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

}  // namespace nct
