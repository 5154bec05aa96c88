#include "nct/repr.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace nct {

void TruncationBox::validate() const {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::InvalidArgument, "box dimension out of range", dim);
  if (radius < 1) throw Error(ErrorKind::InvalidArgument, "box radius must be positive", radius);
  if (margin < 0 || margin >= radius)
    throw Error(ErrorKind::InvalidArgument, "box margin must satisfy 0 <= margin < radius", margin);
}

std::size_t TruncationBox::cardinality() const noexcept {
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(2 * radius + 1);
  return n;
}

namespace {

void check_rows(std::size_t rows, std::size_t max_rows) {
  if (rows > max_rows) {
    double gib = static_cast<double>(rows) * static_cast<double>(rows) * 16.0 / (1024.0 * 1024.0 * 1024.0);
    std::ostringstream os;
    os << "compression with " << rows << " rows exceeds the cap of " << max_rows << " (dense matrix would need "
       << gib << " GiB)";
    throw Error(ErrorKind::ResourceCap, os.str(), static_cast<double>(rows));
  }
}

std::vector<LatticeIndex> symmetric_steps(std::span<const LatticeIndex> steps) {
  std::vector<LatticeIndex> out;
  for (const auto& s : steps) {
    if (s.is_zero()) continue;
    out.push_back(s);
    out.push_back(-s);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Enumerates the box in lexicographic order.
std::vector<LatticeIndex> box_points(const TruncationBox& box) {
  std::vector<LatticeIndex> pts;
  pts.reserve(box.cardinality());
  LatticeIndex n(box.dim);
  for (int i = 0; i < box.dim; ++i) n[i] = -box.radius;
  while (true) {
    pts.push_back(n);
    int i = box.dim - 1;
    while (i >= 0 && n[i] == box.radius) {
      n[i] = -box.radius;
      --i;
    }
    if (i < 0) break;
    ++n[i];
  }
  return pts;
}

}  // namespace

LatticeDomain::LatticeDomain(int dim, std::vector<LatticeIndex> points, std::size_t max_rows) : dim_(dim) {
  for (const auto& p : points)
    if (p.dim() != dim) throw Error(ErrorKind::DimensionMismatch, "domain point of wrong dimension", p.dim());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  check_rows(points.size(), max_rows);
  points_ = std::move(points);
  index_.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) index_.emplace(points_[i], i);
}

LatticeDomain LatticeDomain::full_box(const TruncationBox& box, std::size_t max_rows) {
  box.validate();
  check_rows(box.cardinality(), max_rows);
  return LatticeDomain(box.dim, box_points(box), max_rows);
}

LatticeDomain LatticeDomain::reachable(const TruncationBox& box, std::span<const LatticeIndex> steps,
                                       const LatticeIndex& seed, std::size_t max_rows) {
  box.validate();
  if (seed.dim() != box.dim) throw Error(ErrorKind::DimensionMismatch, "seed dimension", seed.dim());
  if (!box.contains(seed)) throw Error(ErrorKind::InvalidArgument, "seed outside the box");
  auto moves = symmetric_steps(steps);
  std::unordered_map<LatticeIndex, bool, LatticeIndexHash> seen;
  std::deque<LatticeIndex> queue{seed};
  seen[seed] = true;
  std::vector<LatticeIndex> pts;
  while (!queue.empty()) {
    LatticeIndex p = queue.front();
    queue.pop_front();
    pts.push_back(p);
    check_rows(pts.size(), max_rows);
    for (const auto& m : moves) {
      if (m.dim() != box.dim) throw Error(ErrorKind::DimensionMismatch, "step dimension", m.dim());
      LatticeIndex q = p + m;
      if (!box.contains(q) || seen.count(q)) continue;
      seen[q] = true;
      queue.push_back(q);
    }
  }
  return LatticeDomain(box.dim, std::move(pts), max_rows);
}

std::vector<LatticeDomain> LatticeDomain::components(const TruncationBox& box, std::span<const LatticeIndex> steps,
                                                     std::size_t max_rows) {
  box.validate();
  auto all = box_points(box);
  std::unordered_map<LatticeIndex, bool, LatticeIndexHash> taken;
  std::vector<LatticeDomain> out;
  for (const auto& p : all) {
    if (taken.count(p)) continue;
    LatticeDomain c = reachable(box, steps, p, max_rows);
    for (const auto& q : c.points()) taken[q] = true;
    out.push_back(std::move(c));
  }
  return out;
}

LatticeDomain LatticeDomain::dilated(std::span<const LatticeIndex> offsets, std::size_t max_rows) const {
  std::vector<LatticeIndex> pts;
  pts.reserve(points_.size() * std::max<std::size_t>(offsets.size(), 1));
  for (const auto& p : points_)
    for (const auto& o : offsets) pts.push_back(p + o);
  return LatticeDomain(dim_, std::move(pts), max_rows);
}

LatticeDomain LatticeDomain::shifted(const LatticeIndex& n) const {
  std::vector<LatticeIndex> pts;
  pts.reserve(points_.size());
  for (const auto& p : points_) pts.push_back(p - n);
  return LatticeDomain(dim_, std::move(pts), std::numeric_limits<std::size_t>::max());
}

std::optional<std::size_t> LatticeDomain::find(const LatticeIndex& n) const {
  auto it = index_.find(n);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int LatticeDomain::radius() const noexcept {
  int r = 0;
  for (const auto& p : points_) r = std::max(r, p.max_abs());
  return r;
}

Eigen::VectorXcd LatticeDomain::vector(const FourierElement& a) const {
  if (a.dim() != dim_ && !a.empty()) throw Error(ErrorKind::DimensionMismatch, "element vs domain", a.dim());
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(points_.size()));
  for (const auto& [n, c] : a.terms())
    if (auto i = find(n)) v(static_cast<Eigen::Index>(*i)) = c;
  return v;
}

FourierElement LatticeDomain::element(const Eigen::Ref<const Eigen::VectorXcd>& v, std::optional<int> radius) const {
  if (static_cast<std::size_t>(v.size()) != points_.size())
    throw Error(ErrorKind::DimensionMismatch, "vector length vs domain size", static_cast<double>(v.size()));
  std::vector<FourierElement::Term> terms;
  terms.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (radius && points_[i].max_abs() > *radius) continue;
    terms.emplace_back(points_[i], v(static_cast<Eigen::Index>(i)));
  }
  return FourierElement::from_terms(dim_, std::move(terms));
}

Eigen::VectorXcd LatticeDomain::unit(const LatticeIndex& n) const {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(points_.size()));
  auto i = find(n);
  if (!i) throw Error(ErrorKind::InvalidArgument, "lattice point not in domain");
  v(static_cast<Eigen::Index>(*i)) = 1.0;
  return v;
}

double CompressedOperator::hermitian_defect() const {
  double scale = matrix.cwiseAbs().maxCoeff();
  if (matrix.size() == 0 || scale == 0.0) return 0.0;
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() / scale;
}

Eigen::MatrixXcd left_mult_matrix(const ThetaMatrix& theta, const FourierElement& a, const LatticeDomain& rows,
                                  const LatticeDomain& cols) {
  if (a.dim() != rows.dim() && !a.empty()) throw Error(ErrorKind::DimensionMismatch, "element vs domain", a.dim());
  if (rows.dim() != cols.dim()) throw Error(ErrorKind::DimensionMismatch, "row vs column domain", cols.dim());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const LatticeIndex& q = cols.point(j);
    for (const auto& [mi, c] : a.terms()) {
      if (auto i = rows.find(mi + q))
        m(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(j)) += c * theta.twist(mi, q);
    }
  }
  return m;
}

CompressedOperator compress_left_mult(const ThetaMatrix& theta, const FourierElement& a, DomainPtr domain) {
  Eigen::MatrixXcd m = left_mult_matrix(theta, a, *domain, *domain);
  return {std::move(domain), std::move(m)};
}

Eigen::VectorXd derivation_diagonal(const LatticeDomain& domain, int axis) {
  if (axis < 0 || axis >= domain.dim()) throw Error(ErrorKind::InvalidArgument, "derivation axis out of range", axis);
  Eigen::VectorXd d(static_cast<Eigen::Index>(domain.size()));
  for (std::size_t i = 0; i < domain.size(); ++i) d(static_cast<Eigen::Index>(i)) = domain.point(i)[axis];
  return d;
}

CompressedOperator compress(DomainPtr domain, const std::function<FourierElement(const FourierElement&)>& op) {
  const auto n = static_cast<Eigen::Index>(domain->size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j) = domain->vector(op(FourierElement::delta(domain->point(static_cast<std::size_t>(j)))));
  return {std::move(domain), std::move(m)};
}

// ---------------------------------------------------------------------------

void hermitian_eigen(Eigen::MatrixXcd& a, Eigen::VectorXd& values) {
  const auto n = a.rows();
  values.resize(n);
  if (n == 0) return;
  lapack_int info = LAPACKE_zheev(LAPACK_COL_MAJOR, 'V', 'U', static_cast<lapack_int>(n), a.data(),
                                   static_cast<lapack_int>(n), values.data());
  if (info != 0) throw Error(ErrorKind::Singular, "Hermitian eigensolver did not converge", info);
}

SpectralDecomposition::SpectralDecomposition(const CompressedOperator& op)
    : SpectralDecomposition(op.domain, op.matrix) {}

SpectralDecomposition::SpectralDecomposition(DomainPtr domain, Eigen::MatrixXcd m) : domain_(std::move(domain)) {
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != domain_->size())
    throw Error(ErrorKind::DimensionMismatch, "matrix vs domain size", static_cast<double>(m.rows()));
  double scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
  if (scale > 0.0) {
    double defect = (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
    if (defect > 1e-12) throw Error(ErrorKind::NotSelfAdjoint, "compression is not Hermitian", defect);
  }
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  hermitian_eigen(h, values_);
  vectors_ = std::move(h);
}

double SpectralDecomposition::reconstruction_residual(const Eigen::MatrixXcd& m) const {
  double scale = m.cwiseAbs().maxCoeff();
  Eigen::MatrixXcd r = vectors_ * values_.cast<cplx>().asDiagonal() * vectors_.adjoint() - m;
  return scale > 0.0 ? r.cwiseAbs().maxCoeff() / scale : r.cwiseAbs().maxCoeff();
}

Eigen::VectorXcd SpectralDecomposition::apply(const std::function<cplx(double)>& f,
                                              const Eigen::Ref<const Eigen::VectorXcd>& v) const {
  Eigen::VectorXcd w = vectors_.adjoint() * v;
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) *= f(values_(i));
  return vectors_ * w;
}

Eigen::MatrixXcd SpectralDecomposition::matrix_function(const std::function<cplx(double)>& f) const {
  Eigen::VectorXcd fv(values_.size());
  for (Eigen::Index i = 0; i < values_.size(); ++i) fv(i) = f(values_(i));
  return vectors_ * fv.asDiagonal() * vectors_.adjoint();
}

// ---------------------------------------------------------------------------

ScalarFunction ScalarFunction::identity() { return {"identity", [](double x) { return x; }, -std::numeric_limits<double>::infinity(), false}; }

ScalarFunction ScalarFunction::exp(double scale) {
  return {"exp", [scale](double x) { return std::exp(scale * x); }, -std::numeric_limits<double>::infinity(), false};
}

ScalarFunction ScalarFunction::power(double p) {
  bool whole = p >= 0.0 && std::floor(p) == p;
  if (whole) return {"power", [p](double x) { return std::pow(x, p); }, -std::numeric_limits<double>::infinity(), false};
  return {"power", [p](double x) { return std::pow(x, p); }, 0.0, p < 0.0};
}

void ScalarFunction::check_spectrum(double min_eigenvalue) const {
  bool bad = strict ? !(min_eigenvalue > lower) : !(min_eigenvalue >= lower);
  if (bad) throw Error(ErrorKind::NotPositive, "spectrum leaves the domain of " + name, min_eigenvalue);
}

FourierElement functional_calculus(const SpectralDecomposition& spec, const ScalarFunction& f) {
  const auto& dom = *spec.domain();
  f.check_spectrum(spec.min_eigenvalue());
  Eigen::VectorXcd v = spec.apply([&](double x) { return cplx(f.fn(x)); }, dom.unit(LatticeIndex(dom.dim())));
  return dom.element(v);
}

FourierElement functional_calculus(const ThetaMatrix& theta, const FourierElement& a, const ScalarFunction& f,
                                   DomainPtr domain) {
  SpectralDecomposition spec(compress_left_mult(theta, a, std::move(domain)));
  return functional_calculus(spec, f);
}

InverseResult element_inverse(const ThetaMatrix& theta, const FourierElement& a, DomainPtr domain) {
  CompressedOperator op = compress_left_mult(theta, a, domain);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(op.matrix);
  double rc = lu.rcond();
  if (!(rc >= 1e-14)) throw Error(ErrorKind::Singular, "compressed element is numerically singular", rc);
  Eigen::VectorXcd b = lu.solve(domain->unit(LatticeIndex(domain->dim())));
  InverseResult r;
  r.element = domain->element(b);
  r.rcond = rc;
  r.residual = (twisted_mul(theta, a, r.element) - FourierElement::constant(a.dim(), 1.0)).norm();
  return r;
}

Eigen::VectorXcd resolvent_apply(const SpectralDecomposition& spec, cplx z, const Eigen::Ref<const Eigen::VectorXcd>& v) {
  const auto& lam = spec.eigenvalues();
  double scale = std::max({1.0, std::abs(z), lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0});
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (std::abs(lam(i) + z) <= 1e-14 * scale)
      throw Error(ErrorKind::Singular, "z meets the negative of the compressed spectrum", lam(i));
  return spec.apply([z](double x) { return 1.0 / (x + z); }, v);
}

FourierElement resolvent_apply(const SpectralDecomposition& spec, cplx z, const FourierElement& v) {
  const auto& dom = *spec.domain();
  return dom.element(resolvent_apply(spec, z, dom.vector(v)));
}

}  // namespace nct
