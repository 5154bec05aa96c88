#include "nct/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace nct {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::NotSelfAdjoint: return "not self-adjoint";
    case ErrorKind::NotPositive: return "not positive";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::Tolerance: return "tolerance exceeded";
    case ErrorKind::ResourceCap: return "resource cap";
    case ErrorKind::MarginExhausted: return "margin exhausted";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

namespace {

std::string decorate(ErrorKind kind, const std::string& message, std::optional<double> diagnostic) {
  std::ostringstream os;
  os << to_string(kind) << ": " << message;
  if (diagnostic) os << " (value " << *diagnostic << ")";
  return os.str();
}

void require_dim(int a, int b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + ": dimensions " + std::to_string(a) + " and " + std::to_string(b));
  }
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::optional<double> diagnostic)
    : std::runtime_error(decorate(kind, message, diagnostic)), kind_(kind), diagnostic_(diagnostic) {}

// ---------------------------------------------------------------------------
// LatticeIndex

LatticeIndex::LatticeIndex(int dim) : dim_(dim) {
  if (dim < 0 || dim > kMaxDim) throw Error(ErrorKind::InvalidArgument, "lattice dimension out of range", dim);
}

LatticeIndex::LatticeIndex(std::initializer_list<int> components)
    : LatticeIndex(std::span<const int>(components.begin(), components.size())) {}

LatticeIndex::LatticeIndex(std::span<const int> components) : LatticeIndex(static_cast<int>(components.size())) {
  std::copy(components.begin(), components.end(), c_.begin());
}

LatticeIndex LatticeIndex::unit(int dim, int axis) {
  LatticeIndex n(dim);
  if (axis < 0 || axis >= dim) throw Error(ErrorKind::InvalidArgument, "axis out of range", axis);
  n[axis] = 1;
  return n;
}

bool LatticeIndex::is_zero() const noexcept {
  for (int i = 0; i < dim_; ++i)
    if (c_[i] != 0) return false;
  return true;
}

int LatticeIndex::max_abs() const noexcept {
  int m = 0;
  for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
  return m;
}

long long LatticeIndex::norm_sq() const noexcept {
  long long s = 0;
  for (int i = 0; i < dim_; ++i) s += static_cast<long long>(c_[i]) * c_[i];
  return s;
}

double LatticeIndex::norm() const noexcept { return std::sqrt(static_cast<double>(norm_sq())); }

LatticeIndex LatticeIndex::operator-() const {
  LatticeIndex r(*this);
  for (int i = 0; i < dim_; ++i) r.c_[i] = -r.c_[i];
  return r;
}

LatticeIndex& LatticeIndex::operator+=(const LatticeIndex& o) {
  require_dim(dim_, o.dim_, "lattice add");
  for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
  return *this;
}

LatticeIndex& LatticeIndex::operator-=(const LatticeIndex& o) {
  require_dim(dim_, o.dim_, "lattice subtract");
  for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
  return *this;
}

std::size_t LatticeIndexHash::operator()(const LatticeIndex& n) const noexcept {
  std::size_t h = static_cast<std::size_t>(n.dim());
  for (int i = 0; i < n.dim(); ++i) {
    h ^= static_cast<std::size_t>(static_cast<unsigned>(n[i]) * 0x9E3779B1u) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  }
  return h;
}

// ---------------------------------------------------------------------------
// ThetaMatrix

ThetaMatrix::ThetaMatrix(int dim) : dim_(dim), entries_(static_cast<std::size_t>(dim * dim), 0.0) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::InvalidArgument, "theta dimension out of range", dim);
}

ThetaMatrix::ThetaMatrix(int dim, std::vector<double> row_major) : ThetaMatrix(dim) {
  if (row_major.size() != entries_.size())
    throw Error(ErrorKind::DimensionMismatch, "theta needs d*d entries", static_cast<double>(row_major.size()));
  for (int k = 0; k < dim; ++k)
    for (int l = 0; l < dim; ++l) {
      double a = row_major[static_cast<std::size_t>(k * dim + l)];
      double b = row_major[static_cast<std::size_t>(l * dim + k)];
      if (!std::isfinite(a)) throw Error(ErrorKind::InvalidArgument, "theta entry is not finite");
      if (a != -b) throw Error(ErrorKind::InvalidArgument, "theta must be antisymmetric", a + b);
    }
  entries_ = std::move(row_major);
}

ThetaMatrix ThetaMatrix::planar(double theta12) { return ThetaMatrix(2, {0.0, theta12, -theta12, 0.0}); }

double ThetaMatrix::twist_angle(const LatticeIndex& left, const LatticeIndex& right) const {
  double s = 0.0;
  for (int j = 0; j < dim_; ++j) {
    if (right[j] == 0) continue;
    for (int k = j + 1; k < dim_; ++k) s += (*this)(j, k) * right[j] * left[k];
  }
  return s;
}

cplx ThetaMatrix::twist(const LatticeIndex& left, const LatticeIndex& right) const {
  double a = twist_angle(left, right);
  if (a == 0.0) return 1.0;
  return std::polar(1.0, -a);
}

ThetaMatrix ThetaMatrix::extended(int new_dim) const {
  if (new_dim < dim_) throw Error(ErrorKind::InvalidArgument, "cannot shrink theta", new_dim);
  std::vector<double> e(static_cast<std::size_t>(new_dim * new_dim), 0.0);
  for (int k = 0; k < dim_; ++k)
    for (int l = 0; l < dim_; ++l) e[static_cast<std::size_t>(k * new_dim + l)] = (*this)(k, l);
  return ThetaMatrix(new_dim, std::move(e));
}

// ---------------------------------------------------------------------------
// FourierElement

namespace {

bool keep_coeff(cplx c) { return std::abs(c) >= kPruneThreshold; }

}  // namespace

FourierElement FourierElement::delta(const LatticeIndex& n, cplx c) {
  FourierElement e(n.dim());
  if (keep_coeff(c)) e.terms_.emplace_back(n, c);
  return e;
}

FourierElement FourierElement::constant(int dim, cplx c) { return delta(LatticeIndex(dim), c); }

FourierElement FourierElement::from_terms(int dim, std::vector<Term> terms) {
  for (const auto& t : terms) require_dim(dim, t.first.dim(), "from_terms");
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.first < b.first; });
  std::vector<Term> out;
  out.reserve(terms.size());
  for (auto& t : terms) {
    if (!out.empty() && out.back().first == t.first)
      out.back().second += t.second;
    else
      out.push_back(t);
  }
  std::erase_if(out, [](const Term& t) { return !keep_coeff(t.second); });
  return FourierElement(dim, std::move(out), true);
}

cplx FourierElement::coeff(const LatticeIndex& n) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), n,
                             [](const Term& t, const LatticeIndex& key) { return t.first < key; });
  if (it != terms_.end() && it->first == n) return it->second;
  return 0.0;
}

int FourierElement::support_radius() const noexcept {
  int r = 0;
  for (const auto& t : terms_) r = std::max(r, t.first.max_abs());
  return r;
}

std::vector<LatticeIndex> FourierElement::support() const {
  std::vector<LatticeIndex> s;
  s.reserve(terms_.size());
  for (const auto& t : terms_) s.push_back(t.first);
  return s;
}

double FourierElement::norm() const noexcept {
  double s = 0.0;
  for (const auto& t : terms_) s += std::norm(t.second);
  return std::sqrt(s);
}

double FourierElement::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.second));
  return m;
}

FourierElement FourierElement::restricted(int radius) const {
  return filtered([radius](const LatticeIndex& n) { return n.max_abs() <= radius; });
}

FourierElement FourierElement::filtered(const std::function<bool(const LatticeIndex&)>& keep) const {
  std::vector<Term> out;
  for (const auto& t : terms_)
    if (keep(t.first)) out.push_back(t);
  return FourierElement(dim_, std::move(out), true);
}

FourierElement axpy_merge(const FourierElement& a, const FourierElement& b, cplx scale) {
  require_dim(a.dim_, b.dim_, "element sum");
  std::vector<FourierElement::Term> out;
  out.reserve(a.terms_.size() + b.terms_.size());
  auto i = a.terms_.begin();
  auto j = b.terms_.begin();
  while (i != a.terms_.end() || j != b.terms_.end()) {
    if (j == b.terms_.end() || (i != a.terms_.end() && i->first < j->first)) {
      out.push_back(*i++);
    } else if (i == a.terms_.end() || j->first < i->first) {
      out.emplace_back(j->first, scale * j->second);
      ++j;
    } else {
      cplx c = i->second + scale * j->second;
      if (keep_coeff(c)) out.emplace_back(i->first, c);
      ++i;
      ++j;
    }
  }
  std::erase_if(out, [](const FourierElement::Term& t) { return !keep_coeff(t.second); });
  return FourierElement(a.dim_, std::move(out), true);
}

FourierElement& FourierElement::operator+=(const FourierElement& o) {
  if (dim_ == 0 && terms_.empty()) dim_ = o.dim_;
  *this = axpy_merge(*this, o, 1.0);
  return *this;
}

FourierElement& FourierElement::operator-=(const FourierElement& o) {
  if (dim_ == 0 && terms_.empty()) dim_ = o.dim_;
  *this = axpy_merge(*this, o, -1.0);
  return *this;
}

FourierElement& FourierElement::operator*=(cplx c) {
  for (auto& t : terms_) t.second *= c;
  std::erase_if(terms_, [](const Term& t) { return !keep_coeff(t.second); });
  return *this;
}

// ---------------------------------------------------------------------------
// Algebra operations

FourierElement twisted_mul(const ThetaMatrix& theta, const FourierElement& a, const FourierElement& b) {
  require_dim(a.dim(), b.dim(), "twisted_mul");
  require_dim(a.dim(), theta.dim(), "twisted_mul theta");
  std::unordered_map<LatticeIndex, cplx, LatticeIndexHash> acc;
  acc.reserve(a.size() * b.size());
  for (const auto& [m, am] : a.terms())
    for (const auto& [n, bn] : b.terms()) acc[m + n] += am * bn * theta.twist(m, n);
  std::vector<FourierElement::Term> terms(acc.begin(), acc.end());
  return FourierElement::from_terms(a.dim(), std::move(terms));
}

FourierElement adjoint(const ThetaMatrix& theta, const FourierElement& a) {
  require_dim(a.dim(), theta.dim(), "adjoint");
  std::vector<FourierElement::Term> terms;
  terms.reserve(a.size());
  for (const auto& [n, c] : a.terms()) terms.emplace_back(-n, std::conj(c) * theta.twist(n, n));
  return FourierElement::from_terms(a.dim(), std::move(terms));
}

cplx trace_tau(const FourierElement& a) { return a.coeff(LatticeIndex(a.dim())); }

cplx l2_inner(const FourierElement& a, const FourierElement& b) {
  require_dim(a.dim(), b.dim(), "l2_inner");
  cplx s = 0.0;
  auto i = a.terms().begin();
  auto j = b.terms().begin();
  while (i != a.terms().end() && j != b.terms().end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      s += std::conj(i->second) * j->second;
      ++i;
      ++j;
    }
  }
  return s;
}

FourierElement partial_deriv(int axis, const FourierElement& a) {
  if (axis < 0 || axis >= a.dim()) throw Error(ErrorKind::InvalidArgument, "derivation axis out of range", axis);
  std::vector<FourierElement::Term> terms;
  terms.reserve(a.size());
  for (const auto& [n, c] : a.terms())
    if (n[axis] != 0) terms.emplace_back(n, c * static_cast<double>(n[axis]));
  return FourierElement::from_terms(a.dim(), std::move(terms));
}

FourierElement flat_laplacian(const FourierElement& a) {
  std::vector<FourierElement::Term> terms;
  terms.reserve(a.size());
  for (const auto& [n, c] : a.terms())
    if (!n.is_zero()) terms.emplace_back(n, c * static_cast<double>(n.norm_sq()));
  return FourierElement::from_terms(a.dim(), std::move(terms));
}

FourierElement right_mul_basis(const ThetaMatrix& theta, const FourierElement& a, const LatticeIndex& n) {
  return twisted_mul(theta, a, FourierElement::delta(n));
}

namespace {

// Visits every multi-index alpha with |alpha|_1 <= order.
template <class F>
void for_each_multi_index(int dim, int order, F&& f) {
  std::vector<int> alpha(static_cast<std::size_t>(dim), 0);
  auto rec = [&](auto&& self, int axis, int remaining) -> void {
    if (axis == dim) {
      f(alpha);
      return;
    }
    for (int p = 0; p <= remaining; ++p) {
      alpha[static_cast<std::size_t>(axis)] = p;
      self(self, axis + 1, remaining - p);
    }
    alpha[static_cast<std::size_t>(axis)] = 0;
  };
  rec(rec, 0, order);
}

}  // namespace

double sobolev_norm(const FourierElement& a, int order) {
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "negative Sobolev order", order);
  double total = 0.0;
  for_each_multi_index(a.dim(), order, [&](const std::vector<int>& alpha) {
    double s = 0.0;
    for (const auto& [n, c] : a.terms()) {
      double w = 1.0;
      for (int i = 0; i < a.dim(); ++i) w *= std::pow(static_cast<double>(n[i]), alpha[static_cast<std::size_t>(i)]);
      s += w * w * std::norm(c);
    }
    total += std::sqrt(s);
  });
  return total;
}

double sobolev_fourier_norm(const FourierElement& a, int order) {
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "negative Sobolev order", order);
  double s = 0.0;
  for (const auto& [n, c] : a.terms()) s += std::pow(static_cast<double>(n.norm_sq()), order) * std::norm(c);
  return std::sqrt(s);
}

double self_adjoint_defect(const ThetaMatrix& theta, const FourierElement& a) {
  return (a - adjoint(theta, a)).norm();
}

FourierElement hermitian_part(const ThetaMatrix& theta, const FourierElement& a) {
  return 0.5 * (a + adjoint(theta, a));
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json element_to_json(const FourierElement& a) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [n, c] : a.terms()) {
    nlohmann::json rec;
    rec["index"] = std::vector<int>(n.components().begin(), n.components().end());
    rec["re"] = c.real();
    rec["im"] = c.imag();
    arr.push_back(std::move(rec));
  }
  return arr;
}

FourierElement element_from_json(const nlohmann::json& records, int dim) {
  if (!records.is_array()) throw Error(ErrorKind::Config, "coefficient records must be an array");
  std::vector<FourierElement::Term> terms;
  for (const auto& rec : records) {
    if (!rec.is_object() || !rec.contains("index"))
      throw Error(ErrorKind::Config, "coefficient record needs an \"index\" field");
    auto idx = rec.at("index").get<std::vector<int>>();
    if (static_cast<int>(idx.size()) != dim)
      throw Error(ErrorKind::DimensionMismatch, "record index length differs from dimension", static_cast<double>(idx.size()));
    double re = rec.value("re", 0.0);
    double im = rec.value("im", 0.0);
    terms.emplace_back(LatticeIndex(std::span<const int>(idx)), cplx(re, im));
  }
  return FourierElement::from_terms(dim, std::move(terms));
}

}  // namespace nct
