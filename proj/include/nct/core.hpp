#pragma once

// Finitely supported Fourier model of the noncommutative torus A_theta.
//
// An element x = sum_n x(n) e_n is stored as a sorted list of
// (lattice index, coefficient) pairs. The basis multiplies as
//
//   e_m e_n = exp(-i sum_{j<k} theta_jk n_j m_k) e_{m+n}
//   e_n^*   = exp(-i sum_{j<k} theta_jk n_j n_k) e_{-n}
//
// and every product in the library goes through twisted_mul so that the
// phase convention lives in one place.

#include <array>
#include <complex>
#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nct/error.hpp"

namespace nct {

using cplx = std::complex<double>;

/// Largest torus dimension supported by LatticeIndex.
inline constexpr int kMaxDim = 6;

/// Coefficients with magnitude below this are exact-zero noise and dropped.
inline constexpr double kPruneThreshold = 1e-300;

class LatticeIndex {
 public:
  LatticeIndex() = default;
  explicit LatticeIndex(int dim);
  LatticeIndex(std::initializer_list<int> components);
  explicit LatticeIndex(std::span<const int> components);

  static LatticeIndex unit(int dim, int axis);

  int dim() const noexcept { return dim_; }
  int operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }
  std::span<const int> components() const noexcept {
    return {c_.data(), static_cast<std::size_t>(dim_)};
  }

  bool is_zero() const noexcept;
  int max_abs() const noexcept;
  long long norm_sq() const noexcept;
  double norm() const noexcept;

  LatticeIndex operator-() const;
  LatticeIndex& operator+=(const LatticeIndex& o);
  LatticeIndex& operator-=(const LatticeIndex& o);
  friend LatticeIndex operator+(LatticeIndex a, const LatticeIndex& b) { return a += b; }
  friend LatticeIndex operator-(LatticeIndex a, const LatticeIndex& b) { return a -= b; }

  // Lexicographic on components; unused trailing slots are always zero.
  friend bool operator==(const LatticeIndex&, const LatticeIndex&) = default;
  friend auto operator<=>(const LatticeIndex&, const LatticeIndex&) = default;

 private:
  std::array<int, kMaxDim> c_{};
  int dim_ = 0;
};

struct LatticeIndexHash {
  std::size_t operator()(const LatticeIndex& n) const noexcept;
};

/// Antisymmetric deformation matrix theta (radians).
class ThetaMatrix {
 public:
  explicit ThetaMatrix(int dim = 2);
  /// Throws ErrorKind::InvalidArgument unless `row_major` is antisymmetric.
  ThetaMatrix(int dim, std::vector<double> row_major);

  static ThetaMatrix planar(double theta12);

  int dim() const noexcept { return dim_; }
  double operator()(int k, int l) const { return entries_[static_cast<std::size_t>(k * dim_ + l)]; }

  /// sum_{j<k} theta_jk right_j left_k, the exponent of e_left e_right.
  double twist_angle(const LatticeIndex& left, const LatticeIndex& right) const;
  cplx twist(const LatticeIndex& left, const LatticeIndex& right) const;

  /// Upper-left embedding into a larger dimension, zero elsewhere.
  ThetaMatrix extended(int new_dim) const;

  std::vector<double> row_major() const { return entries_; }

 private:
  int dim_;
  std::vector<double> entries_;
};

class FourierElement {
 public:
  using Term = std::pair<LatticeIndex, cplx>;

  explicit FourierElement(int dim = 0) : dim_(dim) {}

  static FourierElement delta(const LatticeIndex& n, cplx c = 1.0);
  static FourierElement constant(int dim, cplx c);
  /// Sums duplicate indices and prunes exact zeros.
  static FourierElement from_terms(int dim, std::vector<Term> terms);

  int dim() const noexcept { return dim_; }
  bool empty() const noexcept { return terms_.empty(); }
  std::size_t size() const noexcept { return terms_.size(); }
  std::span<const Term> terms() const noexcept { return terms_; }

  cplx coeff(const LatticeIndex& n) const;
  int support_radius() const noexcept;
  std::vector<LatticeIndex> support() const;

  double norm() const noexcept;
  double max_abs() const noexcept;

  /// Keeps coefficients with max_i |n_i| <= radius.
  FourierElement restricted(int radius) const;
  FourierElement filtered(const std::function<bool(const LatticeIndex&)>& keep) const;

  FourierElement& operator+=(const FourierElement& o);
  FourierElement& operator-=(const FourierElement& o);
  FourierElement& operator*=(cplx c);
  friend FourierElement operator+(FourierElement a, const FourierElement& b) { return a += b; }
  friend FourierElement operator-(FourierElement a, const FourierElement& b) { return a -= b; }
  friend FourierElement operator*(cplx c, FourierElement a) { return a *= c; }
  friend FourierElement operator*(FourierElement a, cplx c) { return a *= c; }

 private:
  FourierElement(int dim, std::vector<Term> sorted_terms, bool) : dim_(dim), terms_(std::move(sorted_terms)) {}
  friend FourierElement axpy_merge(const FourierElement&, const FourierElement&, cplx);

  int dim_;
  std::vector<Term> terms_;
};

/// Twisted convolution: (ab)(p) = sum_{m+n=p} a(m) b(n) exp(-i sum_{j<k} theta_jk n_j m_k).
FourierElement twisted_mul(const ThetaMatrix& theta, const FourierElement& a, const FourierElement& b);
FourierElement adjoint(const ThetaMatrix& theta, const FourierElement& a);
cplx trace_tau(const FourierElement& a);
/// <a, b> = tau(a^* b) = sum_n conj(a(n)) b(n).
cplx l2_inner(const FourierElement& a, const FourierElement& b);
/// D_axis, zero-based axis.
FourierElement partial_deriv(int axis, const FourierElement& a);
/// Flat Laplacian sum_k D_k^2.
FourierElement flat_laplacian(const FourierElement& a);
/// Right multiplication by e_n, i.e. lambda_r(e_n).
FourierElement right_mul_basis(const ThetaMatrix& theta, const FourierElement& a, const LatticeIndex& n);

/// sum_{|alpha|_1 <= k} ||D^alpha a||_2.
double sobolev_norm(const FourierElement& a, int order);
/// (sum_n |n|_2^{2k} |a(n)|^2)^{1/2}, the equivalent Fourier-weighted form.
double sobolev_fourier_norm(const FourierElement& a, int order);

/// ||a - a^*||_2.
double self_adjoint_defect(const ThetaMatrix& theta, const FourierElement& a);
/// (a + a^*) / 2.
FourierElement hermitian_part(const ThetaMatrix& theta, const FourierElement& a);

/// Record format shared by every file: [{"index": [...], "re": x, "im": y}, ...]
/// sorted lexicographically by index.
nlohmann::json element_to_json(const FourierElement& a);
FourierElement element_from_json(const nlohmann::json& records, int dim);

}  // namespace nct
