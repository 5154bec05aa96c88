#pragma once

// Galerkin compressions onto finite lattice domains and the dense kernels
// built on them: Hermitian eigendecomposition, functional calculus,
// inversion and resolvents.

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "nct/core.hpp"

namespace nct {

inline constexpr std::size_t kDefaultMaxRows = 20000;

struct TruncationBox {
  int dim = 2;
  int radius = 8;
  int margin = 0;

  /// Throws InvalidArgument unless 0 <= margin < radius.
  void validate() const;
  int inner_radius() const noexcept { return radius - margin; }
  bool contains(const LatticeIndex& n) const noexcept { return n.max_abs() <= radius; }
  bool in_inner(const LatticeIndex& n) const noexcept { return n.max_abs() <= inner_radius(); }
  std::size_t cardinality() const noexcept;
};

/// Ordered finite set of lattice points; rows and columns of every
/// compressed matrix are indexed by one of these.
class LatticeDomain {
 public:
  LatticeDomain() = default;
  /// Points are sorted lexicographically and deduplicated.
  LatticeDomain(int dim, std::vector<LatticeIndex> points, std::size_t max_rows = kDefaultMaxRows);

  static LatticeDomain full_box(const TruncationBox& box, std::size_t max_rows = kDefaultMaxRows);

  /// Points of the box reachable from `seed` by moves in +-steps without leaving the box.
  static LatticeDomain reachable(const TruncationBox& box, std::span<const LatticeIndex> steps,
                                 const LatticeIndex& seed, std::size_t max_rows = kDefaultMaxRows);
  static LatticeDomain reachable(const TruncationBox& box, std::span<const LatticeIndex> steps,
                                 std::size_t max_rows = kDefaultMaxRows) {
    return reachable(box, steps, LatticeIndex(box.dim), max_rows);
  }

  /// Partition of the whole box into +-steps connected pieces, ordered by
  /// their smallest point. Any element whose support lies in `steps`
  /// compresses block-diagonally along this partition.
  static std::vector<LatticeDomain> components(const TruncationBox& box, std::span<const LatticeIndex> steps,
                                               std::size_t max_rows = kDefaultMaxRows);

  /// {p + delta : p in this domain, delta in offsets}.
  LatticeDomain dilated(std::span<const LatticeIndex> offsets, std::size_t max_rows = kDefaultMaxRows) const;
  /// {p - n : p in this domain}.
  LatticeDomain shifted(const LatticeIndex& n) const;

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const LatticeIndex& point(std::size_t i) const { return points_[i]; }
  std::span<const LatticeIndex> points() const noexcept { return points_; }
  std::optional<std::size_t> find(const LatticeIndex& n) const;
  bool contains(const LatticeIndex& n) const { return find(n).has_value(); }
  int radius() const noexcept;

  /// Coefficients on the domain; terms outside are dropped.
  Eigen::VectorXcd vector(const FourierElement& a) const;
  /// Reads a coefficient vector back; optional max-norm radius filter.
  FourierElement element(const Eigen::Ref<const Eigen::VectorXcd>& v, std::optional<int> radius = std::nullopt) const;
  Eigen::VectorXcd unit(const LatticeIndex& n) const;

 private:
  int dim_ = 0;
  std::vector<LatticeIndex> points_;
  std::unordered_map<LatticeIndex, std::size_t, LatticeIndexHash> index_;
};

using DomainPtr = std::shared_ptr<const LatticeDomain>;

struct CompressedOperator {
  DomainPtr domain;
  Eigen::MatrixXcd matrix;

  /// max |M - M^*| / max |M|, zero for the zero matrix.
  double hermitian_defect() const;
};

/// Entry (p, q) is the coefficient of e_p in a e_q, p in rows, q in cols.
Eigen::MatrixXcd left_mult_matrix(const ThetaMatrix& theta, const FourierElement& a, const LatticeDomain& rows,
                                  const LatticeDomain& cols);
CompressedOperator compress_left_mult(const ThetaMatrix& theta, const FourierElement& a, DomainPtr domain);
/// Diagonal of D_axis on the domain.
Eigen::VectorXd derivation_diagonal(const LatticeDomain& domain, int axis);
/// Generic compression of a linear map by exact application to every basis vector.
CompressedOperator compress(DomainPtr domain, const std::function<FourierElement(const FourierElement&)>& op);

class SpectralDecomposition {
 public:
  /// Symmetrizes when the relative asymmetry is below 1e-12 and throws
  /// NotSelfAdjoint otherwise. Eigenvalues ascend.
  explicit SpectralDecomposition(const CompressedOperator& op);
  SpectralDecomposition(DomainPtr domain, Eigen::MatrixXcd hermitian);

  const DomainPtr& domain() const noexcept { return domain_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return values_; }
  const Eigen::MatrixXcd& eigenvectors() const noexcept { return vectors_; }
  double min_eigenvalue() const { return values_.size() ? values_(0) : 0.0; }
  double max_eigenvalue() const { return values_.size() ? values_(values_.size() - 1) : 0.0; }

  /// ||Q L Q^* - M||_max / ||M||_max against the decomposed matrix.
  double reconstruction_residual(const Eigen::MatrixXcd& m) const;

  /// Q f(L) Q^* v.
  Eigen::VectorXcd apply(const std::function<cplx(double)>& f, const Eigen::Ref<const Eigen::VectorXcd>& v) const;
  Eigen::MatrixXcd matrix_function(const std::function<cplx(double)>& f) const;

 private:
  DomainPtr domain_;
  Eigen::VectorXd values_;
  Eigen::MatrixXcd vectors_;
};

/// Hermitian eigensolver on a raw matrix (LAPACK zheev). The input must be Hermitian.
void hermitian_eigen(Eigen::MatrixXcd& a_in_vectors_out, Eigen::VectorXd& values);

struct ScalarFunction {
  std::string name;
  std::function<double(double)> fn;
  /// Spectrum must satisfy x > lower (strict) or x >= lower.
  double lower = -std::numeric_limits<double>::infinity();
  bool strict = false;

  static ScalarFunction identity();
  static ScalarFunction exp(double scale = 1.0);
  static ScalarFunction power(double p);
  static ScalarFunction sqrt() { return power(0.5); }
  static ScalarFunction inv_sqrt() { return power(-0.5); }
  static ScalarFunction inverse() { return power(-1.0); }

  /// Throws NotPositive carrying the offending eigenvalue.
  void check_spectrum(double min_eigenvalue) const;
};

/// f(a) applied to the unit, read back as coefficients on the domain.
FourierElement functional_calculus(const SpectralDecomposition& spec, const ScalarFunction& f);
FourierElement functional_calculus(const ThetaMatrix& theta, const FourierElement& a, const ScalarFunction& f,
                                   DomainPtr domain);

struct InverseResult {
  FourierElement element;
  double residual = 0.0;  ///< ||a b - 1||_2 in the full algebra
  double rcond = 0.0;
};

/// Throws Singular when the reciprocal condition estimate is below 1e-14.
InverseResult element_inverse(const ThetaMatrix& theta, const FourierElement& a, DomainPtr domain);

/// (a + z)^{-1} v through a cached decomposition of a's compression.
FourierElement resolvent_apply(const SpectralDecomposition& spec, cplx z, const FourierElement& v);
Eigen::VectorXcd resolvent_apply(const SpectralDecomposition& spec, cplx z, const Eigen::Ref<const Eigen::VectorXcd>& v);

}  // namespace nct
