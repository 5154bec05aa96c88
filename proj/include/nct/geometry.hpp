#pragma once

// Metric tensors over the algebra, the weight nu, and the operators A_g,
// A_i and V(s) built from them.

#include <optional>
#include <vector>

#include "nct/core.hpp"
#include "nct/repr.hpp"

namespace nct {

struct MetricOptions {
  /// Acceptable max_{i,k} ||sum_j g_ij (g^-1)_jk - delta_ik||_2.
  double inverse_tolerance = 1e-6;
  /// Acceptable self-adjointness defect of a read-back inverse entry.
  double adjoint_tolerance = 1e-8;
  std::size_t max_rows = kDefaultMaxRows;
};

class MetricTensor {
 public:
  int dim() const noexcept { return theta.dim(); }
  const FourierElement& g(int i, int j) const { return entries[static_cast<std::size_t>(i * dim() + j)]; }
  const FourierElement& ginv(int i, int j) const { return inverse_entries[static_cast<std::size_t>(i * dim() + j)]; }
  /// Union of the supports of the g entries.
  std::vector<LatticeIndex> steps() const;
  /// Largest support radius among the g entries.
  int support_radius() const;
  bool is_flat() const;

  ThetaMatrix theta{2};
  TruncationBox box;  ///< geometry box; read-backs live on its inner radius
  std::vector<FourierElement> entries;
  std::vector<FourierElement> inverse_entries;
  double positivity_margin = 0.0;     ///< min eigenvalue of the block compression of g
  double inverse_residual = 0.0;
  double inverse_min_eigenvalue = 0.0;  ///< spectrum of the block compression of g^-1
  double inverse_max_eigenvalue = 0.0;
  std::size_t max_rows = kDefaultMaxRows;
};

/// Row-major d x d entries; empty entries may be passed as FourierElement(d).
MetricTensor validate_and_invert_metric(const ThetaMatrix& theta, std::vector<FourierElement> entries,
                                        const TruncationBox& box, const MetricOptions& options = {});
MetricTensor flat_metric(const ThetaMatrix& theta, const TruncationBox& box);
/// g = h * identity.
MetricTensor conformal_metric(const ThetaMatrix& theta, const FourierElement& h, const TruncationBox& box,
                              const MetricOptions& options = {});

struct WeightNu {
  FourierElement nu, nu_sqrt, nu_inv_sqrt, nu_inv;
  /// ||path A - path B||_2 when both paths ran.
  std::optional<double> quadrature_residual;
  double sqrt_residual = 0.0;     ///< ||nu_sqrt^2 - nu||_2
  double inverse_residual = 0.0;  ///< max of ||nu_sqrt nu_inv_sqrt - 1||_2 and ||nu nu_inv - 1||_2
  double min_eigenvalue = 0.0;
};

struct NuQuadrature {
  int sphere_nodes = 64;
  int hermite_nodes = 32;
  bool cross_check = true;
  double tolerance = 1e-6;
};

/// Radial reduction: pi^{-d/2} Gamma(d/2)/2 * integral over S^{d-1} of x(u)^{-d/2}.
FourierElement nu_sphere_reduction(const MetricTensor& g, int sphere_nodes);
/// Tensor Gauss-Hermite quadrature of pi^{-d/2} * integral of exp(-x(t)), scaled to the g^-1 spectrum.
FourierElement nu_tensor_hermite(const MetricTensor& g, int nodes);
/// Throws Tolerance when the two paths disagree or a power fails its product check.
WeightNu compute_nu(const MetricTensor& g, const NuQuadrature& quadrature = {});

/// x(s) = sum_ij (g^-1)_ij s_i s_j.
FourierElement build_x_of_s(const MetricTensor& g, std::span<const double> s);

/// Symbolic operator: a sum of terms, each a scale and a right-to-left
/// chain of left multiplications and derivations.
struct OperatorFactor {
  enum class Kind { Multiply, Derive } kind;
  FourierElement element;  ///< Multiply
  int axis = 0;            ///< Derive
};
struct OperatorTerm {
  cplx scale = 1.0;
  std::vector<OperatorFactor> factors;  ///< applied last-to-first
};
struct OperatorDescription {
  std::vector<OperatorTerm> terms;
  FourierElement apply(const ThetaMatrix& theta, const FourierElement& y) const;
};

/// Compressions of x(s) blocks, A_i and A_g on one domain.
struct CompressedGeometry {
  DomainPtr domain;
  std::vector<Eigen::MatrixXcd> x_blocks;  ///< d*d, compression of x_ij
  std::vector<Eigen::MatrixXcd> A;         ///< d, compression of A_i
  Eigen::MatrixXcd Ag;

  Eigen::MatrixXcd x_of_s(std::span<const double> s) const;
  Eigen::MatrixXcd V_of_s(std::span<const double> s) const;
};

/// Precomputed products for A_g, A_i and V(s).
///
/// With p = nu^{-1/2} and w_ij = nu^{1/2} (g^-1)_ij nu^{1/2},
///   A_g = p sum_ij D_i w_ij D_j p
///   A_i = sum_j (p w_ij) D_j p + p D_j (w_ji p)
///   x_ij = p w_ij p
/// so the conjugation identity holds as an algebraic identity. x_ij equals
/// (g^-1)_ij up to the product defect of nu^{1/2} nu^{-1/2}.
class GeometricOperators {
 public:
  GeometricOperators(const MetricTensor& g, const WeightNu& nu);

  int dim() const noexcept { return theta_.dim(); }
  const ThetaMatrix& theta() const noexcept { return theta_; }
  const FourierElement& p() const noexcept { return p_; }
  const FourierElement& w(int i, int j) const { return w_[idx(i, j)]; }
  const FourierElement& x_block(int i, int j) const { return x_[idx(i, j)]; }
  /// max_ij ||x_ij - (g^-1)_ij||_2.
  double consistency_defect() const noexcept { return consistency_defect_; }
  bool is_flat() const noexcept { return flat_; }
  std::vector<LatticeIndex> steps() const;
  std::size_t max_rows() const noexcept { return max_rows_; }

  FourierElement x_of_s(std::span<const double> s) const;
  FourierElement apply_Ag(const FourierElement& y) const;
  FourierElement apply_Ai(int i, const FourierElement& y) const;
  FourierElement apply_V(std::span<const double> s, const FourierElement& y) const;

  OperatorDescription describe_Ag() const;
  OperatorDescription describe_V(std::span<const double> s) const;

  /// Exact Galerkin compressions on the domain.
  CompressedGeometry compress(DomainPtr domain) const;
  Eigen::MatrixXcd compress_Ag(const LatticeDomain& domain) const;
  /// Connected piece of the box containing the origin.
  DomainPtr working_domain(const TruncationBox& box) const;

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i * dim() + j); }
  FourierElement mul(const FourierElement& a, const FourierElement& b) const { return twisted_mul(theta_, a, b); }

  ThetaMatrix theta_;
  FourierElement p_;
  std::vector<FourierElement> w_, a_, b_, x_;  // b_[idx(j,i)] = w_ji p
  double consistency_defect_ = 0.0;
  bool flat_ = false;
  std::size_t max_rows_ = kDefaultMaxRows;
};

/// max over probes of ||R_n^* A_g R_n y - (x(n) y + A_g y + V(n) y)||_2 with R_n y = y e_n.
double conjugation_identity_residual(const GeometricOperators& ops, const LatticeIndex& n,
                                     std::span<const FourierElement> probes);

}  // namespace nct
