#pragma once

// Galerkin heat traces, per-mode heat elements, asymptotic fits and
// lattice-sum utilities.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nct/invariants.hpp"

namespace nct {

struct HeatTraceSample {
  double t = 0.0;
  double value = 0.0;  ///< real part of the trace
  double imag = 0.0;
  double truncation_error_estimate = 0.0;
  bool reliable = false;
  TruncationBox box;
};

/// Block eigendecomposition of the compressed A_g over the connected
/// pieces of a box; reused for every t.
class HeatSpectrum {
 public:
  HeatSpectrum(const GeometricOperators& ops, const WeightNu& nu, const TruncationBox& box);

  const TruncationBox& box() const noexcept { return box_; }
  std::size_t size() const noexcept { return total_; }
  std::size_t component_count() const noexcept { return blocks_.size(); }
  /// Smallest eigenvalue whose eigenvector has more than 1% mass on the outer margin shell.
  double lambda_cut() const noexcept { return lambda_cut_; }
  bool reliable(double t) const;

  /// Tr(L(nu^{1/2} x nu^{-1/2}) exp(-t A_g)).
  HeatTraceSample heat_trace(const FourierElement& x, double t) const;
  std::vector<HeatTraceSample> heat_trace(const FourierElement& x, std::span<const double> t_grid) const;
  /// Tr(L(y) exp(-t A_g)) with no conjugation.
  HeatTraceSample heat_trace_Ag(const FourierElement& y, double t) const;
  /// Tr(L(x) S exp(-t A_g) S^-1) with S = L(nu^{-1/2}): the Laplacian form.
  HeatTraceSample heat_trace_laplacian_form(const FourierElement& x, double t) const;

  /// h_n(t) = exp(-t(x(n) + A_g + V(n)))(1) on the shifted piece of the box containing n.
  FourierElement mode_term(const LatticeIndex& n, double t) const;
  /// Sum over n in the box of tau(y h_n(t)); equals heat_trace_Ag(y, t).
  cplx mode_reconstruction(const FourierElement& y, double t, int radius) const;

 private:
  struct Block {
    DomainPtr domain;
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
    Eigen::VectorXd shell_mass;
  };
  std::vector<cplx> diagonal_weights(const Block& b, const Eigen::MatrixXcd& left) const;
  HeatTraceSample sample(const std::vector<std::vector<cplx>>& diag, double t) const;
  std::vector<std::vector<cplx>> left_diagonals(const FourierElement& y) const;

  const GeometricOperators* ops_;
  const WeightNu* nu_;
  TruncationBox box_;
  std::vector<Block> blocks_;
  std::size_t total_ = 0;
  double lambda_cut_ = 0.0;
};

struct AsymptoticFit {
  std::vector<double> t_grid;                  ///< reliable samples actually used
  std::vector<double> coefficients;            ///< c_0, c_2, c_4
  std::map<int, double> predicted;             ///< k -> tau(x nu^{-1/2} I_k nu^{1/2})
  std::map<int, double> relative_deviation;    ///< |c_k - pred| / |pred|
  std::map<int, double> floored_deviation;     ///< |c_k - pred| / max(|pred|, 1)
  double residual_norm = 0.0;
  double condition_number = 0.0;
  /// Slope of log|t^{d/2} Tr - c0_pred - c2_pred t| against log t.
  double remainder_exponent = 0.0;
  /// Largest |t^{d/2} Tr - c0_pred - c2_pred t| over the grid.
  double remainder_max = 0.0;
};

/// Weighted least squares (weights 1/t) of t^{d/2} Tr on {1, t, t^2}.
/// Throws InvalidArgument with fewer than five reliable samples and
/// Tolerance when the normal equations are ill-conditioned.
AsymptoticFit fit_asymptotics(const std::vector<HeatTraceSample>& samples, const InvariantTable& table,
                              const FourierElement& x, const WeightNu& nu, const ThetaMatrix& theta);

/// sum_k t^{k/2} tau(x nu^{-1/2} I_k nu^{1/2}) over even k in the table,
/// the model for t^{d/2} Tr.
double model_prediction(const InvariantTable& table, const FourierElement& x, const WeightNu& nu,
                        const ThetaMatrix& theta, double t);

struct PoissonReport {
  double t = 0.0;
  double lattice_sum = 0.0;     ///< sum_{|n| <= R} f(t n)
  double integral_term = 0.0;   ///< t^{-d} integral of f
  double remainder = 0.0;       ///< lattice_sum - integral_term
  double predicted_remainder = 0.0;
  double diff = 0.0;            ///< |remainder - predicted_remainder|
};

/// Lattice sum of exp(-t |n|^2) over |n_i| <= R against (pi/t)^{d/2}; the
/// remainder is predicted by the dual theta series.
PoissonReport poisson_gaussian(int dim, double t, int R);
/// One-dimensional lattice sum of f(t n) against t^{-1} * integral.
PoissonReport poisson_function(const std::function<double(double)>& f, double integral, double t, int R);
/// Least-squares slope of log|remainder| against log t.
double remainder_decay_exponent(const std::vector<PoissonReport>& reports);
/// r -> Re tau(Good_k(r * direction)).
std::function<double(double)> good_slice(const InvariantEngine& engine, int k, std::vector<double> direction);

/// Maximum over t of ||h_n(t) - sum_{k<=2d} t^{k/2} Good_k(n t^{1/2})||_2.
double exponent_splitting_remainder(const HeatSpectrum& heat, const InvariantEngine& engine, const LatticeIndex& n,
                                    std::span<const double> t_values);

/// Rows t, trace, t^{d/2}trace, model_prediction, residual, truncation_error_estimate.
std::string heat_csv(const std::vector<HeatTraceSample>& samples, int dim, const std::function<double(double)>& model,
                     const std::string& header_comment);

}  // namespace nct
