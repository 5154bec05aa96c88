#pragma once

// Contour integrals Good_k(s), Corr_k(s) and the invariants
// I_k = integral over R^d of Corr_k(s) ds.

#include <map>
#include <optional>
#include <vector>

#include "json.hpp"
#include "nct/symbols.hpp"

namespace nct {

/// Vertical line Re z = shift, truncated to |Im z| <= half_length and
/// integrated by parts jet_order times.
struct ContourQuadrature {
  double shift = 1.0;
  double half_length = 200.0;
  double panel_width = 5.0;
  int panel_nodes = 64;
  int jet_order = 5;
  double tail_tol = 1e-8;
  /// Time variable of exp(t z); 1 gives Good_k itself.
  double time = 1.0;

  void validate() const;
  std::vector<cplx> nodes() const;
  /// Quadrature weights times exp(time z) in the dlambda measure.
  std::vector<cplx> weights() const;
  /// (-1)^N t^{-N} / (2 pi).
  double prefactor() const;
};

struct SpatialQuadrature {
  enum class Scheme { Polar, Tensor };
  /// Polar: sphere rule times Gauss-Legendre in r on [0, S]. Tensor:
  /// Gauss-Legendre on [-S, S]^d.
  Scheme scheme = Scheme::Polar;
  double half_width = 8.0;  ///< S
  int nodes = 24;           ///< Tensor: nodes per axis
  int radial_nodes = 40;
  int sphere_nodes = 12;    ///< see sphere_rule
  double tail_tol = 1e-10;
  /// Shrink [-S, S] to where exp(-c_min s^2) has decayed to tail_tol.
  bool adaptive = true;

  void validate() const;
};

struct ContourResult {
  std::vector<FourierElement> good;  ///< index k, on the working domain
  std::vector<FourierElement> corr;
  std::vector<double> tail_estimate;  ///< index k
};

struct InvariantEntry {
  int k = 0;
  FourierElement value;
  double contour_residual = 0.0;
  double spatial_residual = 0.0;
  double self_adjoint_defect = 0.0;
  bool odd = false;
};

struct InvariantTable {
  std::map<int, InvariantEntry> entries;
  int dim = 2;
  std::vector<double> theta;
  TruncationBox box;
  ContourQuadrature contour;
  SpatialQuadrature spatial;
  double effective_half_width = 0.0;
  std::size_t spatial_points = 0;
  bool parity_halving = false;
  /// ||I_0 - pi^{d/2} nu||_2 and tau(I_0) / (pi^{d/2} tau(nu)), when I_0 is present.
  std::optional<double> i0_vs_scaled_nu;
  std::optional<double> i0_trace_ratio;

  const FourierElement& operator[](int k) const { return entries.at(k).value; }
};

class InvariantEngine {
 public:
  InvariantEngine(const MetricTensor& g, const WeightNu& nu, const GeometricOperators& ops, const TruncationBox& box,
                  ContourQuadrature contour = {}, SpatialQuadrature spatial = {});

  /// Good_k(s) and Corr_k(s) for k = 0..k_max. Throws Tolerance when a tail
  /// estimate exceeds contour.tail_tol.
  ContourResult contour_integrate(int k_max, std::span<const double> s, bool check_tail = true) const;
  /// Same integrals with exp(time z) in place of exp(z); no tail check.
  ContourResult contour_integrate_at_time(int k_max, std::span<const double> s, double time) const;
  /// Tail estimate exp(t c) (|f(c+i L)| + |f(c-i L)|) / (2 pi t) per k.
  std::vector<double> tail_estimate(int k_max, std::span<const double> s) const;

  /// Chosen spatial half-width for the given k_max.
  double effective_half_width(int k_max) const;

  /// I_0..I_{k_max}; odd orders only when include_odd. Throws Tolerance when
  /// the integrand norm at the box boundary exceeds spatial.tail_tol.
  InvariantTable integrate(int k_max, bool include_odd = false, int threads = 1) const;

  const std::shared_ptr<const CompressedGeometry>& compressed() const noexcept { return compressed_; }
  const TruncationBox& box() const noexcept { return box_; }
  const ContourQuadrature& contour() const noexcept { return contour_; }
  const SpatialQuadrature& spatial() const noexcept { return spatial_; }

 private:
  const MetricTensor* g_;
  const WeightNu* nu_;
  const GeometricOperators* ops_;
  TruncationBox box_;
  ContourQuadrature contour_;
  SpatialQuadrature spatial_;
  std::shared_ptr<const CompressedGeometry> compressed_;
  std::vector<cplx> z_nodes_, z_weights_;
};

nlohmann::json table_to_json(const InvariantTable& table);

struct CrossDimensionReport {
  int dim = 2;
  int extended_dim = 3;
  double nu_deviation = 0.0;             ///< ||nu' - nu (x) 1||_2
  std::map<int, double> invariant_deviation;  ///< ||I_k' - pi^{(d'-d)/2} I_k (x) 1||_2
  InvariantTable base, extended;
};

/// Embeds an element of dimension d into d' >= d with zero trailing indices.
FourierElement embed(const FourierElement& a, int new_dim);

/// Extends the metric by the identity in new axes and theta by zeros, then
/// compares nu and I_k with the tensor formulas.
CrossDimensionReport cross_dimension_check(const MetricTensor& g, const NuQuadrature& nu_quad, const TruncationBox& box,
                                           const ContourQuadrature& contour, const SpatialQuadrature& spatial,
                                           int k_max, int extended_dim, int threads = 1);

nlohmann::json cross_dimension_to_json(const CrossDimensionReport& report);

}  // namespace nct
