#pragma once

// Resolvent recursion in the symbol variable s and the spectral
// parameter z, with forward z-derivatives.
//
//   x_0 = 1,  x_m^A = Op_m (x(s) + z)^{-1} x_{m-1}^A,
//   Op_m = V(s) if m in A, A_g otherwise.
//
// A step through V raises the weight k = 2m - |A| by one, a step through
// A_g by two.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "nct/geometry.hpp"

namespace nct {

struct SymbolJet {
  FourierElement value;
  std::vector<FourierElement> dz;  ///< dz[j-1] = d^j/dz^j value
  std::vector<double> s;
  cplx z = 0.0;
  int jet_order() const noexcept { return static_cast<int>(dz.size()); }
  /// Order 0 returns value.
  const FourierElement& derivative(int j) const { return j == 0 ? value : dz.at(static_cast<std::size_t>(j - 1)); }
};

/// Subset A of {1, ..., m}; bit l-1 marks step l.
struct SubsetMask {
  int m = 0;
  std::uint32_t members = 0;

  bool contains(int step) const noexcept { return (members >> (step - 1)) & 1u; }
  int count() const noexcept { return __builtin_popcount(members); }
  int weight() const noexcept { return 2 * m - count(); }
  /// Restriction to {1, ..., m-1}.
  SubsetMask parent() const noexcept { return {m - 1, members & ~(1u << (m - 1))}; }
  friend auto operator<=>(const SubsetMask&, const SubsetMask&) = default;
};

/// Everything fixed by s: the decomposition of x(s) on the working domain.
struct SymbolContext {
  const GeometricOperators* ops = nullptr;
  TruncationBox box;
  DomainPtr domain;
  std::vector<double> s;
  std::shared_ptr<const CompressedGeometry> compressed;
  std::shared_ptr<const SpectralDecomposition> x_spectrum;
  /// Support radius of the metric entries, for margin accounting.
  int metric_radius = 0;
};

/// `compressed` may be shared across many s on the same box.
SymbolContext make_symbol_context(const GeometricOperators& ops, const MetricTensor& g, const TruncationBox& box,
                                  std::span<const double> s,
                                  std::shared_ptr<const CompressedGeometry> compressed = nullptr);

SymbolJet base_jet(const SymbolContext& ctx, cplx z, int jet_order);

/// One step: resolvent through the cached spectrum, then V(s) or A_g applied
/// exactly. Throws MarginExhausted when depth * 2 * metric_radius exceeds
/// the box margin.
SymbolJet recursion_step(const SymbolContext& ctx, const SymbolJet& prev, int depth, bool in_A);

/// Resolvent applied to a jet with the product rule, d/dz R = -R^2.
SymbolJet apply_resolvent(const SymbolContext& ctx, const SymbolJet& v);

enum class SymbolKind { Good, Corr };

/// Every x_m^A needed for good_k / corr_k with k <= k_max.
std::map<SubsetMask, SymbolJet> compute_jets(const SymbolContext& ctx, cplx z, int k_max, int jet_order,
                                             SymbolKind kind);

/// (-1)^m-signed sum over the required (m, A), resolvent applied last.
/// Throws InvalidArgument when a jet is missing.
SymbolJet assemble_good(const SymbolContext& ctx, int k, const std::map<SubsetMask, SymbolJet>& jets);
SymbolJet assemble_corr(const SymbolContext& ctx, int k, const std::map<SubsetMask, SymbolJet>& jets);

/// x_m without splitting by A.
SymbolJet full_recursion(const SymbolContext& ctx, cplx z, int m);

/// (x(n) + A_g + V(n) + z)^{-1} x_{d+1}(n, z) on the working domain.
FourierElement assemble_bad(const SymbolContext& ctx, cplx z);
/// (x(n) + A_g + V(n) + z)^{-1} 1 on the working domain.
FourierElement conjugated_resolvent_unit(const SymbolContext& ctx, cplx z);

struct SplittingReport {
  double residual = 0.0;
  double bad_norm = 0.0;
  FourierElement lhs, good_sum, bad;
};
/// ||LHS - sum_{k<=2d} good_k - (-1)^{d+1} bad_n||_2 at s = n.
SplittingReport splitting_identity(const SymbolContext& ctx, cplx z);

/// Batched evaluator for contour integrals in the eigenbasis of x(s).
///
/// For nodes z_q and weights w_q it accumulates
///   sum_q w_q d^N/dz^N f_k(s, z_q)
/// for f_k = good_k and corr_k, k = 0..k_max, sharing the recursion trie.
class SymbolEvaluator {
 public:
  SymbolEvaluator(const CompressedGeometry& cg, std::span<const double> s);

  struct Sums {
    std::vector<Eigen::VectorXcd> good;  ///< eigenbasis coordinates, index k
    std::vector<Eigen::VectorXcd> corr;
  };

  Sums accumulate(int k_max, int jet_order, std::span<const cplx> z, std::span<const cplx> weights,
                  int chunk = 256) const;

  /// Domain coefficients from eigenbasis coordinates.
  Eigen::VectorXcd to_domain(const Eigen::VectorXcd& v) const { return q_ * v; }
  const Eigen::VectorXd& x_eigenvalues() const noexcept { return lambda_; }
  const DomainPtr& domain() const noexcept { return domain_; }
  int dim() const noexcept { return d_; }

 private:
  int d_;
  DomainPtr domain_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXcd q_, v_tilde_, g_tilde_;
  Eigen::VectorXcd u0_;
};

}  // namespace nct
