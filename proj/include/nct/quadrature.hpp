#pragma once

#include <vector>

namespace nct {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Legendre on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);
/// Composite Gauss-Legendre: `panels` equal panels of `per_panel` nodes on [a, b].
QuadratureRule composite_gauss_legendre(int panels, int per_panel, double a, double b);
/// Gauss-Hermite for the weight exp(-x^2) on the real line.
QuadratureRule gauss_hermite(int n);

/// Product rule on the unit sphere S^{d-1} in R^d: trapezoid in the
/// azimuth, Gauss-Legendre in the polar angles. Points are unit vectors.
struct SphereRule {
  int dim = 2;
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};
SphereRule sphere_rule(int dim, int nodes);

/// Area of S^{d-1}.
double sphere_area(int dim);

}  // namespace nct
