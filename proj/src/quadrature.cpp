#include "nct/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "nct/error.hpp"

namespace nct {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre needs at least one node", n);
  QuadratureRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (x * p0 - p1) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
    r.nodes[lo] = mid - half * x;
    r.nodes[hi] = mid + half * x;
    r.weights[lo] = r.weights[hi] = half * w;
  }
  return r;
}

QuadratureRule composite_gauss_legendre(int panels, int per_panel, double a, double b) {
  if (panels < 1) throw Error(ErrorKind::InvalidArgument, "need at least one panel", panels);
  QuadratureRule r;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    QuadratureRule g = gauss_legendre(per_panel, a + p * h, a + (p + 1) * h);
    r.nodes.insert(r.nodes.end(), g.nodes.begin(), g.nodes.end());
    r.weights.insert(r.weights.end(), g.weights.begin(), g.weights.end());
  }
  return r;
}

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Gauss-Hermite needs at least one node", n);
  QuadratureRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  double z = 0.0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * r.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * r.nodes[1];
    else
      z = 2.0 * z - r.nodes[static_cast<std::size_t>(i - 2)];
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    double p1 = pim4, p2 = 0.0;
    for (int j = 0; j < n; ++j) {
      double p3 = p2;
      p2 = p1;
      p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
    }
    pp = std::sqrt(2.0 * n) * p2;
    auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
    r.nodes[lo] = z;
    r.nodes[hi] = -z;
    r.weights[lo] = r.weights[hi] = 2.0 / (pp * pp);
  }
  // Ascending order.
  for (std::size_t i = 0, j = r.nodes.size() - 1; i < j; ++i, --j) {
    std::swap(r.nodes[i], r.nodes[j]);
    std::swap(r.weights[i], r.weights[j]);
  }
  return r;
}

double sphere_area(int dim) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

SphereRule sphere_rule(int dim, int nodes) {
  if (dim < 2) throw Error(ErrorKind::InvalidArgument, "sphere rule needs dim >= 2", dim);
  if (nodes < 2) throw Error(ErrorKind::InvalidArgument, "sphere rule needs at least two nodes", nodes);
  SphereRule s;
  s.dim = dim;
  const int n_az = 2 * nodes;
  const double h_az = 2.0 * std::numbers::pi / n_az;
  QuadratureRule polar = gauss_legendre(nodes, 0.0, std::numbers::pi);

  // Polar angles phi_1..phi_{d-2}, azimuth phi_{d-1}.
  const int n_polar = dim - 2;
  std::vector<int> idx(static_cast<std::size_t>(n_polar), 0);
  while (true) {
    for (int a = 0; a < n_az; ++a) {
      double phi_az = (a + 0.5) * h_az;
      std::vector<double> u(static_cast<std::size_t>(dim));
      double w = h_az;
      double sprod = 1.0;
      for (int j = 0; j < n_polar; ++j) {
        double phi = polar.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
        u[static_cast<std::size_t>(j)] = sprod * std::cos(phi);
        w *= polar.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] *
             std::pow(std::sin(phi), dim - 2 - j);
        sprod *= std::sin(phi);
      }
      u[static_cast<std::size_t>(dim - 2)] = sprod * std::cos(phi_az);
      u[static_cast<std::size_t>(dim - 1)] = sprod * std::sin(phi_az);
      s.points.push_back(std::move(u));
      s.weights.push_back(w);
    }
    int j = n_polar - 1;
    while (j >= 0 && idx[static_cast<std::size_t>(j)] == nodes - 1) {
      idx[static_cast<std::size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
    ++idx[static_cast<std::size_t>(j)];
  }
  return s;
}

}  // namespace nct
