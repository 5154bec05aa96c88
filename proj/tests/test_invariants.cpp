#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nct/invariants.hpp"

using namespace nct;

namespace {

struct Setup {
  ThetaMatrix theta;
  MetricTensor g;
  WeightNu nu;
  std::unique_ptr<GeometricOperators> ops;

  Setup(double th, bool flat) : theta(ThetaMatrix::planar(th)) {
    if (flat) {
      g = flat_metric(theta, TruncationBox{2, 6, 2});
    } else {
      FourierElement h = FourierElement::constant(2, 1.0) +
                         0.3 * (FourierElement::delta(LatticeIndex{1, 0}) + FourierElement::delta(LatticeIndex{-1, 0}));
      g = conformal_metric(theta, h, TruncationBox{2, 30, 6});
    }
    nu = compute_nu(g);
    ops = std::make_unique<GeometricOperators>(g, nu);
  }
};

ContourQuadrature fast_contour() {
  ContourQuadrature c;
  c.panel_nodes = 32;
  return c;
}

SpatialQuadrature coarse_polar() {
  SpatialQuadrature s;
  s.radial_nodes = 24;
  s.sphere_nodes = 8;
  return s;
}

}  // namespace

TEST_CASE("flat contour integrals") {
  Setup flat(0.9, true);
  InvariantEngine engine(flat.g, flat.nu, *flat.ops, TruncationBox{2, 8, 6}, fast_contour());
  std::vector<double> s{1.0, 0.0};
  auto r = engine.contour_integrate(4, s);
  CHECK(std::abs(r.good[0].coeff(LatticeIndex{0, 0}) - std::exp(-1.0)) <= 1e-10);
  CHECK(r.good[0].size() == 1);
  for (int k = 1; k <= 4; ++k) {
    CHECK(r.good[static_cast<std::size_t>(k)].norm() < 1e-14);
    CHECK(r.corr[static_cast<std::size_t>(k)].norm() < 1e-14);
  }
  std::vector<double> s2{0.6, -1.3};
  auto r2 = engine.contour_integrate(0, s2);
  CHECK(std::abs(r2.good[0].coeff(LatticeIndex{0, 0}) - std::exp(-(0.36 + 1.69))) <= 1e-10);
}

TEST_CASE("Good_0 is exp(-x(s)) for a conformal metric") {
  Setup c(0.5, false);
  const TruncationBox box{2, 24, 6};
  InvariantEngine engine(c.g, c.nu, *c.ops, box, fast_contour());
  auto big = std::make_shared<const LatticeDomain>(
      LatticeDomain::reachable(TruncationBox{2, 60, 10}, std::vector<LatticeIndex>{LatticeIndex{1, 0}}));
  for (std::vector<double> s : {std::vector<double>{1.0, 0.0}, {0.3, 0.4}, {-1.2, 0.7}, {0.0, 2.0}, {2.0, 1.0}}) {
    auto r = engine.contour_integrate(0, s);
    FourierElement ref = functional_calculus(c.theta, c.ops->x_of_s(s), ScalarFunction::exp(-1.0), big);
    CHECK((r.good[0].restricted(10) - ref.restricted(10)).norm() <= 1e-8);
  }
}

TEST_CASE("shift and truncation are validated") {
  ContourQuadrature c;
  c.shift = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  SpatialQuadrature s;
  s.radial_nodes = 0;
  CHECK_THROWS_AS(s.validate(), Error);

  Setup flat(0.2, true);
  ContourQuadrature short_line = fast_contour();
  short_line.half_length = 5.0;
  short_line.jet_order = 0;
  InvariantEngine engine(flat.g, flat.nu, *flat.ops, TruncationBox{2, 8, 6}, short_line);
  std::vector<double> pt{0.5, 0.5};
  try {
    engine.contour_integrate(0, pt);
    FAIL("expected a tail tolerance error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Tolerance);
  }
}

TEST_CASE("flat invariants") {
  Setup flat(1.3, true);
  InvariantEngine engine(flat.g, flat.nu, *flat.ops, TruncationBox{2, 8, 6}, fast_contour());
  auto table = engine.integrate(2, true);
  CHECK(std::abs(table[0].coeff(LatticeIndex{0, 0}) - std::numbers::pi) <= 1e-8);
  CHECK((table[0] - FourierElement::constant(2, std::numbers::pi)).norm() <= 1e-8);
  CHECK(table[1].norm() <= 1e-8);
  CHECK(table[2].norm() <= 1e-8);
  CHECK(table.entries.at(1).odd);
  REQUIRE(table.i0_vs_scaled_nu.has_value());
  CHECK(*table.i0_vs_scaled_nu <= 1e-8);
  auto j = table_to_json(table);
  CHECK(j.at("entries").size() == 3);
}

TEST_CASE("conformal invariants") {
  Setup c(0.5, false);
  InvariantEngine engine(c.g, c.nu, *c.ops, TruncationBox{2, 24, 6}, fast_contour(), coarse_polar());
  auto table = engine.integrate(2, true);
  const double pi = std::numbers::pi;
  CHECK(std::abs(trace_tau(table[0]) - pi) / pi <= 1e-4);
  // I_0 = pi nu in d = 2.
  CHECK(*table.i0_vs_scaled_nu <= 1e-6);
  CHECK(table[1].norm() <= 1e-8);
  for (const auto& [k, e] : table.entries) CHECK(e.self_adjoint_defect <= 1e-8);
  // The metric is effectively commutative, so the Gauss-Bonnet integral vanishes.
  CHECK(std::abs(trace_tau(table[2])) <= 1e-6);
}

TEST_CASE("cross-dimension tensor formulas for the flat metric") {
  Setup flat(0.4, true);
  auto rep = cross_dimension_check(flat.g, NuQuadrature{}, TruncationBox{2, 8, 6}, fast_contour(), SpatialQuadrature{},
                                   2, 3);
  CHECK(rep.nu_deviation <= 1e-6);
  CHECK(rep.invariant_deviation.at(0) <= 1e-6);
  CHECK(std::abs(rep.extended[0].coeff(LatticeIndex{0, 0, 0}) - std::pow(std::numbers::pi, 1.5)) <= 1e-6);
  CHECK(rep.invariant_deviation.at(2) <= 1e-6);
}
