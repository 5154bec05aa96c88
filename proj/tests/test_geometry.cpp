#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nct/geometry.hpp"

using namespace nct;

namespace {

FourierElement conformal_h(int d = 2) {
  LatticeIndex e = LatticeIndex::unit(d, 0);
  return FourierElement::constant(d, 1.0) + 0.3 * (FourierElement::delta(e) + FourierElement::delta(-e));
}

FourierElement random_probe(std::mt19937_64& rng, int d) {
  std::uniform_int_distribution<int> idx(-2, 2);
  std::uniform_real_distribution<double> c(-1, 1);
  std::vector<FourierElement::Term> t;
  for (int i = 0; i < 4; ++i) {
    LatticeIndex n(d);
    for (int k = 0; k < d; ++k) n[k] = idx(rng);
    t.emplace_back(n, cplx(c(rng), c(rng)));
  }
  return FourierElement::from_terms(d, t);
}

std::vector<FourierElement> skew_entries(bool both_directions) {
  auto e1 = FourierElement::delta(LatticeIndex{1, 0}) + FourierElement::delta(LatticeIndex{-1, 0});
  auto e2 = both_directions ? FourierElement::delta(LatticeIndex{0, 1}) + FourierElement::delta(LatticeIndex{0, -1}) : e1;
  return {FourierElement::constant(2, 1.0) + 0.2 * e1, 0.1 * e2, 0.1 * e2, FourierElement::constant(2, 1.2) + 0.15 * e2};
}

// Off-diagonal metric; entries along a single direction commute for any theta.
MetricTensor skew_metric(const ThetaMatrix& theta, bool both_directions) {
  TruncationBox box = both_directions ? TruncationBox{2, 6, 2} : TruncationBox{2, 30, 6};
  return validate_and_invert_metric(theta, skew_entries(both_directions), box);
}

}  // namespace

TEST_CASE("flat metric gives nu = 1 and A_g = flat Laplacian") {
  ThetaMatrix theta = ThetaMatrix::planar(0.4);
  MetricTensor g = flat_metric(theta, TruncationBox{2, 6, 2});
  CHECK(g.is_flat());
  WeightNu nu = compute_nu(g);
  CHECK((nu.nu - FourierElement::constant(2, 1.0)).norm() < 1e-10);
  REQUIRE(nu.quadrature_residual.has_value());
  CHECK(*nu.quadrature_residual < 1e-10);
  GeometricOperators ops(g, nu);
  auto y = FourierElement::delta(LatticeIndex{2, -1}, cplx(0.5, 0.5));
  CHECK((ops.apply_Ag(y) - 5.0 * y).norm() < 1e-14);
  std::vector<double> s{0.3, -1.5};
  CHECK(std::abs(ops.x_of_s(s).coeff(LatticeIndex{0, 0}) - (0.09 + 2.25)) < 1e-14);
  // V(s) e_n = 2 (s . n) e_n
  CHECK((ops.apply_V(s, y) - 2.0 * (0.3 * 2 + 1.5) * y).norm() < 1e-14);
}

TEST_CASE("constant multiple of the identity") {
  ThetaMatrix theta = ThetaMatrix::planar(1.0);
  const double c = 2.5;
  std::vector<FourierElement> e{FourierElement::constant(2, c), FourierElement(2), FourierElement(2), FourierElement::constant(2, c)};
  MetricTensor g = validate_and_invert_metric(theta, e, TruncationBox{2, 4, 1});
  CHECK(std::abs(g.ginv(0, 0).coeff(LatticeIndex{0, 0}) - 1.0 / c) < 1e-14);
  WeightNu nu = compute_nu(g);
  // sqrt(det(c I)) in d = 2.
  CHECK((nu.nu - FourierElement::constant(2, c)).norm() < 1e-10);
}

TEST_CASE("conformal metric: inverse, nu and A_g") {
  ThetaMatrix theta = ThetaMatrix::planar(0.5);
  FourierElement h = conformal_h();
  TruncationBox gbox{2, 30, 6};
  MetricTensor g = conformal_metric(theta, h, gbox);

  std::vector<LatticeIndex> steps{LatticeIndex{1, 0}};
  auto line = std::make_shared<const LatticeDomain>(LatticeDomain::reachable(TruncationBox{2, 60, 10}, steps));
  FourierElement hinv = element_inverse(theta, h, line).element.restricted(gbox.inner_radius());
  CHECK((g.ginv(0, 0) - hinv).norm() < 1e-10);
  CHECK(g.ginv(0, 1).norm() < 1e-14);
  CHECK(g.inverse_residual < 1e-10);

  WeightNu nu = compute_nu(g);
  CHECK((nu.nu - h).norm() <= 1e-8);

  // A_g against h^{-1/2} Delta h^{-1/2}, applied exactly to each basis vector.
  GeometricOperators ops(g, nu);
  FourierElement q = functional_calculus(theta, h, ScalarFunction::inv_sqrt(), line).restricted(gbox.inner_radius());
  TruncationBox wbox{2, 8, 3};
  auto dom = ops.working_domain(wbox);
  Eigen::MatrixXcd ag = ops.compress(dom).Ag;
  CompressedOperator ref = compress(dom, [&](const FourierElement& y) {
    return twisted_mul(theta, q, flat_laplacian(twisted_mul(theta, q, y)));
  });
  double worst = 0;
  for (std::size_t i = 0; i < dom->size(); ++i)
    for (std::size_t j = 0; j < dom->size(); ++j)
      if (wbox.in_inner(dom->point(i)) && wbox.in_inner(dom->point(j)))
        worst = std::max(worst, std::abs(ag(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                         ref.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
  CHECK(worst <= 1e-9);
  // A_g annihilates nu^{1/2}.
  CHECK(ops.apply_Ag(nu.nu_sqrt).norm() < 1e-9);
}

TEST_CASE("diagonal non-conformal metric in the commutative direction") {
  ThetaMatrix theta = ThetaMatrix::planar(0.9);
  FourierElement h = conformal_h();
  std::vector<FourierElement> e{h, FourierElement(2), FourierElement(2), FourierElement::constant(2, 1.0)};
  TruncationBox gbox{2, 30, 6};
  MetricTensor g = validate_and_invert_metric(theta, e, gbox);
  WeightNu nu = compute_nu(g);
  // The entries commute, so nu = sqrt(det g) = h^{1/2}.
  std::vector<LatticeIndex> steps{LatticeIndex{1, 0}};
  auto line = std::make_shared<const LatticeDomain>(LatticeDomain::reachable(TruncationBox{2, 60, 10}, steps));
  FourierElement root = functional_calculus(theta, h, ScalarFunction::sqrt(), line).restricted(gbox.inner_radius());
  CHECK((nu.nu - root).norm() < 1e-8);
  CHECK(*nu.quadrature_residual < 1e-8);
}

TEST_CASE("invalid metrics are rejected") {
  ThetaMatrix theta = ThetaMatrix::planar(0.5);
  TruncationBox gbox{2, 10, 3};
  FourierElement bad = FourierElement::constant(2, 1.0) + 0.6 * (FourierElement::delta(LatticeIndex{1, 0}) + FourierElement::delta(LatticeIndex{-1, 0}));
  try {
    conformal_metric(theta, bad, gbox);
    FAIL("expected NotPositive");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPositive);
  }
  FourierElement skew = FourierElement::constant(2, 1.0) + FourierElement::delta(LatticeIndex{1, 0}, 0.2);
  try {
    conformal_metric(theta, skew, gbox);
    FAIL("expected NotSelfAdjoint");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotSelfAdjoint);
  }
  std::vector<FourierElement> asym{FourierElement::constant(2, 1.0), FourierElement::constant(2, 0.1),
                                   FourierElement::constant(2, 0.2), FourierElement::constant(2, 1.0)};
  CHECK_THROWS_AS(validate_and_invert_metric(theta, asym, gbox), Error);
}

TEST_CASE("conjugation identity holds algebraically") {
  std::mt19937_64 rng(17);
  std::vector<FourierElement> probes;
  for (int i = 0; i < 10; ++i) probes.push_back(random_probe(rng, 2));
  std::vector<LatticeIndex> modes{LatticeIndex{1, 0}, LatticeIndex{1, 1}, LatticeIndex{2, -1}};

  ThetaMatrix theta = ThetaMatrix::planar(0.5);
  MetricTensor gc = conformal_metric(theta, conformal_h(), TruncationBox{2, 30, 6});
  WeightNu nuc = compute_nu(gc);
  GeometricOperators opc(gc, nuc);
  for (const auto& n : modes) CHECK(conjugation_identity_residual(opc, n, probes) <= 1e-11);

  ThetaMatrix theta2 = ThetaMatrix::planar(std::numbers::pi * (std::sqrt(2.0) - 1.0));
  MetricTensor gs = skew_metric(theta2, false);
  WeightNu nus = compute_nu(gs);
  GeometricOperators ops(gs, nus);
  for (const auto& n : modes) CHECK(conjugation_identity_residual(ops, n, probes) <= 1e-11);
}

TEST_CASE("inverse entries must stay self-adjoint") {
  ThetaMatrix theta = ThetaMatrix::planar(0.7);
  try {
    skew_metric(theta, true);
    FAIL("expected a tolerance error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Tolerance);
  }
}

TEST_CASE("skew metric: inverse and self-adjointness") {
  ThetaMatrix theta = ThetaMatrix::planar(0.7);
  MetricTensor g = skew_metric(theta, false);
  CHECK(g.inverse_residual < 1e-6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(self_adjoint_defect(theta, g.ginv(i, j)) < 1e-12);
  WeightNu nu = compute_nu(g);
  CHECK(self_adjoint_defect(theta, nu.nu) < 1e-12);
  CHECK(nu.min_eigenvalue > 0.0);
  CHECK(nu.sqrt_residual < 1e-6);
  GeometricOperators ops(g, nu);
  CHECK(ops.consistency_defect() < 1e-6);
  auto dom = ops.working_domain(TruncationBox{2, 12, 3});
  auto cg = ops.compress(dom);
  CHECK((cg.Ag - cg.Ag.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::MatrixXcd herm = 0.5 * (cg.Ag + cg.Ag.adjoint());
  Eigen::VectorXd lam;
  hermitian_eigen(herm, lam);
  CHECK(lam(0) >= -1e-10);
}
