#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nct/core.hpp"

using namespace nct;

namespace {

FourierElement random_element(std::mt19937_64& rng, int d, int terms, int radius) {
  std::uniform_int_distribution<int> idx(-radius, radius);
  std::uniform_real_distribution<double> c(-1, 1);
  std::vector<FourierElement::Term> t;
  for (int i = 0; i < terms; ++i) {
    LatticeIndex n(d);
    for (int k = 0; k < d; ++k) n[k] = idx(rng);
    t.emplace_back(n, cplx(c(rng), c(rng)));
  }
  return FourierElement::from_terms(d, t);
}

// Direct double loop with the phase written out for d = 2.
std::map<std::pair<int, int>, cplx> brute_product_2d(double th, const FourierElement& a, const FourierElement& b) {
  std::map<std::pair<int, int>, cplx> out;
  for (const auto& [m, x] : a.terms())
    for (const auto& [n, y] : b.terms()) {
      double angle = th * n[0] * m[1];
      out[{m[0] + n[0], m[1] + n[1]}] += x * y * std::polar(1.0, -angle);
    }
  return out;
}

}  // namespace

TEST_CASE("twisted product agrees with the direct double loop") {
  std::mt19937_64 rng(7);
  const double th = 0.7;
  ThetaMatrix theta = ThetaMatrix::planar(th);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_element(rng, 2, 6, 3);
    auto b = random_element(rng, 2, 6, 3);
    auto ab = twisted_mul(theta, a, b);
    auto ref = brute_product_2d(th, a, b);
    double err = 0;
    for (const auto& [k, v] : ref) err = std::max(err, std::abs(ab.coeff(LatticeIndex{k.first, k.second}) - v));
    CHECK(err < 1e-14);
  }
}

TEST_CASE("generators satisfy U1 U2 = exp(i theta) U2 U1") {
  for (double th : {0.0, 0.5, std::numbers::pi * (std::sqrt(2.0) - 1.0)}) {
    ThetaMatrix theta = ThetaMatrix::planar(th);
    auto u1 = FourierElement::delta(LatticeIndex{1, 0});
    auto u2 = FourierElement::delta(LatticeIndex{0, 1});
    auto lhs = twisted_mul(theta, u1, u2);
    auto rhs = std::polar(1.0, th) * twisted_mul(theta, u2, u1);
    CHECK((lhs - rhs).norm() < 1e-15);
  }
}

TEST_CASE("adjoint of a basis element") {
  ThetaMatrix theta = ThetaMatrix::planar(std::numbers::pi / 2);
  auto e = FourierElement::delta(LatticeIndex{1, 1});
  auto es = adjoint(theta, e);
  CHECK(es.size() == 1);
  CHECK(std::abs(es.coeff(LatticeIndex{-1, -1}) - cplx(0, -1)) < 1e-15);
  auto one = twisted_mul(theta, es, e);
  CHECK((one - FourierElement::constant(2, 1.0)).norm() < 1e-15);
  CHECK((twisted_mul(theta, e, es) - FourierElement::constant(2, 1.0)).norm() < 1e-15);
}

TEST_CASE("associativity, involution and traciality on random triples") {
  std::mt19937_64 rng(11);
  ThetaMatrix theta(3, {0, 0.3, -1.1, -0.3, 0, 2.0, 1.1, -2.0, 0});
  for (int trial = 0; trial < 30; ++trial) {
    auto a = random_element(rng, 3, 5, 2);
    auto b = random_element(rng, 3, 5, 2);
    auto c = random_element(rng, 3, 5, 2);
    auto ab = twisted_mul(theta, a, b);
    CHECK((twisted_mul(theta, ab, c) - twisted_mul(theta, a, twisted_mul(theta, b, c))).norm() < 1e-13);
    CHECK((adjoint(theta, ab) - twisted_mul(theta, adjoint(theta, b), adjoint(theta, a))).norm() < 1e-13);
    CHECK(std::abs(trace_tau(ab) - trace_tau(twisted_mul(theta, b, a))) < 1e-13);
    // tau(a^* b) is the plain coefficient inner product.
    CHECK(std::abs(trace_tau(twisted_mul(theta, adjoint(theta, a), b)) - l2_inner(a, b)) < 1e-13);
  }
}

TEST_CASE("theta must be antisymmetric") {
  CHECK_THROWS_AS(ThetaMatrix(2, {0, 1, 1, 0}), Error);
  try {
    ThetaMatrix(2, {0, 1, 0.5, 0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
    CHECK(std::string(e.what()).find("antisymmetric") != std::string::npos);
  }
}

TEST_CASE("derivations act diagonally and satisfy Leibniz") {
  ThetaMatrix theta = ThetaMatrix::planar(0.4);
  auto a = FourierElement::delta(LatticeIndex{2, -3}, cplx(1, 1));
  CHECK(partial_deriv(0, a).coeff(LatticeIndex{2, -3}) == cplx(2, 2));
  CHECK(partial_deriv(1, a).coeff(LatticeIndex{2, -3}) == cplx(-3, -3));
  CHECK(flat_laplacian(a).coeff(LatticeIndex{2, -3}) == cplx(13, 13));
  std::mt19937_64 rng(3);
  auto x = random_element(rng, 2, 4, 2);
  auto y = random_element(rng, 2, 4, 2);
  for (int k = 0; k < 2; ++k) {
    auto lhs = partial_deriv(k, twisted_mul(theta, x, y));
    auto rhs = twisted_mul(theta, partial_deriv(k, x), y) + twisted_mul(theta, x, partial_deriv(k, y));
    CHECK((lhs - rhs).norm() < 1e-13);
  }
}

TEST_CASE("Sobolev norms of a basis element") {
  auto a = FourierElement::delta(LatticeIndex{1, 2});
  CHECK(sobolev_norm(a, 0) == doctest::Approx(1.0));
  CHECK(sobolev_norm(a, 1) == doctest::Approx(4.0));
  CHECK(sobolev_fourier_norm(a, 1) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("self-adjoint parts") {
  ThetaMatrix theta = ThetaMatrix::planar(1.3);
  std::mt19937_64 rng(5);
  auto a = random_element(rng, 2, 6, 2);
  auto h = hermitian_part(theta, a);
  CHECK(self_adjoint_defect(theta, h) < 1e-14);
  auto c = FourierElement::constant(2, 1.0) + 0.3 * (FourierElement::delta(LatticeIndex{1, 0}) + FourierElement::delta(LatticeIndex{-1, 0}));
  CHECK(self_adjoint_defect(theta, c) < 1e-15);
}

TEST_CASE("record format round trip") {
  std::mt19937_64 rng(9);
  auto a = random_element(rng, 2, 6, 3);
  auto j = element_to_json(a);
  REQUIRE(j.is_array());
  CHECK(j[0].contains("index"));
  CHECK(j[0].contains("re"));
  CHECK(j[0].contains("im"));
  for (std::size_t i = 1; i < j.size(); ++i) CHECK(j[i - 1]["index"] < j[i]["index"]);
  CHECK((element_from_json(j, 2) - a).norm() == 0.0);
  CHECK_THROWS_AS(element_from_json(j, 3), Error);
}

TEST_CASE("right multiplication by a basis element") {
  ThetaMatrix theta = ThetaMatrix::planar(0.9);
  std::mt19937_64 rng(13);
  auto a = random_element(rng, 2, 5, 2);
  LatticeIndex n{1, -2};
  CHECK((right_mul_basis(theta, a, n) - twisted_mul(theta, a, FourierElement::delta(n))).norm() < 1e-15);
}
