#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nct/symbols.hpp"

using namespace nct;

namespace {

struct Conformal {
  ThetaMatrix theta = ThetaMatrix::planar(0.5);
  MetricTensor g;
  WeightNu nu;
  std::unique_ptr<GeometricOperators> ops;

  explicit Conformal(double th = 0.5) : theta(ThetaMatrix::planar(th)) {
    FourierElement h = FourierElement::constant(2, 1.0) +
                       0.3 * (FourierElement::delta(LatticeIndex{1, 0}) + FourierElement::delta(LatticeIndex{-1, 0}));
    g = conformal_metric(theta, h, TruncationBox{2, 30, 6});
    nu = compute_nu(g);
    ops = std::make_unique<GeometricOperators>(g, nu);
  }
  SymbolContext context(std::vector<double> s, TruncationBox box = {2, 16, 8}) const {
    return make_symbol_context(*ops, g, box, s);
  }
};

const Conformal& conformal() {
  static const Conformal c;
  return c;
}

double inner_diff(const FourierElement& a, const FourierElement& b, int radius) {
  return (a.restricted(radius) - b.restricted(radius)).norm();
}

// All x_m^A with m <= m_max by direct recursion.
std::map<SubsetMask, SymbolJet> all_masks(const SymbolContext& ctx, cplx z, int m_max) {
  std::map<SubsetMask, SymbolJet> out;
  out.emplace(SubsetMask{}, base_jet(ctx, z, 0));
  for (int m = 1; m <= m_max; ++m)
    for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
      SubsetMask mask{m, bits};
      out.emplace(mask, recursion_step(ctx, out.at(mask.parent()), m, mask.contains(m)));
    }
  return out;
}

}  // namespace

TEST_CASE("flat metric collapses the recursion") {
  for (double th : {0.0, 0.7, 2.0}) {
    ThetaMatrix theta = ThetaMatrix::planar(th);
    MetricTensor g = flat_metric(theta, TruncationBox{2, 6, 2});
    WeightNu nu = compute_nu(g);
    GeometricOperators ops(g, nu);
    std::vector<double> s{1.0, -0.5};
    auto ctx = make_symbol_context(ops, g, TruncationBox{2, 10, 8}, s);
    const cplx z(1.0, 2.0);
    auto jets = compute_jets(ctx, z, 4, 2, SymbolKind::Corr);
    for (const auto& [mask, jet] : jets)
      if (mask.m >= 1) CHECK(jet.value.norm() < 1e-14);
    auto g0 = assemble_good(ctx, 0, jets);
    CHECK(std::abs(g0.value.coeff(LatticeIndex{0, 0}) - 1.0 / (1.25 + z)) < 1e-15);
    CHECK(g0.value.size() == 1);
    // d/dz (y + z)^{-1} = -(y + z)^{-2}
    CHECK(std::abs(g0.dz[0].coeff(LatticeIndex{0, 0}) + std::pow(1.25 + z, -2)) < 1e-15);
    for (int k = 1; k <= 4; ++k) CHECK(assemble_corr(ctx, k, jets).value.norm() < 1e-14);
    auto rep = splitting_identity(ctx, z);
    CHECK(rep.residual < 1e-14);
    CHECK(rep.bad_norm < 1e-14);
  }
}

TEST_CASE("first step matches a dense matrix computation") {
  const auto& c = conformal();
  std::vector<double> s{1.0, 0.0};
  const cplx z = 1.0;
  auto ctx = c.context(s);
  auto jets = compute_jets(ctx, z, 1, 0, SymbolKind::Good);
  const FourierElement& x1 = jets.at(SubsetMask{1, 1}).value;

  auto big = std::make_shared<const LatticeDomain>(
      LatticeDomain::reachable(TruncationBox{2, 60, 10}, std::vector<LatticeIndex>{LatticeIndex{1, 0}}));
  FourierElement xs = c.ops->x_of_s(s);
  auto xm = compress(big, [&](const FourierElement& y) { return twisted_mul(c.theta, xs, y); }).matrix;
  auto vm = compress(big, [&](const FourierElement& y) { return c.ops->apply_V(s, y); }).matrix;
  xm.diagonal().array() += z;
  Eigen::VectorXcd r = xm.partialPivLu().solve(big->unit(LatticeIndex{0, 0}));
  FourierElement ref = big->element(vm * r);
  CHECK(inner_diff(x1, ref, 8) <= 1e-9);
}

TEST_CASE("z-derivatives agree with central differences") {
  const auto& c = conformal();
  std::vector<double> s{0.8, -0.3};
  auto ctx = c.context(s);
  const cplx z(1.0, 0.5);
  const SubsetMask mask{2, 1};
  auto jet = compute_jets(ctx, z, 3, 2, SymbolKind::Good).at(mask);
  auto value_at = [&](cplx w) { return compute_jets(ctx, w, 3, 0, SymbolKind::Good).at(mask).value; };
  auto fd = [&](double h) { return (1.0 / (2 * h)) * (value_at(z + h) - value_at(z - h)); };
  CHECK((fd(1e-5) - jet.dz[0]).norm() <= 1e-7);
  double e1 = (fd(1e-2) - jet.dz[0]).norm();
  double e2 = (fd(5e-3) - jet.dz[0]).norm();
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  // Second derivative from the first by differencing.
  auto d1_at = [&](cplx w) { return compute_jets(ctx, w, 3, 1, SymbolKind::Good).at(mask).dz[0]; };
  const double h = 1e-5;
  CHECK(((1.0 / (2 * h)) * (d1_at(z + h) - d1_at(z - h)) - jet.dz[1]).norm() <= 1e-7);
}

TEST_CASE("partition over subsets reproduces the full recursion") {
  const auto& c = conformal();
  std::vector<double> s{0.6, 1.1};
  auto ctx = c.context(s);
  const cplx z(2.0, -1.0);
  auto jets = all_masks(ctx, z, 3);
  for (int m = 1; m <= 3; ++m) {
    FourierElement sum(2);
    for (const auto& [mask, jet] : jets)
      if (mask.m == m) sum += jet.value;
    CHECK((sum - full_recursion(ctx, z, m).value).norm() <= 1e-11);
  }
}

TEST_CASE("homogeneity in (s, z)") {
  const auto& c = conformal();
  std::vector<double> s{0.7, -0.4}, s2{1.4, -0.8};
  const cplx z(1.0, 0.3);
  const double r = 2.0;
  auto ctx = c.context(s);
  auto ctx2 = c.context(s2);
  auto a = all_masks(ctx, z, 3);
  auto b = all_masks(ctx2, r * r * z, 3);
  for (const auto& [mask, jet] : a) {
    double scale = std::pow(r, mask.count() - 2 * mask.m);
    CHECK((b.at(mask).value - scale * jet.value).norm() <= 1e-10);
  }
  auto ga = compute_jets(ctx, z, 4, 0, SymbolKind::Good);
  auto gb = compute_jets(ctx2, r * r * z, 4, 0, SymbolKind::Good);
  for (int k = 0; k <= 4; ++k) {
    double scale = std::pow(r, -k - 2);
    CHECK((assemble_good(ctx2, k, gb).value - scale * assemble_good(ctx, k, ga).value).norm() <= 1e-10);
  }
}

TEST_CASE("good and corr agree up to the dimension") {
  const auto& c = conformal();
  std::vector<double> s{0.5, 0.5};
  auto ctx = c.context(s);
  auto jets = compute_jets(ctx, 1.0, 4, 1, SymbolKind::Corr);
  for (int k = 0; k <= 2; ++k) {
    auto gk = assemble_good(ctx, k, jets);
    auto ck = assemble_corr(ctx, k, jets);
    CHECK((gk.value - ck.value).norm() == 0.0);
    CHECK((gk.dz[0] - ck.dz[0]).norm() == 0.0);
  }
  CHECK((assemble_good(ctx, 4, jets).value - assemble_corr(ctx, 4, jets).value).norm() > 1e-8);
  // k = 0 is the bare resolvent of the unit.
  auto g0 = assemble_good(ctx, 0, jets).value;
  auto unit = ctx.domain->vector(FourierElement::constant(2, 1.0));
  CHECK((g0 - ctx.domain->element(resolvent_apply(*ctx.x_spectrum, 1.0, unit))).norm() < 1e-15);
}

TEST_CASE("missing jets and exhausted margins are reported") {
  const auto& c = conformal();
  std::vector<double> s{1.0, 0.0};
  auto ctx = c.context(s);
  auto jets = compute_jets(ctx, 1.0, 0, 0, SymbolKind::Good);
  CHECK_THROWS_AS(assemble_good(ctx, 2, jets), Error);
  auto tight = c.context(s, TruncationBox{2, 10, 3});
  try {
    compute_jets(tight, 1.0, 4, 0, SymbolKind::Corr);
    FAIL("expected MarginExhausted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MarginExhausted);
  }
}

TEST_CASE("resolvent splitting identity") {
  const auto& c = conformal();
  const TruncationBox box{2, 20, 10};
  struct Case {
    std::vector<double> n;
    cplx z;
  };
  for (const auto& [n, z] : {Case{{1, 0}, 1.0}, Case{{1, 1}, 2.0}, Case{{2, 0}, cplx(1, 3)}}) {
    auto ctx = c.context(n, box);
    auto rep = splitting_identity(ctx, z);
    CHECK(rep.residual <= 1e-8);
    CHECK(rep.bad_norm > 0.0);
  }
  // The remainder shrinks as |n| grows.
  double prev = 1e300;
  for (int k = 2; k <= 8; k += 2) {
    auto ctx = c.context({static_cast<double>(k), 0.0}, box);
    double b = assemble_bad(ctx, cplx(0, 1)).norm();
    CHECK(b < prev);
    prev = b;
  }
}
