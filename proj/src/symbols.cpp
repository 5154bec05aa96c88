#include "nct/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace nct {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

bool needed(const SubsetMask& mask, int k_max, int d, SymbolKind kind) {
  if (mask.weight() > k_max) return false;
  return kind == SymbolKind::Corr || mask.m <= d;
}

// Every (m, A) with weight k and m in [k/2, m_max].
std::vector<SubsetMask> masks_of_weight(int k, int m_max) {
  std::vector<SubsetMask> out;
  for (int m = (k + 1) / 2; m <= std::min(k, m_max); ++m) {
    int size = 2 * m - k;
    for (std::uint32_t bits = 0; bits < (1u << m); ++bits)
      if (__builtin_popcount(bits) == size) out.push_back({m, bits});
  }
  return out;
}

SymbolJet assemble(const SymbolContext& ctx, int k, const std::map<SubsetMask, SymbolJet>& jets, int m_max) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "negative symbol order", k);
  const int d = ctx.ops->dim();
  int order = -1;
  SymbolJet sum;
  for (const auto& mask : masks_of_weight(k, m_max)) {
    auto it = jets.find(mask);
    if (it == jets.end())
      throw Error(ErrorKind::InvalidArgument,
                  "missing recursion jet for m=" + std::to_string(mask.m) + " mask=" + std::to_string(mask.members));
    const SymbolJet& j = it->second;
    if (order < 0) {
      order = j.jet_order();
      sum.value = FourierElement(d);
      sum.dz.assign(static_cast<std::size_t>(order), FourierElement(d));
      sum.s = j.s;
      sum.z = j.z;
    }
    double sign = (mask.m % 2 == 0) ? 1.0 : -1.0;
    sum.value += sign * j.value;
    for (int q = 0; q < order; ++q) sum.dz[static_cast<std::size_t>(q)] += sign * j.dz[static_cast<std::size_t>(q)];
  }
  return apply_resolvent(ctx, sum);
}

}  // namespace

SymbolContext make_symbol_context(const GeometricOperators& ops, const MetricTensor& g, const TruncationBox& box,
                                  std::span<const double> s, std::shared_ptr<const CompressedGeometry> compressed) {
  box.validate();
  if (static_cast<int>(s.size()) != ops.dim())
    throw Error(ErrorKind::DimensionMismatch, "s vs operator dimension", static_cast<double>(s.size()));
  SymbolContext ctx;
  ctx.ops = &ops;
  ctx.box = box;
  ctx.s.assign(s.begin(), s.end());
  ctx.metric_radius = g.support_radius();
  if (!compressed) compressed = std::make_shared<const CompressedGeometry>(ops.compress(ops.working_domain(box)));
  ctx.compressed = compressed;
  ctx.domain = compressed->domain;
  ctx.x_spectrum = std::make_shared<const SpectralDecomposition>(ctx.domain, compressed->x_of_s(s));
  return ctx;
}

SymbolJet base_jet(const SymbolContext& ctx, cplx z, int jet_order) {
  const int d = ctx.ops->dim();
  SymbolJet j;
  j.value = FourierElement::constant(d, 1.0);
  j.dz.assign(static_cast<std::size_t>(std::max(jet_order, 0)), FourierElement(d));
  j.s = ctx.s;
  j.z = z;
  return j;
}

SymbolJet apply_resolvent(const SymbolContext& ctx, const SymbolJet& v) {
  const int order = v.jet_order();
  const LatticeDomain& dom = *ctx.domain;
  // powers[l][p] = R^{p+1} v^{(l)}
  std::vector<std::vector<Eigen::VectorXcd>> powers(static_cast<std::size_t>(order + 1));
  for (int l = 0; l <= order; ++l) {
    Eigen::VectorXcd cur = dom.vector(v.derivative(l));
    for (int p = 0; p <= order - l; ++p) {
      cur = resolvent_apply(*ctx.x_spectrum, v.z, cur);
      powers[static_cast<std::size_t>(l)].push_back(cur);
    }
  }
  SymbolJet out;
  out.s = v.s;
  out.z = v.z;
  for (int j = 0; j <= order; ++j) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dom.size()));
    for (int i = 0; i <= j; ++i) {
      double c = binomial(j, i) * factorial(i) * ((i % 2 == 0) ? 1.0 : -1.0);
      acc += c * powers[static_cast<std::size_t>(j - i)][static_cast<std::size_t>(i)];
    }
    FourierElement e = dom.element(acc);
    if (j == 0)
      out.value = std::move(e);
    else
      out.dz.push_back(std::move(e));
  }
  return out;
}

SymbolJet recursion_step(const SymbolContext& ctx, const SymbolJet& prev, int depth, bool in_A) {
  if (depth < 1) throw Error(ErrorKind::InvalidArgument, "recursion depth starts at 1", depth);
  int need = depth * 2 * ctx.metric_radius;
  if (need > ctx.box.margin)
    throw Error(ErrorKind::MarginExhausted,
                "recursion depth " + std::to_string(depth) + " needs margin " + std::to_string(need) +
                    "; enlarge the working box margin",
                ctx.box.margin);
  SymbolJet r = apply_resolvent(ctx, prev);
  auto op = [&](const FourierElement& y) { return in_A ? ctx.ops->apply_V(ctx.s, y) : ctx.ops->apply_Ag(y); };
  SymbolJet out;
  out.s = r.s;
  out.z = r.z;
  out.value = op(r.value);
  for (const auto& e : r.dz) out.dz.push_back(op(e));
  return out;
}

std::map<SubsetMask, SymbolJet> compute_jets(const SymbolContext& ctx, cplx z, int k_max, int jet_order,
                                             SymbolKind kind) {
  if (k_max < 0) throw Error(ErrorKind::InvalidArgument, "negative k_max", k_max);
  if (k_max > 30) throw Error(ErrorKind::InvalidArgument, "k_max too large for subset masks", k_max);
  const int d = ctx.ops->dim();
  std::map<SubsetMask, SymbolJet> out;
  std::function<void(const SubsetMask&, const SymbolJet&)> visit = [&](const SubsetMask& mask, const SymbolJet& jet) {
    out.emplace(mask, jet);
    for (bool in_A : {true, false}) {
      SubsetMask child{mask.m + 1, mask.members | (in_A ? (1u << mask.m) : 0u)};
      if (!needed(child, k_max, d, kind)) continue;
      visit(child, recursion_step(ctx, jet, child.m, in_A));
    }
  };
  visit(SubsetMask{}, base_jet(ctx, z, jet_order));
  return out;
}

SymbolJet assemble_good(const SymbolContext& ctx, int k, const std::map<SubsetMask, SymbolJet>& jets) {
  return assemble(ctx, k, jets, ctx.ops->dim());
}

SymbolJet assemble_corr(const SymbolContext& ctx, int k, const std::map<SubsetMask, SymbolJet>& jets) {
  return assemble(ctx, k, jets, k);
}

SymbolJet full_recursion(const SymbolContext& ctx, cplx z, int m) {
  SymbolJet cur = base_jet(ctx, z, 0);
  for (int step = 1; step <= m; ++step) {
    SymbolJet v = recursion_step(ctx, cur, step, true);
    SymbolJet a = recursion_step(ctx, cur, step, false);
    cur.value = v.value + a.value;
  }
  return cur;
}

namespace {

Eigen::MatrixXcd conjugated_operator(const SymbolContext& ctx, cplx z) {
  const auto& cg = *ctx.compressed;
  Eigen::MatrixXcd m = cg.x_of_s(ctx.s) + cg.Ag + cg.V_of_s(ctx.s);
  m.diagonal().array() += z;
  return m;
}

Eigen::VectorXcd solve_checked(const Eigen::MatrixXcd& m, const Eigen::VectorXcd& rhs) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  double rc = lu.rcond();
  if (!(rc >= 1e-14)) throw Error(ErrorKind::Singular, "conjugated resolvent is numerically singular", rc);
  return lu.solve(rhs);
}

}  // namespace

FourierElement conjugated_resolvent_unit(const SymbolContext& ctx, cplx z) {
  const LatticeDomain& dom = *ctx.domain;
  return dom.element(solve_checked(conjugated_operator(ctx, z), dom.unit(LatticeIndex(dom.dim()))));
}

FourierElement assemble_bad(const SymbolContext& ctx, cplx z) {
  const int d = ctx.ops->dim();
  const LatticeDomain& dom = *ctx.domain;
  SymbolJet x = full_recursion(ctx, z, d + 1);
  return dom.element(solve_checked(conjugated_operator(ctx, z), dom.vector(x.value)));
}

SplittingReport splitting_identity(const SymbolContext& ctx, cplx z) {
  const int d = ctx.ops->dim();
  SplittingReport rep;
  rep.lhs = conjugated_resolvent_unit(ctx, z);
  auto jets = compute_jets(ctx, z, 2 * d, 0, SymbolKind::Good);
  rep.good_sum = FourierElement(d);
  for (int k = 0; k <= 2 * d; ++k) rep.good_sum += assemble_good(ctx, k, jets).value;
  rep.bad = assemble_bad(ctx, z);
  rep.bad_norm = rep.bad.norm();
  double sign = ((d + 1) % 2 == 0) ? 1.0 : -1.0;
  rep.residual = (rep.lhs - rep.good_sum - sign * rep.bad).norm();
  return rep;
}

// ---------------------------------------------------------------------------

SymbolEvaluator::SymbolEvaluator(const CompressedGeometry& cg, std::span<const double> s)
    : d_(static_cast<int>(s.size())), domain_(cg.domain) {
  q_ = cg.x_of_s(s);
  hermitian_eigen(q_, lambda_);
  Eigen::MatrixXcd v = cg.V_of_s(s);
  v_tilde_ = q_.adjoint() * v * q_;
  g_tilde_ = q_.adjoint() * cg.Ag * q_;
  auto origin = static_cast<Eigen::Index>(*domain_->find(LatticeIndex(domain_->dim())));
  u0_ = q_.row(origin).adjoint();
}

SymbolEvaluator::Sums SymbolEvaluator::accumulate(int k_max, int jet_order, std::span<const cplx> z,
                                                  std::span<const cplx> weights, int chunk) const {
  if (z.size() != weights.size()) throw Error(ErrorKind::DimensionMismatch, "nodes vs weights", static_cast<double>(weights.size()));
  if (k_max < 0 || k_max > 30) throw Error(ErrorKind::InvalidArgument, "k_max out of range", k_max);
  const int N = std::max(jet_order, 0);
  const Eigen::Index n = lambda_.size();
  Sums out;
  out.good.assign(static_cast<std::size_t>(k_max + 1), Eigen::VectorXcd::Zero(n));
  out.corr.assign(static_cast<std::size_t>(k_max + 1), Eigen::VectorXcd::Zero(n));
  if (n == 0) return out;

  // coef[j][i] multiplies R^{(i)} X^{(j-i)}, R^{(i)} = (-1)^i i! r^{i+1}.
  std::vector<std::vector<double>> coef(static_cast<std::size_t>(N + 1));
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= j; ++i)
      coef[static_cast<std::size_t>(j)].push_back(binomial(j, i) * factorial(i) * ((i % 2 == 0) ? 1.0 : -1.0));

  for (std::size_t start = 0; start < z.size(); start += static_cast<std::size_t>(chunk)) {
    const Eigen::Index c = static_cast<Eigen::Index>(std::min<std::size_t>(static_cast<std::size_t>(chunk), z.size() - start));
    Eigen::VectorXcd w(c);
    for (Eigen::Index q = 0; q < c; ++q) w(q) = weights[start + static_cast<std::size_t>(q)];
    // rpow[p] = elementwise (lambda_i + z_q)^{-(p+1)}
    std::vector<Eigen::MatrixXcd> rpow(static_cast<std::size_t>(N + 1), Eigen::MatrixXcd(n, c));
    for (Eigen::Index q = 0; q < c; ++q) {
      cplx zq = z[start + static_cast<std::size_t>(q)];
      for (Eigen::Index i = 0; i < n; ++i) {
        cplx r = 1.0 / (lambda_(i) + zq);
        cplx acc = r;
        for (int p = 0; p <= N; ++p) {
          rpow[static_cast<std::size_t>(p)](i, q) = acc;
          acc *= r;
        }
      }
    }
    // Jets stacked as [X^(0) | X^(1) | ... | X^(N)], each n x c.
    auto resolve = [&](const Eigen::MatrixXcd& x, int j) {
      Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, c);
      for (int i = 0; i <= j; ++i)
        acc += coef[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] *
               rpow[static_cast<std::size_t>(i)].cwiseProduct(x.middleCols((j - i) * c, c));
      return acc;
    };

    std::function<void(const Eigen::MatrixXcd&, int, int)> visit = [&](const Eigen::MatrixXcd& x, int m, int weight) {
      Eigen::VectorXcd contrib = resolve(x, N) * w;
      if (m % 2 == 1) contrib = -contrib;
      out.corr[static_cast<std::size_t>(weight)] += contrib;
      if (m <= d_) out.good[static_cast<std::size_t>(weight)] += contrib;
      bool v_child = weight + 1 <= k_max;
      bool g_child = weight + 2 <= k_max;
      if (!v_child && !g_child) return;
      Eigen::MatrixXcd zj(n, (N + 1) * c);
      for (int j = 0; j <= N; ++j) zj.middleCols(j * c, c) = resolve(x, j);
      if (v_child) visit(v_tilde_ * zj, m + 1, weight + 1);
      if (g_child) visit(g_tilde_ * zj, m + 1, weight + 2);
    };

    Eigen::MatrixXcd root = Eigen::MatrixXcd::Zero(n, (N + 1) * c);
    root.leftCols(c) = u0_.replicate(1, c);
    visit(root, 0, 0);
  }
  return out;
}

}  // namespace nct
