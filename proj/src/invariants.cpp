#include "nct/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "nct/quadrature.hpp"

namespace nct {

void ContourQuadrature::validate() const {
  if (!(shift > 0.0)) throw Error(ErrorKind::InvalidArgument, "contour shift must be positive", shift);
  if (!(half_length > 0.0)) throw Error(ErrorKind::InvalidArgument, "contour half length must be positive", half_length);
  if (!(panel_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "contour panel width must be positive", panel_width);
  if (panel_nodes < 1) throw Error(ErrorKind::InvalidArgument, "contour panels need nodes", panel_nodes);
  if (jet_order < 0) throw Error(ErrorKind::InvalidArgument, "jet order must be non-negative", jet_order);
  if (!(time > 0.0)) throw Error(ErrorKind::InvalidArgument, "contour time must be positive", time);
}

std::vector<cplx> ContourQuadrature::nodes() const {
  int panels = std::max(1, static_cast<int>(std::ceil(2.0 * half_length / panel_width - 1e-9)));
  QuadratureRule r = composite_gauss_legendre(panels, panel_nodes, -half_length, half_length);
  std::vector<cplx> z;
  z.reserve(r.size());
  for (double l : r.nodes) z.emplace_back(shift, l);
  return z;
}

std::vector<cplx> ContourQuadrature::weights() const {
  int panels = std::max(1, static_cast<int>(std::ceil(2.0 * half_length / panel_width - 1e-9)));
  QuadratureRule r = composite_gauss_legendre(panels, panel_nodes, -half_length, half_length);
  std::vector<cplx> w;
  w.reserve(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) w.push_back(r.weights[i] * std::exp(time * cplx(shift, r.nodes[i])));
  return w;
}

double ContourQuadrature::prefactor() const {
  double sign = (jet_order % 2 == 0) ? 1.0 : -1.0;
  return sign * std::pow(time, -jet_order) / (2.0 * std::numbers::pi);
}

void SpatialQuadrature::validate() const {
  if (!(half_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "spatial half width must be positive", half_width);
  if (nodes < 2 || radial_nodes < 2 || sphere_nodes < 2)
    throw Error(ErrorKind::InvalidArgument, "spatial rule needs at least two nodes per direction");
  if (!(tail_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "spatial tail tolerance must be positive", tail_tol);
}

InvariantEngine::InvariantEngine(const MetricTensor& g, const WeightNu& nu, const GeometricOperators& ops,
                                 const TruncationBox& box, ContourQuadrature contour, SpatialQuadrature spatial)
    : g_(&g), nu_(&nu), ops_(&ops), box_(box), contour_(contour), spatial_(spatial) {
  box_.validate();
  contour_.validate();
  spatial_.validate();
  if (box_.dim != ops.dim()) throw Error(ErrorKind::DimensionMismatch, "working box vs metric dimension", box_.dim);
  compressed_ = std::make_shared<const CompressedGeometry>(ops.compress(ops.working_domain(box_)));
  z_nodes_ = contour_.nodes();
  z_weights_ = contour_.weights();
}

std::vector<double> InvariantEngine::tail_estimate(int k_max, std::span<const double> s) const {
  SymbolEvaluator ev(*compressed_, s);
  const double c = contour_.shift, t = contour_.time, L = contour_.half_length;
  std::vector<double> out(static_cast<std::size_t>(k_max + 1), 0.0);
  const cplx one = 1.0;
  for (double sign : {1.0, -1.0}) {
    cplx z = cplx(c, sign * L);
    auto sums = ev.accumulate(k_max, contour_.jet_order, std::span<const cplx>(&z, 1), std::span<const cplx>(&one, 1));
    for (int k = 0; k <= k_max; ++k) out[static_cast<std::size_t>(k)] += sums.corr[static_cast<std::size_t>(k)].norm();
  }
  for (auto& v : out) v *= std::exp(t * c) * std::pow(t, -contour_.jet_order) / (2.0 * std::numbers::pi * t);
  return out;
}

ContourResult InvariantEngine::contour_integrate(int k_max, std::span<const double> s, bool check_tail) const {
  if (static_cast<int>(s.size()) != ops_->dim())
    throw Error(ErrorKind::DimensionMismatch, "s vs metric dimension", static_cast<double>(s.size()));
  SymbolEvaluator ev(*compressed_, s);
  auto sums = ev.accumulate(k_max, contour_.jet_order, z_nodes_, z_weights_);
  ContourResult r;
  r.tail_estimate = tail_estimate(k_max, s);
  const double pre = contour_.prefactor();
  const LatticeDomain& dom = *compressed_->domain;
  for (int k = 0; k <= k_max; ++k) {
    auto ku = static_cast<std::size_t>(k);
    if (k <= ops_->dim() && sums.good[ku] != sums.corr[ku])
      throw Error(ErrorKind::Tolerance, "good and corr differ below the dimension", k);
    r.good.push_back(dom.element(pre * ev.to_domain(sums.good[ku])));
    r.corr.push_back(dom.element(pre * ev.to_domain(sums.corr[ku])));
    if (check_tail && r.tail_estimate[ku] > contour_.tail_tol)
      throw Error(ErrorKind::Tolerance,
                  "contour tail estimate for k=" + std::to_string(k) + " too large; increase the half length or jet order",
                  r.tail_estimate[ku]);
  }
  return r;
}

ContourResult InvariantEngine::contour_integrate_at_time(int k_max, std::span<const double> s, double time) const {
  if (static_cast<int>(s.size()) != ops_->dim())
    throw Error(ErrorKind::DimensionMismatch, "s vs metric dimension", static_cast<double>(s.size()));
  ContourQuadrature q = contour_;
  q.time = time;
  q.validate();
  SymbolEvaluator ev(*compressed_, s);
  auto sums = ev.accumulate(k_max, q.jet_order, z_nodes_, q.weights());
  ContourResult r;
  const double pre = q.prefactor();
  const LatticeDomain& dom = *compressed_->domain;
  for (int k = 0; k <= k_max; ++k) {
    auto ku = static_cast<std::size_t>(k);
    r.good.push_back(dom.element(pre * ev.to_domain(sums.good[ku])));
    r.corr.push_back(dom.element(pre * ev.to_domain(sums.corr[ku])));
    r.tail_estimate.push_back(0.0);
  }
  return r;
}

double InvariantEngine::effective_half_width(int k_max) const {
  const double S = spatial_.half_width;
  if (!spatial_.adaptive) return S;
  const double c = g_->inverse_min_eigenvalue;
  if (!(c > 0.0)) return S;
  auto bound = [&](double r) { return std::exp(-c * r * r) * std::pow(1.0 + r * r, k_max + 1); };
  for (double r = 0.5; r < S; r += 0.01)
    if (bound(r) <= spatial_.tail_tol) return r;
  return S;
}

InvariantTable InvariantEngine::integrate(int k_max, bool include_odd, int threads) const {
  if (k_max < 0) throw Error(ErrorKind::InvalidArgument, "negative k_max", k_max);
  const int d = ops_->dim();
  const double S = effective_half_width(k_max);
  const bool halve = !include_odd || k_max == 0;

  std::vector<std::vector<double>> points;
  std::vector<double> weights;
  if (spatial_.scheme == SpatialQuadrature::Scheme::Polar && d >= 2) {
    // With halving only directions with u_d > 0, doubled; the rule is antipodally symmetric.
    SphereRule sphere = sphere_rule(d, spatial_.sphere_nodes);
    QuadratureRule radial = gauss_legendre(spatial_.radial_nodes, 0.0, S);
    for (std::size_t a = 0; a < sphere.points.size(); ++a) {
      const auto& u = sphere.points[a];
      if (halve && !(u[static_cast<std::size_t>(d - 1)] > 0.0)) continue;
      for (std::size_t r = 0; r < radial.size(); ++r) {
        std::vector<double> s(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) s[static_cast<std::size_t>(i)] = radial.nodes[r] * u[static_cast<std::size_t>(i)];
        double w = sphere.weights[a] * radial.weights[r] * std::pow(radial.nodes[r], d - 1);
        points.push_back(std::move(s));
        weights.push_back(halve ? 2.0 * w : w);
      }
    }
  } else {
    // Tensor grid; with halving only points with s_1 > 0, doubled.
    QuadratureRule gl = gauss_legendre(spatial_.nodes, -S, S);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      std::vector<double> s(static_cast<std::size_t>(d));
      double w = 1.0;
      for (int i = 0; i < d; ++i) {
        s[static_cast<std::size_t>(i)] = gl.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        w *= gl.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      }
      if (!halve || s[0] > 0.0) {
        points.push_back(std::move(s));
        weights.push_back(halve ? 2.0 * w : w);
      }
      int j = d - 1;
      while (j >= 0 && idx[static_cast<std::size_t>(j)] == spatial_.nodes - 1) {
        idx[static_cast<std::size_t>(j)] = 0;
        --j;
      }
      if (j < 0) break;
      ++idx[static_cast<std::size_t>(j)];
    }
  }

  const LatticeDomain& dom = *compressed_->domain;
  const auto n = static_cast<Eigen::Index>(dom.size());
  std::vector<std::vector<Eigen::VectorXcd>> per_point(points.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t p = begin; p < points.size(); p += step) {
      SymbolEvaluator ev(*compressed_, points[p]);
      auto sums = ev.accumulate(k_max, contour_.jet_order, z_nodes_, z_weights_);
      for (int k = 0; k <= k_max; ++k) per_point[p].push_back(ev.to_domain(sums.corr[static_cast<std::size_t>(k)]));
    }
  };
  threads = std::max(1, threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, static_cast<std::size_t>(t), static_cast<std::size_t>(threads));
    for (auto& th : pool) th.join();
  }

  std::vector<Eigen::VectorXcd> acc(static_cast<std::size_t>(k_max + 1), Eigen::VectorXcd::Zero(n));
  for (std::size_t p = 0; p < points.size(); ++p)
    for (int k = 0; k <= k_max; ++k) acc[static_cast<std::size_t>(k)] += weights[p] * per_point[p][static_cast<std::size_t>(k)];

  // Boundary integrand and contour tails.
  std::vector<double> spatial_res(static_cast<std::size_t>(k_max + 1), 0.0);
  std::vector<double> contour_res(static_cast<std::size_t>(k_max + 1), 0.0);
  std::vector<std::vector<double>> probes;
  probes.emplace_back(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < d; ++i)
    for (double sign : {1.0, -1.0}) {
      std::vector<double> s(static_cast<std::size_t>(d), 0.0);
      s[static_cast<std::size_t>(i)] = sign * S;
      probes.push_back(std::move(s));
    }
  for (std::size_t p = 0; p < probes.size(); ++p) {
    ContourResult cr = contour_integrate(k_max, probes[p], false);
    for (int k = 0; k <= k_max; ++k) {
      auto ku = static_cast<std::size_t>(k);
      contour_res[ku] = std::max(contour_res[ku], cr.tail_estimate[ku]);
      if (p > 0) spatial_res[ku] = std::max(spatial_res[ku], cr.corr[ku].norm());
    }
  }

  InvariantTable table;
  table.dim = d;
  table.theta = g_->theta.row_major();
  table.box = box_;
  table.contour = contour_;
  table.spatial = spatial_;
  table.effective_half_width = S;
  table.spatial_points = points.size();
  table.parity_halving = halve;
  const double pre = contour_.prefactor();
  for (int k = 0; k <= k_max; ++k) {
    bool odd = k % 2 == 1;
    if (odd && !include_odd) continue;
    auto ku = static_cast<std::size_t>(k);
    InvariantEntry e;
    e.k = k;
    e.odd = odd;
    e.value = dom.element(pre * acc[ku], box_.inner_radius());
    e.contour_residual = contour_res[ku];
    e.spatial_residual = spatial_res[ku];
    e.self_adjoint_defect = self_adjoint_defect(g_->theta, e.value);
    if (contour_res[ku] > contour_.tail_tol)
      throw Error(ErrorKind::Tolerance, "contour tail for k=" + std::to_string(k) + " exceeds tolerance", contour_res[ku]);
    if (spatial_res[ku] > spatial_.tail_tol)
      throw Error(ErrorKind::Tolerance,
                  "integrand at the spatial boundary for k=" + std::to_string(k) + " exceeds tolerance; enlarge S",
                  spatial_res[ku]);
    table.entries.emplace(k, std::move(e));
  }
  if (table.entries.count(0)) {
    const double scale = std::pow(std::numbers::pi, 0.5 * d);
    const FourierElement& i0 = table.entries.at(0).value;
    FourierElement ref = scale * nu_->nu.restricted(box_.inner_radius());
    table.i0_vs_scaled_nu = (i0 - ref).norm();
    table.i0_trace_ratio = std::real(trace_tau(i0)) / (scale * std::real(trace_tau(nu_->nu)));
  }
  return table;
}

namespace {

nlohmann::json box_json(const TruncationBox& b) { return {{"dimension", b.dim}, {"radius", b.radius}, {"margin", b.margin}}; }

}  // namespace

nlohmann::json table_to_json(const InvariantTable& t) {
  nlohmann::json j;
  j["dimension"] = t.dim;
  j["theta"] = t.theta;
  j["box"] = box_json(t.box);
  j["contour"] = {{"shift", t.contour.shift},
                  {"half_length", t.contour.half_length},
                  {"panel_width", t.contour.panel_width},
                  {"panel_nodes", t.contour.panel_nodes},
                  {"jet_order", t.contour.jet_order},
                  {"tail_tol", t.contour.tail_tol}};
  j["spatial"] = {{"half_width", t.spatial.half_width},
                  {"effective_half_width", t.effective_half_width},
                  {"nodes", t.spatial.nodes},
                  {"points", t.spatial_points},
                  {"parity_halving", t.parity_halving},
                  {"tail_tol", t.spatial.tail_tol},
                  {"radial_nodes", t.spatial.radial_nodes},
                  {"sphere_nodes", t.spatial.sphere_nodes},
                  {"scheme", t.spatial.scheme == SpatialQuadrature::Scheme::Polar ? "polar" : "tensor-gauss-legendre"}};
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [k, e] : t.entries) {
    cplx tr = trace_tau(e.value);
    entries.push_back({{"k", k},
                       {"odd", e.odd},
                       {"norm", e.value.norm()},
                       {"trace", {{"re", tr.real()}, {"im", tr.imag()}}},
                       {"contour_residual", e.contour_residual},
                       {"spatial_residual", e.spatial_residual},
                       {"self_adjoint_defect", e.self_adjoint_defect},
                       {"near_zero", e.value.norm() <= 1e-8},
                       {"coefficients", element_to_json(e.value)}});
  }
  j["entries"] = entries;
  j["normalization"] = "unnormalized: I_k is the plain integral of Corr_k over R^d";
  if (t.i0_vs_scaled_nu) j["i0_minus_pi_pow_half_d_nu"] = *t.i0_vs_scaled_nu;
  if (t.i0_trace_ratio) j["i0_trace_over_pi_pow_half_d_nu_trace"] = *t.i0_trace_ratio;
  return j;
}

FourierElement embed(const FourierElement& a, int new_dim) {
  if (new_dim < a.dim()) throw Error(ErrorKind::InvalidArgument, "cannot embed into a smaller dimension", new_dim);
  std::vector<FourierElement::Term> terms;
  for (const auto& [n, c] : a.terms()) {
    LatticeIndex m(new_dim);
    for (int i = 0; i < a.dim(); ++i) m[i] = n[i];
    terms.emplace_back(m, c);
  }
  return FourierElement::from_terms(new_dim, std::move(terms));
}

CrossDimensionReport cross_dimension_check(const MetricTensor& g, const NuQuadrature& nu_quad, const TruncationBox& box,
                                           const ContourQuadrature& contour, const SpatialQuadrature& spatial,
                                           int k_max, int extended_dim, int threads) {
  const int d = g.dim();
  if (extended_dim <= d) throw Error(ErrorKind::InvalidArgument, "extended dimension must exceed the base", extended_dim);
  CrossDimensionReport rep;
  rep.dim = d;
  rep.extended_dim = extended_dim;

  WeightNu nu = compute_nu(g, nu_quad);
  GeometricOperators ops(g, nu);
  InvariantEngine engine(g, nu, ops, box, contour, spatial);
  rep.base = engine.integrate(k_max, false, threads);

  const int D = extended_dim;
  ThetaMatrix theta2 = g.theta.extended(D);
  std::vector<FourierElement> e2(static_cast<std::size_t>(D * D), FourierElement(D));
  for (int k = 0; k < D; ++k)
    for (int l = 0; l < D; ++l) {
      auto slot = static_cast<std::size_t>(k * D + l);
      if (k < d && l < d)
        e2[slot] = embed(g.g(k, l), D);
      else if (k == l)
        e2[slot] = FourierElement::constant(D, 1.0);
    }
  TruncationBox gbox2{D, g.box.radius, g.box.margin};
  MetricOptions mo;
  mo.max_rows = g.max_rows;
  MetricTensor g2 = validate_and_invert_metric(theta2, std::move(e2), gbox2, mo);
  WeightNu nu2 = compute_nu(g2, nu_quad);
  rep.nu_deviation = (nu2.nu - embed(nu.nu, D)).norm();

  GeometricOperators ops2(g2, nu2);
  TruncationBox box2{D, box.radius, box.margin};
  InvariantEngine engine2(g2, nu2, ops2, box2, contour, spatial);
  rep.extended = engine2.integrate(k_max, false, threads);
  const double scale = std::pow(std::numbers::pi, 0.5 * (D - d));
  for (const auto& [k, e] : rep.extended.entries)
    rep.invariant_deviation[k] = (e.value - scale * embed(rep.base[k], D)).norm();
  return rep;
}

nlohmann::json cross_dimension_to_json(const CrossDimensionReport& r) {
  nlohmann::json dev = nlohmann::json::object();
  for (const auto& [k, v] : r.invariant_deviation) dev[std::to_string(k)] = v;
  return {{"dimension", r.dim},
          {"extended_dimension", r.extended_dim},
          {"nu_deviation", r.nu_deviation},
          {"invariant_deviation", dev},
          {"base", table_to_json(r.base)},
          {"extended", table_to_json(r.extended)}};
}

}  // namespace nct
