#include "nct/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nct {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

template <class T>
T get(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(std::string("field \"") + key + "\" has the wrong type");
  }
}

TruncationBox read_box(const nlohmann::json& j, int d, TruncationBox fallback, const char* what) {
  TruncationBox b = fallback;
  b.dim = d;
  if (j.is_object()) {
    b.radius = get<int>(j, "radius", b.radius);
    b.margin = get<int>(j, "margin", b.margin);
  } else if (!j.is_null()) {
    fail(std::string(what) + " must be an object");
  }
  if (b.radius < 1) fail(std::string(what) + ": radius must be positive");
  if (b.margin < 1) fail(std::string(what) + ": margin must be positive");
  if (b.margin >= b.radius) fail(std::string(what) + ": margin must be smaller than the radius");
  return b;
}

cplx read_complex(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_object()) return {get<double>(j, "re", 0.0), get<double>(j, "im", 0.0)};
  fail("complex values are numbers or {\"re\", \"im\"} objects");
}

LatticeIndex read_index(const nlohmann::json& j, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != d) fail("lattice index must be an array of length " + std::to_string(d));
  LatticeIndex n(d);
  for (int i = 0; i < d; ++i) n[i] = j[static_cast<std::size_t>(i)].get<int>();
  return n;
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

MetricTensor RunConfig::build_metric() const {
  MetricOptions mo = metric_options;
  mo.max_rows = max_rows;
  return validate_and_invert_metric(theta, metric, geometry, mo);
}

RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) fail("config must be a JSON object");
  RunConfig c;
  c.raw = j;
  c.hash = fnv1a(j.dump());
  try {
    c.dimension = get<int>(j, "dimension", 2);
    const int d = c.dimension;
    if (d < 1 || d > kMaxDim) fail("dimension must lie in 1.." + std::to_string(kMaxDim));

    std::vector<double> th(static_cast<std::size_t>(d * d), 0.0);
    if (j.contains("theta")) {
      const auto& t = j.at("theta");
      if (!t.is_array() || static_cast<int>(t.size()) != d) fail("theta must be a d x d array");
      for (int k = 0; k < d; ++k) {
        const auto& row = t[static_cast<std::size_t>(k)];
        if (!row.is_array() || static_cast<int>(row.size()) != d) fail("theta must be a d x d array");
        for (int l = 0; l < d; ++l) th[static_cast<std::size_t>(k * d + l)] = row[static_cast<std::size_t>(l)].get<double>();
      }
    }
    c.theta = ThetaMatrix(d, th);

    c.metric.assign(static_cast<std::size_t>(d * d), FourierElement(d));
    for (int i = 0; i < d; ++i) c.metric[static_cast<std::size_t>(i * d + i)] = FourierElement::constant(d, 1.0);
    if (j.contains("metric")) {
      const auto& m = j.at("metric");
      if (!m.is_object()) fail("metric must be an object keyed by \"i,j\"");
      for (const auto& [key, records] : m.items()) {
        int a = 0, b = 0;
        char comma = 0;
        std::istringstream in(key);
        if (!(in >> a >> comma >> b) || comma != ',' || a < 1 || b < 1 || a > d || b > d)
          fail("metric key \"" + key + "\" is not of the form \"i,j\" with 1 <= i,j <= d");
        c.metric[static_cast<std::size_t>((a - 1) * d + (b - 1))] = element_from_json(records, d);
      }
    }

    c.max_rows = get<std::size_t>(j.value("caps", nlohmann::json::object()), "max_rows", kDefaultMaxRows);
    if (c.max_rows < 1) fail("caps.max_rows must be positive");

    c.truncation = read_box(j.value("truncation", nlohmann::json()), d, {d, 8, 2}, "truncation");
    c.geometry = read_box(j.value("geometry", nlohmann::json()), d,
                          {d, c.truncation.radius + c.truncation.margin, c.truncation.margin}, "geometry");
    if (auto g = j.value("geometry", nlohmann::json::object()); g.is_object()) {
      c.metric_options.inverse_tolerance = get<double>(g, "inverse_tolerance", c.metric_options.inverse_tolerance);
      c.metric_options.adjoint_tolerance = get<double>(g, "adjoint_tolerance", c.metric_options.adjoint_tolerance);
    }

    auto nu = j.value("nu", nlohmann::json::object());
    c.nu.sphere_nodes = get<int>(nu, "sphere_nodes", c.nu.sphere_nodes);
    c.nu.hermite_nodes = get<int>(nu, "hermite_nodes", c.nu.hermite_nodes);
    c.nu.cross_check = get<bool>(nu, "cross_check", c.nu.cross_check);
    c.nu.tolerance = get<double>(nu, "tolerance", c.nu.tolerance);
    if (c.nu.sphere_nodes < 2 || c.nu.hermite_nodes < 2) fail("nu quadrature needs at least two nodes");

    auto co = j.value("contour", nlohmann::json::object());
    c.contour.shift = get<double>(co, "shift", c.contour.shift);
    c.contour.half_length = get<double>(co, "half_length", c.contour.half_length);
    c.contour.panel_width = get<double>(co, "panel_width", c.contour.panel_width);
    c.contour.panel_nodes = get<int>(co, "panel_nodes", c.contour.panel_nodes);
    c.contour.jet_order = get<int>(co, "jet_order", c.contour.jet_order);
    c.contour.tail_tol = get<double>(co, "tail_tol", c.contour.tail_tol);
    c.contour.validate();

    auto sp = j.value("spatial", nlohmann::json::object());
    c.spatial.half_width = get<double>(sp, "half_width", c.spatial.half_width);
    c.spatial.nodes = get<int>(sp, "nodes", c.spatial.nodes);
    c.spatial.tail_tol = get<double>(sp, "tail_tol", c.spatial.tail_tol);
    c.spatial.adaptive = get<bool>(sp, "adaptive", c.spatial.adaptive);
    c.spatial.radial_nodes = get<int>(sp, "radial_nodes", c.spatial.radial_nodes);
    c.spatial.sphere_nodes = get<int>(sp, "sphere_nodes", c.spatial.sphere_nodes);
    std::string scheme = get<std::string>(sp, "scheme", "polar");
    if (scheme == "polar")
      c.spatial.scheme = SpatialQuadrature::Scheme::Polar;
    else if (scheme == "tensor")
      c.spatial.scheme = SpatialQuadrature::Scheme::Tensor;
    else
      throw Error(ErrorKind::Config, "spatial.scheme must be \"polar\" or \"tensor\"");
    c.spatial.validate();

    c.k_max = get<int>(j, "k_max", c.k_max);
    if (c.k_max < 0 || c.k_max > 8) fail("k_max must lie in 0..8");
    c.include_odd = get<bool>(j, "include_odd", c.include_odd);

    c.t_grid = get<std::vector<double>>(j, "t_grid", {0.05, 0.1, 0.2});
    for (double t : c.t_grid)
      if (!(t > 0.0)) fail("t_grid entries must be positive");

    auto heat = j.value("heat", nlohmann::json::object());
    c.heat_box = read_box(heat, d, {d, c.truncation.radius, c.truncation.margin}, "heat");
    c.heat_x = heat.contains("x") ? element_from_json(heat.at("x"), d) : FourierElement::constant(d, 1.0);

    auto spl = j.value("splitting", nlohmann::json::object());
    if (spl.contains("n"))
      for (const auto& n : spl.at("n")) c.splitting.n.push_back(read_index(n, d));
    else
      c.splitting.n.push_back(LatticeIndex::unit(d, 0));
    if (spl.contains("z"))
      for (const auto& z : spl.at("z")) c.splitting.z.push_back(read_complex(z));
    else
      c.splitting.z = {1.0, 2.0, cplx(1.0, 3.0)};
    c.splitting.tolerance = get<double>(spl, "tolerance", c.splitting.tolerance);

    c.extended_dimension = get<int>(j.value("cross_dim", nlohmann::json::object()), "extended_dimension", d + 1);
    if (c.extended_dimension <= d || c.extended_dimension > kMaxDim) fail("cross_dim.extended_dimension must exceed dimension");

    c.output_dir = get<std::string>(j, "output_dir", c.output_dir);
    c.threads = get<int>(j, "threads", c.threads);
    if (c.threads < 1) fail("threads must be positive");

    for (const auto* b : {&c.truncation, &c.geometry, &c.heat_box})
      if (b->cardinality() > c.max_rows)
        fail("box of radius " + std::to_string(b->radius) + " has " + std::to_string(b->cardinality()) +
             " points, above caps.max_rows");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(ErrorKind::Config, e.what());
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("malformed config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace nct
