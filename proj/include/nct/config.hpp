#pragma once

// Run configuration for the command-line front end.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "nct/heat.hpp"

namespace nct {

inline constexpr const char* kVersion = "0.1.0";

struct SplittingGrid {
  std::vector<LatticeIndex> n;
  std::vector<cplx> z;
  double tolerance = 1e-8;
};

struct RunConfig {
  int dimension = 2;
  ThetaMatrix theta{2};
  std::vector<FourierElement> metric;  ///< row-major, d*d
  TruncationBox truncation{2, 8, 2};
  TruncationBox geometry{2, 10, 2};
  MetricOptions metric_options;
  NuQuadrature nu;
  ContourQuadrature contour;
  SpatialQuadrature spatial;
  int k_max = 2;
  bool include_odd = false;
  std::vector<double> t_grid;
  TruncationBox heat_box{2, 20, 2};
  FourierElement heat_x;  ///< defaults to 1
  SplittingGrid splitting;
  int extended_dimension = 3;
  std::size_t max_rows = kDefaultMaxRows;
  std::string output_dir = "nct_out";
  int threads = 1;

  /// FNV-1a of the canonical JSON text of the raw config.
  std::uint64_t hash = 0;
  nlohmann::json raw;

  std::string hash_hex() const;
  MetricTensor build_metric() const;
};

/// Parses and validates; every failure is an Error of kind Config.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

std::uint64_t fnv1a(const std::string& text);

}  // namespace nct
