#pragma once

// Batch front end: subcommands, verification suites and exit codes.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "nct/config.hpp"

namespace nct {

struct Verdict {
  std::string suite;
  bool pass = false;
  nlohmann::json details;
};

/// Associativity, involution, traciality and the commutation phase on random
/// elements; pass when every residual is at most 1e-13.
Verdict verify_algebra(const ThetaMatrix& theta, int trials = 100, std::uint64_t seed = 1);
/// Conjugation identity over the given modes and random probes; pass at 1e-11.
Verdict verify_conjugation(const GeometricOperators& ops, std::span<const LatticeIndex> modes, int probes = 10,
                           std::uint64_t seed = 2);
/// Splitting identity over the (n, z) grid on the working box.
Verdict verify_splitting(const GeometricOperators& ops, const MetricTensor& g, const TruncationBox& box,
                         const SplittingGrid& grid);
/// Gaussian lattice-sum identity at t = 0.3 and t = 1 in d = 1.
Verdict verify_poisson();
/// c_0 within 1%, c_2 within the floored 5% and remainder exponent >= 0.7
/// unless the remainder is already below 1e-8 relative.
Verdict verify_asymptotics(const AsymptoticFit& fit);

/// 0 success, 1 config or input error, 2 numerical failure.
int exit_code(ErrorKind kind) noexcept;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nct
