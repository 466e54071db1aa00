#pragma once

#include <cstdint>
#include <random>

namespace ersaa::rng {

/// splitmix64 finalizer, used to derive well-separated substream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic seed for a substream addressed by a path of indices,
/// e.g. (base, sample size, replication).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// Random stream with fixed, platform-independent transforms. mt19937_64
/// output is pinned by the standard and every variate below is computed
/// from it with explicit arithmetic, so sequences are bit-reproducible.
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : engine_(mix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01();

    /// Uniform on (0, 1], safe as a logarithm argument.
    double uniform01_open();

    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller with a cached spare.
    double normal();

    /// Gamma(shape, 1) by Marsaglia-Tsang; shape >= 1.
    double gamma(double shape);

    /// chi^2 with the given degrees of freedom.
    double chi_square(double dof);

    /// Student t with dof > 2, scaled to unit variance.
    double student_t_unit_variance(double dof);

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace ersaa::rng
