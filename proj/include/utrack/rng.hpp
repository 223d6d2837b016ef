#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace utrack {

/// Seedable generator whose output stream is identical on every platform.
///
/// The engine is std::mt19937_64 (its sequence is fixed by the standard). The
/// standard distributions are implementation-defined, so uniform and normal
/// variates are derived here: 53-bit uniforms and Marsaglia's polar method.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

    double normal();

    template <int N>
    Eigen::Matrix<double, N, 1> normal_vec() {
        Eigen::Matrix<double, N, 1> v;
        for (int i = 0; i < N; ++i) v[i] = normal();
        return v;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace utrack
