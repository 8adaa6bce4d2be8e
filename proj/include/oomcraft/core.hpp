#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "oomcraft/errors.hpp"

namespace oomcraft {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Throws InvalidInputError if any entry of m is NaN or infinite.
void ensure_finite(const Eigen::Ref<const Matrix>& m, const std::string& label);

bool all_finite(const Eigen::Ref<const Matrix>& m);

/// Kahan compensated accumulator over an Eigen array shape. Sums many
/// small contributions reproducibly; merge order still matters, so callers
/// merge shards in a fixed index order.
template <typename Plain>
class KahanSum {
public:
    KahanSum() = default;
    explicit KahanSum(Eigen::Index rows, Eigen::Index cols = 1)
        : sum_(Plain::Zero(rows, cols)), comp_(Plain::Zero(rows, cols)) {}

    void add(const Plain& value) {
        Plain y = value - comp_;
        Plain t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }

    const Plain& value() const { return sum_; }

private:
    Plain sum_;
    Plain comp_;
};

/// Scalar Kahan accumulator.
class KahanScalar {
public:
    void add(double value) {
        double y = value - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// SplitMix64 step; used to derive independent substream seeds from a
/// master seed so parallel generation is schedule-independent.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Seed for substream `index` of master seed `seed`.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ull * (index + 1));
    return splitmix64(s);
}

/// Deterministic RNG wrapper: mt19937_64 plus hand-rolled transforms.
/// The standard fixes the engine's output bit-for-bit but not the library
/// distributions', so uniform/normal draws are implemented here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        return (engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // rejection keeps the draw unbiased
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    /// Sample an index from a discrete distribution given cumulative weights.
    int categorical(const std::vector<double>& cumulative) {
        double u = uniform() * cumulative.back();
        for (std::size_t i = 0; i < cumulative.size(); ++i)
            if (u < cumulative[i]) return static_cast<int>(i);
        return static_cast<int>(cumulative.size()) - 1;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Results must be written to per-index slots; the schedule
/// carries no information.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

} // namespace oomcraft
