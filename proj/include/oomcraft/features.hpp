#pragma once

#include <cstdint>
#include <span>

#include "oomcraft/core.hpp"

namespace oomcraft {

/// One-hot features over symbol windows of length L, indexed
/// lexicographically over the K^L possible windows. The ordering is part
/// of the serialized model contract.
class DiscreteIndicatorMap {
public:
    DiscreteIndicatorMap(int alphabet_size, int window_len);

    int alphabet_size() const { return alphabet_size_; }
    int window_len() const { return window_len_; }
    int dimension() const { return dimension_; }

    /// Lexicographic index of a window, e.g. K=2: 00,01,10,11.
    int window_index(std::span<const int> window) const;

    /// One-hot vector of length K^L.
    Vector evaluate(std::span<const int> window) const;

private:
    int alphabet_size_;
    int window_len_;
    int dimension_;
};

/// How Gaussian bandwidths are chosen from data: 1/(2*s^2) with s the
/// median pairwise distance among `subsample` windows, times `scale`.
struct BandwidthRule {
    double scale = 1.0;
    int subsample = 1000;
};

/// Random Gaussian basis over flattened continuous windows (length L*d).
/// Component j is exp(-b_j * |w - c_j|^2), bounded in (0, 1]. Centers are
/// drawn from data windows; everything is reproducible from the seed.
class GaussianRandomMap {
public:
    GaussianRandomMap(Matrix centers, Vector inverse_bandwidths, int window_len, int obs_dim,
                      std::uint64_t seed);

    int dimension() const { return static_cast<int>(centers_.rows()); }
    int window_len() const { return window_len_; }
    int obs_dim() const { return obs_dim_; }
    std::uint64_t seed() const { return seed_; }
    const Matrix& centers() const { return centers_; }
    const Vector& inverse_bandwidths() const { return inverse_bandwidths_; }

    /// Features of one flattened window.
    Vector evaluate(const Eigen::Ref<const Vector>& window) const;

    /// Features of many windows at once; rows of `windows` are flattened
    /// windows, result is windows.rows() x D.
    Matrix evaluate_rows(const Eigen::Ref<const Matrix>& windows) const;

private:
    Matrix centers_;             // D x (L*d)
    Vector inverse_bandwidths_;  // D
    Vector center_sqnorms_;      // cached |c_j|^2
    int window_len_;
    int obs_dim_;
    std::uint64_t seed_;
};

/// Builds a GaussianRandomMap with centers drawn uniformly (with
/// replacement) from the given sample windows and the rule's bandwidth.
/// `sample_windows` rows are flattened windows.
GaussianRandomMap make_gaussian_map(const Eigen::Ref<const Matrix>& sample_windows, int dimension,
                                    const BandwidthRule& rule, std::uint64_t seed, int window_len,
                                    int obs_dim);

/// Median pairwise Euclidean distance among up to `subsample` rows,
/// subsampled with the given seed. Exposed for tests.
double median_pairwise_distance(const Eigen::Ref<const Matrix>& rows, int subsample,
                                std::uint64_t seed);

} // namespace oomcraft
