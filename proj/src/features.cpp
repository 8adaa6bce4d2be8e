#include "oomcraft/features.hpp"

#include <algorithm>
#include <sstream>

namespace oomcraft {

DiscreteIndicatorMap::DiscreteIndicatorMap(int alphabet_size, int window_len)
    : alphabet_size_(alphabet_size), window_len_(window_len) {
    if (alphabet_size < 1 || window_len < 1)
        throw InvalidInputError("DiscreteIndicatorMap: alphabet size and window length must be >= 1");
    double dim = std::pow(static_cast<double>(alphabet_size), window_len);
    if (dim > (1 << 20))
        throw InvalidInputError("DiscreteIndicatorMap: K^L exceeds capacity (2^20)");
    dimension_ = static_cast<int>(dim + 0.5);
}

int DiscreteIndicatorMap::window_index(std::span<const int> window) const {
    if (static_cast<int>(window.size()) != window_len_) {
        std::ostringstream msg;
        msg << "window length " << window.size() << " != map order " << window_len_;
        throw InvalidInputError(msg.str());
    }
    int idx = 0;
    for (int s : window) {
        if (s < 0 || s >= alphabet_size_)
            throw InvalidInputError("symbol outside alphabet");
        idx = idx * alphabet_size_ + s;
    }
    return idx;
}

Vector DiscreteIndicatorMap::evaluate(std::span<const int> window) const {
    Vector out = Vector::Zero(dimension_);
    out(window_index(window)) = 1.0;
    return out;
}

GaussianRandomMap::GaussianRandomMap(Matrix centers, Vector inverse_bandwidths, int window_len,
                                     int obs_dim, std::uint64_t seed)
    : centers_(std::move(centers)),
      inverse_bandwidths_(std::move(inverse_bandwidths)),
      window_len_(window_len),
      obs_dim_(obs_dim),
      seed_(seed) {
    if (centers_.rows() != inverse_bandwidths_.size())
        throw InvalidInputError("GaussianRandomMap: centers/bandwidth count mismatch");
    if (centers_.cols() != static_cast<Eigen::Index>(window_len) * obs_dim)
        throw InvalidInputError("GaussianRandomMap: center length != L*d");
    if ((inverse_bandwidths_.array() <= 0.0).any())
        throw InvalidInputError("GaussianRandomMap: inverse bandwidths must be positive");
    ensure_finite(centers_, "GaussianRandomMap centers");
    center_sqnorms_ = centers_.rowwise().squaredNorm();
}

Vector GaussianRandomMap::evaluate(const Eigen::Ref<const Vector>& window) const {
    if (window.size() != centers_.cols())
        throw InvalidInputError("GaussianRandomMap: window length != L*d");
    ensure_finite(window, "GaussianRandomMap window");
    Vector out(dimension());
    for (Eigen::Index j = 0; j < centers_.rows(); ++j) {
        double d2 = (window.transpose() - centers_.row(j)).squaredNorm();
        out(j) = std::exp(-inverse_bandwidths_(j) * d2);
    }
    return out;
}

Matrix GaussianRandomMap::evaluate_rows(const Eigen::Ref<const Matrix>& windows) const {
    if (windows.cols() != centers_.cols())
        throw InvalidInputError("GaussianRandomMap: window length != L*d");
    // |w-c|^2 = |w|^2 + |c|^2 - 2 w.c, clamped at 0 against rounding
    Vector wsq = windows.rowwise().squaredNorm();
    Matrix d2 = (-2.0 * windows * centers_.transpose()).rowwise() + center_sqnorms_.transpose();
    d2.colwise() += wsq;
    d2 = d2.cwiseMax(0.0);
    return (-(d2.array().rowwise() * inverse_bandwidths_.transpose().array())).exp();
}

double median_pairwise_distance(const Eigen::Ref<const Matrix>& rows, int subsample,
                                std::uint64_t seed) {
    Eigen::Index n = rows.rows();
    if (n < 2) return 0.0;
    Eigen::Index take = std::min<Eigen::Index>(n, std::max(2, subsample));
    Rng rng(substream_seed(seed, 0x6d656469)); // "medi"
    std::vector<Eigen::Index> pick(take);
    if (take == n) {
        for (Eigen::Index i = 0; i < n; ++i) pick[i] = i;
    } else {
        for (Eigen::Index i = 0; i < take; ++i)
            pick[i] = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(take) * (take - 1) / 2);
    for (Eigen::Index i = 0; i < take; ++i)
        for (Eigen::Index j = i + 1; j < take; ++j)
            dists.push_back((rows.row(pick[i]) - rows.row(pick[j])).norm());
    auto mid = dists.begin() + dists.size() / 2;
    if (dists.size() % 2 == 1) {
        std::nth_element(dists.begin(), mid, dists.end());
        return *mid;
    }
    std::nth_element(dists.begin(), mid, dists.end());
    double hi = *mid;
    double lo = *std::max_element(dists.begin(), mid);
    return 0.5 * (lo + hi);
}

GaussianRandomMap make_gaussian_map(const Eigen::Ref<const Matrix>& sample_windows, int dimension,
                                    const BandwidthRule& rule, std::uint64_t seed, int window_len,
                                    int obs_dim) {
    if (dimension < 1) throw InvalidInputError("make_gaussian_map: dimension must be >= 1");
    if (sample_windows.rows() == 0) throw InvalidInputError("make_gaussian_map: no sample windows");
    if (sample_windows.cols() != static_cast<Eigen::Index>(window_len) * obs_dim)
        throw InvalidInputError("make_gaussian_map: sample window length != L*d");
    ensure_finite(sample_windows, "make_gaussian_map samples");

    Rng rng(substream_seed(seed, 0x63656e74)); // "cent"
    Matrix centers(dimension, sample_windows.cols());
    for (int j = 0; j < dimension; ++j) {
        auto row = rng.below(static_cast<std::uint64_t>(sample_windows.rows()));
        centers.row(j) = sample_windows.row(static_cast<Eigen::Index>(row));
    }

    double med = median_pairwise_distance(sample_windows, rule.subsample, seed);
    double inv_bw = med > 0.0 ? 1.0 / (2.0 * med * med) : 1.0;
    inv_bw *= rule.scale > 0.0 ? 1.0 / (rule.scale * rule.scale) : 1.0;
    Vector bws = Vector::Constant(dimension, inv_bw);
    return GaussianRandomMap(std::move(centers), std::move(bws), window_len, obs_dim, seed);
}

} // namespace oomcraft
