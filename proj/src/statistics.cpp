#include "oomcraft/statistics.hpp"

#include <sstream>

namespace oomcraft {

namespace {

void check_order(int order) {
    if (order < 1) throw InvalidInputError("window order L must be >= 1");
}

long usable_windows(const TrajectoryDataset& data, int order, ExtractionCounts& counts) {
    long total = 0;
    for (std::size_t i = 0; i < data.num_trajectories(); ++i) {
        long len = data.trajectory_length(i);
        if (len < 2 * order + 1) {
            ++counts.skipped_trajectories;
            continue;
        }
        total += len - 2 * order;
    }
    counts.windows = total;
    return total;
}

} // namespace

std::vector<WindowTriple> extract_windows(const TrajectoryDataset& data, int order,
                                          ExtractionCounts* counts_out) {
    check_order(order);
    ExtractionCounts counts;
    std::vector<WindowTriple> out;
    out.reserve(static_cast<std::size_t>(std::max<long>(usable_windows(data, order, counts), 0)));
    const int L = order;
    for (std::size_t i = 0; i < data.num_trajectories(); ++i) {
        long len = data.trajectory_length(i);
        if (len < 2 * L + 1) continue;
        for (long t = L; t + L < len; ++t) {
            WindowTriple w;
            if (data.kind == ObsKind::Discrete) {
                const auto& x = data.discrete[i];
                w.prefix_d.assign(x.begin() + (t - L), x.begin() + t);
                w.mid_d.assign(1, x[t]);
                w.suffix_d.assign(x.begin() + (t + 1), x.begin() + (t + 1 + L));
                w.midblock_d.assign(x.begin() + t, x.begin() + (t + L));
            } else {
                const Matrix& x = data.continuous[i];
                const int d = data.dim;
                auto flatten = [&](long from) {
                    Vector v(L * d);
                    for (int j = 0; j < L; ++j) v.segment(j * d, d) = x.row(from + j).transpose();
                    return v;
                };
                w.prefix_c = flatten(t - L);
                w.mid_c = x.row(t).transpose();
                w.suffix_c = flatten(t + 1);
                w.midblock_c = flatten(t);
            }
            out.push_back(std::move(w));
        }
    }
    if (counts_out) *counts_out = counts;
    return out;
}

SufficientStats accumulate_discrete(const TrajectoryDataset& data, const DiscreteIndicatorMap& phi1,
                                    const DiscreteIndicatorMap& phi2) {
    if (data.kind != ObsKind::Discrete)
        throw InvalidInputError("accumulate_discrete: dataset is not discrete");
    if (phi1.window_len() != phi2.window_len())
        throw InvalidInputError("accumulate_discrete: feature maps disagree on window length");
    const int L = phi1.window_len();
    check_order(L);
    const int K = data.alphabet_size;
    if (phi1.alphabet_size() != K || phi2.alphabet_size() != K)
        throw InvalidInputError("accumulate_discrete: feature-map alphabet != dataset alphabet");

    const int d1 = phi1.dimension();
    const int d2 = phi2.dimension();
    SufficientStats stats;
    stats.phi1_bar = Vector::Zero(d1);
    stats.phi2_bar = Vector::Zero(d2);
    stats.c12 = Matrix::Zero(d1, d2);
    stats.c13.assign(K, Matrix::Zero(d1, d2));

    // Counts are exact integers; sums stay exact in doubles well past any
    // realistic N, so no compensation is needed on this path.
    for (std::size_t i = 0; i < data.num_trajectories(); ++i) {
        const auto& x = data.discrete[i];
        long len = static_cast<long>(x.size());
        if (len < 2 * L + 1) {
            ++stats.counts.skipped_trajectories;
            continue;
        }
        for (long t = L; t + L < len; ++t) {
            std::span<const int> all(x.data() + (t - L), static_cast<std::size_t>(2 * L + 1));
            int ip = phi1.window_index(all.subspan(0, L));
            int imb = phi2.window_index(all.subspan(L, L));
            int isf = phi2.window_index(all.subspan(L + 1, L));
            int mid = x[t];
            stats.phi1_bar(ip) += 1.0;
            stats.phi2_bar(imb) += 1.0;
            stats.c12(ip, imb) += 1.0;
            stats.c13[mid](ip, isf) += 1.0;
            ++stats.n;
        }
    }
    stats.counts.windows = stats.n;
    if (stats.n == 0) throw InvalidInputError("accumulate_discrete: no usable windows");
    const double inv = 1.0 / static_cast<double>(stats.n);
    stats.phi1_bar *= inv;
    stats.phi2_bar *= inv;
    stats.c12 *= inv;
    for (auto& m : stats.c13) m *= inv;
    return stats;
}

std::pair<SufficientStats, BinlessCache> accumulate_binless(const TrajectoryDataset& data,
                                                            const GaussianRandomMap& phi1,
                                                            const GaussianRandomMap& phi2,
                                                            long stride) {
    if (data.kind != ObsKind::Continuous)
        throw InvalidInputError("accumulate_binless: dataset is not continuous");
    if (phi1.window_len() != phi2.window_len())
        throw InvalidInputError("accumulate_binless: feature maps disagree on window length");
    if (phi1.obs_dim() != data.dim || phi2.obs_dim() != data.dim)
        throw InvalidInputError("accumulate_binless: feature-map obs dim != dataset dim");
    if (stride < 1) throw InvalidInputError("accumulate_binless: stride must be >= 1");
    const int L = phi1.window_len();
    check_order(L);
    const int d = data.dim;
    const int d1 = phi1.dimension();
    const int d2 = phi2.dimension();

    ExtractionCounts counts;
    long n_total = 0;
    for (std::size_t i = 0; i < data.num_trajectories(); ++i) {
        long len = data.trajectory_length(i);
        if (len < 2 * L + 1) {
            ++counts.skipped_trajectories;
            continue;
        }
        n_total += (len - 2 * L + stride - 1) / stride;
    }
    counts.windows = n_total;
    if (n_total == 0) throw InvalidInputError("accumulate_binless: no usable windows");

    BinlessCache cache;
    cache.prefix_windows.resize(n_total, static_cast<Eigen::Index>(L) * d);
    cache.suffix_windows.resize(n_total, static_cast<Eigen::Index>(L) * d);
    cache.mids.resize(n_total, d);

    KahanSum<Vector> phi1_sum(d1), phi2_sum(d2);
    KahanSum<Matrix> c12_sum(d1, d2);

    const long chunk = 16384;
    long row = 0;
    for (std::size_t i = 0; i < data.num_trajectories(); ++i) {
        const Matrix& x = data.continuous[i];
        long len = x.rows();
        if (len < 2 * L + 1) continue;
        long n_i = (len - 2 * L + stride - 1) / stride;
        ensure_finite(x, "accumulate_binless trajectory");

        for (long base = 0; base < n_i; base += chunk) {
            long take = std::min(chunk, n_i - base);
            Matrix pref(take, L * d), midb(take, L * d);
            for (long k = 0; k < take; ++k) {
                long t = (base + k) * stride;
                for (int j = 0; j < L; ++j) {
                    pref.row(k).segment(j * d, d) = x.row(t + j);
                    midb.row(k).segment(j * d, d) = x.row(t + L + j);
                    cache.suffix_windows.row(row + k).segment(j * d, d) = x.row(t + L + 1 + j);
                }
                cache.mids.row(row + k) = x.row(t + L);
            }
            cache.prefix_windows.middleRows(row, take) = pref;
            row += take;

            Matrix p1 = phi1.evaluate_rows(pref);
            Matrix p2 = phi2.evaluate_rows(midb);
            phi1_sum.add(p1.colwise().sum().transpose());
            phi2_sum.add(p2.colwise().sum().transpose());
            c12_sum.add(p1.transpose() * p2);
        }
    }

    SufficientStats stats;
    stats.n = n_total;
    stats.counts = counts;
    const double inv = 1.0 / static_cast<double>(n_total);
    stats.phi1_bar = phi1_sum.value() * inv;
    stats.phi2_bar = phi2_sum.value() * inv;
    stats.c12 = c12_sum.value() * inv;
    return {std::move(stats), std::move(cache)};
}

SufficientStats merge_stats(const SufficientStats& a, const SufficientStats& b) {
    if (a.n == 0) return b;
    if (b.n == 0) return a;
    if (a.phi1_bar.size() != b.phi1_bar.size() || a.phi2_bar.size() != b.phi2_bar.size() ||
        a.c13.size() != b.c13.size())
        throw InvalidInputError("merge_stats: incompatible shapes");
    SufficientStats out;
    out.n = a.n + b.n;
    const double wa = static_cast<double>(a.n) / static_cast<double>(out.n);
    const double wb = static_cast<double>(b.n) / static_cast<double>(out.n);
    out.phi1_bar = wa * a.phi1_bar + wb * b.phi1_bar;
    out.phi2_bar = wa * a.phi2_bar + wb * b.phi2_bar;
    out.c12 = wa * a.c12 + wb * b.c12;
    out.c13.resize(a.c13.size());
    for (std::size_t k = 0; k < a.c13.size(); ++k) out.c13[k] = wa * a.c13[k] + wb * b.c13[k];
    out.counts.windows = a.counts.windows + b.counts.windows;
    out.counts.skipped_trajectories = a.counts.skipped_trajectories + b.counts.skipped_trajectories;
    return out;
}

Matrix collect_feature_windows(const TrajectoryDataset& data, int order, long max_windows,
                               std::uint64_t seed) {
    if (data.kind != ObsKind::Continuous)
        throw InvalidInputError("collect_feature_windows: dataset is not continuous");
    check_order(order);
    const int L = order;
    const int d = data.dim;
    long total = 0;
    for (std::size_t i = 0; i < data.num_trajectories(); ++i) {
        long len = data.trajectory_length(i);
        if (len >= L) total += len - L + 1;
    }
    if (total == 0) throw InvalidInputError("collect_feature_windows: no windows of requested order");

    long take = max_windows > 0 ? std::min(total, max_windows) : total;
    Matrix out(take, static_cast<Eigen::Index>(L) * d);

    auto window_at = [&](long flat) {
        // locate (trajectory, offset) for global window id `flat`
        for (std::size_t i = 0; i < data.num_trajectories(); ++i) {
            long len = data.trajectory_length(i);
            if (len < L) continue;
            long here = len - L + 1;
            if (flat < here) {
                Vector v(L * d);
                for (int j = 0; j < L; ++j)
                    v.segment(j * d, d) = data.continuous[i].row(flat + j).transpose();
                return v;
            }
            flat -= here;
        }
        throw std::logic_error("window index out of range");
    };

    if (take == total) {
        long r = 0;
        for (std::size_t i = 0; i < data.num_trajectories(); ++i) {
            long len = data.trajectory_length(i);
            if (len < L) continue;
            for (long t = 0; t + L <= len; ++t) {
                for (int j = 0; j < L; ++j)
                    out.row(r).segment(j * d, d) = data.continuous[i].row(t + j);
                ++r;
            }
        }
    } else {
        Rng rng(substream_seed(seed, 0x77696e64)); // "wind"
        for (long r = 0; r < take; ++r)
            out.row(r) = window_at(static_cast<long>(rng.below(static_cast<std::uint64_t>(total)))).transpose();
    }
    return out;
}

} // namespace oomcraft
