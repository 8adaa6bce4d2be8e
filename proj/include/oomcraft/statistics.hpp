#pragma once

#include <optional>

#include "oomcraft/dataset.hpp"
#include "oomcraft/features.hpp"

namespace oomcraft {

/// One length-(2L+1) subsequence x_{t-L:t+L} split into the pieces the
/// estimators consume. For a window at time t:
///   prefix   = x_{t-L:t-1}, mid = x_t, suffix = x_{t+1:t+L},
///   midblock = x_{t:t+L-1}  (starts at the mid observation).
struct WindowTriple {
    std::vector<int> prefix_d, mid_d, suffix_d, midblock_d;  // discrete
    Vector prefix_c, mid_c, suffix_c, midblock_c;            // continuous (flattened)
};

struct ExtractionCounts {
    long windows = 0;
    long skipped_trajectories = 0;  // shorter than 2L+1
};

/// Materializes all window triples (small-data / test path).
std::vector<WindowTriple> extract_windows(const TrajectoryDataset& data, int order,
                                          ExtractionCounts* counts = nullptr);

/// Empirical means of the feature statistics over all windows:
///   phi1_bar = mean phi1(prefix), phi2_bar = mean phi2(midblock),
///   c12      = mean phi1(prefix) phi2(midblock)^T,
///   c13[x]   = mean 1{mid==x} phi1(prefix) phi2(suffix)^T   (discrete).
/// phi2 pairs with the midblock in the means and with the suffix in c13;
/// the asymmetry is intentional.
struct SufficientStats {
    Vector phi1_bar;
    Vector phi2_bar;
    Matrix c12;
    std::vector<Matrix> c13;  // indexed by symbol; empty in binless mode
    long n = 0;
    ExtractionCounts counts;
};

/// Raw windows retained for the binless learner: per-window flattened
/// prefix and suffix windows plus the mid observation. Feature vectors are
/// recomputed from these (deterministically) once the projection is known,
/// keeping memory at O(N*L*d) instead of O(N*D).
struct BinlessCache {
    Matrix prefix_windows;  // N x (L*d)
    Matrix suffix_windows;  // N x (L*d)
    Matrix mids;            // N x d
};

/// Discrete-mode accumulation with indicator features.
SufficientStats accumulate_discrete(const TrajectoryDataset& data, const DiscreteIndicatorMap& phi1,
                                    const DiscreteIndicatorMap& phi2);

/// Binless-mode accumulation with feature maps over continuous windows.
/// Returns the stats (no c13) and the per-window cache. stride > 1 keeps
/// every stride-th window per trajectory (long-run reference fits).
std::pair<SufficientStats, BinlessCache> accumulate_binless(const TrajectoryDataset& data,
                                                            const GaussianRandomMap& phi1,
                                                            const GaussianRandomMap& phi2,
                                                            long stride = 1);

/// Count-weighted merge of two accumulations over disjoint window sets.
SufficientStats merge_stats(const SufficientStats& a, const SufficientStats& b);

/// Flattened L-windows (rows) of every position in every trajectory long
/// enough; used to draw feature-map centers and bandwidths.
Matrix collect_feature_windows(const TrajectoryDataset& data, int order, long max_windows,
                               std::uint64_t seed);

} // namespace oomcraft
