#pragma once

#include "oomcraft/model.hpp"
#include "oomcraft/numerics.hpp"
#include "oomcraft/statistics.hpp"

namespace oomcraft {

/// Learner parameters shared by the discrete and binless paths. d1/d2 and
/// the bandwidth entries only matter for the binless (random-feature) path.
struct LearnerConfig {
    int m = 10;                    // model dimension
    int order = 3;                 // feature window length L
    int d1 = 100;                  // feature counts
    int d2 = 100;
    double svd_floor = 1e-10;      // relative singular-value floor before the rank check
    std::uint64_t seed = 0;        // feature-map randomness
    double bandwidth_scale = 1.0;  // multiplier on the median-heuristic kernel width
    long center_pool = 4096;       // windows sampled when building the feature map
    long window_stride = 1;        // keep every stride-th window (binless path)
};

/// F1 = U Sigma^{-1} and F2 = V from the truncated SVD of c12;
/// f1^T c12 f2 is the m x m identity up to estimation rounding.
struct ProjectionPair {
    Matrix f1;  // D1 x m
    Matrix f2;  // D2 x m
    Vector singular_values;  // top m, nonincreasing
};

/// Truncated-SVD projection with the rank guard: singular values below
/// svd_floor * s_max are discarded before checking that at least m remain.
/// Throws RankDeficiencyError naming the observed rank otherwise.
ProjectionPair make_projection(const Matrix& c12, int m, double svd_floor);

/// Spectral parameter recovery from discrete sufficient statistics:
/// sigma = F1^T phi1_bar, Xi(x) = F1^T C13(x) F2, omega = phi2_bar^T F2.
Oom learn_discrete(const SufficientStats& stats, const LearnerConfig& cfg);

/// Minimizer of |w Xi(O) - w|^2 over the affine set {w sigma = 1}, via the
/// pseudoinverse closed form; w sigma = 1 holds to rounding by construction.
RowVector equilibrium_state(const Matrix& xi_total, const Vector& sigma);

/// learn_discrete followed by replacing omega with the equilibrium state of
/// Xi(O) = sum_x Xi(x).
Oom learn_discrete_equilibrium(const SufficientStats& stats, const LearnerConfig& cfg);

/// Residual |w Xi(O) - w|_2; small at an exact equilibrium state, reported
/// as a diagnostic for learned models (Xi(O)^t may fail to converge for
/// non-mixing systems, in which case the closed form still returns a vector).
double equilibrium_residual(const RowVector& w, const Matrix& xi_total);

/// Binless equilibrium OOM from cached windows: per-window rank-one
/// operators W_n = (F1^T phi1(prefix_n)) (F2^T phi2(suffix_n))^T / N with
/// the 1/N split as 1/sqrt(N) per factor, Xi(O) = sum_n W_n, sigma from the
/// projected phi1 mean, omega from the equilibrium closed form.
BinlessOom learn_binless(const SufficientStats& stats, const BinlessCache& cache,
                         const GaussianRandomMap& phi1, const GaussianRandomMap& phi2,
                         const LearnerConfig& cfg);

/// Convenience drivers: dataset in, model out.
Oom fit_discrete(const TrajectoryDataset& data, const LearnerConfig& cfg, OomFlavor flavor);

struct BinlessFit {
    BinlessOom model;
    GaussianRandomMap phi1;
    GaussianRandomMap phi2;
};
BinlessFit fit_binless(const TrajectoryDataset& data, const LearnerConfig& cfg);

/// Bins the data, then fits a discrete equilibrium OOM over bin indices.
CoarseGrainedOom fit_coarse_grained(const TrajectoryDataset& data, const BinSpec& bins,
                                    const LearnerConfig& cfg);

} // namespace oomcraft
