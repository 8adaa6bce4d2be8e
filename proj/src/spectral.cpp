#include "oomcraft/spectral.hpp"

#include <sstream>

namespace oomcraft {

ProjectionPair make_projection(const Matrix& c12, int m, double svd_floor) {
    const int kmax = static_cast<int>(std::min(c12.rows(), c12.cols()));
    if (m < 1 || m > kmax)
        throw InvalidInputError("make_projection: model dimension outside [1, min(D1, D2)]");
    TruncatedSvd svd = truncated_svd(c12, kmax);
    double smax = svd.sigma.size() ? svd.sigma(0) : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.sigma.size(); ++i)
        if (svd.sigma(i) > svd_floor * smax) ++rank;
    if (rank < m) {
        std::ostringstream msg;
        msg << "effective rank of C12 is " << rank << ", below requested model dimension " << m;
        throw RankDeficiencyError(msg.str(), rank, m);
    }
    ProjectionPair out;
    out.singular_values = svd.sigma.head(m);
    out.f1 = svd.u.leftCols(m) * out.singular_values.cwiseInverse().asDiagonal();
    out.f2 = svd.v.leftCols(m);
    return out;
}

Oom learn_discrete(const SufficientStats& stats, const LearnerConfig& cfg) {
    if (stats.c13.empty())
        throw InvalidInputError("learn_discrete: statistics carry no per-symbol moments");
    if (stats.n <= 0) throw InvalidInputError("learn_discrete: empty statistics");
    ProjectionPair proj = make_projection(stats.c12, cfg.m, cfg.svd_floor);

    Oom model;
    model.sigma = proj.f1.transpose() * stats.phi1_bar;
    model.omega = stats.phi2_bar.transpose() * proj.f2;
    model.xi.reserve(stats.c13.size());
    for (const auto& c13x : stats.c13)
        model.xi.push_back(proj.f1.transpose() * c13x * proj.f2);
    model.flavor = OomFlavor::Plain;
    validate(model);
    return model;
}

RowVector equilibrium_state(const Matrix& xi_total, const Vector& sigma) {
    if (xi_total.rows() != xi_total.cols() || xi_total.rows() != sigma.size())
        throw InvalidInputError("equilibrium_state: shape mismatch");
    ensure_finite(xi_total, "equilibrium_state Xi(O)");
    ensure_finite(sigma, "equilibrium_state sigma");
    double s2 = sigma.squaredNorm();
    if (s2 <= 0.0 || !std::isfinite(s2))
        throw InvalidInputError("equilibrium_state: sigma is numerically zero");

    const Eigen::Index m = sigma.size();
    RowVector sigma_pinv = sigma.transpose() / s2;                       // 1 x m
    Matrix ortho = Matrix::Identity(m, m) - sigma * sigma_pinv;         // I - sigma sigma^+
    Matrix shifted = xi_total - Matrix::Identity(m, m);                 // Xi(O) - I
    RowVector w =
        sigma_pinv - sigma_pinv * shifted * pseudoinverse(ortho * shifted) * ortho;
    // one exact projection step onto {w sigma = 1}; the pseudoinverse route
    // is feasible only up to rounding amplified by ill-conditioned factors
    w += (1.0 - w * sigma) / s2 * sigma.transpose();
    return w;
}

Oom learn_discrete_equilibrium(const SufficientStats& stats, const LearnerConfig& cfg) {
    Oom model = learn_discrete(stats, cfg);
    model.omega = equilibrium_state(total_operator(model), model.sigma);
    model.flavor = OomFlavor::Equilibrium;
    validate(model);
    return model;
}

double equilibrium_residual(const RowVector& w, const Matrix& xi_total) {
    return (w * xi_total - w).norm();
}

BinlessOom learn_binless(const SufficientStats& stats, const BinlessCache& cache,
                         const GaussianRandomMap& phi1, const GaussianRandomMap& phi2,
                         const LearnerConfig& cfg) {
    const long n = cache.mids.rows();
    if (n <= 0 || stats.n != n)
        throw InvalidInputError("learn_binless: cache/statistics window counts disagree");
    ProjectionPair proj = make_projection(stats.c12, cfg.m, cfg.svd_floor);

    BinlessOom model;
    model.sigma = proj.f1.transpose() * stats.phi1_bar;
    model.sample_points = cache.mids;
    model.left_factors.resize(n, cfg.m);
    model.right_factors.resize(n, cfg.m);

    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const long chunk = 16384;
    for (long start = 0; start < n; start += chunk) {
        long len = std::min(chunk, n - start);
        model.left_factors.middleRows(start, len) =
            phi1.evaluate_rows(cache.prefix_windows.middleRows(start, len)) * proj.f1 * scale;
        model.right_factors.middleRows(start, len) =
            phi2.evaluate_rows(cache.suffix_windows.middleRows(start, len)) * proj.f2 * scale;
    }

    model.omega_eq = equilibrium_state(model.total_operator(), model.sigma);
    validate(model);
    return model;
}

Oom fit_discrete(const TrajectoryDataset& data, const LearnerConfig& cfg, OomFlavor flavor) {
    DiscreteIndicatorMap phi(data.alphabet_size, cfg.order);
    SufficientStats stats = accumulate_discrete(data, phi, phi);
    return flavor == OomFlavor::Equilibrium ? learn_discrete_equilibrium(stats, cfg)
                                            : learn_discrete(stats, cfg);
}

BinlessFit fit_binless(const TrajectoryDataset& data, const LearnerConfig& cfg) {
    Matrix pool = collect_feature_windows(data, cfg.order, cfg.center_pool, cfg.seed);
    BandwidthRule rule;
    rule.scale = cfg.bandwidth_scale;
    GaussianRandomMap phi1 =
        make_gaussian_map(pool, cfg.d1, rule, cfg.seed, cfg.order, data.dim);
    GaussianRandomMap phi2 =
        cfg.d2 == cfg.d1 ? phi1
                         : make_gaussian_map(pool, cfg.d2, rule, substream_seed(cfg.seed, 2),
                                             cfg.order, data.dim);
    auto [stats, cache] = accumulate_binless(data, phi1, phi2, cfg.window_stride);
    BinlessOom model = learn_binless(stats, cache, phi1, phi2, cfg);
    return BinlessFit{std::move(model), std::move(phi1), std::move(phi2)};
}

CoarseGrainedOom fit_coarse_grained(const TrajectoryDataset& data, const BinSpec& bins,
                                    const LearnerConfig& cfg) {
    TrajectoryDataset binned = discretize(data, bins);
    Oom oom = fit_discrete(binned, cfg, OomFlavor::Equilibrium);
    return CoarseGrainedOom{std::move(oom), bins};
}

} // namespace oomcraft
