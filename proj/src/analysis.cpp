#include "oomcraft/analysis.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace oomcraft {

namespace {

// trapezoid weights for an evenly spaced grid
Vector trapezoid_weights(const Vector& nodes) {
    const Eigen::Index n = nodes.size();
    Vector w = Vector::Zero(n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        double h = nodes(i + 1) - nodes(i);
        w(i) += 0.5 * h;
        w(i + 1) += 0.5 * h;
    }
    return w;
}

Vector linspace(double lo, double hi, int points) {
    Vector x(points);
    for (int i = 0; i < points; ++i)
        x(i) = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    return x;
}

double normalization_1d(const Potential& potential, double beta, double lo, double hi,
                        int points) {
    Vector x = linspace(lo, hi, points);
    Vector w = trapezoid_weights(x);
    double z = 0.0;
    Vector p(1);
    for (int i = 0; i < points; ++i) {
        p(0) = x(i);
        z += w(i) * std::exp(-beta * potential.value(p));
    }
    return z;
}

} // namespace

double Boltzmann1D::prob_below(double threshold) const {
    // per-cell trapezoid, with the straddling cell cut at the threshold
    double mass = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        if (x(i + 1) <= threshold) {
            mass += 0.5 * (x(i + 1) - x(i)) * (pdf(i) + pdf(i + 1));
        } else if (x(i) < threshold) {
            double h = threshold - x(i);
            double frac = h / (x(i + 1) - x(i));
            double p_at = pdf(i) + frac * (pdf(i + 1) - pdf(i));
            mass += 0.5 * h * (pdf(i) + p_at);
        } else {
            break;
        }
    }
    return mass;
}

double Boltzmann1D::mean() const {
    Vector w = trapezoid_weights(x);
    return (w.array() * pdf.array() * x.array()).sum();
}

double Boltzmann1D::expectation(const std::function<double(double)>& g) const {
    Vector w = trapezoid_weights(x);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) acc += w(i) * pdf(i) * g(x(i));
    return acc;
}

Vector Boltzmann1D::bin_masses(const std::vector<double>& edges) const {
    if (edges.size() < 2) throw InvalidInputError("bin_masses: need at least one bin");
    Vector masses = Vector::Zero(static_cast<Eigen::Index>(edges.size()) - 1);
    for (std::size_t b = 0; b + 1 < edges.size(); ++b)
        masses(static_cast<Eigen::Index>(b)) = prob_below(edges[b + 1]) - prob_below(edges[b]);
    return masses;
}

Boltzmann1D boltzmann_reference_1d(const Potential& potential, double beta, double lo, double hi,
                                   int points) {
    if (potential.dim() != 1) throw InvalidInputError("boltzmann_reference_1d: potential not 1-D");
    if (points < 2 || !(hi > lo)) throw InvalidInputError("boltzmann_reference_1d: bad grid");
    Boltzmann1D out;
    out.x = linspace(lo, hi, points);
    out.pdf.resize(points);
    Vector p(1);
    for (int i = 0; i < points; ++i) {
        p(0) = out.x(i);
        out.pdf(i) = std::exp(-beta * potential.value(p));
    }
    Vector w = trapezoid_weights(out.x);
    double z = (w.array() * out.pdf.array()).sum();
    if (!(z > 0.0) || !std::isfinite(z))
        throw NumericalError("boltzmann_reference_1d: density not normalizable on the grid");
    out.pdf /= z;
    double z2 = normalization_1d(potential, beta, lo, hi, 2 * points - 1);
    out.refined_ok = std::abs(z2 - z) <= 1e-6 * z;
    return out;
}

Vector Boltzmann2D::mean() const {
    Vector wx = trapezoid_weights(x), wy = trapezoid_weights(y);
    Vector mu = Vector::Zero(2);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        for (Eigen::Index j = 0; j < y.size(); ++j) {
            double m = wx(i) * wy(j) * pdf(i, j);
            mu(0) += m * x(i);
            mu(1) += m * y(j);
        }
    return mu;
}

Matrix Boltzmann2D::covariance() const {
    Vector mu = mean();
    Vector wx = trapezoid_weights(x), wy = trapezoid_weights(y);
    Matrix c = Matrix::Zero(2, 2);
    Vector d(2);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        for (Eigen::Index j = 0; j < y.size(); ++j) {
            double m = wx(i) * wy(j) * pdf(i, j);
            d(0) = x(i) - mu(0);
            d(1) = y(j) - mu(1);
            c += m * d * d.transpose();
        }
    return c;
}

Boltzmann2D boltzmann_reference_2d(const Potential& potential, double beta, const Vector& lo,
                                   const Vector& hi, int points_per_dim) {
    if (potential.dim() != 2) throw InvalidInputError("boltzmann_reference_2d: potential not 2-D");
    if (lo.size() != 2 || hi.size() != 2 || points_per_dim < 2)
        throw InvalidInputError("boltzmann_reference_2d: bad grid");
    Boltzmann2D out;
    out.x = linspace(lo(0), hi(0), points_per_dim);
    out.y = linspace(lo(1), hi(1), points_per_dim);
    out.pdf.resize(points_per_dim, points_per_dim);
    Vector p(2);
    for (int i = 0; i < points_per_dim; ++i)
        for (int j = 0; j < points_per_dim; ++j) {
            p(0) = out.x(i);
            p(1) = out.y(j);
            out.pdf(i, j) = std::exp(-beta * potential.value(p));
        }
    Vector wx = trapezoid_weights(out.x), wy = trapezoid_weights(out.y);
    double z = wx.transpose() * out.pdf * wy;
    if (!(z > 0.0) || !std::isfinite(z))
        throw NumericalError("boltzmann_reference_2d: density not normalizable on the grid");
    out.pdf /= z;
    return out;
}

double empirical_estimator(const TrajectoryDataset& data,
                           const std::function<double(const Eigen::Ref<const Vector>&)>& g) {
    if (data.kind != ObsKind::Continuous)
        throw InvalidInputError("empirical_estimator: dataset is not continuous");
    KahanScalar acc;
    long n = 0;
    for (const Matrix& traj : data.continuous)
        for (long t = 0; t < traj.rows(); ++t) {
            acc.add(g(traj.row(t).transpose()));
            ++n;
        }
    if (n == 0) throw InvalidInputError("empirical_estimator: empty dataset");
    return acc.value() / static_cast<double>(n);
}

std::pair<Matrix, Matrix> empirical_lagged_covariances(const TrajectoryDataset& data, long tau) {
    if (data.kind != ObsKind::Continuous)
        throw InvalidInputError("empirical_lagged_covariances: dataset is not continuous");
    if (tau < 1) throw InvalidInputError("empirical_lagged_covariances: tau must be >= 1");
    const int d = data.dim;
    Vector mu = Vector::Zero(d);
    long n = 0;
    for (const Matrix& traj : data.continuous) {
        mu += traj.colwise().sum().transpose();
        n += traj.rows();
    }
    if (n == 0) throw InvalidInputError("empirical_lagged_covariances: empty dataset");
    mu /= static_cast<double>(n);

    Matrix c0 = Matrix::Zero(d, d);
    Matrix ct = Matrix::Zero(d, d);
    long pairs = 0;
    for (const Matrix& traj : data.continuous) {
        Matrix centered = traj.rowwise() - mu.transpose();
        c0 += centered.transpose() * centered;
        long usable = traj.rows() - tau;
        if (usable > 0) {
            ct += centered.topRows(usable).transpose() * centered.bottomRows(usable);
            pairs += usable;
        }
    }
    if (pairs == 0)
        throw InvalidInputError("empirical_lagged_covariances: no trajectory longer than tau");
    c0 /= static_cast<double>(n);
    ct /= static_cast<double>(pairs);
    return {c0, 0.5 * (ct + ct.transpose())};
}

TicaResult solve_tica(Matrix c0, Matrix c_tau, long tau) {
    if (c0.rows() != c0.cols() || c_tau.rows() != c_tau.cols() || c0.rows() != c_tau.rows())
        throw InvalidInputError("solve_tica: covariance shapes disagree");
    c0 = 0.5 * (c0 + c0.transpose());
    c_tau = 0.5 * (c_tau + c_tau.transpose());
    Eigen::LLT<Matrix> llt(c0);
    if (llt.info() != Eigen::Success)
        throw NumericalError("solve_tica: c0 is not positive definite; refusing to regularize");
    Matrix lower = llt.matrixL();
    // whiten: solve L S L^T = c_tau for the symmetric pencil
    Matrix s = lower.triangularView<Eigen::Lower>().solve(c_tau);
    s = lower.triangularView<Eigen::Lower>().solve(s.transpose()).transpose();
    s = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    if (eig.info() != Eigen::Success) throw NumericalError("solve_tica: eigensolver failed");
    Eigen::Index top = eig.eigenvalues().size() - 1;  // ascending order

    TicaResult out;
    out.lag = tau;
    out.c0 = c0;
    out.c_tau = c_tau;
    out.lambda = eig.eigenvalues()(top);
    Vector y = eig.eigenvectors().col(top);
    Vector w = lower.transpose().triangularView<Eigen::Upper>().solve(y);
    w.normalize();
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (std::abs(w(i)) > 1e-12) {
            if (w(i) < 0) w = -w;
            break;
        }
    }
    out.w = w;
    return out;
}

TicaResult tica_from_binless(const BinlessOom& model, long tau) {
    if (tau < 1) throw InvalidInputError("tica_from_binless: tau must be >= 1");
    const Matrix& pts = model.sample_points;
    Matrix ones = Matrix::Ones(model.size(), 1);
    Vector mu = binless_lagged_moment(model, pts, ones, 0).col(0);  // E[x] (r = 1)
    Matrix m0 = binless_lagged_moment(model, pts, pts, 0);
    Matrix mt = binless_lagged_moment(model, pts, pts, tau);
    Matrix c0 = m0 - mu * mu.transpose();
    Matrix ct = mt - mu * mu.transpose();
    return solve_tica(std::move(c0), std::move(ct), tau);
}

TicaResult tica_empirical(const TrajectoryDataset& data, long tau) {
    auto [c0, ct] = empirical_lagged_covariances(data, tau);
    return solve_tica(std::move(c0), std::move(ct), tau);
}

double scalar_error(double estimate, double oracle) { return std::abs(estimate - oracle); }

double sign_aligned_error(const Vector& estimate, const Vector& oracle) {
    if (estimate.size() != oracle.size())
        throw InvalidInputError("sign_aligned_error: dimension mismatch");
    return std::min((estimate - oracle).norm(), (estimate + oracle).norm());
}

double total_variation(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw InvalidInputError("total_variation: size mismatch");
    double sa = a.sum(), sb = b.sum();
    if (!(sa > 0.0) || !(sb > 0.0))
        throw InvalidInputError("total_variation: histograms must have positive mass");
    return 0.5 * ((a / sa) - (b / sb)).cwiseAbs().sum();
}

Vector binless_histogram(const BinlessOom& model, const std::vector<double>& edges) {
    if (edges.size() < 2 || model.obs_dim() != 1)
        throw InvalidInputError("binless_histogram: needs 1-D observations and >= 1 bin");
    Vector weights = model.point_weights();
    Vector hist = Vector::Zero(static_cast<Eigen::Index>(edges.size()) - 1);
    for (long n = 0; n < model.size(); ++n) {
        double v = model.sample_points(n, 0);
        if (v < edges.front() || v > edges.back()) continue;  // mass outside is dropped
        auto it = std::upper_bound(edges.begin(), edges.end(), v);
        long b = std::min<long>(static_cast<long>(it - edges.begin()) - 1,
                                static_cast<long>(edges.size()) - 2);
        hist(b) += weights(n);
    }
    return hist;
}

std::string estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::PlainOom: return "plain-oom";
        case EstimatorKind::EqOom: return "eq-oom";
        case EstimatorKind::Binless: return "binless-oom";
        case EstimatorKind::Empirical: return "empirical";
        case EstimatorKind::CoarseGrained: return "coarse-grained";
    }
    return "unknown";
}

EstimatorKind estimator_from_name(const std::string& name) {
    if (name == "plain-oom") return EstimatorKind::PlainOom;
    if (name == "eq-oom") return EstimatorKind::EqOom;
    if (name == "binless-oom" || name == "binless") return EstimatorKind::Binless;
    if (name == "empirical") return EstimatorKind::Empirical;
    if (name == "coarse-grained" || name == "coarse") return EstimatorKind::CoarseGrained;
    throw InvalidInputError("unknown estimator: " + name);
}

std::vector<SummaryRow> ResultsTable::summarize() const {
    std::vector<SummaryRow> rows;
    for (const CellResult& c : cells) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& r) {
            return r.T == c.T && r.estimator == c.estimator;
        });
        if (it == rows.end()) {
            rows.push_back(SummaryRow{c.T, c.estimator, 0.0, 0.0, 0});
            it = rows.end() - 1;
        }
        if (c.ok) {
            it->mean_error += c.error;
            it->std_error += c.error * c.error;
            ++it->cells;
        }
    }
    for (SummaryRow& r : rows) {
        if (r.cells > 0) {
            r.mean_error /= r.cells;
            double var = r.std_error / r.cells - r.mean_error * r.mean_error;
            r.std_error = std::sqrt(std::max(0.0, var));
        }
    }
    return rows;
}

Wells1DOracle make_wells_oracle(double beta, int grid_points) {
    MultiWellPotential1D potential = MultiWellPotential1D::benchmark();
    Wells1DOracle oracle;
    oracle.barrier = find_barrier(potential, 0.0, 2.0);
    oracle.reference = boltzmann_reference_1d(potential, beta, 0.0, 2.0, grid_points);
    double below = oracle.reference.prob_below(oracle.barrier.threshold);
    oracle.prob_diff = 2.0 * below - 1.0;
    return oracle;
}

namespace {

constexpr double kBeta1D = 0.3;
constexpr double kDt1D = 0.002;
constexpr double kBeta2D = 2.0;
constexpr double kDt2D = 0.01;

SimConfig cell_sim_config(const ExperimentPlan& plan, long T, std::uint64_t cell_seed) {
    SimConfig cfg;
    cfg.n_steps = T;
    cfg.n_traj = static_cast<int>(std::max<long>(1, plan.budget / T));
    cfg.seed = cell_seed;
    if (plan.benchmark == BenchmarkId::Wells1D) {
        cfg.beta = kBeta1D;
        cfg.dt = kDt1D;
        cfg.init_lo = Vector::Constant(1, 0.0);
        cfg.init_hi = Vector::Constant(1, 0.2);
    } else {
        cfg.beta = kBeta2D;
        cfg.dt = kDt2D;
        cfg.init_lo = Vector::Constant(2, -2.0);
        cfg.init_hi = Vector::Constant(2, 0.0);
    }
    return cfg;
}

TrajectoryDataset threshold_view(const TrajectoryDataset& data, double threshold) {
    TrajectoryDataset out;
    out.kind = ObsKind::Discrete;
    out.dim = 1;
    out.alphabet_size = 2;
    out.meta = data.meta;
    out.aborted = data.aborted;
    for (const Matrix& traj : data.continuous) {
        std::vector<int> sym(static_cast<std::size_t>(traj.rows()));
        for (long t = 0; t < traj.rows(); ++t)
            sym[static_cast<std::size_t>(t)] = traj(t, 0) < threshold ? 1 : 0;
        out.discrete.push_back(std::move(sym));
    }
    return out;
}

/// Uniform core bins on [0, 2] plus outer bins stretched to cover strays.
BinSpec coarse_bins_for(const TrajectoryDataset& data, int core_cells) {
    double lo = 0.0, hi = 2.0;
    for (const Matrix& traj : data.continuous) {
        lo = std::min(lo, traj.minCoeff());
        hi = std::max(hi, traj.maxCoeff());
    }
    std::vector<double> edges;
    if (lo < 0.0) edges.push_back(std::nextafter(lo, -1e300));
    for (int i = 0; i <= core_cells; ++i)
        edges.push_back(2.0 * static_cast<double>(i) / core_cells);
    if (hi > 2.0) edges.push_back(std::nextafter(hi, 1e300));
    return BinSpec({std::move(edges)});
}

double wells_estimate(EstimatorKind kind, const TrajectoryDataset& data,
                      const ExperimentPlan& plan, const Wells1DOracle& oracle,
                      std::uint64_t cell_seed) {
    const double thr = oracle.barrier.threshold;
    auto g_sign = [thr](const Eigen::Ref<const Vector>& x) { return x(0) < thr ? 1.0 : -1.0; };
    switch (kind) {
        case EstimatorKind::Empirical:
            return empirical_estimator(data, g_sign);
        case EstimatorKind::Binless: {
            LearnerConfig cfg = plan.learner;
            cfg.seed = substream_seed(cell_seed, 0xb1);
            BinlessFit fit = fit_binless(data, cfg);
            return binless_expectation_r1(fit.model,
                                          [&](const Eigen::Ref<const Vector>& x) { return g_sign(x); });
        }
        case EstimatorKind::PlainOom:
        case EstimatorKind::EqOom: {
            TrajectoryDataset symbols = threshold_view(data, thr);
            Oom model = fit_discrete(symbols, plan.discrete_learner,
                                     kind == EstimatorKind::EqOom ? OomFlavor::Equilibrium
                                                                  : OomFlavor::Plain);
            // symbol 1 = well I
            auto g = [](std::span<const int> z) { return z[0] == 1 ? 1.0 : -1.0; };
            return equilibrium_expectation_discrete(model, g, 1);
        }
        case EstimatorKind::CoarseGrained: {
            BinSpec bins = coarse_bins_for(data, plan.coarse_bins);
            CoarseGrainedOom coarse = fit_coarse_grained(data, bins, plan.discrete_learner);
            // bin centers below/above the barrier
            const auto& edges = bins.boundaries()[0];
            auto g = [&](std::span<const int> z) {
                double center = 0.5 * (edges[static_cast<std::size_t>(z[0])] +
                                       edges[static_cast<std::size_t>(z[0]) + 1]);
                return center < thr ? 1.0 : -1.0;
            };
            return equilibrium_expectation_discrete(coarse.oom, g, 1);
        }
    }
    throw InvalidInputError("wells_estimate: unsupported estimator");
}

} // namespace

TicaResult make_tica_oracle(const GaussianMixturePotential& potential, const ExperimentPlan& plan) {
    SimConfig cfg;
    cfg.beta = kBeta2D;
    cfg.dt = kDt2D;
    cfg.n_steps = plan.oracle_steps;
    cfg.n_traj = 1;
    cfg.seed = substream_seed(plan.seed, 0x04ac1e);
    cfg.burn_in = 100000;
    // burn-in from a mixture draw stands in for an equilibrium start
    Rng rng(substream_seed(cfg.seed, 1));
    Vector x0 = potential.sample_mixture(rng);
    cfg.init_lo = x0;
    cfg.init_hi = x0;
    TrajectoryDataset run = simulate_trajectories(potential, cfg, ObservationMap{}, plan.threads);
    if (run.num_trajectories() == 0)
        throw NumericalError("make_tica_oracle: reference run aborted");

    LearnerConfig cfg_l = plan.learner;
    cfg_l.seed = substream_seed(plan.seed, 0x04ac1f);
    cfg_l.window_stride = std::max<long>(1, plan.oracle_steps / 500000);
    BinlessFit fit = fit_binless(run, cfg_l);
    return tica_from_binless(fit.model, plan.tica_lag);
}

ResultsTable run_experiment(const ExperimentPlan& plan) {
    if (plan.repeats < 1 || plan.t_grid.empty() || plan.estimators.empty())
        throw InvalidInputError("run_experiment: empty plan");
    for (long T : plan.t_grid)
        if (T >= plan.budget)
            throw InvalidInputError("run_experiment: budget must exceed every trajectory length");

    // oracle (shared across cells)
    Wells1DOracle wells;
    TicaResult tica_oracle;
    MultiWellPotential1D pot1 = MultiWellPotential1D::benchmark();
    GaussianMixturePotential pot2 = GaussianMixturePotential::benchmark2d();
    if (plan.benchmark == BenchmarkId::Wells1D) {
        wells = make_wells_oracle(kBeta1D);
    } else {
        tica_oracle = make_tica_oracle(pot2, plan);
    }

    const std::size_t n_t = plan.t_grid.size();
    const std::size_t n_rep = static_cast<std::size_t>(plan.repeats);
    const std::size_t n_est = plan.estimators.size();
    ResultsTable table;
    table.cells.assign(n_t * n_rep * n_est, CellResult{});

    parallel_for(n_t * n_rep, plan.threads, [&](std::size_t flat) {
        const std::size_t ti = flat / n_rep;
        const std::size_t rep = flat % n_rep;
        const long T = plan.t_grid[ti];
        const std::uint64_t cell_seed = substream_seed(plan.seed, flat);
        SimConfig sim = cell_sim_config(plan, T, cell_seed);
        TrajectoryDataset data =
            simulate_trajectories(plan.benchmark == BenchmarkId::Wells1D
                                      ? static_cast<const Potential&>(pot1)
                                      : static_cast<const Potential&>(pot2),
                                  sim, ObservationMap{}, 1);
        for (std::size_t ei = 0; ei < n_est; ++ei) {
            CellResult& cell = table.cells[flat * n_est + ei];
            cell.T = T;
            cell.estimator = plan.estimators[ei];
            cell.repeat = static_cast<int>(rep);
            try {
                if (plan.benchmark == BenchmarkId::Wells1D) {
                    double est =
                        wells_estimate(cell.estimator, data, plan, wells, cell_seed);
                    cell.value = est;
                    cell.error = scalar_error(est, wells.prob_diff);
                } else {
                    TicaResult r;
                    if (cell.estimator == EstimatorKind::Binless) {
                        LearnerConfig cfg = plan.learner;
                        cfg.seed = substream_seed(cell_seed, 0xb1);
                        r = tica_from_binless(fit_binless(data, cfg).model, plan.tica_lag);
                    } else if (cell.estimator == EstimatorKind::Empirical) {
                        r = tica_empirical(data, plan.tica_lag);
                    } else {
                        throw InvalidInputError("2-D benchmark supports binless/empirical only");
                    }
                    cell.value = r.lambda;
                    cell.error = sign_aligned_error(r.w, tica_oracle.w);
                }
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.ok = false;
                cell.message = e.what();
            }
        }
    });
    return table;
}

} // namespace oomcraft
