#include "oomcraft/simulate.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace oomcraft {

MultiWellPotential1D::MultiWellPotential1D(Vector centers, Vector values, double regularizer)
    : centers_(std::move(centers)), values_(std::move(values)), regularizer_(regularizer) {
    if (centers_.size() != values_.size() || centers_.size() == 0)
        throw InvalidInputError("MultiWellPotential1D: centers/values mismatch");
    if (regularizer_ <= 0.0) throw InvalidInputError("MultiWellPotential1D: regularizer must be > 0");
}

MultiWellPotential1D MultiWellPotential1D::benchmark() {
    Vector c(5), u(5);
    c << -0.3, 0.5, 1.0, 1.5, 2.3;
    u << 21.0, 4.0, 8.0, -1.0, 20.0;
    return MultiWellPotential1D(std::move(c), std::move(u), 0.001);
}

double MultiWellPotential1D::value1d(double x) const {
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < centers_.size(); ++i) {
        double a = std::abs(x - centers_(i)) + regularizer_;
        double w = 1.0 / (a * a);
        num += w * values_(i);
        den += w;
    }
    return num / den;
}

double MultiWellPotential1D::derivative1d(double x) const {
    double num = 0.0, den = 0.0, dnum = 0.0, dden = 0.0;
    for (Eigen::Index i = 0; i < centers_.size(); ++i) {
        double diff = x - centers_(i);
        double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        double a = std::abs(diff) + regularizer_;
        double w = 1.0 / (a * a);
        double dw = -2.0 * s / (a * a * a);
        num += w * values_(i);
        den += w;
        dnum += dw * values_(i);
        dden += dw;
    }
    return (dnum * den - num * dden) / (den * den);
}

double MultiWellPotential1D::value(const Eigen::Ref<const Vector>& x) const {
    return value1d(x(0));
}

Vector MultiWellPotential1D::gradient(const Eigen::Ref<const Vector>& x) const {
    Vector g(1);
    g(0) = derivative1d(x(0));
    return g;
}

GaussianMixturePotential::GaussianMixturePotential(std::vector<double> weights,
                                                   std::vector<Vector> means,
                                                   std::vector<Matrix> covariances)
    : weights_(std::move(weights)), means_(std::move(means)) {
    if (weights_.empty() || weights_.size() != means_.size() ||
        weights_.size() != covariances.size())
        throw InvalidInputError("GaussianMixturePotential: component count mismatch");
    dim_ = static_cast<int>(means_[0].size());
    double wsum = 0.0;
    for (double w : weights_) {
        if (w <= 0.0) throw InvalidInputError("GaussianMixturePotential: weights must be positive");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw InvalidInputError("GaussianMixturePotential: weights must sum to 1");
    for (std::size_t i = 0; i < covariances.size(); ++i) {
        if (means_[i].size() != dim_ || covariances[i].rows() != dim_ ||
            covariances[i].cols() != dim_)
            throw InvalidInputError("GaussianMixturePotential: component dimension mismatch");
        Eigen::LLT<Matrix> llt(covariances[i]);
        if (llt.info() != Eigen::Success)
            throw InvalidInputError("GaussianMixturePotential: covariance not positive definite");
        Matrix lower = llt.matrixL();
        cov_chol_.push_back(lower);
        precisions_.push_back(llt.solve(Matrix::Identity(dim_, dim_)));
        double logdet = 2.0 * lower.diagonal().array().log().sum();
        log_norms_.push_back(std::log(weights_[i]) - 0.5 * dim_ * std::log(2.0 * M_PI) -
                             0.5 * logdet);
    }
}

GaussianMixturePotential GaussianMixturePotential::benchmark2d() {
    std::vector<double> p = {0.25, 0.25, 0.5};
    std::vector<Vector> mu(3, Vector(2));
    mu[0] << 0.0, -0.5;
    mu[1] << -1.0, 0.5;
    mu[2] << 1.0, -0.5;
    std::vector<Matrix> cov(3, Matrix::Identity(2, 2));
    return GaussianMixturePotential(std::move(p), std::move(mu), std::move(cov));
}

double GaussianMixturePotential::value(const Eigen::Ref<const Vector>& x) const {
    // log-sum-exp over component log densities
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(weights_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        Vector d = x - means_[i];
        logs[i] = log_norms_[i] - 0.5 * d.dot(precisions_[i] * d);
        best = std::max(best, logs[i]);
    }
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - best);
    return -(best + std::log(acc));
}

Vector GaussianMixturePotential::gradient(const Eigen::Ref<const Vector>& x) const {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(weights_.size());
    std::vector<Vector> dirs(weights_.size());
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        Vector d = x - means_[i];
        Vector pd = precisions_[i] * d;
        logs[i] = log_norms_[i] - 0.5 * d.dot(pd);
        dirs[i] = std::move(pd);
        best = std::max(best, logs[i]);
    }
    double acc = 0.0;
    Vector g = Vector::Zero(dim_);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        double r = std::exp(logs[i] - best);
        acc += r;
        g += r * dirs[i];
    }
    return g / acc;
}

Vector GaussianMixturePotential::sample_mixture(Rng& rng) const {
    std::vector<double> cum(weights_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        acc += weights_[i];
        cum[i] = acc;
    }
    int comp = rng.categorical(cum);
    Vector z(dim_);
    for (int j = 0; j < dim_; ++j) z(j) = rng.normal();
    return means_[static_cast<std::size_t>(comp)] + cov_chol_[static_cast<std::size_t>(comp)] * z;
}

TrajectoryDataset simulate_trajectories(const Potential& potential, const SimConfig& cfg,
                                        const ObservationMap& obs, int threads) {
    if (cfg.dt <= 0.0 || cfg.beta <= 0.0 || cfg.n_steps < 1 || cfg.n_traj < 1 || cfg.substeps < 1)
        throw InvalidInputError("simulate_trajectories: invalid configuration");
    const int d = potential.dim();
    if (cfg.init_lo.size() != d || cfg.init_hi.size() != d)
        throw InvalidInputError("simulate_trajectories: init box dimension != potential dimension");
    if (obs.kind == ObservationMap::Kind::WellIndicator && d != 1)
        throw InvalidInputError("simulate_trajectories: well indicator needs a 1-D system");

    const double h = cfg.dt / cfg.substeps;
    const double noise = std::sqrt(2.0 * h / cfg.beta);

    std::vector<Matrix> raw(static_cast<std::size_t>(cfg.n_traj));
    std::vector<char> ok(static_cast<std::size_t>(cfg.n_traj), 0);

    parallel_for(static_cast<std::size_t>(cfg.n_traj), threads, [&](std::size_t i) {
        Rng rng(substream_seed(cfg.seed, i));
        Vector x(d);
        for (int j = 0; j < d; ++j) x(j) = rng.uniform(cfg.init_lo(j), cfg.init_hi(j));
        Matrix traj(cfg.n_steps, d);
        bool alive = true;
        for (long b = 0; b < cfg.burn_in && alive; ++b) {
            x -= potential.gradient(x) * h;
            for (int j = 0; j < d; ++j) x(j) += noise * rng.normal();
            alive = x.allFinite();
        }
        for (long t = 0; t < cfg.n_steps && alive; ++t) {
            traj.row(t) = x.transpose();
            for (int s = 0; s < cfg.substeps; ++s) {
                x -= potential.gradient(x) * h;
                for (int j = 0; j < d; ++j) x(j) += noise * rng.normal();
            }
            alive = x.allFinite();
        }
        if (alive) {
            raw[i] = std::move(traj);
            ok[i] = 1;
        }
    });

    TrajectoryDataset out;
    out.meta["seed"] = std::to_string(cfg.seed);
    if (obs.kind == ObservationMap::Kind::Identity) {
        out.kind = ObsKind::Continuous;
        out.dim = d;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (ok[i])
                out.continuous.push_back(std::move(raw[i]));
            else
                ++out.aborted;
        }
    } else {
        out.kind = ObsKind::Discrete;
        out.dim = 1;
        out.alphabet_size = 2;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (!ok[i]) {
                ++out.aborted;
                continue;
            }
            std::vector<int> sym(static_cast<std::size_t>(raw[i].rows()));
            for (long t = 0; t < raw[i].rows(); ++t)
                sym[static_cast<std::size_t>(t)] = raw[i](t, 0) < obs.threshold ? 1 : 0;
            out.discrete.push_back(std::move(sym));
        }
    }
    if (out.aborted > 0) out.meta["aborted"] = std::to_string(out.aborted);
    return out;
}

BarrierLocation find_barrier(const MultiWellPotential1D& potential, double lo, double hi,
                             int grid_points) {
    if (!(hi > lo) || grid_points < 16) throw InvalidInputError("find_barrier: bad search range");
    const double step = (hi - lo) / (grid_points - 1);
    auto V = [&](double x) { return potential.value1d(x); };

    // local minima on the grid
    std::vector<std::pair<double, double>> minima;  // (V, x)
    double prev = V(lo), here = V(lo + step);
    for (int i = 1; i + 1 < grid_points; ++i) {
        double next = V(lo + (i + 1) * step);
        if (here < prev && here < next) minima.emplace_back(here, lo + i * step);
        prev = here;
        here = next;
    }
    if (minima.size() < 2)
        throw NumericalError("find_barrier: fewer than two local minima in range");
    std::sort(minima.begin(), minima.end());
    double a = minima[0].second, b = minima[1].second;
    if (a > b) std::swap(a, b);

    // grid argmax between the wells, then golden-section refinement
    double xbest = a, vbest = -std::numeric_limits<double>::infinity();
    for (double x = a; x <= b; x += step) {
        double v = V(x);
        if (v > vbest) {
            vbest = v;
            xbest = x;
        }
    }
    double left = std::max(a, xbest - 2 * step), right = std::min(b, xbest + 2 * step);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = right - phi * (right - left), c2 = left + phi * (right - left);
    double f1 = V(c1), f2 = V(c2);
    while (right - left > 1e-12) {
        if (f1 > f2) {
            right = c2;
            c2 = c1;
            f2 = f1;
            c1 = right - phi * (right - left);
            f1 = V(c1);
        } else {
            left = c1;
            c1 = c2;
            f1 = f2;
            c2 = left + phi * (right - left);
            f2 = V(c2);
        }
    }
    BarrierLocation res;
    res.threshold = 0.5 * (left + right);
    res.left_minimum = a;
    res.right_minimum = b;
    return res;
}

} // namespace oomcraft
