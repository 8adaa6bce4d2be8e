#pragma once

#include <memory>

#include "oomcraft/dataset.hpp"

namespace oomcraft {

/// Energy landscape driving the overdamped dynamics
///   dx = -grad V(x) dt + sqrt(2/beta) dW.
class Potential {
public:
    virtual ~Potential() = default;
    virtual int dim() const = 0;
    virtual double value(const Eigen::Ref<const Vector>& x) const = 0;
    virtual Vector gradient(const Eigen::Ref<const Vector>& x) const = 0;
};

/// 1-D landscape built from inverse-square distance weights:
///   V(x) = sum_i w_i(x) u_i / sum_i w_i(x),  w_i = (|x - c_i| + reg)^-2.
/// V is a convex combination of the u_i, so min u <= V <= max u everywhere,
/// and the regularizer keeps it finite at the centers. At x == c_i the
/// derivative takes the two-sided mean (sign(0) = 0).
class MultiWellPotential1D final : public Potential {
public:
    MultiWellPotential1D(Vector centers, Vector values, double regularizer = 0.001);

    /// The two-well benchmark landscape used by the 1-D experiments.
    static MultiWellPotential1D benchmark();

    int dim() const override { return 1; }
    double value(const Eigen::Ref<const Vector>& x) const override;
    Vector gradient(const Eigen::Ref<const Vector>& x) const override;

    double value1d(double x) const;
    double derivative1d(double x) const;

private:
    Vector centers_;
    Vector values_;
    double regularizer_;
};

/// Negative log of a Gaussian mixture, V(x) = -log sum_i p_i N(x | mu_i, S_i).
class GaussianMixturePotential final : public Potential {
public:
    GaussianMixturePotential(std::vector<double> weights, std::vector<Vector> means,
                             std::vector<Matrix> covariances);

    /// The three-component 2-D benchmark landscape (identity covariances).
    static GaussianMixturePotential benchmark2d();

    int dim() const override { return dim_; }
    double value(const Eigen::Ref<const Vector>& x) const override;
    Vector gradient(const Eigen::Ref<const Vector>& x) const override;

    /// Draws a point from the mixture itself (not the Boltzmann density);
    /// used to seed equilibrated reference runs.
    Vector sample_mixture(Rng& rng) const;

private:
    int dim_;
    std::vector<double> weights_;
    std::vector<Vector> means_;
    std::vector<Matrix> precisions_;
    std::vector<Matrix> cov_chol_;
    std::vector<double> log_norms_;  // log(p_i) - d/2 log(2 pi) - 0.5 log det S_i
};

struct SimConfig {
    double beta = 1.0;
    double dt = 0.01;      // recording interval
    long n_steps = 1000;   // samples per trajectory
    int n_traj = 1;
    int substeps = 1;      // integrator steps per recorded sample
    Vector init_lo;        // uniform box for x_0
    Vector init_hi;
    std::uint64_t seed = 0;
    long burn_in = 0;      // integrator steps discarded before recording
};

struct ObservationMap {
    enum class Kind { Identity, WellIndicator };
    Kind kind = Kind::Identity;
    double threshold = 0.0;  // WellIndicator (1-D): symbol 1 below, 0 otherwise
};

/// Euler-Maruyama integration of cfg.n_traj independent trajectories.
/// Each trajectory draws from its own RNG substream of (seed, index), so
/// output is bit-identical for any thread count. Trajectories that reach a
/// non-finite state are dropped and counted in the dataset's abort field.
TrajectoryDataset simulate_trajectories(const Potential& potential, const SimConfig& cfg,
                                        const ObservationMap& obs, int threads = 0);

struct BarrierLocation {
    double threshold;  // argmax of V between the two deepest minima
    double left_minimum;
    double right_minimum;
};

/// Grid search over [lo, hi] for the two deepest local minima, then
/// golden-section refinement of the barrier top between them.
BarrierLocation find_barrier(const MultiWellPotential1D& potential, double lo, double hi,
                             int grid_points = 4001);

} // namespace oomcraft
