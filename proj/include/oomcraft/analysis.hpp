#pragma once

#include "oomcraft/model.hpp"
#include "oomcraft/simulate.hpp"
#include "oomcraft/spectral.hpp"

namespace oomcraft {

/// Normalized Boltzmann density exp(-beta V) on a 1-D grid (trapezoid
/// rule). `refined_ok` records whether doubling the grid moved the
/// normalization by less than 1e-6.
struct Boltzmann1D {
    Vector x;    // grid nodes, ascending
    Vector pdf;  // normalized density at the nodes
    bool refined_ok = true;

    double prob_below(double threshold) const;
    double mean() const;
    double expectation(const std::function<double(double)>& g) const;
    /// Probability mass per cell of the given edges (edges within the grid).
    Vector bin_masses(const std::vector<double>& edges) const;
};

Boltzmann1D boltzmann_reference_1d(const Potential& potential, double beta, double lo, double hi,
                                   int points);

/// Same on a 2-D tensor grid.
struct Boltzmann2D {
    Vector x, y;
    Matrix pdf;  // rows follow x, cols follow y
    bool refined_ok = true;

    Vector mean() const;
    Matrix covariance() const;
};

Boltzmann2D boltzmann_reference_2d(const Potential& potential, double beta, const Vector& lo,
                                   const Vector& hi, int points_per_dim);

/// Plain average of g over every observation of every trajectory; the
/// baseline estimator that inherits the full nonequilibrium bias.
double empirical_estimator(const TrajectoryDataset& data,
                           const std::function<double(const Eigen::Ref<const Vector>&)>& g);

/// Empirical lagged covariance pair (c0, c_tau) with the same conventions
/// as the model-based route; used as the baseline TICA estimator.
std::pair<Matrix, Matrix> empirical_lagged_covariances(const TrajectoryDataset& data, long tau);

struct TicaResult {
    Matrix c0;
    Matrix c_tau;        // symmetrized
    Vector w;            // leading component, |w| = 1, first nonzero entry > 0
    double lambda = 0.0;
    long lag = 0;
};

/// Leading solution of c_tau w = lambda c0 w via Cholesky whitening of c0.
/// Throws NumericalError if c0 is not positive definite (no silent ridge).
TicaResult solve_tica(Matrix c0, Matrix c_tau, long tau);

/// Equilibrium TICA moments from a binless model:
///   c0    = E[x x^T] - E[x] E[x]^T          (lag-0 weighted moments)
///   c_tau = E[x_t x_{t+tau}^T] - E[x] E[x]^T, symmetrized.
TicaResult tica_from_binless(const BinlessOom& model, long tau);

TicaResult tica_empirical(const TrajectoryDataset& data, long tau);

/// Absolute scalar error.
double scalar_error(double estimate, double oracle);
/// Euclidean distance after sign alignment (eigenvectors are defined up to
/// sign).
double sign_aligned_error(const Vector& estimate, const Vector& oracle);
/// Total variation distance between two nonnegative histograms after
/// normalization.
double total_variation(const Vector& a, const Vector& b);

/// Per-sample stationary weights of a binless model aggregated into 1-D
/// bins; negative weights are kept so the total stays consistent.
Vector binless_histogram(const BinlessOom& model, const std::vector<double>& edges);

enum class EstimatorKind { PlainOom, EqOom, Binless, Empirical, CoarseGrained };

std::string estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);

enum class BenchmarkId { Wells1D, Tica2D };

struct ExperimentPlan {
    BenchmarkId benchmark = BenchmarkId::Wells1D;
    std::vector<long> t_grid = {50, 100, 200, 300, 500, 1000};
    long budget = 100000;  // total samples per cell: I = budget / T
    int repeats = 30;
    std::vector<EstimatorKind> estimators;
    std::uint64_t seed = 0;
    int threads = 0;
    LearnerConfig learner;          // binless settings
    LearnerConfig discrete_learner; // plain/eq/coarse settings
    int coarse_bins = 100;
    long tica_lag = 100;
    long oracle_steps = 10000000;   // reference-run length (2-D benchmark)
};

struct CellResult {
    long T = 0;
    EstimatorKind estimator = EstimatorKind::Empirical;
    int repeat = 0;
    double value = 0.0;  // scalar estimate (TICA: leading eigenvalue)
    double error = 0.0;  // vs oracle
    bool ok = false;
    std::string message;  // failure note when !ok
};

struct SummaryRow {
    long T = 0;
    EstimatorKind estimator = EstimatorKind::Empirical;
    double mean_error = 0.0;
    double std_error = 0.0;
    int cells = 0;  // successful repeats
};

struct ResultsTable {
    std::vector<CellResult> cells;
    std::vector<SummaryRow> summarize() const;
};

/// 1-D benchmark oracle bundle: reference box, barrier, target scalar.
struct Wells1DOracle {
    BarrierLocation barrier;
    Boltzmann1D reference;
    double prob_diff = 0.0;  // Prob_I - Prob_II
};

Wells1DOracle make_wells_oracle(double beta, int grid_points = 20001);

/// TICA oracle: binless estimate from one long equilibrium-start run.
TicaResult make_tica_oracle(const GaussianMixturePotential& potential, const ExperimentPlan& plan);

/// Runs the full (T, estimator, repeat) grid: simulate, fit, score against
/// the oracle. Estimator failures are recorded as failed cells, not thrown.
ResultsTable run_experiment(const ExperimentPlan& plan);

} // namespace oomcraft
