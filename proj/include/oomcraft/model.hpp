#pragma once

#include <functional>
#include <span>

#include "oomcraft/core.hpp"
#include "oomcraft/dataset.hpp"

namespace oomcraft {

enum class OomFlavor { Plain, Equilibrium };

/// Observable operator model (omega, {Xi(x)}, sigma) over a K-symbol
/// alphabet. Sequence probabilities are omega * Xi(x_1) ... Xi(x_t) * sigma;
/// learned models may assign slightly negative values.
struct Oom {
    RowVector omega;         // 1 x m
    std::vector<Matrix> xi;  // K matrices, m x m
    Vector sigma;            // m x 1
    OomFlavor flavor = OomFlavor::Plain;

    int dimension() const { return static_cast<int>(sigma.size()); }
    int alphabet_size() const { return static_cast<int>(xi.size()); }
};

/// Checks shape and finiteness invariants; equilibrium flavor additionally
/// requires omega * sigma == 1 to 1e-10.
void validate(const Oom& model);

/// Learned models may assign small negative values; clamp_negative floors
/// the result at zero (off by default).
double sequence_probability(const Oom& model, std::span<const int> seq,
                            bool clamp_negative = false);

/// Sum of all observable operators, Xi applied to the whole alphabet.
Matrix total_operator(const Oom& model);

/// Exact expectation of g over all K^r length-r sequences under the model's
/// state vector. Guarded at K^r <= 2^20.
double equilibrium_expectation_discrete(const Oom& model,
                                        const std::function<double(std::span<const int>)>& g,
                                        int horizon);

/// Equilibrium OOM over the N observed sample points: operator at point n is
/// the rank-one matrix left_factors.row(n)^T * right_factors.row(n) (the
/// 1/N normalization is folded into the factors as 1/sqrt(N) each).
struct BinlessOom {
    RowVector omega_eq;    // 1 x m
    Vector sigma;          // m
    Matrix sample_points;  // N x d
    Matrix left_factors;   // N x m
    Matrix right_factors;  // N x m

    int dimension() const { return static_cast<int>(sigma.size()); }
    long size() const { return sample_points.rows(); }
    int obs_dim() const { return static_cast<int>(sample_points.cols()); }

    Matrix total_operator() const { return left_factors.transpose() * right_factors; }

    /// Stationary weight of each sample point, omega_eq * W_n * sigma.
    /// Sums to omega_eq * Xi(O) * sigma (approximately 1); individual
    /// weights may be negative.
    Vector point_weights() const {
        return (left_factors * omega_eq.transpose()).cwiseProduct(right_factors * sigma);
    }
};

void validate(const BinlessOom& model);

/// E[g(x_1)] under the model: sum_n g(z_n) * omega_eq W_n sigma, O(N m).
double binless_expectation_r1(const BinlessOom& model,
                              const std::function<double(const Eigen::Ref<const Vector>&)>& g);

/// Lagged second-moment matrix E[f(x_t) g(x_{t+tau})^T] from per-point value
/// matrices (row n = f(z_n) resp. g(z_n)). tau = 0 is the weighted sample
/// average; tau >= 1 routes through Xi(O)^{tau-1}.
Matrix binless_lagged_moment(const BinlessOom& model, const Eigen::Ref<const Matrix>& f_values,
                             const Eigen::Ref<const Matrix>& g_values, long tau);

/// Convenience wrapper evaluating f and g at the sample points.
Matrix binless_lagged_moment_apply(const BinlessOom& model,
                                   const std::function<Vector(const Eigen::Ref<const Vector>&)>& f,
                                   const std::function<Vector(const Eigen::Ref<const Vector>&)>& g,
                                   long tau);

/// Axis-aligned box partition of R^d into a tensor grid of cells.
/// Boundaries per dimension are strictly increasing; cell volumes are
/// products of side lengths.
class BinSpec {
public:
    explicit BinSpec(std::vector<std::vector<double>> boundaries);

    /// Uniform 1-D grid helper.
    static BinSpec uniform_1d(double lo, double hi, int cells);

    int dim() const { return static_cast<int>(boundaries_.size()); }
    int num_cells() const { return num_cells_; }

    /// Flat cell index of x; throws InvalidInputError when outside the box.
    int cell_index(const Eigen::Ref<const Vector>& x) const;

    double cell_volume(int flat_index) const;
    const std::vector<std::vector<double>>& boundaries() const { return boundaries_; }

private:
    std::vector<std::vector<double>> boundaries_;
    int num_cells_ = 0;
};

/// Discrete equilibrium OOM over bin indices plus the bin geometry needed
/// for the piecewise-constant density form Xi(B(x)) / vol(B(x)).
struct CoarseGrainedOom {
    Oom oom;  // alphabet = bins
    BinSpec bins;

    Matrix density_operator(const Eigen::Ref<const Vector>& x) const {
        int j = bins.cell_index(x);
        return oom.xi[static_cast<std::size_t>(j)] / bins.cell_volume(j);
    }
};

/// Maps every continuous observation to its bin index. Throws on the first
/// observation outside the box, naming trajectory and time step.
TrajectoryDataset discretize(const TrajectoryDataset& data, const BinSpec& bins);

} // namespace oomcraft
