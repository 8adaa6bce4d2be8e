#include "oomcraft/model.hpp"

#include <cmath>
#include <sstream>

#include "oomcraft/numerics.hpp"

namespace oomcraft {

void validate(const Oom& model) {
    const int m = model.dimension();
    if (m < 1) throw InvalidInputError("Oom: dimension must be >= 1");
    if (model.omega.size() != m) throw InvalidInputError("Oom: omega length != m");
    if (model.xi.empty()) throw InvalidInputError("Oom: empty alphabet");
    ensure_finite(model.omega, "Oom omega");
    ensure_finite(model.sigma, "Oom sigma");
    for (const auto& x : model.xi) {
        if (x.rows() != m || x.cols() != m) throw InvalidInputError("Oom: operator shape != m x m");
        ensure_finite(x, "Oom operator");
    }
    if (model.flavor == OomFlavor::Equilibrium) {
        double ws = model.omega * model.sigma;
        if (std::abs(ws - 1.0) > 1e-10)
            throw InvalidInputError("Oom: equilibrium flavor requires omega*sigma == 1");
    }
}

double sequence_probability(const Oom& model, std::span<const int> seq, bool clamp_negative) {
    RowVector state = model.omega;
    for (int z : seq) {
        if (z < 0 || z >= model.alphabet_size())
            throw InvalidInputError("sequence_probability: symbol outside alphabet");
        state = state * model.xi[static_cast<std::size_t>(z)];
    }
    double p = state * model.sigma;
    return clamp_negative ? std::max(0.0, p) : p;
}

Matrix total_operator(const Oom& model) {
    Matrix total = Matrix::Zero(model.dimension(), model.dimension());
    for (const auto& x : model.xi) total += x;
    return total;
}

double equilibrium_expectation_discrete(const Oom& model,
                                        const std::function<double(std::span<const int>)>& g,
                                        int horizon) {
    if (horizon < 1) throw InvalidInputError("equilibrium expectation: horizon must be >= 1");
    const int k = model.alphabet_size();
    if (horizon * std::log2(static_cast<double>(k)) > 20.0)
        throw InvalidInputError("equilibrium expectation: K^r exceeds capacity (2^20 sequences)");

    // depth-first over sequences, carrying omega * Xi(z_1) ... Xi(z_depth)
    std::vector<int> seq(static_cast<std::size_t>(horizon));
    std::vector<RowVector> states(static_cast<std::size_t>(horizon) + 1);
    states[0] = model.omega;
    KahanScalar total;
    std::function<void(int)> walk = [&](int depth) {
        if (depth == horizon) {
            double p = states[static_cast<std::size_t>(depth)] * model.sigma;
            total.add(g(std::span<const int>(seq)) * p);
            return;
        }
        for (int z = 0; z < k; ++z) {
            seq[static_cast<std::size_t>(depth)] = z;
            states[static_cast<std::size_t>(depth) + 1] =
                states[static_cast<std::size_t>(depth)] * model.xi[static_cast<std::size_t>(z)];
            walk(depth + 1);
        }
    };
    walk(0);
    return total.value();
}

void validate(const BinlessOom& model) {
    const int m = model.dimension();
    const long n = model.size();
    if (m < 1 || n < 1) throw InvalidInputError("BinlessOom: empty model");
    if (model.omega_eq.size() != m || model.left_factors.cols() != m ||
        model.right_factors.cols() != m || model.left_factors.rows() != n ||
        model.right_factors.rows() != n)
        throw InvalidInputError("BinlessOom: factor shapes inconsistent");
    ensure_finite(model.omega_eq, "BinlessOom omega");
    ensure_finite(model.sigma, "BinlessOom sigma");
    ensure_finite(model.left_factors, "BinlessOom left factors");
    ensure_finite(model.right_factors, "BinlessOom right factors");
    double ws = model.omega_eq * model.sigma;
    if (std::abs(ws - 1.0) > 1e-10)
        throw InvalidInputError("BinlessOom: omega_eq*sigma must equal 1");
}

double binless_expectation_r1(const BinlessOom& model,
                              const std::function<double(const Eigen::Ref<const Vector>&)>& g) {
    Vector w = model.point_weights();
    KahanScalar total;
    for (long n = 0; n < model.size(); ++n) {
        double gv = g(model.sample_points.row(n).transpose());
        if (!std::isfinite(gv))
            throw InvalidInputError("binless_expectation_r1: g not finite at a sample point");
        total.add(gv * w(n));
    }
    return total.value();
}

Matrix binless_lagged_moment(const BinlessOom& model, const Eigen::Ref<const Matrix>& f_values,
                             const Eigen::Ref<const Matrix>& g_values, long tau) {
    if (tau < 0) throw InvalidInputError("binless_lagged_moment: tau must be >= 0");
    if (f_values.rows() != model.size() || g_values.rows() != model.size())
        throw InvalidInputError("binless_lagged_moment: value rows != sample count");
    ensure_finite(f_values, "lagged moment f values");
    ensure_finite(g_values, "lagged moment g values");

    Vector a = model.left_factors * model.omega_eq.transpose();  // omega . l_n
    Vector b = model.right_factors * model.sigma;                // r_n . sigma
    if (tau == 0) {
        Vector w = a.cwiseProduct(b);
        return f_values.transpose() * w.asDiagonal() * g_values;
    }
    // sum_n f_n a_n r_n^T  *  Xi(O)^{tau-1}  *  sum_n l_n b_n g_n^T
    Matrix front = f_values.transpose() * a.asDiagonal() * model.right_factors;
    Matrix back = model.left_factors.transpose() * b.asDiagonal() * g_values;
    if (tau == 1) return front * back;
    return front * matrix_power(model.total_operator(), tau - 1) * back;
}

Matrix binless_lagged_moment_apply(const BinlessOom& model,
                                   const std::function<Vector(const Eigen::Ref<const Vector>&)>& f,
                                   const std::function<Vector(const Eigen::Ref<const Vector>&)>& g,
                                   long tau) {
    const long n = model.size();
    Vector f0 = f(model.sample_points.row(0).transpose());
    Vector g0 = g(model.sample_points.row(0).transpose());
    Matrix fv(n, f0.size()), gv(n, g0.size());
    fv.row(0) = f0.transpose();
    gv.row(0) = g0.transpose();
    for (long i = 1; i < n; ++i) {
        fv.row(i) = f(model.sample_points.row(i).transpose()).transpose();
        gv.row(i) = g(model.sample_points.row(i).transpose()).transpose();
    }
    return binless_lagged_moment(model, fv, gv, tau);
}

BinSpec::BinSpec(std::vector<std::vector<double>> boundaries) : boundaries_(std::move(boundaries)) {
    if (boundaries_.empty()) throw InvalidInputError("BinSpec: no dimensions");
    num_cells_ = 1;
    for (const auto& b : boundaries_) {
        if (b.size() < 2) throw InvalidInputError("BinSpec: need at least one cell per dimension");
        for (std::size_t i = 1; i < b.size(); ++i)
            if (!(b[i] > b[i - 1]))
                throw InvalidInputError("BinSpec: boundaries must be strictly increasing");
        num_cells_ *= static_cast<int>(b.size()) - 1;
    }
}

BinSpec BinSpec::uniform_1d(double lo, double hi, int cells) {
    if (cells < 1 || !(hi > lo)) throw InvalidInputError("BinSpec: bad uniform grid");
    std::vector<double> b(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i)
        b[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / cells;
    return BinSpec({std::move(b)});
}

int BinSpec::cell_index(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != dim()) throw InvalidInputError("BinSpec: point dimension mismatch");
    int flat = 0;
    for (int a = 0; a < dim(); ++a) {
        const auto& b = boundaries_[static_cast<std::size_t>(a)];
        double v = x(a);
        if (!(v >= b.front() && v <= b.back())) {
            std::ostringstream msg;
            msg << "observation outside bin box: coordinate " << a << " value " << v << " not in ["
                << b.front() << ", " << b.back() << "]";
            throw InvalidInputError(msg.str());
        }
        auto it = std::upper_bound(b.begin(), b.end(), v);
        int cell = static_cast<int>(it - b.begin()) - 1;
        cell = std::min(cell, static_cast<int>(b.size()) - 2);  // right edge joins last cell
        flat = flat * (static_cast<int>(b.size()) - 1) + cell;
    }
    return flat;
}

double BinSpec::cell_volume(int flat_index) const {
    if (flat_index < 0 || flat_index >= num_cells_)
        throw InvalidInputError("BinSpec: cell index out of range");
    double vol = 1.0;
    for (int a = dim() - 1; a >= 0; --a) {
        const auto& b = boundaries_[static_cast<std::size_t>(a)];
        int cells = static_cast<int>(b.size()) - 1;
        int c = flat_index % cells;
        flat_index /= cells;
        vol *= b[static_cast<std::size_t>(c) + 1] - b[static_cast<std::size_t>(c)];
    }
    return vol;
}

TrajectoryDataset discretize(const TrajectoryDataset& data, const BinSpec& bins) {
    if (data.kind != ObsKind::Continuous)
        throw InvalidInputError("discretize: dataset is not continuous");
    if (data.dim != bins.dim()) throw InvalidInputError("discretize: bin dimension mismatch");
    TrajectoryDataset out;
    out.kind = ObsKind::Discrete;
    out.dim = 1;
    out.alphabet_size = bins.num_cells();
    out.meta = data.meta;
    out.aborted = data.aborted;
    out.discrete.reserve(data.continuous.size());
    for (std::size_t i = 0; i < data.continuous.size(); ++i) {
        const Matrix& x = data.continuous[i];
        std::vector<int> traj(static_cast<std::size_t>(x.rows()));
        for (long t = 0; t < x.rows(); ++t) {
            try {
                traj[static_cast<std::size_t>(t)] = bins.cell_index(x.row(t).transpose());
            } catch (const InvalidInputError& e) {
                std::ostringstream msg;
                msg << e.what() << " (trajectory " << i << ", step " << t << ")";
                throw InvalidInputError(msg.str());
            }
        }
        out.discrete.push_back(std::move(traj));
    }
    return out;
}

} // namespace oomcraft
