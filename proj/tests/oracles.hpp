#pragma once

// Independent reference implementations used only by tests. Everything here
// deliberately avoids the library's production code paths: the SVD is a
// hand-rolled one-sided Jacobi, the QP solver is projected gradient descent,
// and chain probabilities come from direct linear algebra on the transition
// matrix.

#include "oomcraft/core.hpp"
#include "oomcraft/dataset.hpp"
#include "oomcraft/model.hpp"

namespace oracles {

using oomcraft::Matrix;
using oomcraft::RowVector;
using oomcraft::Vector;

struct ReferenceSvd {
    Matrix u;      // columns for nonzero singular values, zero columns otherwise
    Vector sigma;  // all min(rows, cols), nonincreasing
    Matrix v;
};

/// One-sided Jacobi SVD (slow, independent of Eigen).
ReferenceSvd jacobi_svd(const Matrix& a, int max_sweeps = 60, double tol = 1e-14);

/// Frobenius norm of the rank-m truncation tail, sqrt(sum_{i>m} sigma_i^2).
double truncation_tail(const ReferenceSvd& svd, int m);

struct QpSolution {
    RowVector w;
    double objective;
    int iterations;
};

/// Minimizes |w (XiO - I)|^2 subject to w sigma = 1 by projected gradient
/// with exact line search.
QpSolution projected_gradient_qp(const Matrix& xi_total, const Vector& sigma,
                                 int max_iters = 200000, double tol = 1e-16);

/// Discrete Markov chain with explicit transition matrix (rows sum to 1).
struct MarkovChain {
    Matrix p;

    explicit MarkovChain(Matrix transition);

    /// Stationary distribution via the linear system pi (P - I) = 0.
    Vector stationary() const;

    /// pi(z1) * prod P(z_k, z_{k+1}).
    double exact_probability(std::span<const int> seq) const;

    std::vector<int> simulate(int start, long steps, oomcraft::Rng& rng) const;
    int sample_stationary(oomcraft::Rng& rng) const;

    /// Exact OOM of the chain: omega = pi, Xi(x)_{ij} = 1{i==x} P(i, j),
    /// sigma = ones.
    oomcraft::Oom exact_oom() const;

    /// The same chain written as a binless model over the point observations
    /// {0, 1, ..., K-1}: W_x = Xi(x) factored as e_x * P(x,:).
    oomcraft::BinlessOom exact_binless() const;
};

/// Brute-force r=1 binless expectation, sum_n g(z_n) omega W_n sigma with
/// explicitly materialized rank-one operators.
double binless_expectation_bruteforce_r1(
    const oomcraft::BinlessOom& model,
    const std::function<double(const Eigen::Ref<const Vector>&)>& g);

/// Brute-force double sum for the lag-1 second moment,
/// sum_{n,n'} f(z_n) g(z_{n'})^T omega W_n W_{n'} sigma. O(N^2), N <= 200.
Matrix lagged_moment_bruteforce_tau1(const oomcraft::BinlessOom& model,
                                     const Eigen::Ref<const Matrix>& f_values,
                                     const Eigen::Ref<const Matrix>& g_values);

/// Brute-force r=2 expectation sum over X^2 of g(z_a, z_b) omega W_a W_b sigma.
double binless_expectation_bruteforce_r2(
    const oomcraft::BinlessOom& model,
    const std::function<double(const Eigen::Ref<const Vector>&, const Eigen::Ref<const Vector>&)>&
        g);

/// Central finite difference gradient.
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double h = 1e-6);

} // namespace oracles
