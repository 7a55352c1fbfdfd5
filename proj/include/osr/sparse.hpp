#ifndef OSR_SPARSE_HPP
#define OSR_SPARSE_HPP

#include <vector>

#include "osr/matrix.hpp"
#include "osr/rng.hpp"

namespace osr {

// l1-regularized least squares instance
//   f(z) = 1/2 ||y - D z||^2 + lambda ||z||_1
// with step constant c strictly above ||D^T D||_2 so the majorizing surrogate
// is strictly convex. Dictionary columns are normalized to unit l2 norm at
// construction.
struct SparseProblem {
    Matrix dict;           // N x M, unit-norm columns
    std::vector<double> y; // length N
    double lambda = 0.0;
    double c = 1.0;

    int atoms() const { return dict.cols; }
    int dim() const { return dict.rows; }
};

// Normalizes columns, sets c = margin * ||D^T D||_2 (margin defaults to
// 1.01) and validates the invariants.
SparseProblem make_sparse_problem(Matrix dict, std::vector<double> y, double lambda, double c_margin = 1.01);

// Random instance: gaussian dictionary (columns normalized), exact sparse
// code with `sparsity` nonzeros, y = D z_true.
struct SyntheticInstance {
    SparseProblem problem;
    std::vector<double> z_true;
};
SyntheticInstance make_random_instance(Rng& rng, int n, int m, int sparsity, double lambda);

double soft_threshold(double z, double beta);
double hard_threshold(double z, double beta);
std::vector<double> soft_threshold(const std::vector<double>& z, double beta);

// One-sided shrink: ReLU(z - beta).
double soft_threshold_nonneg(double z, double beta);

// Elementwise check of S_beta(z) == ReLU(z - beta) - ReLU(-z - beta),
// exact equality required.
bool relu_soft_identity_check(const std::vector<double>& z, double beta);

double cost_f(const SparseProblem& p, const std::vector<double>& z);
double surrogate_q(const SparseProblem& p, const std::vector<double>& z, const std::vector<double>& z_prev);

// z_next = S_{lambda/c}( (1/c) D^T (y - D z_prev) + z_prev )
std::vector<double> ista_step(const SparseProblem& p, const std::vector<double>& z_prev);

// Nonnegative-regime step with the one-sided shrink, the form one RNN cell
// update realizes.
std::vector<double> ista_step_nonneg(const SparseProblem& p, const std::vector<double>& z_prev,
                                     const std::vector<double>& y_t);

struct IstaState {
    std::vector<double> z;
    int iterations = 0;
    std::vector<double> cost_history; // cost at z_0 and after every step
    bool converged = false;
};

// Iterates from z = 0 until ||z_next - z||_inf < tol or max_iter;
// non-convergence is reported in the state, not an error.
IstaState ista_solve(const SparseProblem& p, int max_iter, double tol);

// max_{i != j} |d_i . d_j| / (||d_i|| ||d_j||); requires >= 2 nonzero columns.
double mutual_coherence(const Matrix& dict);

// ||z||_0 < (1 + 1/mu(D)) / 2; orthonormal dictionaries (mu == 0) accept any
// finite support.
bool recovery_bound_ok(const Matrix& dict, const std::vector<double>& z);

// Runs one RNN cell update (weights set to W_zy = (1/c) D, W_zz = I -
// (1/c) D^T D, b = -(lambda/c) 1, ReLU activation) against the nonnegative
// ISTA step for the same problem, and returns the max elementwise deviation.
// z_prev must be nonnegative for the two to coincide.
double rnn_equiv_check(const SparseProblem& p, const std::vector<double>& z_prev, const std::vector<double>& y_t);

} // namespace osr

#endif
