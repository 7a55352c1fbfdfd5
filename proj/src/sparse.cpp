#include "osr/sparse.hpp"

#include <cmath>

#include "osr/error.hpp"
#include "osr/model.hpp"

namespace osr {

SparseProblem make_sparse_problem(Matrix dict, std::vector<double> y, double lambda, double c_margin) {
    if (dict.rows != static_cast<int>(y.size())) throw ShapeError("sparse problem: y length != dictionary rows");
    if (lambda < 0.0) throw ContractError("sparse problem: lambda must be >= 0");
    if (c_margin <= 1.0) throw ContractError("sparse problem: c margin must exceed 1");
    for (int j = 0; j < dict.cols; ++j) {
        double nrm = 0.0;
        for (int i = 0; i < dict.rows; ++i) nrm += dict.at(i, j) * dict.at(i, j);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) throw DomainError("sparse problem: zero dictionary column");
        for (int i = 0; i < dict.rows; ++i) dict.at(i, j) /= nrm;
    }
    SparseProblem p;
    p.c = c_margin * spectral_norm_sym(gram(dict));
    p.dict = std::move(dict);
    p.y = std::move(y);
    p.lambda = lambda;
    return p;
}

SyntheticInstance make_random_instance(Rng& rng, int n, int m, int sparsity, double lambda) {
    if (n < 1 || m < 1) throw ContractError("instance dims must be >= 1");
    if (sparsity < 0 || sparsity > m) throw ContractError("sparsity out of range");
    Matrix dict(n, m);
    for (double& v : dict.data) v = rng.next_gaussian();
    std::vector<double> z(m, 0.0);
    // sparsity distinct atoms with unit-or-larger magnitudes
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    for (int k = 0; k < sparsity; ++k) {
        const int pick = k + rng.next_int(m - k);
        std::swap(idx[k], idx[pick]);
        const double mag = 1.0 + rng.next_double();
        z[idx[k]] = rng.next_double() < 0.5 ? -mag : mag;
    }
    SyntheticInstance inst;
    inst.problem = make_sparse_problem(std::move(dict), std::vector<double>(n, 0.0), lambda);
    inst.z_true = std::move(z);
    inst.problem.y = matvec(inst.problem.dict, inst.z_true);
    return inst;
}

double soft_threshold(double z, double beta) {
    if (z > beta) return z - beta;
    if (z < -beta) return z + beta;
    return 0.0;
}

double hard_threshold(double z, double beta) { return std::abs(z) > beta ? z : 0.0; }

std::vector<double> soft_threshold(const std::vector<double>& z, double beta) {
    std::vector<double> out(z.size());
    for (size_t i = 0; i < z.size(); ++i) out[i] = soft_threshold(z[i], beta);
    return out;
}

double soft_threshold_nonneg(double z, double beta) { return std::max(z - beta, 0.0); }

bool relu_soft_identity_check(const std::vector<double>& z, double beta) {
    if (beta < 0.0) throw ContractError("relu_soft_identity_check: beta must be >= 0");
    for (double v : z) {
        const double relu_form = std::max(v - beta, 0.0) - std::max(-v - beta, 0.0);
        if (relu_form != soft_threshold(v, beta)) return false;
    }
    return true;
}

double cost_f(const SparseProblem& p, const std::vector<double>& z) {
    if (static_cast<int>(z.size()) != p.atoms()) throw ShapeError("cost_f: code length != atoms");
    const std::vector<double> dz = matvec(p.dict, z);
    double quad = 0.0;
    for (int i = 0; i < p.dim(); ++i) {
        const double r = p.y[i] - dz[i];
        quad += r * r;
    }
    double l1 = 0.0;
    for (double v : z) l1 += std::abs(v);
    return 0.5 * quad + p.lambda * l1;
}

double surrogate_q(const SparseProblem& p, const std::vector<double>& z, const std::vector<double>& z_prev) {
    if (z.size() != z_prev.size()) throw ShapeError("surrogate_q: code length mismatch");
    const std::vector<double> dz = matvec(p.dict, z);
    const std::vector<double> dzp = matvec(p.dict, z_prev);
    double dist = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        const double d = z[i] - z_prev[i];
        dist += d * d;
    }
    double ddist = 0.0;
    for (int i = 0; i < p.dim(); ++i) {
        const double d = dz[i] - dzp[i];
        ddist += d * d;
    }
    return cost_f(p, z) + 0.5 * p.c * dist - 0.5 * ddist;
}

std::vector<double> ista_step(const SparseProblem& p, const std::vector<double>& z_prev) {
    if (static_cast<int>(z_prev.size()) != p.atoms()) throw ShapeError("ista_step: code length != atoms");
    const std::vector<double> dz = matvec(p.dict, z_prev);
    std::vector<double> resid(p.dim());
    for (int i = 0; i < p.dim(); ++i) resid[i] = p.y[i] - dz[i];
    std::vector<double> grad = matvec_t(p.dict, resid);
    std::vector<double> out(p.atoms());
    const double beta = p.lambda / p.c;
    for (int j = 0; j < p.atoms(); ++j) out[j] = soft_threshold(grad[j] / p.c + z_prev[j], beta);
    return out;
}

std::vector<double> ista_step_nonneg(const SparseProblem& p, const std::vector<double>& z_prev,
                                     const std::vector<double>& y_t) {
    if (static_cast<int>(y_t.size()) != p.dim()) throw ShapeError("ista_step_nonneg: observation length mismatch");
    const std::vector<double> dz = matvec(p.dict, z_prev);
    std::vector<double> resid(p.dim());
    for (int i = 0; i < p.dim(); ++i) resid[i] = y_t[i] - dz[i];
    std::vector<double> grad = matvec_t(p.dict, resid);
    std::vector<double> out(p.atoms());
    const double beta = p.lambda / p.c;
    for (int j = 0; j < p.atoms(); ++j) out[j] = soft_threshold_nonneg(grad[j] / p.c + z_prev[j], beta);
    return out;
}

IstaState ista_solve(const SparseProblem& p, int max_iter, double tol) {
    IstaState st;
    st.z.assign(p.atoms(), 0.0);
    st.cost_history.push_back(cost_f(p, st.z));
    for (int it = 0; it < max_iter; ++it) {
        std::vector<double> next = ista_step(p, st.z);
        double delta = 0.0;
        for (size_t i = 0; i < next.size(); ++i) delta = std::max(delta, std::abs(next[i] - st.z[i]));
        st.z = std::move(next);
        st.iterations = it + 1;
        st.cost_history.push_back(cost_f(p, st.z));
        if (delta < tol) {
            st.converged = true;
            break;
        }
    }
    return st;
}

double mutual_coherence(const Matrix& dict) {
    if (dict.cols < 2) throw ContractError("mutual_coherence: need at least 2 columns");
    std::vector<double> norms(dict.cols, 0.0);
    for (int i = 0; i < dict.rows; ++i)
        for (int j = 0; j < dict.cols; ++j) norms[j] += dict.at(i, j) * dict.at(i, j);
    for (double& n : norms) {
        if (n == 0.0) throw DomainError("mutual_coherence: zero column");
        n = std::sqrt(n);
    }
    double mu = 0.0;
    for (int a = 0; a < dict.cols; ++a) {
        for (int b = a + 1; b < dict.cols; ++b) {
            double dot = 0.0;
            for (int i = 0; i < dict.rows; ++i) dot += dict.at(i, a) * dict.at(i, b);
            mu = std::max(mu, std::abs(dot) / (norms[a] * norms[b]));
        }
    }
    // Cauchy-Schwarz bounds mu by 1; rounding can nudge the ratio past it
    return std::min(mu, 1.0);
}

bool recovery_bound_ok(const Matrix& dict, const std::vector<double>& z) {
    if (static_cast<int>(z.size()) != dict.cols) throw ShapeError("recovery_bound_ok: code length != atoms");
    int nnz = 0;
    for (double v : z)
        if (v != 0.0) ++nnz;
    const double mu = mutual_coherence(dict);
    if (mu == 0.0) return true; // orthonormal columns: bound is infinite
    return nnz < 0.5 * (1.0 + 1.0 / mu);
}

double rnn_equiv_check(const SparseProblem& p, const std::vector<double>& z_prev, const std::vector<double>& y_t) {
    const int n = p.dim(), m = p.atoms();
    if (static_cast<int>(z_prev.size()) != m || static_cast<int>(y_t.size()) != n)
        throw ShapeError("rnn_equiv_check: dims mismatch");

    // Learned re-parametrization of one nonnegative ISTA iteration.
    RnnModel cell;
    cell.w_zy = Matrix(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) cell.w_zy.at(i, j) = p.dict.at(i, j) / p.c;
    const Matrix g = gram(p.dict);
    cell.w_zz = Matrix(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) cell.w_zz.at(i, j) = (i == j ? 1.0 : 0.0) - g.at(i, j) / p.c;
    cell.bias.assign(m, -p.lambda / p.c);
    cell.w_xz = Matrix(m, 1, 0.0); // decoder unused by the cell update

    const std::vector<double> rnn_side = rnn_cell_step(cell, y_t, z_prev);
    const std::vector<double> ista_side = ista_step_nonneg(p, z_prev, y_t);
    double dev = 0.0;
    for (int j = 0; j < m; ++j) dev = std::max(dev, std::abs(rnn_side[j] - ista_side[j]));
    return dev;
}

} // namespace osr
