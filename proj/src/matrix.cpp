#include "osr/matrix.hpp"

#include <cmath>
#include <string>

namespace osr {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw ShapeError("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) + " * " +
                         std::to_string(b.rows) + "x" + std::to_string(b.cols));
    Matrix c(a.rows, b.cols, 0.0);
    // i-k-j order streams rows of b
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != a.cols) throw ShapeError("matvec: vector length != cols");
    std::vector<double> y(a.rows, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double s = 0.0;
        for (int j = 0; j < a.cols; ++j) s += arow[j] * x[j];
        y[i] = s;
    }
    return y;
}

std::vector<double> matvec_t(const Matrix& a, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != a.rows) throw ShapeError("matvec_t: vector length != rows");
    std::vector<double> y(a.cols, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* arow = a.row(i);
        for (int j = 0; j < a.cols; ++j) y[j] += xi * arow[j];
    }
    return y;
}

void outer_acc(Matrix& g, const std::vector<double>& u, const std::vector<double>& v) {
    if (g.rows != static_cast<int>(u.size()) || g.cols != static_cast<int>(v.size()))
        throw ShapeError("outer_acc: accumulator shape mismatch");
    for (int i = 0; i < g.rows; ++i) {
        const double ui = u[i];
        if (ui == 0.0) continue;
        double* grow = g.row(i);
        for (int j = 0; j < g.cols; ++j) grow[j] += ui * v[j];
    }
}

Matrix gram(const Matrix& a) {
    Matrix g(a.cols, a.cols, 0.0);
    for (int k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        for (int i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* grow = g.row(i);
            for (int j = 0; j < a.cols; ++j) grow[j] += aki * arow[j];
        }
    }
    return g;
}

double spectral_norm_sym(const Matrix& g, std::vector<double>* rayleigh_history) {
    if (g.rows != g.cols) throw ShapeError("spectral_norm_sym: matrix not square");
    const int n = g.rows;

    // Deterministic start; the mild ramp avoids starting orthogonal to the
    // dominant eigenvector on structured inputs.
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * i;
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (double& x : v) x /= nrm;

    const double tol = 1e-9;
    const int max_iter = 200000;
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<double> w = matvec(g, v);
        double wnorm = 0.0, ray = 0.0;
        for (int i = 0; i < n; ++i) {
            wnorm += w[i] * w[i];
            ray += w[i] * v[i]; // Rayleigh quotient, v is unit
        }
        wnorm = std::sqrt(wnorm);
        if (rayleigh_history) rayleigh_history->push_back(ray);
        if (wnorm == 0.0) return 0.0; // v is in the null space; PSD input -> eigenvalue 0
        for (int i = 0; i < n; ++i) v[i] = w[i] / wnorm;
        if (it > 0 && std::abs(ray - lambda) <= tol * std::max(1.0, std::abs(ray))) return ray;
        lambda = ray;
    }
    return lambda;
}

} // namespace osr
