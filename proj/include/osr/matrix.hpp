#ifndef OSR_MATRIX_HPP
#define OSR_MATRIX_HPP

#include <vector>

#include "osr/error.hpp"

namespace osr {

// Dense row-major matrix of doubles. Row-major layout is the single storage
// convention used everywhere, including checkpoint serialization.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data; // rows * cols, row-major

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {
        if (r < 1 || c < 1) throw ShapeError("matrix dims must be >= 1");
    }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

    size_t size() const { return data.size(); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

// y = A x, x of length a.cols
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);
// y = A^T x, x of length a.rows
std::vector<double> matvec_t(const Matrix& a, const std::vector<double>& x);

// g += u v^T (outer product accumulate); g is u.size() x v.size()
void outer_acc(Matrix& g, const std::vector<double>& u, const std::vector<double>& v);

// A^T A
Matrix gram(const Matrix& a);

// Largest eigenvalue of a square symmetric PSD matrix via power iteration,
// relative tolerance 1e-9. Optionally records the Rayleigh quotient after each
// iteration (non-decreasing for symmetric PSD input).
double spectral_norm_sym(const Matrix& g, std::vector<double>* rayleigh_history = nullptr);

} // namespace osr

#endif
