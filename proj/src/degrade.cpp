#include "osr/degrade.hpp"

#include <cmath>

#include "osr/boundary.hpp"
#include "osr/error.hpp"

namespace osr {

GaussianKernel make_gaussian_kernel(int size, double sigma) {
    if (size < 1 || size % 2 == 0) throw ContractError("kernel size must be odd and >= 1");
    if (sigma <= 0.0) throw ContractError("kernel sigma must be > 0");
    GaussianKernel k;
    k.size = size;
    k.sigma = sigma;
    k.taps_1d.assign(size, 0.0);
    const int r = (size - 1) / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = static_cast<double>(i - r);
        k.taps_1d[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        sum += k.taps_1d[i];
    }
    for (double& t : k.taps_1d) t /= sum;
    k.taps = Matrix(size, size);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) k.taps.at(i, j) = k.taps_1d[i] * k.taps_1d[j];
    return k;
}

GaussianKernel identity_kernel() {
    GaussianKernel k;
    k.size = 1;
    k.sigma = 0.0;
    k.taps = Matrix(1, 1, 1.0);
    k.taps_1d = {1.0};
    return k;
}

Matrix convolve2d_same(const Matrix& plane, const GaussianKernel& k) {
    if (plane.rows < k.size || plane.cols < k.size) throw ContractError("plane smaller than kernel");
    const int h = plane.rows, w = plane.cols, r = k.radius();
    if (r == 0) return plane;

    // horizontal pass
    Matrix tmp(h, w);
    for (int i = 0; i < h; ++i) {
        const double* src = plane.row(i);
        double* dst = tmp.row(i);
        for (int j = 0; j < w; ++j) {
            double s = 0.0;
            if (j >= r && j + r < w) {
                const double* p = src + (j - r);
                for (int t = 0; t < k.size; ++t) s += k.taps_1d[t] * p[t];
            } else {
                for (int t = -r; t <= r; ++t) s += k.taps_1d[t + r] * src[mirror_index(j + t, w)];
            }
            dst[j] = s;
        }
    }
    // vertical pass
    Matrix out(h, w);
    for (int i = 0; i < h; ++i) {
        double* dst = out.row(i);
        if (i >= r && i + r < h) {
            for (int t = -r; t <= r; ++t) {
                const double tap = k.taps_1d[t + r];
                const double* src = tmp.row(i + t);
                for (int j = 0; j < w; ++j) dst[j] += tap * src[j];
            }
        } else {
            for (int t = -r; t <= r; ++t) {
                const double tap = k.taps_1d[t + r];
                const double* src = tmp.row(mirror_index(i + t, h));
                for (int j = 0; j < w; ++j) dst[j] += tap * src[j];
            }
        }
    }
    return out;
}

Matrix decimate(const Matrix& plane, int factor) {
    if (factor < 1) throw ContractError("decimation factor must be >= 1");
    if (factor == 1) return plane;
    const int oh = (plane.rows + factor - 1) / factor;
    const int ow = (plane.cols + factor - 1) / factor;
    Matrix out(oh, ow);
    for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) out.at(i, j) = plane.at(i * factor, j * factor);
    return out;
}

PlanarImage degrade(const PlanarImage& img, const DegradationSpec& spec, Rng& rng) {
    if (spec.decimation < 1) throw ContractError("decimation must be >= 1");
    if (spec.noise_sigma < 0.0) throw ContractError("noise sigma must be >= 0");
    PlanarImage out;
    out.colorspace = img.colorspace;
    for (const Matrix& plane : img.planes) {
        Matrix p = convolve2d_same(plane, spec.kernel);
        p = decimate(p, spec.decimation);
        if (spec.noise_sigma > 0.0) {
            for (double& v : p.data) v += spec.noise_sigma * rng.next_gaussian();
        }
        out.planes.push_back(std::move(p));
    }
    out.height = out.planes[0].rows;
    out.width = out.planes[0].cols;
    return out;
}

double compose_sigma(double sigma_a, double sigma_b) {
    if (sigma_a < 0.0 || sigma_b < 0.0) throw ContractError("compose_sigma: sigmas must be >= 0");
    return std::sqrt(sigma_a * sigma_a + sigma_b * sigma_b);
}

GaussianKernel residual_kernel(double sigma_s, double sigma_t, int size) {
    if (sigma_s < 0.0) throw ContractError("residual_kernel: sigma_s must be >= 0");
    if (sigma_t <= sigma_s) throw DomainError("residual_kernel: requires sigma_t > sigma_s");
    return make_gaussian_kernel(size, std::sqrt(sigma_t * sigma_t - sigma_s * sigma_s));
}

} // namespace osr
