#include "osr/metrics.hpp"

#include <cmath>
#include <limits>

#include "osr/error.hpp"

namespace osr {

double psnr(const Matrix& reference, const Matrix& estimate) {
    if (!reference.same_shape(estimate)) throw ShapeError("psnr: plane dims differ");
    double mse = 0.0;
    for (size_t i = 0; i < reference.data.size(); ++i) {
        const double d = reference.data[i] - estimate.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(reference.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const Matrix& reference, const Matrix& estimate) {
    if (!reference.same_shape(estimate)) throw ShapeError("ssim: plane dims differ");
    const int win = 8;
    if (reference.rows < win || reference.cols < win) throw ContractError("ssim: plane smaller than 8x8 window");
    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    const double inv_n = 1.0 / (win * win);

    double total = 0.0;
    size_t windows = 0;
    for (int i = 0; i + win <= reference.rows; ++i) {
        for (int j = 0; j + win <= reference.cols; ++j) {
            double mx = 0.0, my = 0.0;
            for (int r = 0; r < win; ++r) {
                const double* xr = reference.row(i + r) + j;
                const double* yr = estimate.row(i + r) + j;
                for (int c = 0; c < win; ++c) {
                    mx += xr[c];
                    my += yr[c];
                }
            }
            mx *= inv_n;
            my *= inv_n;
            double vx = 0.0, vy = 0.0, cov = 0.0;
            for (int r = 0; r < win; ++r) {
                const double* xr = reference.row(i + r) + j;
                const double* yr = estimate.row(i + r) + j;
                for (int c = 0; c < win; ++c) {
                    const double dx = xr[c] - mx;
                    const double dy = yr[c] - my;
                    vx += dx * dx;
                    vy += dy * dy;
                    cov += dx * dy;
                }
            }
            vx *= inv_n;
            vy *= inv_n;
            cov *= inv_n;
            const double num = (2.0 * (mx * my) + c1) * (2.0 * cov + c2);
            const double den = ((mx * mx) + (my * my) + c1) * (vx + vy + c2);
            total += num / den;
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

Metrics compute_metrics(const PlanarImage& reference, const PlanarImage& estimate) {
    if (reference.height != estimate.height || reference.width != estimate.width)
        throw ShapeError("compute_metrics: image dims differ");
    const Matrix ry = luminance(reference);
    const Matrix ey = luminance(estimate);
    return {psnr(ry, ey), ssim(ry, ey)};
}

} // namespace osr
