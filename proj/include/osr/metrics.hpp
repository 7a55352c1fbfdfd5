#ifndef OSR_METRICS_HPP
#define OSR_METRICS_HPP

#include "osr/image.hpp"
#include "osr/matrix.hpp"

namespace osr {

struct Metrics {
    double psnr_db = 0.0; // +inf when MSE == 0
    double ssim = 0.0;
};

// 10 log10(255^2 / MSE) over the plane; identical planes give +inf.
double psnr(const Matrix& reference, const Matrix& estimate);

// Mean SSIM over all 8x8 sliding windows (uniform weights, stride 1),
// K1 = 0.01, K2 = 0.03, L = 255.
double ssim(const Matrix& reference, const Matrix& estimate);

// Both metrics on the luminance channel.
Metrics compute_metrics(const PlanarImage& reference, const PlanarImage& estimate);

} // namespace osr

#endif
