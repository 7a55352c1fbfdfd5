#ifndef OSR_DEGRADE_HPP
#define OSR_DEGRADE_HPP

#include "osr/image.hpp"
#include "osr/matrix.hpp"
#include "osr/rng.hpp"

namespace osr {

// Truncated sampled isotropic Gaussian, renormalized to unit sum. Kept in
// separable form (taps = outer(taps_1d, taps_1d)).
struct GaussianKernel {
    int size = 1;                // odd
    double sigma = 0.0;          // pixels; 0 encodes the identity kernel [[1]]
    Matrix taps;                 // size x size, sums to 1
    std::vector<double> taps_1d; // length size, sums to 1

    int radius() const { return (size - 1) / 2; }
};

// Forward model parameters: blur PSF, decimation factor (1 = deblurring,
// 3 = the paper-scale SR task) and additive white gaussian noise level in
// [0, 255] intensity units.
struct DegradationSpec {
    GaussianKernel kernel;
    double noise_sigma = 0.0;
    int decimation = 1;
};

GaussianKernel make_gaussian_kernel(int size, double sigma);

// Identity kernel ([[1]]), used for the sigma == 0 edge cases.
GaussianKernel identity_kernel();

// Same-size convolution with symmetric mirror padding. The two separable 1D
// passes are exactly the 2D product kernel on mirror-padded input.
Matrix convolve2d_same(const Matrix& plane, const GaussianKernel& k);

// Keeps every `factor`-th row/col starting at index 0.
Matrix decimate(const Matrix& plane, int factor);

// blur -> decimate -> add noise, each channel independently.
PlanarImage degrade(const PlanarImage& img, const DegradationSpec& spec, Rng& rng);

// Composition law for isotropic Gaussians: sqrt(a^2 + b^2).
double compose_sigma(double sigma_a, double sigma_b);

// Kernel with sigma = sqrt(sigma_t^2 - sigma_s^2); defined for sigma_t >
// sigma_s, the blur that carries a sigma_s-blurred image to sigma_t.
GaussianKernel residual_kernel(double sigma_s, double sigma_t, int size);

} // namespace osr

#endif
