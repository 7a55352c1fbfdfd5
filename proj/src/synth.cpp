#include "osr/synth.hpp"

#include <algorithm>
#include <cmath>

#include "osr/degrade.hpp"
#include "osr/error.hpp"
#include "osr/rng.hpp"

namespace osr {

Matrix synth_pattern(const std::string& name, int size, int block) {
    if (size < 1 || block < 1 || block > size) throw ContractError("synth_pattern: bad size/block");
    Matrix p(size, size, 0.0);
    if (name == "chessboard") {
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j) p.at(i, j) = ((i / block + j / block) % 2 == 0) ? 255.0 : 0.0;
    } else if (name == "stripes") {
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j) p.at(i, j) = ((i / block) % 2 == 0) ? 255.0 : 0.0;
    } else if (name == "dots") {
        const double r = block / 3.0;
        p.fill(255.0);
        for (int i = 0; i < size; ++i) {
            for (int j = 0; j < size; ++j) {
                const double ci = (i / block) * block + block / 2.0;
                const double cj = (j / block) * block + block / 2.0;
                const double d = std::hypot(i - ci, j - cj);
                if (d <= r) p.at(i, j) = 0.0;
            }
        }
    } else {
        throw ContractError("synth_pattern: unknown pattern '" + name + "'");
    }
    return p;
}

namespace {

void clamp_image(PlanarImage& img) {
    for (auto& plane : img.planes)
        for (double& v : plane.data) v = std::clamp(v, 0.0, 255.0);
}

} // namespace

PlanarImage synth_texture_image(uint64_t seed, int h, int w, double detail) {
    if (h < 32 || w < 32) throw ContractError("synth_texture_image: minimum size 32x32");
    Rng rng(seed);
    PlanarImage img(h, w, 3, ColorSpace::RGB);

    // shaded background: random corner colors, bilinear blend
    double corner[4][3];
    for (auto& c : corner)
        for (double& v : c) v = rng.uniform(40.0, 215.0);
    for (int i = 0; i < h; ++i) {
        const double fi = static_cast<double>(i) / (h - 1);
        for (int j = 0; j < w; ++j) {
            const double fj = static_cast<double>(j) / (w - 1);
            for (int ch = 0; ch < 3; ++ch) {
                const double top = corner[0][ch] * (1 - fj) + corner[1][ch] * fj;
                const double bot = corner[2][ch] * (1 - fj) + corner[3][ch] * fj;
                img.planes[ch].at(i, j) = top * (1 - fi) + bot * fi;
            }
        }
    }

    // large soft blobs
    const int n_blobs = 4;
    for (int b = 0; b < n_blobs; ++b) {
        const double ci = rng.uniform(0.0, h);
        const double cj = rng.uniform(0.0, w);
        const double s = rng.uniform(0.12, 0.35) * std::min(h, w);
        double amp[3];
        for (double& a : amp) a = rng.uniform(-45.0, 45.0);
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < w; ++j) {
                const double d2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
                const double g = std::exp(-d2 / (2.0 * s * s));
                for (int ch = 0; ch < 3; ++ch) img.planes[ch].at(i, j) += amp[ch] * g;
            }
        }
    }

    // hard-edged shapes: ellipses and thin rotated bars
    const int n_shapes = 18 + rng.next_int(7);
    for (int sdx = 0; sdx < n_shapes; ++sdx) {
        const bool ellipse = rng.next_double() < 0.55;
        const double ci = rng.uniform(0.1 * h, 0.9 * h);
        const double cj = rng.uniform(0.1 * w, 0.9 * w);
        const double a = rng.uniform(3.5, 0.22 * std::min(h, w));
        const double b = ellipse ? rng.uniform(3.0, 0.22 * std::min(h, w)) : rng.uniform(1.2, 4.0);
        const double theta = rng.uniform(0.0, M_PI);
        const double ct = std::cos(theta), st = std::sin(theta);
        double color[3];
        for (double& v : color) v = rng.uniform(15.0, 240.0);
        const double alpha = rng.uniform(0.65, 1.0);
        const int margin = static_cast<int>(std::ceil(std::max(a, b))) + 1;
        const int i0 = std::max(0, static_cast<int>(ci) - margin), i1 = std::min(h - 1, static_cast<int>(ci) + margin);
        const int j0 = std::max(0, static_cast<int>(cj) - margin), j1 = std::min(w - 1, static_cast<int>(cj) + margin);
        for (int i = i0; i <= i1; ++i) {
            for (int j = j0; j <= j1; ++j) {
                const double u = (i - ci) * ct + (j - cj) * st;
                const double v = -(i - ci) * st + (j - cj) * ct;
                const double q = (u * u) / (a * a) + (v * v) / (b * b);
                if (q <= 1.0) {
                    for (int ch = 0; ch < 3; ++ch) {
                        double& px = img.planes[ch].at(i, j);
                        px = (1.0 - alpha) * px + alpha * color[ch];
                    }
                }
            }
        }
    }

    // oriented gratings in gaussian windows
    const int n_tex = 9;
    for (int t = 0; t < n_tex; ++t) {
        const double ci = rng.uniform(0.1 * h, 0.9 * h);
        const double cj = rng.uniform(0.1 * w, 0.9 * w);
        const double win = rng.uniform(0.06, 0.18) * std::min(h, w);
        const double wavelength = rng.uniform(2.8, 8.0);
        const double theta = rng.uniform(0.0, M_PI);
        const double amp = detail * rng.uniform(18.0, 42.0);
        const double kx = std::cos(theta) * 2.0 * M_PI / wavelength;
        const double ky = std::sin(theta) * 2.0 * M_PI / wavelength;
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        const int margin = static_cast<int>(3.0 * win);
        const int i0 = std::max(0, static_cast<int>(ci) - margin), i1 = std::min(h - 1, static_cast<int>(ci) + margin);
        const int j0 = std::max(0, static_cast<int>(cj) - margin), j1 = std::min(w - 1, static_cast<int>(cj) + margin);
        for (int i = i0; i <= i1; ++i) {
            for (int j = j0; j <= j1; ++j) {
                const double d2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
                const double g = std::exp(-d2 / (2.0 * win * win));
                const double s = amp * g * std::sin(kx * i + ky * j + phase);
                for (int ch = 0; ch < 3; ++ch) img.planes[ch].at(i, j) += s;
            }
        }
    }

    // fine grain shared across channels, luminance-correlated
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            const double g = detail * 7.0 * rng.next_gaussian();
            for (int ch = 0; ch < 3; ++ch) img.planes[ch].at(i, j) += g;
        }
    }

    // soften the rasterized edges slightly
    const GaussianKernel soft = make_gaussian_kernel(3, 0.55);
    for (auto& plane : img.planes) plane = convolve2d_same(plane, soft);

    clamp_image(img);
    return img;
}

} // namespace osr
