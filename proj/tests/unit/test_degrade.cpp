#include <doctest.h>

#include <cmath>

#include "osr/boundary.hpp"
#include "osr/degrade.hpp"
#include "osr/resample.hpp"
#include "osr/rng.hpp"

using namespace osr;

namespace {

Matrix random_plane(Rng& rng, int h, int w, double lo = 0.0, double hi = 255.0) {
    Matrix p(h, w);
    for (double& v : p.data) v = rng.uniform(lo, hi);
    return p;
}

// quadruple-loop reference convolution with mirror indexing
Matrix naive_conv(const Matrix& plane, const GaussianKernel& k) {
    const int r = k.radius();
    Matrix out(plane.rows, plane.cols, 0.0);
    for (int i = 0; i < plane.rows; ++i)
        for (int j = 0; j < plane.cols; ++j) {
            double s = 0.0;
            for (int di = -r; di <= r; ++di)
                for (int dj = -r; dj <= r; ++dj)
                    s += k.taps.at(di + r, dj + r) *
                         plane.at(mirror_index(i + di, plane.rows), mirror_index(j + dj, plane.cols));
            out.at(i, j) = s;
        }
    return out;
}

} // namespace

TEST_CASE("gaussian kernel construction") {
    const GaussianKernel k1 = make_gaussian_kernel(1, 2.0);
    CHECK(k1.taps.at(0, 0) == doctest::Approx(1.0).epsilon(0));

    // near-flat limit
    const GaussianKernel kf = make_gaussian_kernel(3, 1e6);
    for (double t : kf.taps.data) CHECK(t == doctest::Approx(1.0 / 9.0).epsilon(1e-9));

    // direct-summation oracle for the center tap
    const GaussianKernel k = make_gaussian_kernel(25, 1.6);
    double sum = 0.0;
    for (int i = -12; i <= 12; ++i)
        for (int j = -12; j <= 12; ++j) sum += std::exp(-(i * i + j * j) / (2.0 * 1.6 * 1.6));
    CHECK(k.taps.at(12, 12) == doctest::Approx(1.0 / sum).epsilon(1e-12));
    double maxtap = 0.0;
    for (double t : k.taps.data) maxtap = std::max(maxtap, t);
    CHECK(k.taps.at(12, 12) == maxtap);

    CHECK_THROWS_AS(make_gaussian_kernel(4, 1.0), ContractError);
    CHECK_THROWS_AS(make_gaussian_kernel(3, 0.0), ContractError);
}

TEST_CASE("kernel normalization and symmetry across sizes") {
    Rng rng(2);
    for (int trial = 0; trial < 12; ++trial) {
        const int size = 1 + 2 * rng.next_int(13);
        const double sigma = rng.uniform(0.3, 4.0);
        const GaussianKernel k = make_gaussian_kernel(size, sigma);
        double sum = 0.0;
        for (double t : k.taps.data) {
            CHECK(t >= 0.0);
            sum += t;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j) {
                CHECK(k.taps.at(i, j) == k.taps.at(size - 1 - i, j));
                CHECK(k.taps.at(i, j) == k.taps.at(i, size - 1 - j));
                CHECK(k.taps.at(i, j) == k.taps.at(j, i));
            }
    }
}

TEST_CASE("convolution identity and constants") {
    Rng rng(3);
    const Matrix plane = random_plane(rng, 10, 12);
    const Matrix same = convolve2d_same(plane, identity_kernel());
    for (size_t i = 0; i < plane.data.size(); ++i) CHECK(same.data[i] == plane.data[i]);

    Matrix flat(9, 9, 42.5);
    const Matrix blurred = convolve2d_same(flat, make_gaussian_kernel(5, 1.1));
    for (double v : blurred.data) CHECK(v == doctest::Approx(42.5).epsilon(1e-12));
}

TEST_CASE("separable convolution matches the naive oracle") {
    Rng rng(5);
    const Matrix plane = random_plane(rng, 16, 16);
    for (double sigma : {0.7, 1.6}) {
        const GaussianKernel k = make_gaussian_kernel(7, sigma);
        const Matrix got = convolve2d_same(plane, k);
        const Matrix want = naive_conv(plane, k);
        for (size_t i = 0; i < got.data.size(); ++i) CHECK(std::abs(got.data[i] - want.data[i]) < 1e-10);
    }
}

TEST_CASE("convolution linearity") {
    Rng rng(7);
    const Matrix f = random_plane(rng, 12, 12);
    const Matrix g = random_plane(rng, 12, 12);
    const GaussianKernel k = make_gaussian_kernel(5, 1.3);
    const double a = 0.7, b = -1.9;
    Matrix combo(12, 12);
    for (size_t i = 0; i < combo.data.size(); ++i) combo.data[i] = a * f.data[i] + b * g.data[i];
    const Matrix lhs = convolve2d_same(combo, k);
    const Matrix cf = convolve2d_same(f, k);
    const Matrix cg = convolve2d_same(g, k);
    for (size_t i = 0; i < lhs.data.size(); ++i)
        CHECK(std::abs(lhs.data[i] - (a * cf.data[i] + b * cg.data[i])) < 1e-10);
}

TEST_CASE("convolution rejects planes smaller than the kernel") {
    Matrix tiny(3, 3, 1.0);
    CHECK_THROWS_AS(convolve2d_same(tiny, make_gaussian_kernel(5, 1.0)), ContractError);
}

TEST_CASE("degrade edge cases") {
    Rng rng(11);
    PlanarImage img(8, 8, 1, ColorSpace::Gray);
    img.planes[0] = random_plane(rng, 8, 8);

    Rng r1(0);
    const DegradationSpec noop{identity_kernel(), 0.0, 1};
    const PlanarImage same = degrade(img, noop, r1);
    for (size_t i = 0; i < img.planes[0].data.size(); ++i) CHECK(same.planes[0].data[i] == img.planes[0].data[i]);

    PlanarImage nine(9, 9, 1, ColorSpace::Gray);
    nine.planes[0] = random_plane(rng, 9, 9);
    Rng r2(0);
    const DegradationSpec dec{identity_kernel(), 0.0, 3};
    const PlanarImage small = degrade(nine, dec, r2);
    CHECK(small.height == 3);
    CHECK(small.width == 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(small.planes[0].at(i, j) == nine.planes[0].at(3 * i, 3 * j));
}

TEST_CASE("degrade blurs before decimating") {
    Rng rng(13);
    const Matrix plane = random_plane(rng, 27, 27);
    PlanarImage img(27, 27, 1, ColorSpace::Gray);
    img.planes[0] = plane;
    const GaussianKernel k = make_gaussian_kernel(9, 1.4);
    Rng r(0);
    const PlanarImage got = degrade(img, DegradationSpec{k, 0.0, 3}, r);
    const Matrix want = decimate(convolve2d_same(plane, k), 3);
    REQUIRE(got.planes[0].same_shape(want));
    for (size_t i = 0; i < want.data.size(); ++i) CHECK(got.planes[0].data[i] == want.data[i]);

    // the reversed order is genuinely different on this input
    const Matrix reversed = convolve2d_same(decimate(plane, 3), k);
    double diff = 0.0;
    for (size_t i = 0; i < want.data.size(); ++i) diff = std::max(diff, std::abs(reversed.data[i] - want.data[i]));
    CHECK(diff > 1.0);
}

TEST_CASE("compose_sigma forced values") {
    CHECK(compose_sigma(0.0, 1.7) == doctest::Approx(1.7).epsilon(0));
    CHECK(compose_sigma(1.2, 1.6) == doctest::Approx(2.0).epsilon(1e-15));
    // solving 2^2 + x^2 = ... the paper's sqrt(3) residual: sigma_s = 2, sigma_t = 1
    CHECK(std::sqrt(2.0 * 2.0 - 1.0 * 1.0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("residual kernel definition and composition oracle") {
    const GaussianKernel direct = make_gaussian_kernel(15, 1.4);
    const GaussianKernel res0 = residual_kernel(0.0, 1.4, 15);
    for (size_t i = 0; i < direct.taps.data.size(); ++i) CHECK(res0.taps.data[i] == direct.taps.data[i]);

    const GaussianKernel r345 = residual_kernel(1.2, 2.0, 15);
    CHECK(r345.sigma == doctest::Approx(1.6).epsilon(1e-15));

    CHECK_THROWS_AS(residual_kernel(2.0, 1.0, 15), DomainError);

    // blur(sigma_s) then residual equals blur(sigma_t) in the interior
    Rng rng(17);
    const Matrix f = random_plane(rng, 80, 80);
    const double sigma_s = 1.2, sigma_t = 2.0;
    const Matrix via = convolve2d_same(convolve2d_same(f, make_gaussian_kernel(25, sigma_s)),
                                       residual_kernel(sigma_s, sigma_t, 25));
    const Matrix direct_t = convolve2d_same(f, make_gaussian_kernel(25, sigma_t));
    double max_err = 0.0;
    for (int i = 12; i < 80 - 12; ++i)
        for (int j = 12; j < 80 - 12; ++j) max_err = std::max(max_err, std::abs(via.at(i, j) - direct_t.at(i, j)));
    CHECK(max_err < 1e-3 * 255.0);
}

TEST_CASE("gaussian composition law on random images") {
    Rng rng(19);
    for (double s1 : {0.5, 1.7, 2.5}) {
        for (double s2 : {0.8, 2.5}) {
            const Matrix f = random_plane(rng, 64, 64);
            const Matrix seq = convolve2d_same(convolve2d_same(f, make_gaussian_kernel(25, s1)),
                                               make_gaussian_kernel(25, s2));
            const Matrix comp = convolve2d_same(f, make_gaussian_kernel(25, compose_sigma(s1, s2)));
            double max_err = 0.0;
            for (int i = 12; i < 52; ++i)
                for (int j = 12; j < 52; ++j) max_err = std::max(max_err, std::abs(seq.at(i, j) - comp.at(i, j)));
            CHECK(max_err < 1e-3 * 255.0);
        }
    }
}

TEST_CASE("bicubic resize: constants preserved, zero-residual identity at factor 1") {
    Matrix flat(12, 12, 77.0);
    const Matrix up = bicubic_resize(flat, 36, 36);
    for (double v : up.data) CHECK(v == doctest::Approx(77.0).epsilon(1e-12));

    Rng rng(23);
    const Matrix f = random_plane(rng, 10, 14);
    const Matrix same = bicubic_resize(f, 10, 14);
    for (size_t i = 0; i < f.data.size(); ++i) CHECK(same.data[i] == doctest::Approx(f.data[i]).epsilon(1e-12));
}
