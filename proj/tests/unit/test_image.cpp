#include <doctest.h>

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "osr/image.hpp"
#include "osr/image_io.hpp"
#include "osr/rng.hpp"

using namespace osr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "osr_image_tests";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

PlanarImage random_rgb(Rng& rng, int h, int w) {
    PlanarImage img(h, w, 3, ColorSpace::RGB);
    for (auto& plane : img.planes)
        for (double& v : plane.data) v = static_cast<double>(rng.next_int(256));
    return img;
}

void write_16bit_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, 2, 2, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    unsigned char row[4] = {0, 1, 255, 255};
    for (int i = 0; i < 2; ++i) png_write_row(png, row);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

} // namespace

TEST_CASE("pgm bytes map directly to float intensities") {
    const auto path = (temp_dir() / "tiny.pgm").string();
    std::ofstream out(path, std::ios::binary);
    out << "P5\n2 2\n255\n";
    const unsigned char bytes[4] = {0, 128, 255, 64};
    out.write(reinterpret_cast<const char*>(bytes), 4);
    out.close();

    const PlanarImage img = load_image(path);
    CHECK(img.colorspace == ColorSpace::Gray);
    CHECK(img.height == 2);
    CHECK(img.width == 2);
    CHECK(img.planes[0].at(0, 0) == 0.0);
    CHECK(img.planes[0].at(0, 1) == 128.0);
    CHECK(img.planes[0].at(1, 0) == 255.0);
    CHECK(img.planes[0].at(1, 1) == 64.0);
}

TEST_CASE("save/load round trip preserves integer values") {
    Rng rng(17);
    const PlanarImage img = random_rgb(rng, 9, 13);
    for (const char* ext : {"png", "ppm"}) {
        const auto path = (temp_dir() / (std::string("rt.") + ext)).string();
        save_image(img, path);
        const PlanarImage back = load_image(path);
        REQUIRE(back.height == img.height);
        REQUIRE(back.width == img.width);
        for (int ch = 0; ch < 3; ++ch)
            for (size_t i = 0; i < img.planes[ch].data.size(); ++i)
                CHECK(back.planes[ch].data[i] == img.planes[ch].data[i]);
    }
}

TEST_CASE("16-bit png is a format error") {
    const auto path = (temp_dir() / "deep.png").string();
    write_16bit_png(path);
    CHECK_THROWS_AS(load_image(path), FormatError);
}

TEST_CASE("missing file is an i/o error") {
    CHECK_THROWS_AS(load_image((temp_dir() / "nope.png").string()), IoError);
}

TEST_CASE("bt.601 forced values for white and black") {
    PlanarImage white(1, 1, 3, ColorSpace::RGB);
    for (auto& p : white.planes) p.at(0, 0) = 255.0;
    const PlanarImage wy = rgb_to_ycbcr(white);
    CHECK(wy.planes[0].at(0, 0) == doctest::Approx(255.0).epsilon(0.002));
    CHECK(wy.planes[1].at(0, 0) == doctest::Approx(128.0).epsilon(0.004));
    CHECK(wy.planes[2].at(0, 0) == doctest::Approx(128.0).epsilon(0.004));

    PlanarImage black(1, 1, 3, ColorSpace::RGB);
    const PlanarImage by = rgb_to_ycbcr(black);
    CHECK(by.planes[0].at(0, 0) == doctest::Approx(0.0).epsilon(0.002));
    CHECK(by.planes[1].at(0, 0) == doctest::Approx(128.0).epsilon(0.004));
    CHECK(by.planes[2].at(0, 0) == doctest::Approx(128.0).epsilon(0.004));

    PlanarImage neutral(1, 1, 3, ColorSpace::YCbCr);
    neutral.planes[0].at(0, 0) = 255.0;
    neutral.planes[1].at(0, 0) = 128.0;
    neutral.planes[2].at(0, 0) = 128.0;
    const PlanarImage rgb = ycbcr_to_rgb(neutral);
    for (int ch = 0; ch < 3; ++ch) CHECK(rgb.planes[ch].at(0, 0) == doctest::Approx(255.0).epsilon(0.004));
}

TEST_CASE("ycbcr round trip stays below one intensity level") {
    Rng rng(5);
    const PlanarImage img = random_rgb(rng, 16, 16);
    const PlanarImage back = ycbcr_to_rgb(rgb_to_ycbcr(img));
    double max_err = 0.0;
    for (int ch = 0; ch < 3; ++ch)
        for (size_t i = 0; i < img.planes[ch].data.size(); ++i)
            max_err = std::max(max_err, std::abs(back.planes[ch].data[i] - img.planes[ch].data[i]));
    CHECK(max_err < 1.0);
}

TEST_CASE("gray rgb pixel maps to matching luminance") {
    for (double v : {0.0, 17.0, 99.5, 255.0}) {
        PlanarImage img(1, 1, 3, ColorSpace::RGB);
        for (auto& p : img.planes) p.at(0, 0) = v;
        CHECK(std::abs(luminance(img).at(0, 0) - v) < 0.5);
    }
}

TEST_CASE("conversion is per-pixel: permutation commutes") {
    Rng rng(29);
    const PlanarImage img = random_rgb(rng, 4, 4);
    const PlanarImage conv = rgb_to_ycbcr(img);
    // swap two pixels, convert, compare against swapping after conversion
    PlanarImage swapped = img;
    for (int ch = 0; ch < 3; ++ch) std::swap(swapped.planes[ch].at(0, 0), swapped.planes[ch].at(3, 2));
    const PlanarImage conv_swapped = rgb_to_ycbcr(swapped);
    PlanarImage expect = conv;
    for (int ch = 0; ch < 3; ++ch) std::swap(expect.planes[ch].at(0, 0), expect.planes[ch].at(3, 2));
    for (int ch = 0; ch < 3; ++ch)
        for (size_t i = 0; i < expect.planes[ch].data.size(); ++i)
            CHECK(conv_swapped.planes[ch].data[i] == expect.planes[ch].data[i]);
}

TEST_CASE("colorspace contracts are enforced") {
    PlanarImage gray(2, 2, 1, ColorSpace::Gray);
    CHECK_THROWS_AS(rgb_to_ycbcr(gray), ContractError);
    PlanarImage rgb(2, 2, 3, ColorSpace::RGB);
    CHECK_THROWS_AS(ycbcr_to_rgb(rgb), ContractError);
}

TEST_CASE("with_luminance swaps Y and keeps chroma") {
    Rng rng(31);
    const PlanarImage img = random_rgb(rng, 6, 6);
    const Matrix y = luminance(img);
    const PlanarImage same = with_luminance(img, y);
    // same luminance -> near-identical image
    for (int ch = 0; ch < 3; ++ch)
        for (size_t i = 0; i < img.planes[ch].data.size(); ++i)
            CHECK(std::abs(same.planes[ch].data[i] - img.planes[ch].data[i]) < 1e-9);
}
