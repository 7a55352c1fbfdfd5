#include "osr/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include "osr/error.hpp"

namespace osr {

namespace {

uint8_t quantize(double v) {
    double q = std::nearbyint(v);
    if (q < 0.0) q = 0.0;
    if (q > 255.0) q = 255.0;
    return static_cast<uint8_t>(q);
}

std::string lower_ext(const std::string& path) {
    auto pos = path.find_last_of('.');
    if (pos == std::string::npos) return "";
    std::string ext = path.substr(pos + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

// ---- PNM (P5 gray / P6 rgb, binary, maxval 255) ----

int pnm_token(std::istream& in) {
    // skips whitespace and '#' comments, then reads one unsigned int
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c == EOF) throw FormatError("pnm: truncated header");
    int value = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        any = true;
        c = in.get();
    }
    if (!any) throw FormatError("pnm: malformed header token");
    return value;
}

PlanarImage load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
        throw FormatError("pnm: unsupported magic in " + path);
    const bool color = magic[1] == '6';
    const int w = pnm_token(in);
    const int h = pnm_token(in);
    const int maxval = pnm_token(in);
    if (maxval != 255) throw FormatError("pnm: only 8-bit (maxval 255) supported");
    // exactly one whitespace byte separates header from raster
    const int channels = color ? 3 : 1;
    std::vector<uint8_t> raster(static_cast<size_t>(w) * h * channels);
    in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (static_cast<size_t>(in.gcount()) != raster.size()) throw FormatError("pnm: truncated raster in " + path);

    PlanarImage img(h, w, channels, color ? ColorSpace::RGB : ColorSpace::Gray);
    size_t idx = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            for (int ch = 0; ch < channels; ++ch) img.planes[ch].at(r, c) = static_cast<double>(raster[idx++]);
    return img;
}

void save_pnm(const PlanarImage& img, const std::string& path, bool color) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << (color ? "P6\n" : "P5\n") << img.width << " " << img.height << "\n255\n";
    const int channels = color ? 3 : 1;
    std::vector<uint8_t> raster(static_cast<size_t>(img.width) * img.height * channels);
    size_t idx = 0;
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c)
            for (int ch = 0; ch < channels; ++ch) raster[idx++] = quantize(img.planes[ch].at(r, c));
    out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (!out) throw IoError("short write on " + path);
}

// ---- PNG via libpng ----

struct PngReadCtx {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReadCtx() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

PlanarImage load_png(const std::string& path) {
    PngReadCtx ctx;
    ctx.fp = std::fopen(path.c_str(), "rb");
    if (!ctx.fp) throw IoError("cannot open " + path);
    uint8_t sig[8];
    if (std::fread(sig, 1, 8, ctx.fp) != 8 || png_sig_cmp(sig, 0, 8)) throw FormatError("png: bad signature in " + path);

    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw IoError("png: allocation failure");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw IoError("png: allocation failure");
    if (setjmp(png_jmpbuf(ctx.png))) throw FormatError("png: decode failure in " + path);

    png_init_io(ctx.png, ctx.fp);
    png_set_sig_bytes(ctx.png, 8);
    png_read_info(ctx.png, ctx.info);

    const int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    if (bit_depth == 16) throw FormatError("png: 16-bit depth unsupported (" + path + ")");
    const int color_type = png_get_color_type(ctx.png, ctx.info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
    if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
    png_set_strip_alpha(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    const int w = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    const int h = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
    const int channels = png_get_channels(ctx.png, ctx.info);
    if (channels != 1 && channels != 3) throw FormatError("png: unsupported channel count");

    std::vector<uint8_t> raster(static_cast<size_t>(w) * h * channels);
    std::vector<png_bytep> rows(h);
    for (int r = 0; r < h; ++r) rows[r] = raster.data() + static_cast<size_t>(r) * w * channels;
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);

    PlanarImage img(h, w, channels, channels == 3 ? ColorSpace::RGB : ColorSpace::Gray);
    size_t idx = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            for (int ch = 0; ch < channels; ++ch) img.planes[ch].at(r, c) = static_cast<double>(raster[idx++]);
    return img;
}

struct PngWriteCtx {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriteCtx() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void save_png(const PlanarImage& img, const std::string& path, bool color) {
    PngWriteCtx ctx;
    ctx.fp = std::fopen(path.c_str(), "wb");
    if (!ctx.fp) throw IoError("cannot write " + path);
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw IoError("png: allocation failure");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw IoError("png: allocation failure");
    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("png: encode failure for " + path);

    png_init_io(ctx.png, ctx.fp);
    // fixed settings keep output bytes reproducible
    png_set_compression_level(ctx.png, 6);
    png_set_IHDR(ctx.png, ctx.info, img.width, img.height, 8,
                 color ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);

    const int channels = color ? 3 : 1;
    std::vector<uint8_t> raster(static_cast<size_t>(img.width) * img.height * channels);
    size_t idx = 0;
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c)
            for (int ch = 0; ch < channels; ++ch) raster[idx++] = quantize(img.planes[ch].at(r, c));
    std::vector<png_bytep> rows(img.height);
    for (int r = 0; r < img.height; ++r) rows[r] = raster.data() + static_cast<size_t>(r) * img.width * channels;
    png_write_image(ctx.png, rows.data());
    png_write_end(ctx.png, nullptr);
}

} // namespace

PlanarImage load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path);
    char head[2] = {0, 0};
    probe.read(head, 2);
    probe.close();
    if (head[0] == 'P' && (head[1] == '5' || head[1] == '6')) return load_pnm(path);
    if (static_cast<uint8_t>(head[0]) == 0x89 && head[1] == 'P') return load_png(path);
    throw FormatError("unsupported image format: " + path);
}

void save_image(const PlanarImage& img, const std::string& path) {
    const PlanarImage* src = &img;
    PlanarImage converted;
    if (img.colorspace == ColorSpace::YCbCr) {
        converted = ycbcr_to_rgb(img);
        src = &converted;
    }
    const bool color = src->channels() == 3;
    const std::string ext = lower_ext(path);
    if (ext == "png") {
        save_png(*src, path, color);
    } else if (ext == "pgm") {
        if (color) throw ContractError("pgm holds grayscale only: " + path);
        save_pnm(*src, path, false);
    } else if (ext == "ppm") {
        PlanarImage rgb = *src;
        if (!color) {
            rgb = PlanarImage(src->height, src->width, 3, ColorSpace::RGB);
            for (int ch = 0; ch < 3; ++ch) rgb.planes[ch] = src->planes[0];
        }
        save_pnm(rgb, path, true);
    } else {
        throw FormatError("unsupported output extension: " + path);
    }
}

} // namespace osr
