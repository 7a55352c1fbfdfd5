#include "osr/image.hpp"

#include <cmath>

#include "osr/error.hpp"

namespace osr {

PlanarImage::PlanarImage(int h, int w, int channels, ColorSpace cs) : height(h), width(w), colorspace(cs) {
    if (h < 1 || w < 1) throw ShapeError("image dims must be >= 1");
    if (channels != 1 && channels != 3) throw ContractError("channels must be 1 or 3");
    if ((channels == 1) != (cs == ColorSpace::Gray)) throw ContractError("Gray <=> channels == 1");
    planes.assign(channels, Matrix(h, w, 0.0));
}

void PlanarImage::validate() const {
    if (planes.empty()) throw ContractError("image has no planes");
    if ((channels() == 1) != (colorspace == ColorSpace::Gray)) throw ContractError("Gray <=> channels == 1");
    for (const auto& p : planes) {
        if (p.rows != height || p.cols != width) throw ShapeError("plane dims differ from image dims");
        for (double v : p.data)
            if (!std::isfinite(v)) throw ContractError("image holds non-finite values");
    }
}

PlanarImage rgb_to_ycbcr(const PlanarImage& img) {
    if (img.colorspace != ColorSpace::RGB) throw ContractError("rgb_to_ycbcr: input not RGB");
    PlanarImage out(img.height, img.width, 3, ColorSpace::YCbCr);
    const Matrix& r = img.planes[0];
    const Matrix& g = img.planes[1];
    const Matrix& b = img.planes[2];
    for (size_t i = 0; i < r.data.size(); ++i) {
        const double R = r.data[i], G = g.data[i], B = b.data[i];
        out.planes[0].data[i] = 0.299 * R + 0.587 * G + 0.114 * B;
        out.planes[1].data[i] = 128.0 - 0.168735892 * R - 0.331264108 * G + 0.5 * B;
        out.planes[2].data[i] = 128.0 + 0.5 * R - 0.418687589 * G - 0.081312411 * B;
    }
    return out;
}

PlanarImage ycbcr_to_rgb(const PlanarImage& img) {
    if (img.colorspace != ColorSpace::YCbCr) throw ContractError("ycbcr_to_rgb: input not YCbCr");
    PlanarImage out(img.height, img.width, 3, ColorSpace::RGB);
    const Matrix& y = img.planes[0];
    const Matrix& cb = img.planes[1];
    const Matrix& cr = img.planes[2];
    for (size_t i = 0; i < y.data.size(); ++i) {
        const double Y = y.data[i], Cb = cb.data[i] - 128.0, Cr = cr.data[i] - 128.0;
        out.planes[0].data[i] = Y + 1.402 * Cr;
        out.planes[1].data[i] = Y - 0.344136286 * Cb - 0.714136286 * Cr;
        out.planes[2].data[i] = Y + 1.772 * Cb;
    }
    return out;
}

Matrix luminance(const PlanarImage& img) {
    switch (img.colorspace) {
        case ColorSpace::Gray:
        case ColorSpace::YCbCr:
            return img.planes[0];
        case ColorSpace::RGB: {
            Matrix y(img.height, img.width);
            const Matrix& r = img.planes[0];
            const Matrix& g = img.planes[1];
            const Matrix& b = img.planes[2];
            for (size_t i = 0; i < y.data.size(); ++i)
                y.data[i] = 0.299 * r.data[i] + 0.587 * g.data[i] + 0.114 * b.data[i];
            return y;
        }
    }
    throw ContractError("luminance: unknown colorspace");
}

PlanarImage with_luminance(const PlanarImage& img, const Matrix& y) {
    if (y.rows != img.height || y.cols != img.width) throw ShapeError("with_luminance: plane dims mismatch");
    if (img.colorspace == ColorSpace::Gray) {
        PlanarImage out(img.height, img.width, 1, ColorSpace::Gray);
        out.planes[0] = y;
        return out;
    }
    PlanarImage ycc = (img.colorspace == ColorSpace::RGB) ? rgb_to_ycbcr(img) : img;
    ycc.planes[0] = y;
    return (img.colorspace == ColorSpace::RGB) ? ycbcr_to_rgb(ycc) : ycc;
}

} // namespace osr
