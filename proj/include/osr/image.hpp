#ifndef OSR_IMAGE_HPP
#define OSR_IMAGE_HPP

#include <vector>

#include "osr/matrix.hpp"

namespace osr {

enum class ColorSpace { Gray, RGB, YCbCr };

// Multi-channel float image, intensities nominally in [0, 255]. Values stay
// in float precision through the whole pipeline; clipping/quantization
// happens only when a file is written.
struct PlanarImage {
    int height = 0;
    int width = 0;
    ColorSpace colorspace = ColorSpace::Gray;
    std::vector<Matrix> planes; // 1 (Gray) or 3 (RGB/YCbCr), each height x width

    PlanarImage() = default;
    PlanarImage(int h, int w, int channels, ColorSpace cs);

    int channels() const { return static_cast<int>(planes.size()); }
    void validate() const;
};

// BT.601 full-range conversion. The Y plane is the luminance channel used for
// inversion and metrics.
PlanarImage rgb_to_ycbcr(const PlanarImage& img);
PlanarImage ycbcr_to_rgb(const PlanarImage& img);

// Luminance plane of any image: Gray plane as-is, RGB via BT.601 Y, YCbCr
// plane 0.
Matrix luminance(const PlanarImage& img);

// Replace the luminance content of `img` with `y`, preserving chroma.
// Gray: returns a gray image of `y`. RGB: converts to YCbCr, swaps Y,
// converts back.
PlanarImage with_luminance(const PlanarImage& img, const Matrix& y);

} // namespace osr

#endif
