#ifndef OSR_RESAMPLE_HPP
#define OSR_RESAMPLE_HPP

#include "osr/image.hpp"
#include "osr/matrix.hpp"

namespace osr {

// Bicubic (Catmull-Rom, a = -0.5) resize with mirror boundaries, pixel-center
// coordinate mapping. Used for the SR pre-upsampling path and chroma
// upsampling.
Matrix bicubic_resize(const Matrix& src, int out_rows, int out_cols);

PlanarImage bicubic_resize(const PlanarImage& src, int out_h, int out_w);

} // namespace osr

#endif
