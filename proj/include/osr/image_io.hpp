#ifndef OSR_IMAGE_IO_HPP
#define OSR_IMAGE_IO_HPP

#include <string>

#include "osr/image.hpp"

namespace osr {

// Loads an 8-bit PNG, PGM (P5) or PPM (P6) file into float intensities equal
// to the stored integer values. 16-bit or paletted inputs are format errors.
PlanarImage load_image(const std::string& path);

// Writes PNG/PGM/PPM by extension (.png/.pgm/.ppm). Values are clipped to
// [0, 255] and rounded to nearest here and only here. YCbCr images are
// converted to RGB before writing.
void save_image(const PlanarImage& img, const std::string& path);

} // namespace osr

#endif
