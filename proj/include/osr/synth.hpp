#ifndef OSR_SYNTH_HPP
#define OSR_SYNTH_HPP

#include <cstdint>
#include <string>

#include "osr/image.hpp"

namespace osr {

// Synthetic gray training patterns: "chessboard" (alternating blocks),
// "stripes" (horizontal bands), "dots" (disc grid). block is the period in
// pixels.
Matrix synth_pattern(const std::string& name, int size, int block);

// Procedural photo-like RGB image: smooth shaded background, hard-edged
// shapes, oriented gratings and mild fine-grain texture. `detail` scales the
// texture energy (1.0 gives blur-PSNR behavior comparable to busy natural
// photos).
PlanarImage synth_texture_image(uint64_t seed, int h, int w, double detail = 1.0);

} // namespace osr

#endif
