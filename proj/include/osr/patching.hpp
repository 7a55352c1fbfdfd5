#ifndef OSR_PATCHING_HPP
#define OSR_PATCHING_HPP

#include <vector>

#include "osr/matrix.hpp"

namespace osr {

enum class PatchMode { Patch2Pixel, Patch2Patch };

// Analysis-patch geometry: rows (time steps) x cols, with the horizontal
// window split n_left + n_right = cols - 1 around the anchor column.
struct PatchGeometry {
    int rows = 1;    // time steps per patch
    int cols = 1;    // samples per time step
    int n_left = 0;  // columns reaching left of the anchor
    int n_right = 0; // columns reaching right of the anchor
    PatchMode mode = PatchMode::Patch2Patch;
    int stride = 1; // Patch2Patch scan stride

    // model output width per time step
    int output_cols() const { return mode == PatchMode::Patch2Pixel ? 1 : cols; }
};

// Validates the split constraint and stride; negative n_left selects the
// centered default split floor((cols-1)/2). stride 0 selects floor(cols/2).
// Sizes below 7x7 are allowed but warned about on stderr.
PatchGeometry make_geometry(int rows, int cols, PatchMode mode, int stride = 0, int n_left = -1);

struct Anchor {
    int row = 0;
    int col = 0;
    bool operator==(const Anchor&) const = default;
};

// Patch associated with output location (row, col): element (k, l) is
// plane[row - k, col + l - n_left], mirror-extended where indices leave the
// plane. Row k = 0 is the anchor row; k grows upward in the image.
struct AnalysisPatch {
    Matrix data; // rows x cols, k-ordered
    Anchor anchor;
};

AnalysisPatch extract_patch(const Matrix& plane, const PatchGeometry& geom, int row, int col);

// Same pixels in scan order (top image row first): row t is image row
// anchor.row - (rows - 1) + t. This is the layout the recurrent model
// consumes and produces.
Matrix extract_footprint(const Matrix& plane, const PatchGeometry& geom, int row, int col);

// Scan grid: Patch2Pixel visits every pixel row-major; Patch2Patch visits the
// stride grid per axis with the final row/col forced in so the scan covers
// the whole plane. Stride 1 reproduces the Patch2Pixel grid.
std::vector<Anchor> iterate_anchors(int height, int width, const PatchGeometry& geom);

// {0, stride, 2*stride, ...} plus extent-1 if not already on the grid.
std::vector<int> stride_grid(int extent, int stride);

// Overlap-averaging accumulator for patch estimates.
struct Accumulator {
    Matrix sum_plane;
    Matrix weight_plane;

    Accumulator(int height, int width) : sum_plane(height, width, 0.0), weight_plane(height, width, 0.0) {}

    // Merge another accumulator (for per-thread partials): plain addition.
    void merge(const Accumulator& other);

    // sum / weight; throws if any pixel was never covered.
    Matrix finalize() const;
};

// Adds `estimate` over the patch footprint anchored at `anchor`. Estimates
// are in scan order (extract_footprint layout): Patch2Pixel passes a 1x1
// value placed at the anchor, Patch2Patch a rows x cols patch whose last row
// lands on the anchor row. Footprint pixels outside the plane are discarded.
void scatter_patch(Accumulator& acc, const Matrix& estimate, Anchor anchor, const PatchGeometry& geom);

// Keeps the final element of a predicted segment (the anchor-row output).
double select_output_pixel(const std::vector<double>& segment);

} // namespace osr

#endif
