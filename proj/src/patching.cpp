#include "osr/patching.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "osr/boundary.hpp"
#include "osr/error.hpp"

namespace osr {

PatchGeometry make_geometry(int rows, int cols, PatchMode mode, int stride, int n_left) {
    if (rows < 1 || cols < 1) throw ContractError("patch dims must be >= 1");
    PatchGeometry g;
    g.rows = rows;
    g.cols = cols;
    g.n_left = n_left < 0 ? (cols - 1) / 2 : n_left;
    g.n_right = cols - 1 - g.n_left;
    if (g.n_right < 0 || g.n_left + g.n_right != cols - 1)
        throw ContractError("window split must satisfy n_left + n_right == cols - 1");
    g.mode = mode;
    if (mode == PatchMode::Patch2Patch) {
        g.stride = stride == 0 ? std::max(1, cols / 2) : stride;
        if (g.stride < 1 || g.stride > std::min(rows, cols))
            throw ContractError("stride must lie in [1, min(rows, cols)] to keep coverage total");
    } else {
        g.stride = 1;
    }
    if (rows < 7 || cols < 7)
        std::fprintf(stderr, "warning: analysis patch %dx%d is below the recommended 7x7 minimum\n", rows, cols);
    return g;
}

AnalysisPatch extract_patch(const Matrix& plane, const PatchGeometry& geom, int row, int col) {
    if (row < 0 || row >= plane.rows || col < 0 || col >= plane.cols)
        throw ContractError("extract_patch: anchor outside plane");
    AnalysisPatch p;
    p.anchor = {row, col};
    p.data = Matrix(geom.rows, geom.cols);
    for (int k = 0; k < geom.rows; ++k) {
        const double* src = plane.row(mirror_index(row - k, plane.rows));
        double* dst = p.data.row(k);
        for (int l = 0; l < geom.cols; ++l) dst[l] = src[mirror_index(col + l - geom.n_left, plane.cols)];
    }
    return p;
}

Matrix extract_footprint(const Matrix& plane, const PatchGeometry& geom, int row, int col) {
    if (row < 0 || row >= plane.rows || col < 0 || col >= plane.cols)
        throw ContractError("extract_footprint: anchor outside plane");
    Matrix out(geom.rows, geom.cols);
    const int top = row - (geom.rows - 1);
    for (int t = 0; t < geom.rows; ++t) {
        const double* src = plane.row(mirror_index(top + t, plane.rows));
        double* dst = out.row(t);
        for (int l = 0; l < geom.cols; ++l) dst[l] = src[mirror_index(col + l - geom.n_left, plane.cols)];
    }
    return out;
}

std::vector<int> stride_grid(int extent, int stride) {
    std::vector<int> grid;
    for (int p = 0; p < extent; p += stride) grid.push_back(p);
    if (grid.back() != extent - 1) grid.push_back(extent - 1);
    return grid;
}

std::vector<Anchor> iterate_anchors(int height, int width, const PatchGeometry& geom) {
    if (height < 1 || width < 1) throw ContractError("iterate_anchors: empty plane");
    std::vector<Anchor> anchors;
    if (geom.mode == PatchMode::Patch2Pixel) {
        anchors.reserve(static_cast<size_t>(height) * width);
        for (int i = 0; i < height; ++i)
            for (int j = 0; j < width; ++j) anchors.push_back({i, j});
        return anchors;
    }
    const std::vector<int> rows = stride_grid(height, geom.stride);
    const std::vector<int> cols = stride_grid(width, geom.stride);
    anchors.reserve(rows.size() * cols.size());
    for (int i : rows)
        for (int j : cols) anchors.push_back({i, j});
    return anchors;
}

void Accumulator::merge(const Accumulator& other) {
    if (!sum_plane.same_shape(other.sum_plane)) throw ShapeError("accumulator merge: shape mismatch");
    for (size_t i = 0; i < sum_plane.data.size(); ++i) {
        sum_plane.data[i] += other.sum_plane.data[i];
        weight_plane.data[i] += other.weight_plane.data[i];
    }
}

Matrix Accumulator::finalize() const {
    Matrix out(sum_plane.rows, sum_plane.cols);
    for (size_t i = 0; i < sum_plane.data.size(); ++i) {
        if (weight_plane.data[i] <= 0.0) throw ContractError("finalize: uncovered pixel in accumulator");
        out.data[i] = sum_plane.data[i] / weight_plane.data[i];
    }
    return out;
}

void scatter_patch(Accumulator& acc, const Matrix& estimate, Anchor anchor, const PatchGeometry& geom) {
    const int h = acc.sum_plane.rows, w = acc.sum_plane.cols;
    if (geom.mode == PatchMode::Patch2Pixel) {
        if (estimate.rows != 1 || estimate.cols != 1) throw ContractError("scatter_patch: expected 1x1 estimate");
        acc.sum_plane.at(anchor.row, anchor.col) += estimate.at(0, 0);
        acc.weight_plane.at(anchor.row, anchor.col) += 1.0;
        return;
    }
    if (estimate.rows != geom.rows || estimate.cols != geom.cols)
        throw ContractError("scatter_patch: estimate dims do not match geometry");
    const int top = anchor.row - (geom.rows - 1);
    const int left = anchor.col - geom.n_left;
    for (int t = 0; t < geom.rows; ++t) {
        const int r = top + t;
        if (r < 0 || r >= h) continue;
        const double* src = estimate.row(t);
        double* sum = acc.sum_plane.row(r);
        double* wgt = acc.weight_plane.row(r);
        for (int l = 0; l < geom.cols; ++l) {
            const int c = left + l;
            if (c < 0 || c >= w) continue;
            sum[c] += src[l];
            wgt[c] += 1.0;
        }
    }
}

double select_output_pixel(const std::vector<double>& segment) {
    if (segment.empty()) throw ContractError("select_output_pixel: empty segment");
    return segment.back();
}

} // namespace osr
