#include "osr/resample.hpp"

#include <cmath>

#include "osr/boundary.hpp"
#include "osr/error.hpp"

namespace osr {

namespace {

// Catmull-Rom kernel (bicubic with a = -0.5)
double cubic_weight(double t) {
    t = std::abs(t);
    if (t <= 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
    if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
    return 0.0;
}

struct TapPlan {
    std::vector<int> base;     // leftmost source index per output index
    std::vector<double> w;     // 4 weights per output index
};

TapPlan plan_axis(int src_n, int dst_n) {
    TapPlan plan;
    plan.base.resize(dst_n);
    plan.w.resize(static_cast<size_t>(dst_n) * 4);
    const double scale = static_cast<double>(src_n) / dst_n;
    for (int d = 0; d < dst_n; ++d) {
        const double s = (d + 0.5) * scale - 0.5;
        const int b = static_cast<int>(std::floor(s)) - 1;
        const double frac = s - std::floor(s);
        plan.base[d] = b;
        plan.w[4 * d + 0] = cubic_weight(frac + 1.0);
        plan.w[4 * d + 1] = cubic_weight(frac);
        plan.w[4 * d + 2] = cubic_weight(1.0 - frac);
        plan.w[4 * d + 3] = cubic_weight(2.0 - frac);
    }
    return plan;
}

} // namespace

Matrix bicubic_resize(const Matrix& src, int out_rows, int out_cols) {
    if (out_rows < 1 || out_cols < 1) throw ContractError("bicubic_resize: output dims must be >= 1");
    const TapPlan col_plan = plan_axis(src.cols, out_cols);
    const TapPlan row_plan = plan_axis(src.rows, out_rows);

    // horizontal pass
    Matrix tmp(src.rows, out_cols);
    for (int i = 0; i < src.rows; ++i) {
        const double* srow = src.row(i);
        double* trow = tmp.row(i);
        for (int j = 0; j < out_cols; ++j) {
            const int b = col_plan.base[j];
            const double* w = &col_plan.w[4 * j];
            double s = 0.0;
            for (int t = 0; t < 4; ++t) s += w[t] * srow[mirror_index(b + t, src.cols)];
            trow[j] = s;
        }
    }
    // vertical pass
    Matrix out(out_rows, out_cols);
    for (int i = 0; i < out_rows; ++i) {
        const int b = row_plan.base[i];
        const double* w = &row_plan.w[4 * i];
        double* orow = out.row(i);
        const double* r0 = tmp.row(mirror_index(b + 0, src.rows));
        const double* r1 = tmp.row(mirror_index(b + 1, src.rows));
        const double* r2 = tmp.row(mirror_index(b + 2, src.rows));
        const double* r3 = tmp.row(mirror_index(b + 3, src.rows));
        for (int j = 0; j < out_cols; ++j) orow[j] = w[0] * r0[j] + w[1] * r1[j] + w[2] * r2[j] + w[3] * r3[j];
    }
    return out;
}

PlanarImage bicubic_resize(const PlanarImage& src, int out_h, int out_w) {
    PlanarImage out;
    out.height = out_h;
    out.width = out_w;
    out.colorspace = src.colorspace;
    for (const Matrix& p : src.planes) out.planes.push_back(bicubic_resize(p, out_h, out_w));
    return out;
}

} // namespace osr
