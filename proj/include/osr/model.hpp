#ifndef OSR_MODEL_HPP
#define OSR_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "osr/image.hpp"
#include "osr/matrix.hpp"
#include "osr/patching.hpp"
#include "osr/rng.hpp"

namespace osr {

// Recurrent encoder z_t = ReLU(W_zy^T y_t + W_zz^T z_{t-1} + b) with linear
// decoder x_t = W_xz^T z_t. y_t is one patch row per time step (top row
// first), z_0 = 0. Intensities are scaled to [0, 1] at the train/restore
// boundary; the core works in that scale.
struct RnnModel {
    Matrix w_zy;              // cols x hidden
    Matrix w_zz;              // hidden x hidden
    std::vector<double> bias; // hidden
    Matrix w_xz;              // hidden x output_cols
    PatchGeometry geom;

    int hidden() const { return w_zz.rows; }
    int input_cols() const { return w_zy.rows; }
    int output_cols() const { return w_xz.cols; }
};

// Uniform [-a, a] init with a = sqrt(6 / (fan_in + fan_out)) per tensor,
// zero bias.
RnnModel init_model(const PatchGeometry& geom, int hidden, Rng& rng);

// One cell update; also the bridge used by the sparse-coding equivalence
// check.
std::vector<double> rnn_cell_step(const RnnModel& m, const std::vector<double>& y_t,
                                  const std::vector<double>& z_prev);

struct ForwardResult {
    Matrix states;  // rows x hidden, time order
    Matrix outputs; // rows x output_cols, time order
};

// patch.data is k-ordered (Definition-1 layout); time step t consumes data
// row rows-1-t so the recurrence walks the image top to bottom and ends on
// the anchor row.
ForwardResult forward(const RnnModel& m, const AnalysisPatch& patch);

enum class LossKind { L1, L2 };

struct ModelGrads {
    Matrix w_zy;
    Matrix w_zz;
    std::vector<double> bias;
    Matrix w_xz;

    explicit ModelGrads(const RnnModel& m);
    void add(const ModelGrads& o);
    void scale(double s);
};

// Mean-per-element loss between a forward pass's outputs and a target of the
// same shape (extract_footprint layout).
double patch_loss(const RnnModel& m, const AnalysisPatch& patch, const Matrix& target, LossKind kind);

// Exact BPTT gradients of patch_loss. ReLU and |.| subgradients at 0 are 0.
ModelGrads backward(const RnnModel& m, const AnalysisPatch& patch, const Matrix& target, LossKind kind);

// ---- optimizer ----

struct TensorRef {
    double* value;
    const double* grad;
    size_t n;
};

struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double eps = 1e-8;
    int64_t step = 0;
    std::vector<std::vector<double>> m; // per tensor, lazily sized
    std::vector<std::vector<double>> v;
};

// Standard bias-corrected Adam update applied in-place.
void adam_step(const std::vector<TensorRef>& tensors, AdamState& st);

// ---- adversarial head ----

// Two fully-connected layers with ReLU between and a sigmoid output; input
// is a flattened patch in [0, 1] scale.
struct Discriminator {
    Matrix w1; // input_dim x hidden
    std::vector<double> b1;
    Matrix w2; // hidden x 1
    std::vector<double> b2; // length 1

    int input_dim() const { return w1.rows; }
    int hidden() const { return w1.cols; }
};

Discriminator init_discriminator(int input_dim, int hidden, Rng& rng);
double disc_prob(const Discriminator& d, const std::vector<double>& x);

// One BCE step (real -> 1, fake -> 0) with batch-mean gradients; returns the
// mean BCE loss at the pre-update parameters.
double disc_bce_step(Discriminator& d, const std::vector<std::vector<double>>& real,
                     const std::vector<std::vector<double>>& fake, AdamState& opt);

// ---- training ----

enum class SamplePolicy { All, RandomPerEpoch, FixedRandom };

struct TrainConfig {
    int epochs_stage1 = 45;
    int epochs_stage2 = 0; // adversarial refinement epochs; 0 disables stage 2
    int batch = 32;
    LossKind loss = LossKind::L2;
    double lambda_adv = 1e-3;
    int hidden = 256;
    uint64_t seed = 0;
    SamplePolicy policy = SamplePolicy::RandomPerEpoch;
    int sample_m = 4096;
    PatchMode mode = PatchMode::Patch2Patch;
    int patch_rows = 9;
    int patch_cols = 9;
    int stride = 0;  // 0 = floor(cols / 2)
    int n_left = -1; // -1 = centered split
    double lr = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double adam_eps = 1e-8;
    int disc_hidden = 256;
    bool residual = false;  // train on (clean - input) residuals
    double stop_risk = 0.0; // > 0: stop stage 1 once epoch loss <= this (intensity^2 units for L2)
    int threads = 1;
};

struct TrainLogEntry {
    int epoch = 0;
    int stage = 1;
    double loss = 0.0;          // mean per-element content loss, intensity units scaled back to [0,255]
    double zero_fraction = 0.0; // fraction of zero latent activations (sparsity telemetry)
    double disc_loss = 0.0;     // stage 2 only
    double adv_loss = 0.0;      // stage 2 only
};

struct TrainResult {
    RnnModel model;
    Discriminator disc;
    bool has_disc = false;
    std::vector<TrainLogEntry> log;
};

// One-shot training from a single degraded/clean pair (same dims; for SR the
// degraded image is bicubic-upsampled to the clean grid by the caller).
// Stage 1 minimizes the content loss over sampled patches; stage 2, when
// enabled, alternates discriminator and generator steps on
// L_MSE + lambda_adv * L_ADV.
TrainResult train_one_shot(const PlanarImage& degraded, const PlanarImage& clean, const TrainConfig& cfg, Rng& rng);

// Full-plane prediction: scan anchors, batch-forward, overlap-average.
// Input and output are [0, 255] planes; in residual mode the prediction is
// added to the input plane.
Matrix restore_luminance(const RnnModel& m, const Matrix& plane, bool residual, int threads = 1);

// Deblurring-style restoration: luminance restored, chroma passed through.
PlanarImage restore_image(const RnnModel& m, const PlanarImage& degraded, bool residual, int threads = 1);

// ---- checkpoint ----

// Binary layout: magic "OSR1", u32 version, u32 tensor count, per tensor
// (u32 name length, name, u32 rows, u32 cols, row-major f32 data), then a
// u32-length-prefixed UTF-8 JSON blob with geometry and run config.
// All integers little-endian.
void save_checkpoint(const RnnModel& m, const std::string& path, const std::string& extra_meta_json = "{}");
RnnModel load_checkpoint(const std::string& path, std::string* meta_json_out = nullptr);

} // namespace osr

#endif
