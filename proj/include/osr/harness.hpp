#ifndef OSR_HARNESS_HPP
#define OSR_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "osr/image.hpp"
#include "osr/metrics.hpp"
#include "osr/model.hpp"

namespace osr {

// ---- shared run utilities ----

std::vector<std::string> list_images(const std::string& path);
std::string path_stem(const std::string& path);
void ensure_dir(const std::string& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void save(const std::string& path) const;
};

std::string format_double(double v);

// ---- degrade ----

struct DegradeOptions {
    std::string input;   // file or directory
    std::string out_dir;
    double sigma = 1.6;
    int kernel_size = 25;
    double noise_sigma = 1.4142135623730951;
    int decim = 1;
    uint64_t seed = 0;
    int threads = 1;
};

struct DegradeRecord {
    std::string name;
    std::string clean_path;    // cropped clean written next to the degraded file
    std::string degraded_path;
    double psnr = 0.0; // vs clean; only meaningful for decim == 1
    double ssim = 0.0;
};

struct DegradeSummary {
    std::vector<DegradeRecord> records;
    std::string manifest_path;
    std::string csv_path;
};

DegradeSummary cmd_degrade(const DegradeOptions& opt);

// ---- train ----

struct TrainOptions {
    std::string clean_path;
    std::string degraded_path;
    std::string config_path; // optional
    std::string out_checkpoint;
    // CLI overrides; empty string / negative = keep config value
    std::string mode;  // "p2p" | "p2x"
    std::string loss;  // "l1" | "l2"
    bool gan = false;
    int64_t seed = -1;
    int threads = 1;
};

struct TrainSummary {
    std::string checkpoint_path;
    std::string loss_csv_path;
    std::string manifest_path;
    double first_loss = 0.0;
    double final_loss = 0.0;
    int epochs_run = 0;
};

TrainSummary cmd_train(const TrainOptions& opt);

// Config (+ overrides) -> TrainConfig; exposed for the experiment drivers.
TrainConfig build_train_config(const std::string& config_path, const std::string& mode, const std::string& loss,
                               bool gan, int64_t seed, int threads, std::string* canonical_out);

// ---- restore ----

struct RestoreOptions {
    std::string checkpoint;
    std::string input; // file or directory
    std::string out_dir;
    std::string ref; // optional reference file/directory for metrics
    std::string expect_mode; // "", "p2p", "p2x": geometry assertion
    int threads = 1;
};

struct RestoreRecord {
    std::string name;
    std::string restored_path;
    double baseline_psnr = 0.0; // degraded input (deblur) or bicubic (SR)
    double baseline_ssim = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
    bool has_metrics = false;
};

struct RestoreSummary {
    std::vector<RestoreRecord> records;
    double mean_baseline_psnr = 0.0;
    double mean_baseline_ssim = 0.0;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    std::string csv_path;
    std::string manifest_path;
};

RestoreSummary cmd_restore(const RestoreOptions& opt);

// ---- eval ----

struct EvalOptions {
    std::string ref;
    std::string est;
    std::string out_csv;
};

struct EvalSummary {
    std::vector<std::pair<std::string, Metrics>> per_image;
    Metrics aggregate;
};

EvalSummary cmd_eval(const EvalOptions& opt);

// ---- noise sweep ----

struct SweepNoiseOptions {
    std::string checkpoint;
    std::string clean_path;
    std::vector<double> sigmas;
    std::string out_csv;
    uint64_t seed = 0;
    int threads = 1;
};

struct SweepNoiseSummary {
    std::vector<std::pair<double, Metrics>> rows; // (sigma_n, metrics)
    std::string csv_path;
};

SweepNoiseSummary cmd_sweep_noise(const SweepNoiseOptions& opt);

// ---- sample-size study ----

struct SampleSizeOptions {
    std::string clean_path;
    std::string degraded_path;
    std::string config_path; // base training config
    std::vector<int> m_list;
    double delta = 25.0; // stop-risk in intensity^2 units
    std::string eval_dir; // clean eval images; degraded with the config's spec
    std::string out_csv;
    uint64_t seed = 0;
    int threads = 1;
    int max_epochs = 200;
};

struct SampleSizeRow {
    int m = 0;
    double train_risk = 0.0;     // achieved final epoch loss
    double recovery_error = 0.0; // mean per-pixel squared error over eval set
    int epochs = 0;
};

struct SampleSizeSummary {
    std::vector<SampleSizeRow> rows;
    std::string csv_path;
};

SampleSizeSummary cmd_sample_size(const SampleSizeOptions& opt);

// ---- mismatch study ----

struct MismatchOptions {
    std::string checkpoint; // trained at sigma_s (recorded in metadata)
    std::string clean_path;
    std::vector<double> sigmas_t;
    int column = 55;
    std::string out_dir;
    int threads = 1;
};

struct MismatchRow {
    double sigma_t = 0.0;
    double sigma_residual = 0.0; // sqrt(|sigma_s^2 - sigma_t^2|)
    double deviation = 0.0;      // relative l2 deviation on the interior
    std::string kind;            // "matched", "sharper_input", "blurrier_input"
};

struct MismatchSummary {
    double sigma_s = 0.0;
    std::vector<MismatchRow> rows;
    std::string report_path;
};

MismatchSummary cmd_mismatch(const MismatchOptions& opt);

// ---- synthetic pairs ----

struct SynthPairsOptions {
    std::string pattern = "chessboard"; // chessboard | stripes | dots
    int size = 128;
    int block = 16;
    double sigma = 1.6;
    int kernel_size = 25;
    double noise_sigma = 1.4142135623730951;
    int decim = 1;
    uint64_t seed = 0;
    std::string out_dir;
};

struct SynthPairsSummary {
    std::string clean_path;
    std::string degraded_path;
};

SynthPairsSummary cmd_synth_pairs(const SynthPairsOptions& opt);

// ---- sparse-coding demo ----

struct ScDemoOptions {
    int n = 8;
    int m = 16;
    int sparsity = 3;
    double lambda = 0.1;
    int iters = 200;
    uint64_t seed = 0;
    std::string out_dir;
};

struct ScDemoSummary {
    double final_cost = 0.0;
    bool converged = false;
    bool cost_monotone = false;
    double equiv_max_deviation = 0.0;
    std::string cost_csv_path;
    std::string report_path;
};

ScDemoSummary cmd_sc_demo(const ScDemoOptions& opt);

} // namespace osr

#endif
