#include "osr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "osr/config.hpp"
#include "osr/degrade.hpp"
#include "osr/error.hpp"
#include "osr/image_io.hpp"
#include "osr/resample.hpp"
#include "osr/rng.hpp"
#include "osr/sparse.hpp"
#include "osr/synth.hpp"

namespace osr {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void write_manifest(const std::string& out_dir, json manifest) {
    ensure_dir(out_dir);
    std::ofstream out(fs::path(out_dir) / "manifest.json");
    if (!out) throw IoError("cannot write manifest in " + out_dir);
    out << manifest.dump(2) << "\n";
}

Matrix crop(const Matrix& p, int h, int w) {
    Matrix out(h, w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) out.at(i, j) = p.at(i, j);
    return out;
}

PlanarImage crop(const PlanarImage& img, int h, int w) {
    PlanarImage out;
    out.height = h;
    out.width = w;
    out.colorspace = img.colorspace;
    for (const auto& p : img.planes) out.planes.push_back(crop(p, h, w));
    return out;
}

json meta_of_checkpoint(const std::string& path, RnnModel* model_out) {
    std::string blob;
    RnnModel m = load_checkpoint(path, &blob);
    if (model_out) *model_out = std::move(m);
    return json::parse(blob);
}

} // namespace

std::vector<std::string> list_images(const std::string& path) {
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path)) {
            if (!entry.is_regular_file()) continue;
            std::string ext = entry.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
            if (ext == ".png" || ext == ".pgm" || ext == ".ppm") files.push_back(entry.path().string());
        }
        std::sort(files.begin(), files.end());
    } else if (fs::exists(path)) {
        files.push_back(path);
    } else {
        throw IoError("no such file or directory: " + path);
    }
    if (files.empty()) throw IoError("no images found under " + path);
    return files;
}

std::string path_stem(const std::string& path) { return fs::path(path).stem().string(); }

void ensure_dir(const std::string& path) {
    if (!path.empty()) fs::create_directories(path);
}

void CsvTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write csv " + path);
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// ---- degrade ----

DegradeSummary cmd_degrade(const DegradeOptions& opt) {
    const int64_t t0 = now_ms();
    const auto files = list_images(opt.input);
    ensure_dir(opt.out_dir);
    const DegradationSpec spec{make_gaussian_kernel(opt.kernel_size, opt.sigma), opt.noise_sigma, opt.decim};

    const std::string canon = "cmd=degrade\ndecim=" + std::to_string(opt.decim) +
                              "\nkernel_size=" + std::to_string(opt.kernel_size) +
                              "\nnoise_sigma=" + format_double(opt.noise_sigma) + "\nseed=" + std::to_string(opt.seed) +
                              "\nsigma=" + format_double(opt.sigma) + "\n";
    const std::string hash = hash_hex(fnv1a64(canon));

    DegradeSummary summary;
    CsvTable csv;
    csv.header = {"file", "psnr_vs_clean", "ssim_vs_clean", "config_hash"};
    json files_json = json::array();

    for (size_t idx = 0; idx < files.size(); ++idx) {
        DegradeRecord rec;
        rec.name = path_stem(files[idx]);
        try {
            PlanarImage clean = load_image(files[idx]);
            if (opt.decim > 1) {
                const int h = clean.height - clean.height % opt.decim;
                const int w = clean.width - clean.width % opt.decim;
                if (h < spec.kernel.size || w < spec.kernel.size)
                    throw ContractError("image too small for decimation factor");
                clean = crop(clean, h, w);
            }
            Rng rng(derive_seed(opt.seed, idx));
            const PlanarImage degraded = degrade(clean, spec, rng);

            rec.clean_path = (fs::path(opt.out_dir) / (rec.name + "_clean.png")).string();
            rec.degraded_path = (fs::path(opt.out_dir) / (rec.name + "_degraded.png")).string();
            save_image(clean, rec.clean_path);
            save_image(degraded, rec.degraded_path);

            if (opt.decim == 1) {
                const Metrics m = compute_metrics(clean, degraded);
                rec.psnr = m.psnr_db;
                rec.ssim = m.ssim;
                csv.rows.push_back({rec.name, format_double(m.psnr_db), format_double(m.ssim), hash});
            } else {
                csv.rows.push_back({rec.name, "", "", hash});
            }
            files_json.push_back({{"input", files[idx]}, {"clean", rec.clean_path}, {"degraded", rec.degraded_path}});
            summary.records.push_back(rec);
        } catch (const std::exception& e) {
            // per-file failures are reported and the run continues
            std::fprintf(stderr, "degrade: %s: %s\n", files[idx].c_str(), e.what());
            files_json.push_back({{"input", files[idx]}, {"error", e.what()}});
        }
    }

    summary.csv_path = (fs::path(opt.out_dir) / "degrade_metrics.csv").string();
    csv.save(summary.csv_path);

    json manifest = {
        {"command", "degrade"},
        {"seed", opt.seed},
        {"config_hash", hash},
        {"spec",
         {{"sigma", opt.sigma},
          {"kernel_size", opt.kernel_size},
          {"noise_sigma", opt.noise_sigma},
          {"decimation", opt.decim}}},
        {"files", files_json},
        {"timing_ms", now_ms() - t0},
    };
    write_manifest(opt.out_dir, manifest);
    summary.manifest_path = (fs::path(opt.out_dir) / "manifest.json").string();
    return summary;
}

// ---- train ----

TrainConfig build_train_config(const std::string& config_path, const std::string& mode, const std::string& loss,
                               bool gan, int64_t seed, int threads, std::string* canonical_out) {
    ConfigMap cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path, train_config_keys());

    TrainConfig tc;
    tc.epochs_stage1 = cfg.get_int("epochs", 45);
    tc.epochs_stage2 = cfg.get_int("epochs_gan", 0);
    tc.batch = cfg.get_int("batch", 32);
    tc.hidden = cfg.get_int("nn", 256);
    tc.sample_m = cfg.get_int("sample_m", 4096);
    const int patch = cfg.get_int("patch", 9);
    tc.patch_rows = cfg.get_int("patch_rows", patch);
    tc.patch_cols = cfg.get_int("patch_cols", patch);
    tc.stride = cfg.get_int("stride", 0);
    tc.n_left = cfg.get_int("n_left", -1);
    tc.lr = cfg.get_double("lr", 1e-4);
    tc.beta1 = cfg.get_double("beta1", 0.5);
    tc.beta2 = cfg.get_double("beta2", 0.9);
    tc.adam_eps = cfg.get_double("adam_eps", 1e-8);
    tc.lambda_adv = cfg.get_double("lambda_adv", 1e-3);
    tc.disc_hidden = cfg.get_int("disc_hidden", 256);
    tc.residual = cfg.get_bool("residual", false);
    tc.stop_risk = cfg.get_double("stop_risk", 0.0);
    tc.seed = cfg.get_u64("seed", 0);
    tc.threads = cfg.get_int("threads", threads);

    const std::string policy = cfg.get_string("sample_policy", "random_m");
    if (policy == "all") tc.policy = SamplePolicy::All;
    else if (policy == "random_m") tc.policy = SamplePolicy::RandomPerEpoch;
    else if (policy == "fixed_m") tc.policy = SamplePolicy::FixedRandom;
    else throw ConfigError("sample_policy must be all|random_m|fixed_m, got '" + policy + "'");

    std::string mode_str = cfg.get_string("mode", "p2p");
    if (!mode.empty()) mode_str = mode;
    if (mode_str == "p2p") tc.mode = PatchMode::Patch2Patch;
    else if (mode_str == "p2x") tc.mode = PatchMode::Patch2Pixel;
    else throw ConfigError("mode must be p2p|p2x, got '" + mode_str + "'");

    std::string loss_str = cfg.get_string("loss", "l2");
    if (!loss.empty()) loss_str = loss;
    if (loss_str == "l2") tc.loss = LossKind::L2;
    else if (loss_str == "l1") tc.loss = LossKind::L1;
    else throw ConfigError("loss must be l1|l2, got '" + loss_str + "'");

    if (gan && tc.epochs_stage2 == 0) tc.epochs_stage2 = 80;
    if (!gan && cfg.get_int("epochs_gan", 0) == 0) tc.epochs_stage2 = 0;
    if (seed >= 0) tc.seed = static_cast<uint64_t>(seed);

    if (canonical_out) {
        std::string canon = cfg.canonical();
        canon += "resolved_loss=" + loss_str + "\nresolved_mode=" + mode_str + "\n";
        canon += "resolved_seed=" + std::to_string(tc.seed) + "\n";
        canon += "resolved_gan_epochs=" + std::to_string(tc.epochs_stage2) + "\n";
        *canonical_out = canon;
    }
    return tc;
}

TrainSummary cmd_train(const TrainOptions& opt) {
    const int64_t t0 = now_ms();
    std::string canon;
    TrainConfig tc = build_train_config(opt.config_path, opt.mode, opt.loss, opt.gan, opt.seed, opt.threads, &canon);

    PlanarImage clean = load_image(opt.clean_path);
    PlanarImage degraded = load_image(opt.degraded_path);
    int scale = 1;
    if (degraded.height != clean.height || degraded.width != clean.width) {
        // SR pair: pre-upsample to the clean grid and learn the residual
        if (clean.height % degraded.height != 0 || clean.width % degraded.width != 0 ||
            clean.height / degraded.height != clean.width / degraded.width)
            throw ContractError("train: degraded dims must divide clean dims by an integer factor");
        scale = clean.height / degraded.height;
        degraded = bicubic_resize(degraded, clean.height, clean.width);
        tc.residual = true;
    }

    const std::string hash = hash_hex(fnv1a64(canon));
    Rng rng(tc.seed);
    TrainResult result = train_one_shot(degraded, clean, tc, rng);

    const fs::path ckpt_path(opt.out_checkpoint);
    ensure_dir(ckpt_path.parent_path().string());

    // degradation provenance for the mismatch/sweep drivers
    ConfigMap file_cfg;
    if (!opt.config_path.empty()) file_cfg = parse_config_file(opt.config_path, train_config_keys());
    json meta = {
        {"residual", tc.residual},
        {"scale", scale},
        {"sigma_s", file_cfg.get_double("sigma", 1.6)},
        {"kernel_size", file_cfg.get_int("kernel_size", 25)},
        {"noise_sigma", file_cfg.get_double("noise_sigma", 1.4142135623730951)},
        {"loss", tc.loss == LossKind::L2 ? "l2" : "l1"},
        {"seed", tc.seed},
        {"config_hash", hash},
    };
    save_checkpoint(result.model, opt.out_checkpoint, meta.dump());

    TrainSummary summary;
    summary.checkpoint_path = opt.out_checkpoint;
    summary.loss_csv_path = ckpt_path.parent_path().empty()
                                ? ckpt_path.stem().string() + "_loss.csv"
                                : (ckpt_path.parent_path() / (ckpt_path.stem().string() + "_loss.csv")).string();

    CsvTable csv;
    csv.header = {"epoch", "stage", "loss", "zero_fraction", "disc_loss", "adv_loss", "config_hash"};
    for (const auto& e : result.log)
        csv.rows.push_back({std::to_string(e.epoch), std::to_string(e.stage), format_double(e.loss),
                            format_double(e.zero_fraction), format_double(e.disc_loss), format_double(e.adv_loss),
                            hash});
    csv.save(summary.loss_csv_path);

    if (!result.log.empty()) {
        summary.first_loss = result.log.front().loss;
        // final stage-1 loss
        for (const auto& e : result.log)
            if (e.stage == 1) summary.final_loss = e.loss;
        summary.epochs_run = static_cast<int>(result.log.size());
    }

    json manifest = {
        {"command", "train"},
        {"clean", opt.clean_path},
        {"degraded", opt.degraded_path},
        {"checkpoint", opt.out_checkpoint},
        {"loss_csv", summary.loss_csv_path},
        {"config_hash", hash},
        {"seed", tc.seed},
        {"scale", scale},
        {"timing_ms", now_ms() - t0},
    };
    const std::string mdir = ckpt_path.parent_path().string();
    write_manifest(mdir.empty() ? "." : mdir, manifest);
    summary.manifest_path = (fs::path(mdir.empty() ? "." : mdir) / "manifest.json").string();
    return summary;
}

// ---- restore ----

RestoreSummary cmd_restore(const RestoreOptions& opt) {
    const int64_t t0 = now_ms();
    RnnModel model;
    const json meta = meta_of_checkpoint(opt.checkpoint, &model);
    if (!opt.expect_mode.empty()) {
        const std::string have = model.geom.mode == PatchMode::Patch2Pixel ? "p2x" : "p2p";
        if (have != opt.expect_mode)
            throw ContractError("checkpoint geometry is " + have + ", expected " + opt.expect_mode);
    }
    const bool residual = meta.value("residual", false);
    const int scale = meta.value("scale", 1);

    const auto files = list_images(opt.input);
    std::vector<std::string> refs;
    if (!opt.ref.empty()) {
        refs = list_images(opt.ref);
        if (refs.size() != files.size())
            throw ContractError("reference count differs from input count");
    }
    ensure_dir(opt.out_dir);

    const std::string canon = "ckpt_hash=" + meta.value("config_hash", std::string("none")) + "\ncmd=restore\n";
    const std::string hash = hash_hex(fnv1a64(canon));

    RestoreSummary summary;
    CsvTable csv;
    csv.header = {"file", "baseline_psnr", "baseline_ssim", "psnr", "ssim", "config_hash"};

    for (size_t idx = 0; idx < files.size(); ++idx) {
        PlanarImage input = load_image(files[idx]);
        PlanarImage baseline;
        PlanarImage restored;
        if (scale > 1) {
            baseline = bicubic_resize(input, input.height * scale, input.width * scale);
            const Matrix y = restore_luminance(model, luminance(baseline), residual, opt.threads);
            restored = with_luminance(baseline, y);
        } else {
            baseline = input;
            restored = restore_image(model, input, residual, opt.threads);
        }
        RestoreRecord rec;
        rec.name = path_stem(files[idx]);
        rec.restored_path = (fs::path(opt.out_dir) / (rec.name + "_restored.png")).string();
        save_image(restored, rec.restored_path);

        if (!refs.empty()) {
            const PlanarImage ref = load_image(refs[idx]);
            const Metrics base = compute_metrics(ref, baseline);
            const Metrics est = compute_metrics(ref, restored);
            rec.baseline_psnr = base.psnr_db;
            rec.baseline_ssim = base.ssim;
            rec.psnr = est.psnr_db;
            rec.ssim = est.ssim;
            rec.has_metrics = true;
            csv.rows.push_back({rec.name, format_double(base.psnr_db), format_double(base.ssim),
                                format_double(est.psnr_db), format_double(est.ssim), hash});
        } else {
            csv.rows.push_back({rec.name, "", "", "", "", hash});
        }
        summary.records.push_back(rec);
    }

    int counted = 0;
    for (const auto& rec : summary.records) {
        if (!rec.has_metrics) continue;
        summary.mean_baseline_psnr += rec.baseline_psnr;
        summary.mean_baseline_ssim += rec.baseline_ssim;
        summary.mean_psnr += rec.psnr;
        summary.mean_ssim += rec.ssim;
        ++counted;
    }
    if (counted > 0) {
        summary.mean_baseline_psnr /= counted;
        summary.mean_baseline_ssim /= counted;
        summary.mean_psnr /= counted;
        summary.mean_ssim /= counted;
        csv.rows.push_back({"mean", format_double(summary.mean_baseline_psnr), format_double(summary.mean_baseline_ssim),
                            format_double(summary.mean_psnr), format_double(summary.mean_ssim), hash});
    }

    summary.csv_path = (fs::path(opt.out_dir) / "restore_metrics.csv").string();
    csv.save(summary.csv_path);

    json manifest = {
        {"command", "restore"}, {"checkpoint", opt.checkpoint}, {"input", opt.input},
        {"out_dir", opt.out_dir}, {"config_hash", hash},        {"timing_ms", now_ms() - t0},
    };
    write_manifest(opt.out_dir, manifest);
    summary.manifest_path = (fs::path(opt.out_dir) / "manifest.json").string();
    return summary;
}

// ---- eval ----

EvalSummary cmd_eval(const EvalOptions& opt) {
    const auto refs = list_images(opt.ref);
    const auto ests = list_images(opt.est);
    if (refs.size() != ests.size()) throw ContractError("eval: reference and estimate counts differ");

    const std::string hash = hash_hex(fnv1a64("cmd=eval\n"));
    EvalSummary summary;
    CsvTable csv;
    csv.header = {"file", "psnr", "ssim", "config_hash"};
    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (size_t i = 0; i < refs.size(); ++i) {
        const Metrics m = compute_metrics(load_image(refs[i]), load_image(ests[i]));
        summary.per_image.emplace_back(path_stem(ests[i]), m);
        csv.rows.push_back({path_stem(ests[i]), format_double(m.psnr_db), format_double(m.ssim), hash});
        psnr_sum += m.psnr_db;
        ssim_sum += m.ssim;
    }
    summary.aggregate.psnr_db = psnr_sum / static_cast<double>(refs.size());
    summary.aggregate.ssim = ssim_sum / static_cast<double>(refs.size());
    csv.rows.push_back({"mean", format_double(summary.aggregate.psnr_db), format_double(summary.aggregate.ssim), hash});
    if (!opt.out_csv.empty()) {
        ensure_dir(fs::path(opt.out_csv).parent_path().string());
        csv.save(opt.out_csv);
    }
    return summary;
}

// ---- noise sweep ----

SweepNoiseSummary cmd_sweep_noise(const SweepNoiseOptions& opt) {
    RnnModel model;
    const json meta = meta_of_checkpoint(opt.checkpoint, &model);
    const double sigma_s = meta.value("sigma_s", 1.6);
    const int ksize = meta.value("kernel_size", 25);
    const bool residual = meta.value("residual", false);

    const PlanarImage clean = load_image(opt.clean_path);
    const GaussianKernel kernel = make_gaussian_kernel(ksize, sigma_s);

    std::string canon = "cmd=sweep-noise\nseed=" + std::to_string(opt.seed) + "\nsigma_s=" + format_double(sigma_s) + "\n";
    for (double s : opt.sigmas) canon += "sn=" + format_double(s) + "\n";
    const std::string hash = hash_hex(fnv1a64(canon));

    SweepNoiseSummary summary;
    CsvTable csv;
    csv.header = {"sigma_n", "psnr", "ssim", "config_hash"};
    for (size_t i = 0; i < opt.sigmas.size(); ++i) {
        const double sn = opt.sigmas[i];
        if (sn < 0.0) throw ContractError("sweep-noise: sigma_n must be >= 0");
        Rng rng(derive_seed(opt.seed, i));
        const DegradationSpec spec{kernel, sn, 1};
        const PlanarImage degraded = degrade(clean, spec, rng);
        const PlanarImage restored = restore_image(model, degraded, residual, opt.threads);
        const Metrics m = compute_metrics(clean, restored);
        summary.rows.emplace_back(sn, m);
        csv.rows.push_back({format_double(sn), format_double(m.psnr_db), format_double(m.ssim), hash});
    }
    ensure_dir(fs::path(opt.out_csv).parent_path().string());
    csv.save(opt.out_csv);
    summary.csv_path = opt.out_csv;
    return summary;
}

// ---- sample-size study ----

SampleSizeSummary cmd_sample_size(const SampleSizeOptions& opt) {
    std::string canon;
    TrainConfig base = build_train_config(opt.config_path, "", "", false, -1, opt.threads, &canon);

    ConfigMap file_cfg;
    if (!opt.config_path.empty()) file_cfg = parse_config_file(opt.config_path, train_config_keys());
    const double sigma = file_cfg.get_double("sigma", 1.6);
    const int ksize = file_cfg.get_int("kernel_size", 25);
    const double noise_sigma = file_cfg.get_double("noise_sigma", 1.4142135623730951);

    const PlanarImage clean = load_image(opt.clean_path);
    const PlanarImage degraded = load_image(opt.degraded_path);
    const int total_anchors = clean.height * clean.width;

    // eval set: clean images degraded with the training spec
    const auto eval_files = list_images(opt.eval_dir);
    const GaussianKernel kernel = make_gaussian_kernel(ksize, sigma);
    std::vector<PlanarImage> eval_clean, eval_degraded;
    for (size_t i = 0; i < eval_files.size(); ++i) {
        eval_clean.push_back(load_image(eval_files[i]));
        Rng rng(derive_seed(opt.seed, 1000 + i));
        eval_degraded.push_back(degrade(eval_clean.back(), DegradationSpec{kernel, noise_sigma, 1}, rng));
    }

    canon += "cmd=sample-size\ndelta=" + format_double(opt.delta) + "\nseed=" + std::to_string(opt.seed) + "\n";
    const std::string hash = hash_hex(fnv1a64(canon));

    SampleSizeSummary summary;
    CsvTable csv;
    csv.header = {"m", "train_risk", "recovery_error", "epochs", "config_hash"};
    for (size_t mi = 0; mi < opt.m_list.size(); ++mi) {
        const int m = opt.m_list[mi];
        if (m < 1 || m > total_anchors) throw ContractError("sample-size: m exceeds available anchors");
        TrainConfig tc = base;
        tc.policy = SamplePolicy::FixedRandom;
        tc.sample_m = m;
        tc.stop_risk = opt.delta;
        tc.epochs_stage1 = opt.max_epochs;
        tc.epochs_stage2 = 0;
        tc.seed = derive_seed(opt.seed, mi);
        Rng rng(tc.seed);
        TrainResult result = train_one_shot(degraded, clean, tc, rng);

        double recovery = 0.0;
        for (size_t e = 0; e < eval_clean.size(); ++e) {
            const Matrix ry = luminance(eval_clean[e]);
            const Matrix est = restore_luminance(result.model, luminance(eval_degraded[e]), tc.residual, opt.threads);
            double mse = 0.0;
            for (size_t i = 0; i < ry.data.size(); ++i) {
                const double d = ry.data[i] - est.data[i];
                mse += d * d;
            }
            recovery += mse / static_cast<double>(ry.data.size());
        }
        recovery /= static_cast<double>(eval_clean.size());

        SampleSizeRow row;
        row.m = m;
        row.train_risk = result.log.empty() ? 0.0 : result.log.back().loss;
        row.recovery_error = recovery;
        row.epochs = static_cast<int>(result.log.size());
        summary.rows.push_back(row);
        csv.rows.push_back({std::to_string(m), format_double(row.train_risk), format_double(row.recovery_error),
                            std::to_string(row.epochs), hash});
    }
    ensure_dir(fs::path(opt.out_csv).parent_path().string());
    csv.save(opt.out_csv);
    summary.csv_path = opt.out_csv;
    return summary;
}

// ---- mismatch study ----

MismatchSummary cmd_mismatch(const MismatchOptions& opt) {
    RnnModel model;
    const json meta = meta_of_checkpoint(opt.checkpoint, &model);
    const double sigma_s = meta.value("sigma_s", 2.0);
    const int ksize = meta.value("kernel_size", 25);
    const bool residual = meta.value("residual", false);

    const PlanarImage clean = load_image(opt.clean_path);
    if (opt.column < 0 || opt.column >= clean.width) throw ContractError("mismatch: column outside image");
    ensure_dir(opt.out_dir);

    std::string canon = "cmd=mismatch\ncolumn=" + std::to_string(opt.column) + "\nsigma_s=" + format_double(sigma_s) + "\n";
    for (double s : opt.sigmas_t) canon += "st=" + format_double(s) + "\n";
    const std::string hash = hash_hex(fnv1a64(canon));

    // reference restoration in the matched domain
    const GaussianKernel ks = make_gaussian_kernel(ksize, sigma_s);
    PlanarImage g_s = clean;
    for (auto& p : g_s.planes) p = convolve2d_same(p, ks);
    const Matrix fhat_s = restore_luminance(model, luminance(g_s), residual, opt.threads);
    {
        PlanarImage out = with_luminance(g_s, fhat_s);
        save_image(out, (fs::path(opt.out_dir) / "restored_matched.png").string());
    }

    const int margin = ksize; // keep clear of both blur and restoration edge effects
    if (clean.height <= 2 * margin) throw ContractError("mismatch: image too small for interior comparison");

    MismatchSummary summary;
    summary.sigma_s = sigma_s;
    json rows_json = json::array();

    for (double sigma_t : opt.sigmas_t) {
        if (sigma_t <= 0.0) throw ContractError("mismatch: sigma_t must be > 0");
        MismatchRow row;
        row.sigma_t = sigma_t;

        PlanarImage g_t = clean;
        const GaussianKernel kt = make_gaussian_kernel(ksize, sigma_t);
        for (auto& p : g_t.planes) p = convolve2d_same(p, kt);
        const Matrix fhat_t = restore_luminance(model, luminance(g_t), residual, opt.threads);
        char name[64];
        std::snprintf(name, sizeof(name), "restored_sigma_%.3g.png", sigma_t);
        save_image(with_luminance(g_t, fhat_t), (fs::path(opt.out_dir) / name).string());

        Matrix compare; // profile compared against fhat_s
        if (sigma_t == sigma_s) {
            row.kind = "matched";
            row.sigma_residual = 0.0;
            compare = fhat_t;
        } else if (sigma_t < sigma_s) {
            // sharper input: re-blurring the estimate with the residual kernel
            // should land on the matched-domain restoration
            row.kind = "sharper_input";
            row.sigma_residual = std::sqrt(sigma_s * sigma_s - sigma_t * sigma_t);
            const GaussianKernel kr = residual_kernel(sigma_t, sigma_s, ksize);
            compare = convolve2d_same(fhat_t, kr);
        } else {
            // blurrier input: the estimate itself is predicted to be the clean
            // image blurred by the residual kernel
            row.kind = "blurrier_input";
            row.sigma_residual = std::sqrt(sigma_t * sigma_t - sigma_s * sigma_s);
            compare = fhat_t;
        }

        const Matrix& target = (sigma_t > sigma_s)
                                   ? convolve2d_same(luminance(clean), make_gaussian_kernel(ksize, row.sigma_residual))
                                   : fhat_s;

        double num = 0.0, den = 0.0;
        for (int i = margin; i < clean.height - margin; ++i) {
            for (int j = margin; j < clean.width - margin; ++j) {
                const double d = compare.at(i, j) - target.at(i, j);
                num += d * d;
                den += target.at(i, j) * target.at(i, j);
            }
        }
        row.deviation = den > 0.0 ? std::sqrt(num / den) : 0.0;

        // column profile replicating the 1D comparison plot
        CsvTable profile;
        profile.header = {"row", "reference_profile", "compared_profile", "config_hash"};
        for (int i = 0; i < clean.height; ++i)
            profile.rows.push_back({std::to_string(i), format_double(target.at(i, opt.column)),
                                    format_double(compare.at(i, opt.column)), hash});
        char pname[64];
        std::snprintf(pname, sizeof(pname), "profile_sigma_%.3g.csv", sigma_t);
        profile.save((fs::path(opt.out_dir) / pname).string());

        rows_json.push_back({{"sigma_t", sigma_t},
                             {"kind", row.kind},
                             {"sigma_residual", row.sigma_residual},
                             {"relative_deviation", row.deviation}});
        summary.rows.push_back(row);
    }

    json report = {
        {"command", "mismatch"}, {"sigma_s", sigma_s},   {"column", opt.column},
        {"config_hash", hash},   {"cases", rows_json},
    };
    summary.report_path = (fs::path(opt.out_dir) / "mismatch_report.json").string();
    std::ofstream out(summary.report_path);
    out << report.dump(2) << "\n";
    write_manifest(opt.out_dir, report);
    return summary;
}

// ---- synthetic pairs ----

SynthPairsSummary cmd_synth_pairs(const SynthPairsOptions& opt) {
    ensure_dir(opt.out_dir);
    const Matrix pattern = synth_pattern(opt.pattern, opt.size, opt.block);
    PlanarImage clean(pattern.rows, pattern.cols, 1, ColorSpace::Gray);
    clean.planes[0] = pattern;

    const DegradationSpec spec{make_gaussian_kernel(opt.kernel_size, opt.sigma), opt.noise_sigma, opt.decim};
    Rng rng(opt.seed);
    const PlanarImage degraded = degrade(clean, spec, rng);

    SynthPairsSummary summary;
    summary.clean_path = (fs::path(opt.out_dir) / (opt.pattern + "_clean.png")).string();
    summary.degraded_path = (fs::path(opt.out_dir) / (opt.pattern + "_degraded.png")).string();
    save_image(clean, summary.clean_path);
    save_image(degraded, summary.degraded_path);

    json manifest = {
        {"command", "synth-pairs"},
        {"pattern", opt.pattern},
        {"size", opt.size},
        {"block", opt.block},
        {"seed", opt.seed},
        {"spec",
         {{"sigma", opt.sigma},
          {"kernel_size", opt.kernel_size},
          {"noise_sigma", opt.noise_sigma},
          {"decimation", opt.decim}}},
        {"clean", summary.clean_path},
        {"degraded", summary.degraded_path},
    };
    write_manifest(opt.out_dir, manifest);
    return summary;
}

// ---- sparse-coding demo ----

ScDemoSummary cmd_sc_demo(const ScDemoOptions& opt) {
    if (opt.n < 1 || opt.m < 1) throw ContractError("sc-demo: dims must be >= 1");
    ensure_dir(opt.out_dir);
    Rng rng(opt.seed);
    SyntheticInstance inst = make_random_instance(rng, opt.n, opt.m, opt.sparsity, opt.lambda);

    const IstaState st = ista_solve(inst.problem, opt.iters, 1e-12);

    const std::string hash =
        hash_hex(fnv1a64("cmd=sc-demo\nlambda=" + format_double(opt.lambda) + "\nm=" + std::to_string(opt.m) +
                         "\nn=" + std::to_string(opt.n) + "\nseed=" + std::to_string(opt.seed) + "\n"));

    CsvTable csv;
    csv.header = {"iteration", "cost", "config_hash"};
    for (size_t i = 0; i < st.cost_history.size(); ++i)
        csv.rows.push_back({std::to_string(i), format_double(st.cost_history[i]), hash});

    ScDemoSummary summary;
    summary.cost_csv_path = (fs::path(opt.out_dir) / "ista_cost.csv").string();
    csv.save(summary.cost_csv_path);

    summary.final_cost = st.cost_history.back();
    summary.converged = st.converged;
    summary.cost_monotone = true;
    for (size_t i = 1; i < st.cost_history.size(); ++i)
        if (st.cost_history[i] > st.cost_history[i - 1] + 1e-12) summary.cost_monotone = false;

    // equivalence sweep: random nonnegative states and observations
    double max_dev = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> z_prev(opt.m), y_t(opt.n);
        for (double& v : z_prev) v = std::abs(rng.next_gaussian());
        for (double& v : y_t) v = rng.next_gaussian();
        max_dev = std::max(max_dev, rnn_equiv_check(inst.problem, z_prev, y_t));
    }
    summary.equiv_max_deviation = max_dev;

    json report = {
        {"command", "sc-demo"},
        {"config_hash", hash},
        {"final_cost", summary.final_cost},
        {"converged", summary.converged},
        {"cost_monotone", summary.cost_monotone},
        {"iterations", st.iterations},
        {"equiv_max_deviation", summary.equiv_max_deviation},
        {"mutual_coherence", mutual_coherence(inst.problem.dict)},
        {"recovery_bound_ok", recovery_bound_ok(inst.problem.dict, inst.z_true)},
    };
    summary.report_path = (fs::path(opt.out_dir) / "sc_report.json").string();
    std::ofstream out(summary.report_path);
    out << report.dump(2) << "\n";
    write_manifest(opt.out_dir, report);
    return summary;
}

} // namespace osr
