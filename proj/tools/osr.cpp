#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osr/harness.hpp"

namespace {

void print_restore_summary(const osr::RestoreSummary& s) {
    for (const auto& r : s.records) {
        if (r.has_metrics)
            std::printf("%-24s baseline %6.2f dB / %.4f   restored %6.2f dB / %.4f\n", r.name.c_str(), r.baseline_psnr,
                        r.baseline_ssim, r.psnr, r.ssim);
        else
            std::printf("%-24s -> %s\n", r.name.c_str(), r.restored_path.c_str());
    }
    if (!s.records.empty() && s.records.front().has_metrics)
        std::printf("mean: baseline %6.2f dB / %.4f   restored %6.2f dB / %.4f\n", s.mean_baseline_psnr,
                    s.mean_baseline_ssim, s.mean_psnr, s.mean_ssim);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-shot patch-based image restoration"};
    app.require_subcommand(1);

    // degrade
    osr::DegradeOptions dg;
    auto* c_degrade = app.add_subcommand("degrade", "apply the gaussian blur / decimation / noise forward model");
    c_degrade->add_option("--in", dg.input, "input image or directory")->required();
    c_degrade->add_option("--out", dg.out_dir, "output directory")->required();
    c_degrade->add_option("--sigma", dg.sigma, "gaussian PSF sigma");
    c_degrade->add_option("--kernel-size", dg.kernel_size, "PSF size (odd)");
    c_degrade->add_option("--noise-sigma", dg.noise_sigma, "WGN sigma in intensity units");
    c_degrade->add_option("--decim", dg.decim, "decimation factor (1 = deblur task, 3 = SR task)");
    c_degrade->add_option("--seed", dg.seed, "rng seed");
    c_degrade->add_option("--threads", dg.threads, "worker threads");

    // train
    osr::TrainOptions tr;
    auto* c_train = app.add_subcommand("train", "train the one-shot predictor from a degraded/clean pair");
    c_train->add_option("--clean", tr.clean_path, "clean training image")->required();
    c_train->add_option("--degraded", tr.degraded_path, "degraded training image")->required();
    c_train->add_option("--config", tr.config_path, "key = value training config");
    c_train->add_option("--out", tr.out_checkpoint, "output checkpoint path")->required();
    c_train->add_option("--mode", tr.mode, "p2p or p2x (overrides config)");
    c_train->add_option("--loss", tr.loss, "l1 or l2 (overrides config)");
    c_train->add_flag("--gan", tr.gan, "enable the adversarial second stage");
    c_train->add_option("--seed", tr.seed, "rng seed (overrides config)");
    c_train->add_option("--threads", tr.threads, "worker threads");

    // restore
    osr::RestoreOptions rs;
    auto* c_restore = app.add_subcommand("restore", "restore images with a trained checkpoint");
    c_restore->add_option("--ckpt", rs.checkpoint, "checkpoint path")->required();
    c_restore->add_option("--in", rs.input, "input image or directory")->required();
    c_restore->add_option("--out", rs.out_dir, "output directory")->required();
    c_restore->add_option("--ref", rs.ref, "ground-truth image or directory (enables metrics)");
    c_restore->add_option("--mode", rs.expect_mode, "assert checkpoint geometry: p2p or p2x");
    c_restore->add_option("--threads", rs.threads, "worker threads");

    // eval
    osr::EvalOptions ev;
    auto* c_eval = app.add_subcommand("eval", "PSNR/SSIM between reference and estimate sets");
    c_eval->add_option("--ref", ev.ref, "reference image or directory")->required();
    c_eval->add_option("--est", ev.est, "estimate image or directory")->required();
    c_eval->add_option("--out", ev.out_csv, "output csv");

    // sweep-noise
    osr::SweepNoiseOptions sw;
    auto* c_sweep = app.add_subcommand("sweep-noise", "PSNR vs additive noise level for a trained model");
    c_sweep->add_option("--ckpt", sw.checkpoint, "checkpoint path")->required();
    c_sweep->add_option("--clean", sw.clean_path, "clean evaluation image")->required();
    c_sweep->add_option("--sigmas", sw.sigmas, "noise sigma grid")->required()->delimiter(',');
    c_sweep->add_option("--out", sw.out_csv, "output csv")->required();
    c_sweep->add_option("--seed", sw.seed, "rng seed");
    c_sweep->add_option("--threads", sw.threads, "worker threads");

    // sample-size
    osr::SampleSizeOptions ss;
    auto* c_sample = app.add_subcommand("sample-size", "recovery error vs training sample size");
    c_sample->add_option("--clean", ss.clean_path, "clean training image")->required();
    c_sample->add_option("--degraded", ss.degraded_path, "degraded training image")->required();
    c_sample->add_option("--config", ss.config_path, "base training config");
    c_sample->add_option("--m-list", ss.m_list, "sample sizes")->required()->delimiter(',');
    c_sample->add_option("--delta", ss.delta, "empirical-risk stopping threshold");
    c_sample->add_option("--eval-dir", ss.eval_dir, "clean evaluation images")->required();
    c_sample->add_option("--out", ss.out_csv, "output csv")->required();
    c_sample->add_option("--seed", ss.seed, "rng seed");
    c_sample->add_option("--max-epochs", ss.max_epochs, "epoch cap per run");
    c_sample->add_option("--threads", ss.threads, "worker threads");

    // mismatch
    osr::MismatchOptions mm;
    auto* c_mismatch = app.add_subcommand("mismatch", "system-mismatch study across blur levels");
    c_mismatch->add_option("--ckpt", mm.checkpoint, "checkpoint trained at sigma_s")->required();
    c_mismatch->add_option("--clean", mm.clean_path, "clean image")->required();
    c_mismatch->add_option("--sigmas-t", mm.sigmas_t, "test blur sigmas")->required()->delimiter(',');
    c_mismatch->add_option("--column", mm.column, "profile column");
    c_mismatch->add_option("--out", mm.out_dir, "output directory")->required();
    c_mismatch->add_option("--threads", mm.threads, "worker threads");

    // synth-pairs
    osr::SynthPairsOptions sp;
    auto* c_synth = app.add_subcommand("synth-pairs", "write a synthetic clean/degraded training pair");
    c_synth->add_option("--pattern", sp.pattern, "chessboard | stripes | dots");
    c_synth->add_option("--size", sp.size, "image size");
    c_synth->add_option("--block", sp.block, "pattern block size");
    c_synth->add_option("--sigma", sp.sigma, "gaussian PSF sigma");
    c_synth->add_option("--kernel-size", sp.kernel_size, "PSF size (odd)");
    c_synth->add_option("--noise-sigma", sp.noise_sigma, "WGN sigma");
    c_synth->add_option("--decim", sp.decim, "decimation factor");
    c_synth->add_option("--seed", sp.seed, "rng seed");
    c_synth->add_option("--out", sp.out_dir, "output directory")->required();

    // sc-demo
    osr::ScDemoOptions sc;
    auto* c_sc = app.add_subcommand("sc-demo", "ISTA cost descent and RNN-equivalence report");
    c_sc->add_option("--n", sc.n, "observation dimension");
    c_sc->add_option("--m", sc.m, "dictionary atoms");
    c_sc->add_option("--sparsity", sc.sparsity, "true support size");
    c_sc->add_option("--lambda", sc.lambda, "l1 weight");
    c_sc->add_option("--iters", sc.iters, "max iterations");
    c_sc->add_option("--seed", sc.seed, "rng seed");
    c_sc->add_option("--out", sc.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_degrade) {
            const auto s = osr::cmd_degrade(dg);
            for (const auto& r : s.records) {
                if (dg.decim == 1)
                    std::printf("%-24s degraded %6.2f dB / %.4f\n", r.name.c_str(), r.psnr, r.ssim);
                else
                    std::printf("%-24s -> %s\n", r.name.c_str(), r.degraded_path.c_str());
            }
            std::printf("metrics: %s\n", s.csv_path.c_str());
        } else if (*c_train) {
            const auto s = osr::cmd_train(tr);
            std::printf("checkpoint: %s\nloss csv:   %s\nloss %g -> %g over %d epochs\n", s.checkpoint_path.c_str(),
                        s.loss_csv_path.c_str(), s.first_loss, s.final_loss, s.epochs_run);
        } else if (*c_restore) {
            print_restore_summary(osr::cmd_restore(rs));
        } else if (*c_eval) {
            const auto s = osr::cmd_eval(ev);
            for (const auto& [name, m] : s.per_image)
                std::printf("%-24s %6.2f dB / %.4f\n", name.c_str(), m.psnr_db, m.ssim);
            std::printf("mean: %6.2f dB / %.4f\n", s.aggregate.psnr_db, s.aggregate.ssim);
        } else if (*c_sweep) {
            const auto s = osr::cmd_sweep_noise(sw);
            for (const auto& [sn, m] : s.rows) std::printf("sigma_n %6.3f  %6.2f dB / %.4f\n", sn, m.psnr_db, m.ssim);
        } else if (*c_sample) {
            const auto s = osr::cmd_sample_size(ss);
            for (const auto& r : s.rows)
                std::printf("m %6d  risk %10.4f  recovery %10.4f  (%d epochs)\n", r.m, r.train_risk, r.recovery_error,
                            r.epochs);
        } else if (*c_mismatch) {
            const auto s = osr::cmd_mismatch(mm);
            std::printf("trained at sigma_s = %g\n", s.sigma_s);
            for (const auto& r : s.rows)
                std::printf("sigma_t %5.2f  [%s]  residual sigma %5.3f  relative deviation %.4f\n", r.sigma_t,
                            r.kind.c_str(), r.sigma_residual, r.deviation);
        } else if (*c_synth) {
            const auto s = osr::cmd_synth_pairs(sp);
            std::printf("clean:    %s\ndegraded: %s\n", s.clean_path.c_str(), s.degraded_path.c_str());
        } else if (*c_sc) {
            const auto s = osr::cmd_sc_demo(sc);
            std::printf("final cost %.6g  converged %s  monotone %s  equivalence deviation %.3g\n", s.final_cost,
                        s.converged ? "yes" : "no", s.cost_monotone ? "yes" : "no", s.equiv_max_deviation);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
