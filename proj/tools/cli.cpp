#include "cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "mfsk/baseline.hpp"
#include "mfsk/dsp.hpp"
#include "mfsk/errors.hpp"
#include "mfsk/evaluation.hpp"
#include "mfsk/modem.hpp"
#include "mfsk/nn.hpp"
#include "mfsk/synthesis.hpp"
#include "mfsk/training.hpp"

namespace mfsk::cli {

namespace {

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::string spacing = "orthogonal";

    ModulationConfig config() const {
        return ModulationConfig::jt65a(spacing == "paper" ? SpacingMode::PaperLiteral : SpacingMode::Orthogonal);
    }

    // Randomized commands without --seed draw one and report it so the run
    // can be reproduced.
    std::uint64_t resolve_seed() const {
        if (seed) return *seed;
        std::random_device rd;
        const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        std::cerr << "seed: " << s << '\n';
        return s;
    }
};

struct InterferenceOptions {
    bool enabled = false;
    double narrowband = 0.20;
    double pulse = 0.10;
    double duty = 0.01;

    void add_to(CLI::App* cmd) {
        cmd->add_flag("--interference", enabled, "Add narrowband and pulse interference");
        cmd->add_option("--nb-fraction", narrowband, "Narrowband interferer power / AWGN power")
            ->capture_default_str();
        cmd->add_option("--pulse-fraction", pulse, "Pulse interference power / AWGN power")->capture_default_str();
        cmd->add_option("--pulse-duty", duty, "Pulse duty cycle in (0, 1]")->capture_default_str();
    }

    std::optional<InterferenceSpec> spec(std::uint64_t seed) const {
        if (!enabled) return std::nullopt;
        InterferenceSpec s;
        s.narrowband_power_fraction = narrowband;
        s.pulse_power_fraction = pulse;
        s.pulse_duty_cycle = duty;
        s.rng_seed = seed;
        s.validate();
        return s;
    }
};

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.precision(10);
    return out;
}

void print_curve(const std::vector<ErrorRatePoint>& curve) {
    std::cout << "snr_db,ebn0_db,ser,ber,theoretical_ber\n";
    for (const auto& p : curve)
        std::cout << p.snr_db << ',' << p.ebn0_db << ',' << p.ser << ',' << p.ber << ',' << p.theoretical_ber << '\n';
    std::cout << "gap_at_ber_1e-2_db,";
    try {
        const double gap = gap_at_ber(curve, 1e-2);
        std::cout << gap << '\n';
    } catch (const RangeError&) {
        std::cout << "not bracketed\n";
    }
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"64-ary FSK synthesis, neural and non-coherent demodulation, error-rate analysis", "mfsk"};
    app.require_subcommand(1);
    GlobalOptions global;
    app.add_option("--seed", global.seed, "Seed for every randomized step")->configurable();
    app.add_option("--spacing", global.spacing, "Tone spacing: orthogonal (fs/N) or paper (2.6817 Hz)")
        ->check(CLI::IsMember({"orthogonal", "paper"}))
        ->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Write a labeled dataset file");
    std::int64_t synth_count = 0;
    double snr_min = -20.0, snr_max = 0.0;
    std::string synth_out;
    InterferenceOptions synth_intf;
    synth->add_option("--count", synth_count, "Number of frames")->required();
    synth->add_option("--snr-min", snr_min, "Lowest SNR (dB, 2500 Hz reference)")->capture_default_str();
    synth->add_option("--snr-max", snr_max, "Highest SNR (dB)")->capture_default_str();
    synth->add_option("--out", synth_out, "Output dataset path")->required();
    synth_intf.add_to(synth);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train the dense network on a dataset file");
    std::string train_data, train_out, history_out, epochs_out, bn_side = "before";
    TrainConfig train_cfg;
    train_cmd->add_option("--data", train_data, "Dataset file")->required();
    train_cmd->add_option("--epochs", train_cfg.epochs, "Epochs")->capture_default_str();
    train_cmd->add_option("--batch", train_cfg.batch_size, "Batch size")->capture_default_str();
    train_cmd->add_option("--lr", train_cfg.lr, "Adam learning rate")->capture_default_str();
    train_cmd->add_option("--out", train_out, "Output model path")->required();
    train_cmd->add_option("--history", history_out, "Per-step history CSV (default <out>.history.csv)");
    train_cmd->add_option("--epoch-history", epochs_out, "Per-epoch history CSV (default <out>.epochs.csv)");
    train_cmd->add_option("--bn", bn_side, "Hidden batch-norm position relative to ReLU")
        ->check(CLI::IsMember({"before", "after"}))
        ->capture_default_str();
    bool no_shuffle = false;
    train_cmd->add_flag("--no-shuffle", no_shuffle, "Keep dataset order every epoch");

    // eval
    auto* eval = app.add_subcommand("eval", "Confusion matrix and metrics on a fresh fixed-SNR test set");
    std::string eval_model, eval_prefix = "eval";
    double eval_snr = -10.0;
    std::int64_t eval_count = 10000;
    eval->add_option("--model", eval_model, "Model file")->required();
    eval->add_option("--snr", eval_snr, "Test SNR (dB)")->capture_default_str();
    eval->add_option("--count", eval_count, "Test frames")->capture_default_str();
    eval->add_option("--out-prefix", eval_prefix, "Writes <prefix>.confusion.csv, .metrics.csv, .summary.csv")
        ->capture_default_str();

    // curves / baseline-curves
    double from = -20.0, to = 0.0, step = 1.0;
    std::int64_t trials = 10000;
    auto add_grid = [&](CLI::App* cmd) {
        cmd->add_option("--from", from, "First SNR (dB)")->capture_default_str();
        cmd->add_option("--to", to, "Last SNR (dB)")->capture_default_str();
        cmd->add_option("--step", step, "SNR step (dB)")->capture_default_str();
        cmd->add_option("--trials", trials, "Frames per SNR point")->capture_default_str();
    };
    auto* curves = app.add_subcommand("curves", "SER/BER curve of a trained model");
    std::string curves_model, curves_out;
    InterferenceOptions curves_intf;
    curves->add_option("--model", curves_model, "Model file")->required();
    curves->add_option("--out", curves_out, "Curve CSV path")->required();
    add_grid(curves);
    curves_intf.add_to(curves);

    auto* baseline = app.add_subcommand("baseline-curves", "SER/BER curve of the non-coherent FFT-bank detector");
    std::string baseline_out;
    baseline->add_option("--out", baseline_out, "Curve CSV path")->required();
    add_grid(baseline);

    // bench
    auto* bench = app.add_subcommand("bench", "Single-frame inference latency");
    std::string bench_model;
    int bench_iters = 1000;
    bench->add_option("--model", bench_model, "Model file")->required();
    bench->add_option("--iters", bench_iters, "Timed iterations (>= 100)")->capture_default_str();

    // figures
    auto* figures = app.add_subcommand("figures", "Waveform, ESD and histogram CSVs of one synthesized frame");
    double fig_snr = -10.0;
    int fig_bins = 50;
    std::string fig_prefix = "figure";
    figures->add_option("--snr", fig_snr, "Frame SNR (dB)")->capture_default_str();
    figures->add_option("--bins", fig_bins, "Histogram bins")->capture_default_str();
    figures->add_option("--out-prefix", fig_prefix, "Writes <prefix>.waveform.csv, .esd.csv, .histogram.csv")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const ModulationConfig config = global.config();

        if (*synth) {
            const std::uint64_t seed = global.resolve_seed();
            const Dataset ds =
                build_dataset(synth_count, {snr_min, snr_max}, seed, config, synth_intf.spec(seed));
            save_dataset(ds, synth_out);
            std::cerr << "wrote " << ds.size() << " frames to " << synth_out << '\n';
        } else if (*train_cmd) {
            train_cfg.seed = global.resolve_seed();
            train_cfg.shuffle = !no_shuffle;
            train_cfg.architecture.placement =
                bn_side == "after" ? BatchNormPlacement::AfterActivation : BatchNormPlacement::BeforeActivation;
            train_cfg.on_epoch = [](const EpochRecord& e) {
                std::cerr << "epoch " << e.epoch << " loss " << e.loss << " accuracy " << e.accuracy << " ("
                          << e.seconds << " s)\n";
            };
            const Dataset ds = load_dataset(train_data);
            const TrainResult result = train(ds, train_cfg);
            save_model(result.model, train_out);
            write_step_history(result.history, history_out.empty() ? train_out + ".history.csv" : history_out);
            write_epoch_history(result.history, epochs_out.empty() ? train_out + ".epochs.csv" : epochs_out);
        } else if (*eval) {
            const std::uint64_t seed = global.resolve_seed();
            const DenseModel<float> model = load_model(eval_model);
            const Dataset testset = build_dataset(eval_count, {eval_snr, eval_snr}, test_set_seed(seed, 0), config);
            const Evaluation e = evaluate(model, testset);
            write_confusion_csv(e.confusion, eval_prefix + ".confusion.csv");
            write_metrics_csv(e.metrics, eval_prefix + ".metrics.csv");
            write_summary_csv(e.metrics, eval_prefix + ".summary.csv");
            const auto& m = e.metrics;
            std::cout << "error_rate,accuracy,macro_precision,macro_recall,micro_precision,micro_recall\n"
                      << m.error_rate << ',' << m.accuracy << ',' << m.macro_precision << ',' << m.macro_recall
                      << ',' << m.micro_precision << ',' << m.micro_recall << '\n';
        } else if (*curves) {
            const std::uint64_t seed = global.resolve_seed();
            const DenseModel<float> model = load_model(curves_model);
            const auto grid = snr_grid(from, to, step);
            const auto curve = nn_ser_curve(model, grid, trials, seed, config, curves_intf.spec(seed));
            write_curve_csv(curve, curves_out);
            print_curve(curve);
        } else if (*baseline) {
            const std::uint64_t seed = global.resolve_seed();
            const auto grid = snr_grid(from, to, step);
            const auto curve = baseline_ser_curve(grid, trials, seed, config);
            write_curve_csv(curve, baseline_out);
            print_curve(curve);
        } else if (*bench) {
            const DenseModel<float> model = load_model(bench_model);
            const LatencyStats s = bench_inference(model, bench_iters, config);
            std::cout << "iterations," << s.iterations << "\nmean_us," << s.mean_us << "\np95_us," << s.p95_us
                      << "\nsymbol_interval_us," << config.symbol_duration_s * 1e6 << "\nreal_time,"
                      << (s.real_time ? "yes" : "no") << '\n';
        } else if (*figures) {
            const std::uint64_t seed = global.resolve_seed();
            const SignalFrame frame = synth_frame(seed, 0, {fig_snr, fig_snr}, config);
            {
                auto out = open_csv(fig_prefix + ".waveform.csv");
                out << "n,x\n";
                for (int n = 0; n < std::min<int>(200, static_cast<int>(frame.samples.size())); ++n)
                    out << n << ',' << frame.samples(n) << '\n';
            }
            {
                const Spectrum s = dft(frame, config);
                const Eigen::VectorXd e = esd(s);
                auto out = open_csv(fig_prefix + ".esd.csv");
                out << "f_hz,esd\n";
                for (Eigen::Index k = 0; k <= s.size() / 2; ++k) out << k * s.bin_spacing_hz << ',' << e(k) << '\n';
            }
            {
                const Histogram h = histogram(frame, fig_bins);
                auto out = open_csv(fig_prefix + ".histogram.csv");
                out << "edge,count\n";
                for (Eigen::Index b = 0; b < h.counts.size(); ++b) out << h.edges(b) << ',' << h.counts(b) << '\n';
            }
            std::cerr << "symbol " << *frame.label << " at " << fig_snr << " dB\n";
        }
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIoOrFormat;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIoOrFormat;
    } catch (const ShapeError& e) {
        std::cerr << "error: incompatible input: " << e.what() << '\n';
        return kIoOrFormat;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kOk;
}

}  // namespace mfsk::cli
