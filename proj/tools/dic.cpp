// dic: dataset generation, training, evaluation and quantization sweeps for
// the QAM-OFDM interference canceller.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <span>
#include <sstream>
#include <thread>

#include "dic/canceller.hpp"
#include "dic/channel.hpp"
#include "dic/dataset.hpp"
#include "dic/quant.hpp"
#include "dic/svg.hpp"

namespace {

int worker_threads() {
    if (const char* env = std::getenv("DIC_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

dic::GridDims parse_dims(const std::string& s) {
    dic::GridDims d;
    if (std::sscanf(s.c_str(), "%dx%dx%d", &d.subframes, &d.ofdm_symbols, &d.subcarriers) != 3 ||
        !d.valid()) {
        throw CLI::ValidationError("--dims", "expected SUBFRAMESxSYMBOLSxSUBCARRIERS, got " + s);
    }
    return d;
}

struct GenOptions {
    uint64_t frames = 1000;
    int64_t train_frames = -1, val_frames = -1, test_frames = -1;
    std::string dims = "11x140x180";
    int qam = 256;
    double sir_db = std::numeric_limits<double>::infinity();
    double calibrate_ser = 0.0;
    double snr_db = std::numeric_limits<double>::infinity();
    int interferer_qam = 0;
    std::string gain_scope = "per_dataset";
    uint64_t seed = 0;
    std::string out;
};

int run_gen(const GenOptions& o) {
    try {
        dic::QamConstellation::build(o.qam);
    } catch (const std::exception& e) {
        throw CLI::ValidationError("--qam", e.what());
    }
    try {
        dic::gain_scope_from_string(o.gain_scope);
    } catch (const std::exception& e) {
        throw CLI::ValidationError("--gain-scope", e.what());
    }
    dic::DatasetManifest m;
    m.total_frames = o.frames;
    if (o.train_frames >= 0 || o.val_frames >= 0 || o.test_frames >= 0) {
        if (o.train_frames < 0 || o.val_frames < 0 || o.test_frames < 0) {
            throw CLI::ValidationError("--train-frames",
                                       "give all three of --train-frames/--val-frames/--test-frames or none");
        }
        m.train_frames = static_cast<uint64_t>(o.train_frames);
        m.val_frames = static_cast<uint64_t>(o.val_frames);
        m.test_frames = static_cast<uint64_t>(o.test_frames);
    } else {
        // default 500/100/400 ratio of the paper's 1000-frame corpus
        m.train_frames = o.frames / 2;
        m.val_frames = o.frames / 10;
        m.test_frames = o.frames - m.train_frames - m.val_frames;
    }
    m.dims = parse_dims(o.dims);
    m.qam_order = o.qam;
    m.seed = o.seed;
    m.interference.interferer_order = o.interferer_qam;
    m.interference.gain_scope = dic::gain_scope_from_string(o.gain_scope);
    m.interference.seed = o.seed;
    m.noise.snr_db = o.snr_db;

    if (o.calibrate_ser > 0.0) {
        const auto c = dic::QamConstellation::build(m.qam_order);
        const double sir =
            dic::calibrate_sir(o.calibrate_ser, c, m.interference, /*trials=*/200000);
        std::cout << "calibrated_sir_db=" << sir << "\n";
        m.interference.sir_db = sir;
    } else {
        m.interference.sir_db = o.sir_db;
    }

    m.validate();
    dic::generate_dataset(m, o.out, worker_threads());
    std::cout << "wrote dataset to " << o.out << " (" << m.total_frames << " frames, "
              << m.dims.symbols_total() << " symbols/frame)\n";
    return 0;
}

struct TrainOptions {
    std::string data;
    std::string out = "model.dicm";
    std::string loss_curve = "loss_curve.csv";
    dic::TrainConfig cfg;
    std::string iq_mode = "stacked_iq";
};

int run_train(const TrainOptions& o) {
    dic::TrainConfig cfg = o.cfg;
    try {
        cfg.iq_mode = dic::iq_mode_from_string(o.iq_mode);
        cfg.validate();
    } catch (const std::exception& e) {
        throw CLI::ValidationError("train", e.what());
    }

    dic::DatasetReader train_reader(o.data, dic::Split::train);
    dic::DatasetReader val_reader(o.data, dic::Split::val);
    auto train_blocks = train_reader.load_all_blocks();
    auto val_blocks = val_reader.load_all_blocks();

    if (cfg.epochs == 0) {
        std::cerr << "warning: --epochs 0, writing an untrained checkpoint\n";
    }
    dic::TrainResult res = dic::train_canceller(train_blocks, val_blocks, cfg);
    dic::save_checkpoint(*res.model, o.out);
    dic::write_loss_curve_csv(res.curve, o.loss_curve);
    std::cout << "epochs_run=" << res.epochs_run << "\n"
              << "final_val_loss=" << res.best_val_loss << "\n"
              << "checkpoint=" << o.out << "\n";
    return 0;
}

struct EvalOptions {
    std::string data;
    std::string model;
    bool identity = false;
    std::string out_dir = "eval";
    int constellation_blocks = 64;
    int hist_bins = 20;
};

int run_eval(const EvalOptions& o) {
    if (o.model.empty() && !o.identity) {
        throw CLI::ValidationError("--model", "give --model PATH or --identity");
    }
    std::unique_ptr<dic::CancellerModel> model;
    if (!o.identity) model = dic::load_checkpoint(o.model);

    std::filesystem::create_directories(o.out_dir);
    const std::filesystem::path out(o.out_dir);

    dic::DatasetReader reader(o.data, dic::Split::test);
    const auto manifest = reader.manifest();
    const auto c = dic::QamConstellation::build(manifest.qam_order);
    dic::EvalReport rep = dic::evaluate_canceller(model.get(), reader, c);

    {
        std::ofstream f(out / "report.csv", std::ios::trunc);
        f.precision(10);
        f << "key,value\n"
          << "ser_before," << rep.ser_before << "\n"
          << "ser_after," << rep.ser_after << "\n"
          << "test_frames," << rep.per_frame_before.size() << "\n"
          << "qam_order," << manifest.qam_order << "\n"
          << "sir_db," << manifest.interference.sir_db << "\n"
          << "gain_scope," << dic::to_string(manifest.interference.gain_scope) << "\n"
          << "seed," << manifest.seed << "\n"
          << "model," << (o.identity ? std::string("identity") : o.model) << "\n";
    }

    // per-frame SER histograms
    {
        std::ofstream f(out / "ser_hist.csv", std::ios::trunc);
        f.precision(10);
        f << "frame,ser_before,ser_after\n";
        for (size_t i = 0; i < rep.per_frame_before.size(); ++i) {
            f << i << ',' << rep.per_frame_before[i] << ',' << rep.per_frame_after[i] << '\n';
        }
    }

    // constellation dump + SVGs from the first test blocks
    dic::DatasetReader reader2(o.data, dic::Split::test);
    dic::ResourceGrid corrupted, clean;
    uint64_t fid;
    reader2.next_frame(corrupted, clean, fid);
    auto blocks = dic::blockify(corrupted, clean, fid);
    const size_t nb = std::min<size_t>(o.constellation_blocks, blocks.size());
    dic::dump_constellation(model.get(), blocks, nb, out / "constellation.csv");

    std::span<const dic::SymbolBlock> sub(blocks.data(), nb);
    std::vector<std::array<std::complex<float>, dic::kBlockLen>> recovered;
    if (model) {
        recovered = model->forward_blocks(sub);
    } else {
        for (const auto& b : sub) recovered.push_back(b.corrupted);
    }
    dic::ScatterSeries s_corr{"corrupted", "#d62728", {}};
    dic::ScatterSeries s_rec{"recovered", "#1f77b4", {}};
    for (size_t b = 0; b < nb; ++b) {
        for (int i = 0; i < dic::kBlockLen; ++i) {
            s_corr.points.emplace_back(sub[b].corrupted[i].real(), sub[b].corrupted[i].imag());
            s_rec.points.emplace_back(recovered[b][i].real(), recovered[b][i].imag());
        }
    }
    dic::write_scatter_svg({s_corr}, "corrupted symbols", out / "constellation_before.svg");
    dic::write_scatter_svg({s_rec}, "recovered symbols", out / "constellation_after.svg");

    const auto hb = dic::histogram_counts(rep.per_frame_before, 0.0, 0.5, o.hist_bins);
    const auto ha = dic::histogram_counts(rep.per_frame_after, 0.0, 0.5, o.hist_bins);
    dic::write_histogram_svg({{"before", "#d62728", hb}, {"after", "#1f77b4", ha}}, 0.0,
                             0.5 / o.hist_bins, "per-frame SER", "SER", out / "ser_hist.svg");

    std::cout.precision(10);
    std::cout << "ser_before=" << rep.ser_before << "\n"
              << "ser_after=" << rep.ser_after << "\n"
              << "report=" << (out / "report.csv").string() << "\n";
    return 0;
}

struct QuantOptions {
    std::string data;
    std::string model;
    std::string bits = "8,12,16,32";
    std::string out = "sweep.csv";
    double clock_hz = 200e6;
    double cycles = 200;
};

int run_quant(const QuantOptions& o) {
    std::vector<int> bits;
    std::stringstream ss(o.bits);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) bits.push_back(std::stoi(tok));
    }
    if (bits.empty()) throw CLI::ValidationError("--bits", "no bit widths given");

    dic::HardwareModel hw;
    hw.clock_hz = o.clock_hz;
    hw.nn_extra_cycles = o.cycles;
    hw.validate();

    auto model = dic::load_checkpoint(o.model);
    auto rows = dic::sweep_report(*model, o.data, bits, hw);
    dic::write_sweep_csv(rows, o.out);

    std::cout.precision(10);
    std::cout << "latency_us=" << dic::latency_estimate(hw) * 1e6 << "\n"
              << "power_watts=" << hw.power_estimate_watts << " (reported figure)\n"
              << "parameter_count=" << model->parameter_count() << "\n"
              << "sweep=" << o.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deep interference cancellation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config")->expected(0, 1);

    GenOptions gen;
    auto* cmd_gen = app.add_subcommand("gen", "generate a dataset");
    cmd_gen->add_option("--frames", gen.frames, "total radio frames");
    cmd_gen->add_option("--train-frames", gen.train_frames, "frames in the train split");
    cmd_gen->add_option("--val-frames", gen.val_frames, "frames in the validation split");
    cmd_gen->add_option("--test-frames", gen.test_frames, "frames in the test split");
    cmd_gen->add_option("--dims", gen.dims, "grid as SUBFRAMESxSYMBOLSxSUBCARRIERS");
    cmd_gen->add_option("--qam", gen.qam, "QAM order (4/16/64/256/1024)");
    cmd_gen->add_option("--sir-db", gen.sir_db, "signal-to-interference ratio in dB (inf = off)");
    cmd_gen->add_option("--calibrate-ser", gen.calibrate_ser,
                        "calibrate SIR to this baseline SER instead of --sir-db");
    cmd_gen->add_option("--snr-db", gen.snr_db, "AWGN SNR in dB (default off)");
    cmd_gen->add_option("--interferer-qam", gen.interferer_qam,
                        "interferer QAM order (0 = same as victim)");
    cmd_gen->add_option("--gain-scope", gen.gain_scope,
                        "per_dataset | per_frame | per_block");
    cmd_gen->add_option("--seed", gen.seed, "dataset seed");
    cmd_gen->add_option("--out", gen.out, "output directory")->required();

    TrainOptions tr;
    auto* cmd_train = app.add_subcommand("train", "train the canceller");
    cmd_train->add_option("--data", tr.data, "dataset directory")->required();
    cmd_train->add_option("--out", tr.out, "checkpoint output path");
    cmd_train->add_option("--loss-curve", tr.loss_curve, "loss curve CSV path");
    cmd_train->add_option("--epochs", tr.cfg.epochs, "training epochs");
    cmd_train->add_option("--batch", tr.cfg.batch_size, "blocks per batch");
    cmd_train->add_option("--lr", tr.cfg.lr, "Adam learning rate");
    cmd_train->add_option("--weight-decay", tr.cfg.weight_decay, "decoupled weight decay");
    cmd_train->add_option("--aug-noise", tr.cfg.aug_noise,
                          "training-input Gaussian noise std (augmentation)");
    cmd_train->add_flag("--resample-blocks,!--no-resample-blocks", tr.cfg.resample_blocks,
                        "re-chunk training symbols into fresh blocks each epoch");
    cmd_train->add_option("--seed", tr.cfg.seed, "training seed");
    cmd_train->add_option("--patience", tr.cfg.patience, "early-stop patience (0 disables)");
    cmd_train->add_option("--iq-mode", tr.iq_mode, "split_iq | stacked_iq");

    EvalOptions ev;
    auto* cmd_eval = app.add_subcommand("eval", "evaluate on the test split");
    cmd_eval->add_option("--data", ev.data, "dataset directory")->required();
    cmd_eval->add_option("--model", ev.model, "checkpoint path");
    cmd_eval->add_flag("--identity", ev.identity, "identity diagnostic (bypass the model)");
    cmd_eval->add_option("--out-dir", ev.out_dir, "output directory for report artifacts");
    cmd_eval->add_option("--constellation-blocks", ev.constellation_blocks,
                         "blocks in the constellation dump");
    cmd_eval->add_option("--hist-bins", ev.hist_bins, "per-frame SER histogram bins");

    QuantOptions qu;
    auto* cmd_quant = app.add_subcommand("quant", "fixed-point sweep and latency estimate");
    cmd_quant->add_option("--data", qu.data, "dataset directory")->required();
    cmd_quant->add_option("--model", qu.model, "checkpoint path")->required();
    cmd_quant->add_option("--bits", qu.bits, "comma-separated bit widths");
    cmd_quant->add_option("--out", qu.out, "sweep CSV path");
    cmd_quant->add_option("--clock-hz", qu.clock_hz, "hardware clock in Hz");
    cmd_quant->add_option("--cycles", qu.cycles, "extra pipeline cycles for the NN");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*cmd_gen) return run_gen(gen);
        if (*cmd_train) return run_train(tr);
        if (*cmd_eval) return run_eval(ev);
        if (*cmd_quant) return run_quant(qu);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
