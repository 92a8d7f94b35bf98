// Python bindings for the interference-cancellation toolkit. The module keeps
// to the high-level operations (dataset generation, calibration, training,
// evaluation, quantization); per-layer access stays C++-only.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <limits>

#include "dic/canceller.hpp"
#include "dic/channel.hpp"
#include "dic/dataset.hpp"
#include "dic/quant.hpp"

namespace py = pybind11;
using namespace dic;

namespace {

DatasetManifest make_manifest(uint64_t frames, std::tuple<int, int, int> dims, int qam,
                              double sir_db, double snr_db, const std::string& gain_scope,
                              uint64_t seed, std::optional<std::tuple<uint64_t, uint64_t, uint64_t>> splits,
                              int interferer_qam) {
    DatasetManifest m;
    m.total_frames = frames;
    if (splits) {
        std::tie(m.train_frames, m.val_frames, m.test_frames) = *splits;
    } else {
        m.train_frames = frames / 2;
        m.val_frames = frames / 10;
        m.test_frames = frames - m.train_frames - m.val_frames;
    }
    m.dims = {std::get<0>(dims), std::get<1>(dims), std::get<2>(dims)};
    m.qam_order = qam;
    m.seed = seed;
    m.interference.sir_db = sir_db;
    m.interference.seed = seed;
    m.interference.interferer_order = interferer_qam;
    m.interference.gain_scope = gain_scope_from_string(gain_scope);
    m.noise.snr_db = snr_db;
    m.validate();
    return m;
}

std::vector<SymbolBlock> blocks_from_array(const py::array_t<std::complex<float>>& arr) {
    auto buf = arr.request();
    if (buf.ndim != 2 || buf.shape[1] != kBlockLen) {
        throw std::invalid_argument("expected a [n, 64] complex64 array of symbol blocks");
    }
    const auto* p = static_cast<const std::complex<float>*>(buf.ptr);
    const auto stride0 = static_cast<size_t>(buf.strides[0] / sizeof(std::complex<float>));
    const auto stride1 = static_cast<size_t>(buf.strides[1] / sizeof(std::complex<float>));
    std::vector<SymbolBlock> blocks(static_cast<size_t>(buf.shape[0]));
    for (py::ssize_t b = 0; b < buf.shape[0]; ++b) {
        for (int i = 0; i < kBlockLen; ++i) {
            blocks[b].corrupted[i] = p[b * stride0 + i * stride1];
            blocks[b].clean[i] = blocks[b].corrupted[i];
        }
        blocks[b].frame_id = 0;
        blocks[b].block_id = static_cast<uint64_t>(b);
    }
    return blocks;
}

py::dict report_to_dict(const EvalReport& rep) {
    py::dict d;
    d["ser_before"] = rep.ser_before;
    d["ser_after"] = rep.ser_after;
    d["per_frame_before"] = rep.per_frame_before;
    d["per_frame_after"] = rep.per_frame_after;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "QAM-OFDM co-channel interference cancellation core";

    py::class_<QamConstellation>(m, "Constellation")
        .def(py::init([](int order) { return QamConstellation::build(order); }), py::arg("order"))
        .def_property_readonly("order", &QamConstellation::order)
        .def("map", &QamConstellation::map, py::arg("index"))
        .def("demap", &QamConstellation::demap_hard, py::arg("symbol"))
        .def("points",
             [](const QamConstellation& c) {
                 return std::vector<std::complex<double>>(c.points().begin(), c.points().end());
             })
        .def("__len__", &QamConstellation::order);

    m.def(
        "calibrate_sir",
        [](double target_ser, int qam, uint64_t seed, int64_t trials, int interferer_qam,
           const std::string& gain_scope) {
            const auto c = QamConstellation::build(qam);
            InterferenceConfig tmpl;
            tmpl.seed = seed;
            tmpl.interferer_order = interferer_qam;
            tmpl.gain_scope = gain_scope_from_string(gain_scope);
            return calibrate_sir(target_ser, c, tmpl, trials);
        },
        py::arg("target_ser"), py::arg("qam"), py::arg("seed") = 0,
        py::arg("trials") = 200000, py::arg("interferer_qam") = 0,
        py::arg("gain_scope") = "per_dataset",
        "SIR (dB) whose Monte-Carlo baseline SER is within 0.01 of target_ser");

    m.def(
        "generate_dataset",
        [](const std::filesystem::path& out_dir, uint64_t frames, std::tuple<int, int, int> dims,
           int qam, double sir_db, double snr_db, const std::string& gain_scope, uint64_t seed,
           std::optional<std::tuple<uint64_t, uint64_t, uint64_t>> splits, int interferer_qam,
           int threads) {
            auto m_ = make_manifest(frames, dims, qam, sir_db, snr_db, gain_scope, seed, splits,
                                    interferer_qam);
            generate_dataset(m_, out_dir, threads);
        },
        py::arg("out_dir"), py::arg("frames"), py::arg("dims") = std::make_tuple(11, 140, 180),
        py::arg("qam") = 256, py::arg("sir_db") = std::numeric_limits<double>::infinity(),
        py::arg("snr_db") = std::numeric_limits<double>::infinity(),
        py::arg("gain_scope") = "per_dataset", py::arg("seed") = 0,
        py::arg("splits") = py::none(), py::arg("interferer_qam") = 0, py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>(),
        "Synthesize train/val/test .dic files plus manifest.txt");

    m.def(
        "train",
        [](const std::filesystem::path& data_dir, const std::filesystem::path& out_path,
           int epochs, int batch, double lr, uint64_t seed, int patience,
           const std::string& iq_mode, std::optional<std::filesystem::path> loss_curve) {
            TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.batch_size = batch;
            cfg.lr = lr;
            cfg.seed = seed;
            cfg.patience = patience;
            cfg.iq_mode = iq_mode_from_string(iq_mode);
            cfg.validate();

            DatasetReader train_reader(data_dir, Split::train);
            DatasetReader val_reader(data_dir, Split::val);
            auto train_blocks = train_reader.load_all_blocks();
            auto val_blocks = val_reader.load_all_blocks();

            TrainResult res;
            {
                py::gil_scoped_release release;
                res = train_canceller(train_blocks, val_blocks, cfg);
                save_checkpoint(*res.model, out_path);
                if (loss_curve) write_loss_curve_csv(res.curve, *loss_curve);
            }
            py::dict d;
            d["epochs_run"] = res.epochs_run;
            d["best_val_loss"] = res.best_val_loss;
            std::vector<std::tuple<int, double, double>> curve;
            for (const auto& p : res.curve) curve.emplace_back(p.epoch, p.train_loss, p.val_loss);
            d["curve"] = curve;
            return d;
        },
        py::arg("data_dir"), py::arg("out_path"), py::arg("epochs") = 600, py::arg("batch") = 64,
        py::arg("lr") = 3e-3, py::arg("seed") = 0, py::arg("patience") = 0,
        py::arg("iq_mode") = "stacked_iq", py::arg("loss_curve") = py::none(),
        "Train the canceller on a generated dataset and save a checkpoint");

    m.def(
        "evaluate",
        [](const std::filesystem::path& data_dir,
           std::optional<std::filesystem::path> model_path) {
            std::unique_ptr<CancellerModel> model;
            if (model_path) model = load_checkpoint(*model_path);
            DatasetReader reader(data_dir, Split::test);
            const auto c = QamConstellation::build(reader.manifest().qam_order);
            EvalReport rep;
            {
                py::gil_scoped_release release;
                rep = evaluate_canceller(model.get(), reader, c);
            }
            return report_to_dict(rep);
        },
        py::arg("data_dir"), py::arg("model_path") = py::none(),
        "SER before/after cancellation on the test split (model_path=None: identity)");

    py::class_<CancellerModel>(m, "Canceller")
        .def(py::init([](const std::string& iq_mode, uint64_t seed) {
                 return std::make_unique<CancellerModel>(iq_mode_from_string(iq_mode), seed);
             }),
             py::arg("iq_mode") = "stacked_iq", py::arg("seed") = 0)
        .def_static("load",
                    [](const std::filesystem::path& p) { return load_checkpoint(p); },
                    py::arg("path"))
        .def("save", [](CancellerModel& self,
                        const std::filesystem::path& p) { save_checkpoint(self, p); },
             py::arg("path"))
        .def_property_readonly("iq_mode",
                               [](const CancellerModel& self) { return to_string(self.iq_mode()); })
        .def_property_readonly("parameter_count", &CancellerModel::parameter_count)
        .def_readonly("epochs_run", &CancellerModel::epochs_run)
        .def_readonly("final_val_loss", &CancellerModel::final_val_loss)
        .def(
            "forward",
            [](CancellerModel& self, const py::array_t<std::complex<float>>& arr) {
                auto blocks = blocks_from_array(arr);
                std::vector<std::array<std::complex<float>, kBlockLen>> rec;
                {
                    py::gil_scoped_release release;
                    rec = self.forward_blocks(blocks);
                }
                py::array_t<std::complex<float>> out(
                    {static_cast<py::ssize_t>(rec.size()), static_cast<py::ssize_t>(kBlockLen)});
                auto w = out.mutable_unchecked<2>();
                for (size_t b = 0; b < rec.size(); ++b) {
                    for (int i = 0; i < kBlockLen; ++i) w(static_cast<py::ssize_t>(b), i) = rec[b][i];
                }
                return out;
            },
            py::arg("blocks"), "Run [n, 64] complex64 symbol blocks through the canceller");

    m.def(
        "quant_sweep",
        [](const std::filesystem::path& data_dir, const std::filesystem::path& model_path,
           const std::vector<int>& bits, double clock_hz, double cycles,
           std::optional<std::filesystem::path> out_csv) {
            auto model = load_checkpoint(model_path);
            HardwareModel hw;
            hw.clock_hz = clock_hz;
            hw.nn_extra_cycles = cycles;
            std::vector<SweepRow> rows;
            {
                py::gil_scoped_release release;
                rows = sweep_report(*model, data_dir, bits, hw);
                if (out_csv) write_sweep_csv(rows, *out_csv);
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["bits"] = r.bits;
                d["ser_after"] = r.ser_after;
                d["latency_s"] = r.latency_s;
                d["param_bytes"] = r.param_bytes;
                out.append(d);
            }
            return out;
        },
        py::arg("data_dir"), py::arg("model_path"),
        py::arg("bits") = std::vector<int>{8, 12, 16, 32}, py::arg("clock_hz") = 200e6,
        py::arg("cycles") = 200.0, py::arg("out_csv") = py::none(),
        "Fixed-point bit-width sweep: SER, latency and parameter memory per width");

    m.def(
        "latency_estimate",
        [](double clock_hz, double cycles) {
            HardwareModel hw;
            hw.clock_hz = clock_hz;
            hw.nn_extra_cycles = cycles;
            return latency_estimate(hw);
        },
        py::arg("clock_hz") = 200e6, py::arg("cycles") = 200.0,
        "Added pipeline latency in seconds for the hardware model");

    m.attr("BLOCK_LEN") = kBlockLen;
    m.attr("__version__") = "0.1.0";
}
