#include "dic/quant.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace dic {

void QuantScheme::validate() const {
    for (int b : {weight_bits, activation_bits}) {
        if (b < 4 || b > 32) {
            throw std::invalid_argument("quant: bit width must lie in [4, 32], got " +
                                        std::to_string(b));
        }
    }
}

void HardwareModel::validate() const {
    if (!(clock_hz > 0.0) || nn_extra_cycles < 0.0 || !(power_estimate_watts > 0.0)) {
        throw std::invalid_argument("hardware model values must be positive");
    }
}

FakeQuantizer::FakeQuantizer(int bits, std::vector<double> scales)
    : bits_(bits), scales_(std::move(scales)) {}

void FakeQuantizer::apply(int site, Tensor& x) const {
    if (site < 0 || static_cast<size_t>(site) >= scales_.size()) {
        throw std::logic_error("quantized inference with uncalibrated activation site " +
                               std::to_string(site));
    }
    const double s = scales_[site];
    const double qmax = std::ldexp(1.0, bits_ - 1) - 1.0;  // 2^(b-1)-1
    const double qmin = -std::ldexp(1.0, bits_ - 1);
    for (float& v : x.data) {
        double q = std::nearbyint(static_cast<double>(v) / s);
        if (q > qmax) q = qmax;
        if (q < qmin) q = qmin;
        v = static_cast<float>(s * q);
    }
}

void MaxAbsRecorder::apply(int site, Tensor& x) const {
    if (site < 0 || static_cast<size_t>(site) >= maxabs_.size()) {
        throw std::logic_error("activation site out of range");
    }
    double m = maxabs_[site];
    for (float v : x.data) {
        const double a = std::abs(static_cast<double>(v));
        if (a > m) m = a;
    }
    maxabs_[site] = m;
}

double fake_quantize_tensor(Tensor& t, int bits) {
    double maxabs = 0.0;
    for (float v : t.data) maxabs = std::max(maxabs, std::abs(static_cast<double>(v)));
    const double qmax = std::ldexp(1.0, bits - 1) - 1.0;
    const double s = maxabs > 0.0 ? maxabs / qmax : 1.0;  // all-zero tensor: scale 1
    const double qmin = -std::ldexp(1.0, bits - 1);
    for (float& v : t.data) {
        double q = std::nearbyint(static_cast<double>(v) / s);
        if (q > qmax) q = qmax;
        if (q < qmin) q = qmin;
        v = static_cast<float>(s * q);
    }
    return s;
}

std::unique_ptr<CancellerModel> clone_model(CancellerModel& m) {
    auto out = std::make_unique<CancellerModel>(m.iq_mode(), 0);
    auto src = m.named_tensors();
    auto dst = out->named_tensors();
    for (size_t i = 0; i < src.size(); ++i) dst[i].second->data = src[i].second->data;
    const bool init = m.bn1a.stats_initialized;
    for (BatchNorm1d* bn : {&out->bn1a, &out->bn1b, &out->bn2a, &out->bn2b, &out->bn3a,
                            &out->bn3b}) {
        bn->stats_initialized = init;
    }
    out->epochs_run = m.epochs_run;
    out->final_val_loss = m.final_val_loss;
    return out;
}

QuantizedModel quantize_checkpoint(CancellerModel& model, const QuantScheme& scheme,
                                   std::span<const SymbolBlock> calibration_blocks) {
    scheme.validate();
    QuantizedModel qm;
    qm.scheme = scheme;
    qm.model = clone_model(model);
    for (auto& [name, t] : qm.model->named_tensors()) {
        fake_quantize_tensor(*t, scheme.weight_bits);
    }

    if (calibration_blocks.empty()) {
        throw std::invalid_argument("quantize_checkpoint: calibration blocks required");
    }
    MaxAbsRecorder rec(qm.model->activation_site_count());
    const size_t n = std::min<size_t>(calibration_blocks.size(), 256);
    qm.model->forward_blocks(calibration_blocks.subspan(0, n), &rec);

    std::vector<double> scales(rec.maxabs().size());
    const double qmax = std::ldexp(1.0, scheme.activation_bits - 1) - 1.0;
    for (size_t i = 0; i < scales.size(); ++i) {
        scales[i] = rec.maxabs()[i] > 0.0 ? rec.maxabs()[i] / qmax : 1.0;
    }
    qm.activations = std::make_unique<FakeQuantizer>(scheme.activation_bits, std::move(scales));
    return qm;
}

std::vector<std::array<std::complex<float>, kBlockLen>> quantized_forward(
    const QuantizedModel& qm, std::span<const SymbolBlock> blocks) {
    if (!qm.activations) throw std::logic_error("quantized_forward: uncalibrated activations");
    return qm.model->forward_blocks(blocks, qm.activations.get());
}

double latency_estimate(const HardwareModel& hw) {
    hw.validate();
    return hw.nn_extra_cycles / hw.clock_hz;
}

std::vector<SweepRow> sweep_report(CancellerModel& model, const std::filesystem::path& dataset_dir,
                                   const std::vector<int>& bit_widths, const HardwareModel& hw) {
    DatasetReader val_reader(dataset_dir, Split::val);
    auto calib = val_reader.load_all_blocks();
    const QamConstellation c = QamConstellation::build(val_reader.manifest().qam_order);
    const int64_t n_params = model.parameter_count();

    std::vector<SweepRow> rows;
    for (int bits : bit_widths) {
        QuantScheme scheme{bits, bits};
        QuantizedModel qm = quantize_checkpoint(model, scheme, calib);
        DatasetReader test_reader(dataset_dir, Split::test);
        EvalReport rep = evaluate_canceller(qm.model.get(), test_reader, c, qm.activations.get());
        SweepRow row;
        row.bits = bits;
        row.ser_after = rep.ser_after;
        row.latency_s = latency_estimate(hw);
        row.param_bytes = static_cast<uint64_t>((n_params * bits + 7) / 8);
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "bits,ser_after,latency_s,param_bytes\n";
    f.precision(10);
    for (const auto& r : rows) {
        f << r.bits << ',' << r.ser_after << ',' << r.latency_s << ',' << r.param_bytes << '\n';
    }
}

}  // namespace dic
