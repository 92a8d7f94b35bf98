#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "dic/canceller.hpp"

namespace dic {

struct QuantScheme {
    int weight_bits = 8;
    int activation_bits = 8;

    void validate() const;
};

struct HardwareModel {
    double clock_hz = 200e6;
    double nn_extra_cycles = 200;
    double power_estimate_watts = 1.0;  // reported figure, not computed

    void validate() const;
};

// Hook applied by CancellerModel at every stage boundary during forward.
class ActivationQuantizer {
public:
    virtual void apply(int site, Tensor& x) const = 0;
    virtual ~ActivationQuantizer() = default;
};

// Symmetric per-tensor fake quantization: x -> s * clamp(round(x/s)).
class FakeQuantizer : public ActivationQuantizer {
public:
    FakeQuantizer(int bits, std::vector<double> scales);
    void apply(int site, Tensor& x) const override;

    const std::vector<double>& scales() const { return scales_; }

private:
    int bits_;
    std::vector<double> scales_;
};

// Records max-abs per site without modifying activations.
class MaxAbsRecorder : public ActivationQuantizer {
public:
    explicit MaxAbsRecorder(int sites) : maxabs_(sites, 0.0) {}
    void apply(int site, Tensor& x) const override;
    const std::vector<double>& maxabs() const { return maxabs_; }

private:
    mutable std::vector<double> maxabs_;
};

// Fake-quantizes one tensor in place; returns the scale used.
double fake_quantize_tensor(Tensor& t, int bits);

struct QuantizedModel {
    std::unique_ptr<CancellerModel> model;  // weights already fake-quantized
    std::unique_ptr<FakeQuantizer> activations;
    QuantScheme scheme;
};

std::unique_ptr<CancellerModel> clone_model(CancellerModel& m);

// Post-training quantization: weights fake-quantized per tensor, activation
// scales calibrated max-abs on the given blocks (typically 256 validation
// blocks).
QuantizedModel quantize_checkpoint(CancellerModel& model, const QuantScheme& scheme,
                                   std::span<const SymbolBlock> calibration_blocks);

std::vector<std::array<std::complex<float>, kBlockLen>> quantized_forward(
    const QuantizedModel& qm, std::span<const SymbolBlock> blocks);

double latency_estimate(const HardwareModel& hw);

struct SweepRow {
    int bits;
    double ser_after;
    double latency_s;
    uint64_t param_bytes;
};

std::vector<SweepRow> sweep_report(CancellerModel& model, const std::filesystem::path& dataset_dir,
                                   const std::vector<int>& bit_widths, const HardwareModel& hw);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

}  // namespace dic
