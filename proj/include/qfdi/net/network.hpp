#pragma once
// Dense fault classifiers, built from scratch: an MLP over the flattened
// window and a single-layer LSTM over the step sequence, both with a
// tanh-activated linear head and sigmoid outputs in (0,1)^4.

#include <cstdint>
#include <optional>
#include <string>

#include "qfdi/net/types.hpp"

namespace qfdi::net {

enum class Arch { mlp, lstm };
const char* to_string(Arch a);
Arch arch_from(const std::string& s);

struct TensorRef {
    std::string name;
    Tensor* t;
};

struct MlpNetwork {
    // input Nx128, three hidden 128x128, 128x64, output 64x4; tanh hidden,
    // sigmoid output.
    std::vector<Tensor> W;  // row-major out x in
    std::vector<Tensor> b;

    static MlpNetwork make(int input_width);
    std::vector<int> dims() const;
};

struct LstmNetwork {
    // gates stacked [i; f; g; o], W: 4H x (F+H) acting on [x_t; h_{t-1}]
    Tensor W;
    Tensor b;
    int hidden = 0;
    int input_width = 0;
    // head: H -> 128 -> 64 -> 4, tanh between, sigmoid out
    std::vector<Tensor> headW;
    std::vector<Tensor> headB;

    static LstmNetwork make(int input_width, int hidden);
};

struct FdiNetwork {
    Arch arch = Arch::lstm;
    FeatureSpec spec;
    int hidden = 128;  // LSTM width; ignored for MLP
    std::uint64_t init_seed = 0;
    MlpNetwork mlp;
    LstmNetwork lstm;

    std::vector<TensorRef> tensors();
    std::vector<const Tensor*> tensors() const;
    std::int64_t param_count() const;
};

// Weights drawn uniformly in +-1/sqrt(fan_in), biases included, seeded.
FdiNetwork make_network(Arch arch, const FeatureSpec& spec, int hidden,
                        std::uint64_t seed);

// Aligned flat gradient buffers (same order as tensors()).
struct Gradients {
    std::vector<std::vector<double>> g;

    static Gradients zeros_like(FdiNetwork& net);
    void add(const Gradients& other);
    void scale(double s);
    bool finite() const;
};

struct ForwardResult {
    std::array<double, 4> pred;
};

ForwardResult forward_mlp(const MlpNetwork& net,
                          const std::vector<double>& features);
ForwardResult forward_lstm(const LstmNetwork& net,
                           const std::vector<double>& window_features);
ForwardResult forward(const FdiNetwork& net,
                      const std::vector<double>& features);

// Hinge loss on the prediction-label distance: max(0, |pred - label|_2 - eps).
double loss_hinge(const std::array<double, 4>& pred,
                  const sim::FaultVector& label, double epsilon);

// Loss value plus exact reverse-mode gradients (BPTT for the LSTM).
// Subgradient zero at the hinge kink and at zero distance.
double backward(const FdiNetwork& net, const std::vector<double>& features,
                const sim::FaultVector& label, double epsilon, Gradients& grad);

struct SgdConfig {
    double learning_rate = 1e-3;
    std::int64_t batch_size = 512;
    std::uint64_t seed = 0;
};

// w <- w - lr * g
void sgd_step(FdiNetwork& net, const Gradients& grad, const SgdConfig& cfg);

// Checkpoint: one-line JSON header (format version, arch, feature spec,
// seed, tensor directory) followed by raw little-endian f64 payloads.
void save_checkpoint(const FdiNetwork& net, const std::string& path);
FdiNetwork load_checkpoint(const std::string& path);

}  // namespace qfdi::net
