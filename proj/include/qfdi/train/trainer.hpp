#pragma once
// Replay buffer plus the epoch loop: synthesize, append, iterate the buffer
// in disjoint sampled batches, one SGD pass per batch, with the
// loss-threshold stopping rule.

#include <cstdint>
#include <deque>
#include <functional>

#include "qfdi/net/network.hpp"
#include "qfdi/train/synth.hpp"

namespace qfdi::train {

class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void append(std::vector<TrajectoryWindow> windows);
    std::size_t size() const { return store_.size(); }
    std::size_t capacity() const { return capacity_; }
    const TrajectoryWindow& at(std::size_t i) const { return store_[i]; }

    // Shuffled disjoint index batches covering the whole buffer.
    std::vector<std::vector<std::size_t>> sample_batches(
        std::size_t batch_size, std::mt19937_64& g) const;

  private:
    std::size_t capacity_;
    std::deque<TrajectoryWindow> store_;  // oldest at front
};

struct TrainConfig {
    SynthConfig synth;
    net::Arch arch = net::Arch::lstm;
    net::FeatureSpec feature;
    int hidden = 32;
    std::int64_t N_buf = 50000;
    std::int64_t N_bs = 512;
    std::int64_t iter_M = 200;  // hard epoch cap (N_M mirrors it)
    std::int64_t N_M = 200;
    std::int64_t N_m = 10;      // minimum epochs before the loss rule stops
    double loss_stop = 1e-3;
    double epsilon = 0.01;
    double learning_rate = 1e-3;
    std::int64_t plateau_epochs = 10;  // halve lr after this many stalls
    std::uint64_t seed = 0;
    unsigned threads = 0;

    void validate() const;
};

struct EpochStats {
    std::int64_t epoch = 0;
    double mean_loss = 0.0;
    std::int64_t buffer_size = 0;
    std::int64_t dropped_rollouts = 0;
    double learning_rate = 0.0;
};

struct TrainResult {
    net::FdiNetwork net;
    std::vector<EpochStats> trace;
    std::int64_t total_dropped = 0;
    bool stopped_by_loss = false;
};

// Mean hinge loss over one batch and the summed gradients, fanned out across
// worker ranges and reduced in worker order for bitwise determinism.
double batch_gradient(const net::FdiNetwork& net,
                      const ReplayBuffer& buffer,
                      const std::vector<std::size_t>& batch,
                      double epsilon, unsigned threads, net::Gradients& out);

using EpochCallback = std::function<void(const EpochStats&)>;

// Algorithm-1 loop with on-the-fly synthesis per epoch.
TrainResult train(const TrainConfig& cfg, const sim::QuadParams& plant,
                  const sim::QuadParams& nominal,
                  const EpochCallback& on_epoch = nullptr);

// Same loop on a fixed pre-generated pool (no per-epoch synthesis).
TrainResult train_on_windows(const TrainConfig& cfg,
                             std::vector<TrajectoryWindow> pool,
                             const EpochCallback& on_epoch = nullptr);

}  // namespace qfdi::train
