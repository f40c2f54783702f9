#include "qfdi/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qfdi/common/parallel.hpp"
#include "qfdi/common/rng.hpp"

namespace qfdi::train {

void ReplayBuffer::append(std::vector<TrajectoryWindow> windows) {
    for (auto& w : windows) {
        if (store_.size() == capacity_) store_.pop_front();
        store_.push_back(std::move(w));
    }
}

std::vector<std::vector<std::size_t>> ReplayBuffer::sample_batches(
    std::size_t batch_size, std::mt19937_64& g) const {
    std::vector<std::size_t> idx(store_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Fisher-Yates with the explicit uniform to stay library-independent
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j =
            static_cast<std::size_t>(rng::uniform(g, 0.0, static_cast<double>(i)));
        std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
    }
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t s = 0; s < idx.size(); s += batch_size) {
        const std::size_t e = std::min(idx.size(), s + batch_size);
        batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(s),
                             idx.begin() + static_cast<std::ptrdiff_t>(e));
    }
    return batches;
}

void TrainConfig::validate() const {
    synth.validate();
    if (N_buf < 1 || N_bs < 1) throw sim::ConfigError("TrainConfig: buffer/batch >= 1");
    if (!(N_m < N_M)) throw sim::ConfigError("TrainConfig: N_m < N_M required");
    if (iter_M < 1) throw sim::ConfigError("TrainConfig: iter_M >= 1");
    if (!(learning_rate > 0)) throw sim::ConfigError("TrainConfig: learning_rate > 0");
    if (!(epsilon > 0 && epsilon < 1)) throw sim::ConfigError("TrainConfig: epsilon in (0,1)");
    if (feature.T != synth.T) throw sim::ConfigError("TrainConfig: feature T != synth T");
    if (feature.needs_residuals() && !synth.with_residuals)
        throw sim::ConfigError("TrainConfig: feature mode needs residuals");
}

double batch_gradient(const net::FdiNetwork& net, const ReplayBuffer& buffer,
                      const std::vector<std::size_t>& batch, double epsilon,
                      unsigned threads, net::Gradients& out) {
    const unsigned t = par::resolve_threads(threads);
    std::vector<net::Gradients> partial(t);
    std::vector<double> losses(t, 0.0);
    auto& mut = const_cast<net::FdiNetwork&>(net);
    for (auto& p : partial) p = net::Gradients::zeros_like(mut);

    par::for_ranges(batch.size(), t, [&](unsigned w, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const TrajectoryWindow& win = buffer.at(batch[i]);
            const std::vector<double> feat = net::flatten_window(win, net.spec);
            losses[w] += net::backward(net, feat, win.label, epsilon, partial[w]);
        }
    });

    out = std::move(partial[0]);
    for (unsigned w = 1; w < t; ++w) out.add(partial[w]);
    const double scale = 1.0 / static_cast<double>(batch.size());
    out.scale(scale);
    double loss = 0.0;
    for (double l : losses) loss += l;
    if (!std::isfinite(loss) || !out.finite())
        throw net::NumericError("batch_gradient: non-finite loss or gradient");
    return loss * scale;
}

namespace {

TrainResult run_epochs(
    const TrainConfig& cfg,
    const std::function<EpochData(std::uint64_t epoch)>& make_data,
    const EpochCallback& on_epoch) {
    cfg.validate();
    net::FdiNetwork net = net::make_network(cfg.arch, cfg.feature, cfg.hidden,
                                            cfg.seed);
    ReplayBuffer buffer(static_cast<std::size_t>(cfg.N_buf));
    auto batch_stream = rng::stream(cfg.seed, "batch-order");

    TrainResult result;
    double lr = cfg.learning_rate;
    double best_loss = std::numeric_limits<double>::infinity();
    std::int64_t stall = 0;
    const std::int64_t max_epochs = std::min(cfg.iter_M, cfg.N_M);

    for (std::int64_t epoch = 1; epoch <= max_epochs; ++epoch) {
        EpochData data = make_data(static_cast<std::uint64_t>(epoch));
        result.total_dropped += data.dropped_rollouts;
        buffer.append(std::move(data.windows));

        const auto batches =
            buffer.sample_batches(static_cast<std::size_t>(cfg.N_bs), batch_stream);
        double loss_sum = 0.0;
        std::int64_t nb = 0;
        net::SgdConfig sgd{lr, cfg.N_bs, cfg.seed};
        for (const auto& batch : batches) {
            net::Gradients grad;
            loss_sum += batch_gradient(net, buffer, batch, cfg.epsilon,
                                       cfg.threads, grad);
            net::sgd_step(net, grad, sgd);
            ++nb;
        }
        const double mean_loss = nb > 0 ? loss_sum / static_cast<double>(nb) : 0.0;

        if (mean_loss < best_loss - 1e-6) {
            best_loss = mean_loss;
            stall = 0;
        } else if (++stall >= cfg.plateau_epochs) {
            lr *= 0.5;
            stall = 0;
        }

        EpochStats st{epoch, mean_loss, static_cast<std::int64_t>(buffer.size()),
                      data.dropped_rollouts, lr};
        result.trace.push_back(st);
        if (on_epoch) on_epoch(st);

        if (epoch >= cfg.N_m && mean_loss < cfg.loss_stop) {
            result.stopped_by_loss = true;
            break;
        }
    }
    result.net = std::move(net);
    return result;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const sim::QuadParams& plant,
                  const sim::QuadParams& nominal, const EpochCallback& on_epoch) {
    cfg.validate();
    const control::Linearization lin =
        control::linearize(nominal, cfg.synth.sim.convention);
    const control::LqrGain gain = control::solve_lqr(
        lin.A, lin.B, control::quad_lqr_weights(), nominal.hover_wrench());
    return run_epochs(
        cfg,
        [&](std::uint64_t epoch) {
            return synthesize_epoch_data(cfg.synth, plant, nominal, gain, lin,
                                         cfg.seed, epoch);
        },
        on_epoch);
}

TrainResult train_on_windows(const TrainConfig& cfg,
                             std::vector<TrajectoryWindow> pool,
                             const EpochCallback& on_epoch) {
    bool delivered = false;
    return run_epochs(
        cfg,
        [&](std::uint64_t) {
            EpochData d;
            if (!delivered) {
                d.windows = std::move(pool);
                delivered = true;
            }
            return d;
        },
        on_epoch);
}

}  // namespace qfdi::train
