#include "qfdi/train/synth.hpp"

#include <algorithm>
#include <cmath>

#include "qfdi/common/parallel.hpp"
#include "qfdi/common/rng.hpp"
#include "qfdi/sim/dynamics.hpp"
#include "qfdi/sym/rotation.hpp"

namespace qfdi::train {

const char* to_string(ControllerKind k) {
    return k == ControllerKind::lqr ? "lqr" : "cbf-qp";
}

ControllerKind controller_from(const std::string& s) {
    if (s == "lqr") return ControllerKind::lqr;
    if (s == "cbf-qp") return ControllerKind::cbf_qp;
    throw sim::ConfigError("unknown controller: " + s);
}

void SynthConfig::validate() const {
    sim.validate();
    if (N1 < 1) throw sim::ConfigError("SynthConfig: N1 >= 1");
    if (fault_levels.empty())
        throw sim::ConfigError("SynthConfig: fault_levels empty");
    if (std::find(fault_levels.begin(), fault_levels.end(), 1.0) ==
        fault_levels.end())
        throw sim::ConfigError("SynthConfig: fault_levels must include 1.0");
    if (fault_motor < 1 || fault_motor > 4)
        throw sim::ConfigError("SynthConfig: fault_motor in 1..4");
    if (T < 1) throw sim::ConfigError("SynthConfig: T >= 1");
    if (onset_sample < T || onset_sample + T > sim.horizon)
        throw sim::ConfigError(
            "SynthConfig: need T <= onset_sample and onset_sample + T <= horizon");
}

std::vector<std::array<double, 6>> generate_residuals(
    const sim::Trajectory& traj, const sim::QuadParams& nominal,
    const sim::SimConfig& cfg) {
    std::vector<std::array<double, 6>> out(traj.states.size(),
                                           std::array<double, 6>{});
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
        const sim::State ref =
            sim::step_rk4(traj.states[k - 1],
                          traj.u_commanded[k - 1], nominal, cfg.convention,
                          cfg.dt);
        const auto y = traj.outputs[k].as_array();
        const auto yref = sim::project(ref).as_array();
        for (int i = 0; i < 6; ++i) out[k][static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] - yref[static_cast<std::size_t>(i)];
    }
    return out;
}

sim::State sample_initial_state(std::mt19937_64& g) {
    sim::State x{};
    // uniform in the ball: direction x radius^(1/3) scaling
    double dir[3];
    double norm = 0.0;
    do {
        norm = 0.0;
        for (double& d : dir) {
            d = rng::normal(g);
            norm += d * d;
        }
        norm = std::sqrt(norm);
    } while (norm < 1e-12);
    const double rad = 0.5 * std::cbrt(rng::uniform(g, 0.0, 1.0));
    for (int i = 0; i < 3; ++i) x[static_cast<std::size_t>(i)] = dir[i] / norm * rad;
    for (int i = sim::kPhi; i <= sim::kPsi; ++i)
        x[static_cast<std::size_t>(i)] = rng::uniform(g, -0.2, 0.2);
    for (int i = sim::kR; i <= sim::kP; ++i)
        x[static_cast<std::size_t>(i)] = rng::uniform(g, -0.2, 0.2);
    return x;
}

sim::Controller make_controller(ControllerKind kind,
                                const control::LqrGain& gain,
                                const control::Linearization& lin,
                                const control::SafetySpec& safety) {
    if (kind == ControllerKind::lqr) {
        return [gain](std::int64_t, const sim::State& x) {
            return control::lqr_control(gain, x);
        };
    }
    return [gain, lin, safety](std::int64_t, const sim::State& x) {
        return control::cbf_qp_control(safety, gain, lin, x).u;
    };
}

std::vector<TrajectoryWindow> slice_windows(
    const sim::Trajectory& traj, const sim::FaultVector& label,
    std::int64_t onset_sample, int T,
    const std::vector<std::array<double, 6>>* resid) {
    std::vector<TrajectoryWindow> out;
    const std::int64_t n = traj.valid_steps;
    for (std::int64_t k = onset_sample; k <= onset_sample + T; ++k) {
        if (k > n) break;  // divergence truncated the tail windows
        TrajectoryWindow w;
        w.y_seq.assign(traj.outputs.begin() + (k - T), traj.outputs.begin() + k);
        w.u_seq.assign(traj.u_commanded.begin() + (k - T),
                       traj.u_commanded.begin() + k);
        if (resid)
            w.resid_seq.assign(resid->begin() + (k - T), resid->begin() + k);
        w.label = label;
        w.onset_offset = std::clamp<std::int64_t>(k - onset_sample, 0, T);
        out.push_back(std::move(w));
    }
    return out;
}

EpochData synthesize_epoch_data(const SynthConfig& cfg,
                                const sim::QuadParams& plant,
                                const sim::QuadParams& nominal,
                                const control::LqrGain& gain,
                                const control::Linearization& lin,
                                std::uint64_t seed, std::uint64_t epoch) {
    cfg.validate();
    const std::size_t d = cfg.fault_levels.size();
    const std::size_t rollouts = static_cast<std::size_t>(cfg.N1) * d;

    // same initial states reused across all fault levels
    auto init_stream = rng::stream(seed, "init", epoch);
    std::vector<sim::State> x0s;
    x0s.reserve(static_cast<std::size_t>(cfg.N1));
    for (std::int64_t i = 0; i < cfg.N1; ++i)
        x0s.push_back(sample_initial_state(init_stream));

    const sim::Controller controller =
        make_controller(cfg.controller, gain, lin, cfg.safety);

    struct RolloutOut {
        std::vector<TrajectoryWindow> windows;
        bool dropped = false;
    };
    std::vector<RolloutOut> results(rollouts);
    std::unique_ptr<sym::CaseTable> table;
    if (cfg.symmetry_augment) table = std::make_unique<sym::CaseTable>(nominal);

    par::for_ranges(rollouts, cfg.threads, [&](unsigned, std::size_t lo,
                                               std::size_t hi) {
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const std::size_t i0 = idx / d;
            const std::size_t lvl = idx % d;
            const double level = cfg.fault_levels[lvl];
            sim::FaultVector fault = sim::FaultVector::motor(cfg.fault_motor, level);
            const sim::FaultSchedule sched =
                sim::schedule_at_sample(fault, cfg.onset_sample);
            const sim::Trajectory traj =
                sim::simulate(x0s[i0], controller, sched, cfg.sim, plant);
            if (!traj.valid_for_training(cfg.sim.horizon)) {
                results[idx].dropped = true;
                continue;
            }
            std::vector<std::array<double, 6>> resid;
            if (cfg.with_residuals)
                resid = generate_residuals(traj, nominal, cfg.sim);
            auto wins = slice_windows(traj, fault, cfg.onset_sample, cfg.T,
                                      cfg.with_residuals ? &resid : nullptr);
            if (!cfg.symmetry_augment) {
                results[idx].windows = std::move(wins);
                continue;
            }
            // dihedral completion: the four rotation cases of the window and
            // of its mirror image, labels permuted through each transform
            auto& out = results[idx].windows;
            out.reserve(wins.size() * 8);
            for (const auto& w : wins) {
                const TrajectoryWindow wm = sym::mirror_window(w, table->mirror());
                for (int n = 1; n <= 4; ++n) {
                    const auto& rc = table->by_index(n);
                    out.push_back(sym::canonicalize_window(w, rc, table->mixer()));
                    out.push_back(sym::canonicalize_window(wm, rc, table->mixer()));
                }
            }
        }
    });

    EpochData out;
    out.total_rollouts = static_cast<std::int64_t>(rollouts);
    out.windows_per_level.assign(d, 0);
    const std::int64_t per_rollout = static_cast<std::int64_t>(cfg.T) + 1;
    for (std::size_t lvl = 0; lvl < d; ++lvl)
        out.windows_per_level[lvl] = cfg.N1 * per_rollout;
    for (std::size_t idx = 0; idx < rollouts; ++idx) {
        if (results[idx].dropped) {
            ++out.dropped_rollouts;
            continue;
        }
        auto& w = results[idx].windows;
        out.windows.insert(out.windows.end(),
                           std::make_move_iterator(w.begin()),
                           std::make_move_iterator(w.end()));
    }
    return out;
}

}  // namespace qfdi::train
