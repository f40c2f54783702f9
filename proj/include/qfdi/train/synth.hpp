#pragma once
// Dataset synthesis: rollouts over fault levels sharing initial conditions,
// one-step-resynced residuals for the model-based features, and sliding
// windows covering every fault-overlap length.

#include <cstdint>
#include <functional>
#include <memory>

#include "qfdi/control/cbf.hpp"
#include "qfdi/control/lqr.hpp"
#include "qfdi/sim/simulate.hpp"
#include "qfdi/train/window.hpp"

namespace qfdi::train {

enum class ControllerKind { lqr, cbf_qp };
const char* to_string(ControllerKind k);
ControllerKind controller_from(const std::string& s);

struct SynthConfig {
    sim::SimConfig sim;
    std::int64_t N1 = 20;                 // initial conditions per epoch
    std::vector<double> fault_levels;     // d entries, includes 1.0
    int fault_motor = 2;                  // trained fault location
    std::int64_t onset_sample = 100;      // first fault-affected sample
    int T = 100;                          // window length
    bool with_residuals = false;          // generate resid_seq
    bool symmetry_augment = false;        // dihedral label-permuted copies
    ControllerKind controller = ControllerKind::lqr;
    control::SafetySpec safety;           // used by the cbf-qp controller
    unsigned threads = 0;

    void validate() const;
};

// Per sample k >= 1: restart the no-fault nominal reference model at the
// previous true state, advance one period under the recorded commanded
// input, and subtract. Residual at k = 0 is zero.
std::vector<std::array<double, 6>> generate_residuals(
    const sim::Trajectory& traj, const sim::QuadParams& nominal,
    const sim::SimConfig& cfg);

struct EpochData {
    std::vector<TrajectoryWindow> windows;
    std::int64_t dropped_rollouts = 0;
    std::int64_t total_rollouts = 0;
    std::vector<std::int64_t> windows_per_level;  // before divergence drops
};

// Draws a hover-neighborhood initial state: position uniform in the 0.5 m
// ball, attitude and rates uniform in +-0.2.
sim::State sample_initial_state(std::mt19937_64& g);

sim::Controller make_controller(ControllerKind kind,
                                const control::LqrGain& gain,
                                const control::Linearization& lin,
                                const control::SafetySpec& safety);

// Rolls out d trajectories per initial condition (one per fault level, same
// x0 across levels), slices windows k = onset..onset+T so every overlap in
// [0, T] appears, and labels each window with its generating fault vector.
// Params `plant` drive the simulation; `nominal` drives the residual model.
EpochData synthesize_epoch_data(const SynthConfig& cfg,
                                const sim::QuadParams& plant,
                                const sim::QuadParams& nominal,
                                const control::LqrGain& gain,
                                const control::Linearization& lin,
                                std::uint64_t seed, std::uint64_t epoch);

// Windows from one rollout (k = onset..onset+T inclusive), oldest first.
std::vector<TrajectoryWindow> slice_windows(const sim::Trajectory& traj,
                                            const sim::FaultVector& label,
                                            std::int64_t onset_sample, int T,
                                            const std::vector<std::array<double, 6>>* resid);

}  // namespace qfdi::train
