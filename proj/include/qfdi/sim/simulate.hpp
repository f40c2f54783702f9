#pragma once

#include <functional>

#include "qfdi/sim/mixer.hpp"
#include "qfdi/sim/types.hpp"

namespace qfdi::sim {

// Commanded-wrench policy pi(step, x). Must be a pure function of its inputs.
using Controller = std::function<Wrench(std::int64_t step, const State& x)>;

// Rolls out cfg.horizon steps. Per step the commanded wrench is recorded, the
// fault is applied in motor space, and the state advances one RK4 step. A
// non-finite or out-of-bound state truncates the rollout and flags it.
Trajectory simulate(const State& x0, const Controller& controller,
                    const FaultSchedule& sched, const SimConfig& cfg,
                    const QuadParams& params);

}  // namespace qfdi::sim
