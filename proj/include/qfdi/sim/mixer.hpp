#pragma once
// Motor mixing: squared motor speeds <-> wrench, plus multiplicative fault
// injection in motor space (unmix -> scale by Theta -> remix).

#include "qfdi/sim/types.hpp"

namespace qfdi::sim {

// Precomputed 4x4 mixing matrix and its inverse for a parameter set.
struct Mixer {
    std::array<std::array<double, 4>, 4> M;
    std::array<std::array<double, 4>, 4> Minv;

    explicit Mixer(const QuadParams& p);

    Wrench mix(const MotorCommand& cmd) const;

    struct UnmixResult {
        MotorCommand cmd;
        bool clamped = false;  // negative squared speeds clamped to zero
    };
    UnmixResult unmix(const Wrench& w) const;
};

Wrench mix(const MotorCommand& cmd, const QuadParams& p);
Mixer::UnmixResult unmix(const Wrench& w, const QuadParams& p);

// Eq.-4 fault model: commanded wrench passes through unchanged while
// step <= onset_step; afterwards the per-motor thrusts are scaled by Theta.
Wrench apply_fault(const Wrench& w_commanded, const FaultSchedule& sched,
                   std::int64_t step, const Mixer& mixer, bool* clamped = nullptr);
Wrench apply_fault(const Wrench& w_commanded, const FaultSchedule& sched,
                   std::int64_t step, const QuadParams& p);

}  // namespace qfdi::sim
