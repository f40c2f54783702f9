#include "qfdi/sim/simulate.hpp"

#include "qfdi/sim/dynamics.hpp"

namespace qfdi::sim {

Trajectory simulate(const State& x0, const Controller& controller,
                    const FaultSchedule& sched, const SimConfig& cfg,
                    const QuadParams& params) {
    cfg.validate();
    params.validate();
    sched.fault.validate();
    const Mixer mixer(params);

    Trajectory traj;
    traj.states.reserve(static_cast<std::size_t>(cfg.horizon));
    traj.outputs.reserve(static_cast<std::size_t>(cfg.horizon));
    traj.u_commanded.reserve(static_cast<std::size_t>(cfg.horizon));

    State x = x0;
    for (std::int64_t step = 0; step < cfg.horizon; ++step) {
        if (!all_finite(x) || !within_bound(x, cfg.divergence_bound)) {
            traj.diverged = true;
            break;
        }
        const Wrench u = controller(step, x);
        traj.states.push_back(x);
        traj.outputs.push_back(project(x));
        traj.u_commanded.push_back(u);
        traj.valid_steps = step + 1;

        bool clamped = false;
        const Wrench w = apply_fault(u, sched, step, mixer, &clamped);
        if (clamped) ++traj.clamp_events;
        x = step_rk4(x, w, params, cfg.convention, cfg.dt);
    }
    if (!all_finite(x) || !within_bound(x, cfg.divergence_bound))
        traj.diverged = true;
    return traj;
}

}  // namespace qfdi::sim
