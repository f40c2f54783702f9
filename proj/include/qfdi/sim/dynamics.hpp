#pragma once
// 6-DOF rigid-body dynamics. Two variants:
//  - as_printed: verbatim transcription of the source equations, including
//    their nonstandard Euler-rate rows (phi-dot driven by r, psi-dot by p),
//    the c(psi) factor in pz-dot, and U2 driving r-dot.
//  - standard_zyx: textbook ZYX kinematics and Euler rigid-body equations
//    with (U2, U3, U4) as (roll, pitch, yaw) moments, z-up.

#include "qfdi/sim/types.hpp"

namespace qfdi::sim {

State derivative(const State& x, const Wrench& w, const QuadParams& p,
                 Convention conv);

// Classical RK4 step; frozen wrench over the step.
State step_rk4(const State& x, const Wrench& w, const QuadParams& p,
               Convention conv, double dt);

}  // namespace qfdi::sim
