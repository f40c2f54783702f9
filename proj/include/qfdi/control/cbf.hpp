#pragma once
// Keep-in-sphere safety filter: minimally perturbs the LQR wrench subject to
// one linear barrier constraint, solved in closed form.

#include "qfdi/control/lqr.hpp"

namespace qfdi::control {

struct SafetySpec {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double radius = 1.0;     // keep-in sphere [m]
    double cbf_alpha = 1.0;  // class-K gain [1/s]

    void validate() const {
        if (!(radius > 0) || !(cbf_alpha > 0))
            throw sim::ConfigError("SafetySpec: radius and cbf_alpha > 0");
    }
};

// Single linear constraint a.u >= b derived from the barrier
// h(x) = radius^2 - |pos - center|^2 on the hover linearization. h has
// relative degree two in the input, so the constraint is built from the
// exponential-CBF chain  hdd + 2*alpha*hd + alpha^2*h >= 0, which is linear
// in u through the velocity rows of B.
struct CbfConstraint {
    Vec4 a;
    double b = 0.0;
    double h = 0.0;
};

CbfConstraint cbf_constraint(const SafetySpec& spec, const Linearization& lin,
                             const sim::State& x);

struct CbfResult {
    sim::Wrench u;
    bool constraint_active = false;
    bool fallback = false;  // a == 0 with violated constraint
};

CbfResult cbf_qp_control(const SafetySpec& spec, const LqrGain& gain,
                         const Linearization& lin, const sim::State& x);

}  // namespace qfdi::control
