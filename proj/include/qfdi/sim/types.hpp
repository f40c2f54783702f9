#pragma once
// Core simulation types. State layout follows the dynamics equations in print
// order: position, body velocity, Euler angles, body rates stored as (r, q, p).

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qfdi::sim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Index constants into the 12-dim state vector.
enum StateIdx : int {
    kPx = 0, kPy = 1, kPz = 2,
    kVu = 3, kVv = 4, kVw = 5,
    kPhi = 6, kTheta = 7, kPsi = 8,
    kR = 9, kQ = 10, kP = 11,
};

using State = std::array<double, 12>;

inline bool all_finite(const State& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

inline bool within_bound(const State& x, double bound) {
    for (double v : x)
        if (!(std::abs(v) <= bound)) return false;
    return true;
}

// Measured output: position and attitude, y = rho(x).
struct Output {
    double px, py, pz;
    double phi, theta, psi;

    std::array<double, 6> as_array() const { return {px, py, pz, phi, theta, psi}; }
};

inline Output project(const State& x) {
    return {x[kPx], x[kPy], x[kPz], x[kPhi], x[kTheta], x[kPsi]};
}

// Collective thrust U1 [N] and body moments U2..U4 [N m].
struct Wrench {
    double U1 = 0, U2 = 0, U3 = 0, U4 = 0;

    std::array<double, 4> as_array() const { return {U1, U2, U3, U4}; }
    static Wrench from_array(const std::array<double, 4>& a) {
        return {a[0], a[1], a[2], a[3]};
    }
};

// Squared motor angular speeds [rpm^2].
struct MotorCommand {
    std::array<double, 4> w_sq{};
};

struct QuadParams {
    double m;      // mass [kg]
    double Ixx;    // inertia [kg m^2]
    double Iyy;
    double Izz;
    double CT;     // thrust coefficient [N/rpm^2]
    double CD;     // drag coefficient [N/rpm^2]
    double d;      // arm length [m]
    double g = 9.8;

    void validate() const {
        if (!(m > 0 && Ixx > 0 && Iyy > 0 && Izz > 0 && CT > 0 && CD > 0 &&
              d > 0 && g > 0))
            throw ConfigError("QuadParams: all parameters must be positive");
    }
    bool axisymmetric() const { return Ixx == Iyy; }
    Wrench hover_wrench() const { return {m * g, 0.0, 0.0, 0.0}; }
};

// Crazyflie-scale nominal set.
inline QuadParams nominal_params() {
    return {0.0299, 1.395e-5, 1.395e-5, 2.173e-5, 3.1582e-10, 7.9379e-12,
            0.03973, 9.8};
}

// Perturbed set for the robustness experiment (>40% parameter change).
inline QuadParams perturbed_params() {
    return {0.015, 2.0e-5, 1.0e-5, 3.0e-5, 2.5e-10, 9.0e-12, 0.05, 9.8};
}

// Per-motor multiplicative effectiveness, each in [0,1]; at most one < 1.
struct FaultVector {
    std::array<double, 4> theta{1.0, 1.0, 1.0, 1.0};

    static FaultVector none() { return {}; }
    static FaultVector motor(int i, double level) {
        FaultVector f;
        f.theta[static_cast<std::size_t>(i - 1)] = level;
        return f;
    }
    bool is_identity() const {
        return theta[0] == 1.0 && theta[1] == 1.0 && theta[2] == 1.0 &&
               theta[3] == 1.0;
    }
    void validate() const {
        int faulty = 0;
        for (double t : theta) {
            if (!(t >= 0.0 && t <= 1.0))
                throw ConfigError("FaultVector: entries must lie in [0,1]");
            if (t < 1.0) ++faulty;
        }
        if (faulty > 1)
            throw ConfigError("FaultVector: at most one faulty motor");
    }
};

// Fault active for integration steps strictly after onset_step.
struct FaultSchedule {
    FaultVector fault;
    std::int64_t onset_step = 0;
};

// Schedule such that the sample at index `onset_sample` is the first
// fault-affected sample of the recorded trajectory (the protocol-level
// "fault occurring at t = onset_sample" convention).
inline FaultSchedule schedule_at_sample(FaultVector fault,
                                        std::int64_t onset_sample) {
    return {fault, onset_sample - 2};
}

enum class Convention { as_printed, standard_zyx };

struct SimConfig {
    double dt = 0.01;       // integrator step [s]
    double tau = 0.01;      // sampling period; one control update per step
    std::int64_t horizon = 200;
    double divergence_bound = 1e3;
    Convention convention = Convention::as_printed;

    void validate() const {
        if (!(dt > 0)) throw ConfigError("SimConfig: dt must be positive");
        if (tau != dt) throw ConfigError("SimConfig: tau must equal dt");
        if (horizon < 1) throw ConfigError("SimConfig: horizon >= 1");
        if (!(divergence_bound > 0))
            throw ConfigError("SimConfig: divergence_bound must be positive");
    }
};

// Recorded rollout: per-sample state, output, and the commanded (never the
// faulted) wrench. valid_steps < horizon means divergence truncated it.
struct Trajectory {
    std::vector<State> states;
    std::vector<Output> outputs;
    std::vector<Wrench> u_commanded;
    std::int64_t valid_steps = 0;
    bool diverged = false;
    std::int64_t clamp_events = 0;

    bool valid_for_training(std::int64_t horizon) const {
        return !diverged && valid_steps >= horizon;
    }
};

}  // namespace qfdi::sim
