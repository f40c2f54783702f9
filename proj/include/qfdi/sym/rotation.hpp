#pragma once
// Yaw-rotation cases: the state transform Phi(n) and the motor relabeling
// that lets a detector trained on motor-#2 faults serve every motor.
//
// Case n carries theta = (n-2)*pi/2; case 2 is the trained identity
// configuration. The motor permutation for each case is not hard-coded: it is
// recovered at construction by solving mix o P = T_theta o mix over candidate
// permutations and asserting a unique solution. For the 90-degree cases the
// unique solution requires the yaw-moment sign to flip (adjacent motors
// counter-rotate), so T_theta = diag(1, R2(theta), s) with s = -1 there; the
// sign is stored and surfaces in the equivariance report.

#include <array>

#include "qfdi/sim/mixer.hpp"
#include "qfdi/sim/types.hpp"
#include "qfdi/train/window.hpp"

namespace qfdi::sym {

struct RotationCase {
    int n = 2;
    double theta = 0.0;
    double cos_t = 1.0;  // exact 0/+-1 for quarter turns
    double sin_t = 0.0;
    std::array<int, 4> motor_map{1, 2, 3, 4};  // physical motor -> role
    std::array<int, 4> role_map{1, 2, 3, 4};   // role -> physical motor
    std::array<std::array<double, 4>, 4> wrench_map{};  // exact M P M^-1
    double yaw_sign = 1.0;
};

// The quadrotor's exact mirror symmetry (reflection through the body x-z
// plane composed with the motor transposition (1 2)(3 4)). Unlike the
// 90-degree rotations this one is exact including the yaw channel; training
// uses it to cover the opposite rotor-spin group.
struct MirrorCase {
    std::array<int, 4> motor_map{2, 1, 4, 3};
    std::array<std::array<double, 4>, 4> wrench_map{};  // diag(1, 1, -1, -1)
};

class CaseTable {
  public:
    explicit CaseTable(const sim::QuadParams& params);

    const RotationCase& by_index(int n) const;       // n in 1..4
    const RotationCase& for_motor(int motor) const;  // motor plays role #2
    const MirrorCase& mirror() const { return mirror_; }
    const sim::Mixer& mixer() const { return mixer_; }

  private:
    std::array<RotationCase, 4> cases_;
    MirrorCase mirror_;
    sim::Mixer mixer_;
};

// Phi(n) on the full state. The printed block form rotates each stored
// triple by R_theta; under standard_zyx the rate triple (stored r,q,p) mixes
// its physical x-y components instead, which is what the textbook equations
// require for the transform to commute with the flow.
sim::State rotate_state(const sim::State& x, const RotationCase& c,
                        sim::Convention conv = sim::Convention::as_printed);

sim::Output rotate_output(const sim::Output& y, const RotationCase& c);
std::array<double, 6> rotate_output6(const std::array<double, 6>& y,
                                     const RotationCase& c);

// Motor-space commands permute by motor_map; wrenches take the
// unmix -> permute -> remix trip (clamping propagates).
sim::MotorCommand permute_input(const sim::MotorCommand& cmd,
                                const RotationCase& c);
sim::Wrench permute_input(const sim::Wrench& w, const RotationCase& c,
                          const sim::Mixer& mixer);

train::TrajectoryWindow canonicalize_window(const train::TrajectoryWindow& win,
                                            const RotationCase& c,
                                            const sim::Mixer& mixer);

// Mirror image of a window: outputs map through the reflection, inputs
// through the exact mirrored wrench map, the label through motor_map.
train::TrajectoryWindow mirror_window(const train::TrajectoryWindow& win,
                                      const MirrorCase& mc);
sim::State mirror_state(const sim::State& x);

}  // namespace qfdi::sym
