#pragma once
// Hover-regulating LQR: finite-difference linearization of the quadrotor
// dynamics at hover and a continuous-time Riccati solve.

#include <Eigen/Dense>

#include "qfdi/sim/types.hpp"

namespace qfdi::control {

using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat12x4 = Eigen::Matrix<double, 12, 4>;
using Mat4x12 = Eigen::Matrix<double, 4, 12>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec4 = Eigen::Matrix<double, 4, 1>;

struct Linearization {
    Mat12 A;
    Mat12x4 B;
};

// Central differences about (hover, hover wrench); column j perturbed by
// h = 1e-6 * max(1, |x_j|). `refine` halves h and Richardson-extrapolates.
Linearization linearize(const sim::QuadParams& params, sim::Convention conv,
                        bool refine = false);

struct LqrGain {
    Mat4x12 K;
    sim::Wrench u_trim;
    double riccati_residual = 0.0;
    double spectral_abscissa = 0.0;
};

struct LqrWeights {
    Vec12 q = Vec12::Ones();
    Vec4 r = 0.1 * Vec4::Ones();
};

// Quadrotor-scaled default. The generic 0.1*I input weight produces
// closed-loop poles far outside the RK4 stability region at dt = 0.01 for
// gram-scale inertia, so the profile weights are scaled to input magnitudes.
LqrWeights quad_lqr_weights();

// Solves A'P + PA - P B R^-1 B' P + Q = 0 by the matrix sign iteration with
// Newton-Kleinman refinement; requires residual <= 1e-8 and a strictly
// stable closed loop, else throws.
LqrGain solve_lqr(const Mat12& A, const Mat12x4& B, const LqrWeights& w,
                  const sim::Wrench& u_trim);

LqrGain lqr_for(const sim::QuadParams& params, sim::Convention conv,
                const LqrWeights& w);

// u_trim - K x, unclamped.
sim::Wrench lqr_control(const LqrGain& gain, const sim::State& x);

// Generic dense CARE solve used by tests (dimension-templated scalar case).
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           double* residual = nullptr);

}  // namespace qfdi::control
