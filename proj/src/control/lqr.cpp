#include "qfdi/control/lqr.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "qfdi/sim/dynamics.hpp"

namespace qfdi::control {

namespace {

Vec12 eval_f(const sim::QuadParams& params, sim::Convention conv,
             const Vec12& x, const Vec4& u) {
    sim::State xs;
    for (int i = 0; i < 12; ++i) xs[static_cast<std::size_t>(i)] = x[i];
    const sim::Wrench w{u[0], u[1], u[2], u[3]};
    const sim::State dx = sim::derivative(xs, w, params, conv);
    Vec12 out;
    for (int i = 0; i < 12; ++i) out[i] = dx[static_cast<std::size_t>(i)];
    return out;
}

Linearization fd_jacobians(const sim::QuadParams& params, sim::Convention conv,
                           double scale) {
    const Vec12 x0 = Vec12::Zero();
    Vec4 u0;
    u0 << params.m * params.g, 0, 0, 0;
    Linearization lin;
    for (int j = 0; j < 12; ++j) {
        const double h = scale * std::max(1.0, std::abs(x0[j]));
        Vec12 xp = x0, xm = x0;
        xp[j] += h;
        xm[j] -= h;
        lin.A.col(j) = (eval_f(params, conv, xp, u0) -
                        eval_f(params, conv, xm, u0)) /
                       (2.0 * h);
    }
    for (int j = 0; j < 4; ++j) {
        const double h = scale * std::max(1.0, std::abs(u0[j]));
        Vec4 up = u0, um = u0;
        up[j] += h;
        um[j] -= h;
        lin.B.col(j) = (eval_f(params, conv, x0, up) -
                        eval_f(params, conv, x0, um)) /
                       (2.0 * h);
    }
    return lin;
}

double max_real_eig(const Eigen::MatrixXd& M) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    return es.eigenvalues().real().maxCoeff();
}

// Bartels-Stewart is overkill at n = 12; solve the Lyapunov equation
// A'X + XA = C through the Kronecker system.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& C) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd K(n * n, n * n);
    K.setZero();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    // vec(A'X + XA) = (I (x) A' + A' (x) I) vec(X)
    for (Eigen::Index i = 0; i < n; ++i)
        K.block(i * n, i * n, n, n) += A.transpose();
    for (Eigen::Index bi = 0; bi < n; ++bi)
        for (Eigen::Index bj = 0; bj < n; ++bj)
            K.block(bi * n, bj * n, n, n) += A(bj, bi) * I;
    Eigen::VectorXd c(Eigen::Map<const Eigen::VectorXd>(C.data(), n * n));
    Eigen::VectorXd x = K.partialPivLu().solve(c);
    return Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
}

}  // namespace

Linearization linearize(const sim::QuadParams& params, sim::Convention conv,
                        bool refine) {
    params.validate();
    Linearization lin = fd_jacobians(params, conv, 1e-6);
    if (refine) {
        const Linearization half = fd_jacobians(params, conv, 5e-7);
        // Richardson: central differences are O(h^2)
        lin.A = (4.0 * half.A - lin.A) / 3.0;
        lin.B = (4.0 * half.B - lin.B) / 3.0;
    }
    return lin;
}

LqrWeights quad_lqr_weights() {
    LqrWeights w;
    w.q = Vec12::Ones();
    w.r << 100.0, 4e6, 4e6, 4e6;
    return w;
}

Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           double* residual) {
    const Eigen::Index n = A.rows();
    const Eigen::MatrixXd G = B * R.inverse() * B.transpose();

    // Matrix sign iteration on the Hamiltonian.
    Eigen::MatrixXd H(2 * n, 2 * n);
    H << A, -G, -Q, -A.transpose();
    Eigen::MatrixXd Z = H;
    for (int it = 0; it < 200; ++it) {
        // determinant scaling accelerates convergence
        const double det = std::abs(Z.partialPivLu().determinant());
        const double mu = std::pow(det, -1.0 / (2.0 * static_cast<double>(n)));
        const Eigen::MatrixXd Zs = mu * Z;
        const Eigen::MatrixXd Znext = 0.5 * (Zs + Zs.inverse());
        const double delta = (Znext - Z).norm();
        Z = Znext;
        if (delta <= 1e-13 * std::max(1.0, Z.norm())) break;
    }
    // Stable subspace: solve [Z12; Z22 + I] P = -[Z11 + I; Z21]
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd lhs(2 * n, n), rhs(2 * n, n);
    lhs << Z.block(0, n, n, n), Z.block(n, n, n, n) + I;
    rhs << -(Z.block(0, 0, n, n) + I), -Z.block(n, 0, n, n);
    Eigen::MatrixXd P =
        lhs.colPivHouseholderQr().solve(rhs);
    P = 0.5 * (P + P.transpose()).eval();

    // Newton-Kleinman refinement.
    auto care_residual = [&](const Eigen::MatrixXd& X) {
        return (A.transpose() * X + X * A - X * G * X + Q).norm();
    };
    for (int it = 0; it < 30; ++it) {
        const Eigen::MatrixXd K = R.inverse() * B.transpose() * P;
        const Eigen::MatrixXd Ac = A - B * K;
        const Eigen::MatrixXd C = -(Q + K.transpose() * R * K);
        const Eigen::MatrixXd Pn = solve_lyapunov(Ac, C);
        const Eigen::MatrixXd Psym = 0.5 * (Pn + Pn.transpose());
        if (care_residual(Psym) >= care_residual(P)) break;
        P = Psym;
    }
    if (residual) *residual = care_residual(P);
    return P;
}

LqrGain solve_lqr(const Mat12& A, const Mat12x4& B, const LqrWeights& w,
                  const sim::Wrench& u_trim) {
    const Eigen::MatrixXd Q = w.q.asDiagonal();
    const Eigen::MatrixXd R = w.r.asDiagonal();
    double res = 0.0;
    const Eigen::MatrixXd P = solve_care(A, B, Q, R, &res);
    if (!(res <= 1e-8))
        throw sim::ConfigError("solve_lqr: Riccati iteration did not converge");

    LqrGain gain;
    gain.K = (R.inverse() * B.transpose() * P).eval();
    gain.u_trim = u_trim;
    gain.riccati_residual = res;
    gain.spectral_abscissa = max_real_eig(A - B * gain.K);
    if (!(gain.spectral_abscissa < 0.0))
        throw sim::ConfigError("solve_lqr: closed loop is not stable");
    return gain;
}

LqrGain lqr_for(const sim::QuadParams& params, sim::Convention conv,
                const LqrWeights& w) {
    const Linearization lin = linearize(params, conv);
    return solve_lqr(lin.A, lin.B, w, params.hover_wrench());
}

sim::Wrench lqr_control(const LqrGain& gain, const sim::State& x) {
    Vec12 xv;
    for (int i = 0; i < 12; ++i) xv[i] = x[static_cast<std::size_t>(i)];
    const Vec4 du = gain.K * xv;
    return {gain.u_trim.U1 - du[0], gain.u_trim.U2 - du[1],
            gain.u_trim.U3 - du[2], gain.u_trim.U4 - du[3]};
}

}  // namespace qfdi::control
