#include "qfdi/control/cbf.hpp"

namespace qfdi::control {

CbfConstraint cbf_constraint(const SafetySpec& spec, const Linearization& lin,
                             const sim::State& x) {
    spec.validate();
    Vec12 xv;
    for (int i = 0; i < 12; ++i) xv[i] = x[static_cast<std::size_t>(i)];
    Eigen::Matrix<double, 3, 1> dp;
    dp << x[sim::kPx] - spec.center[0], x[sim::kPy] - spec.center[1],
        x[sim::kPz] - spec.center[2];

    const auto Apos = lin.A.topRows<3>();   // pdot rows of the linear model
    const Eigen::Matrix<double, 3, 1> pdot = Apos * xv;
    const double h = spec.radius * spec.radius - dp.squaredNorm();
    const double hd = -2.0 * dp.dot(pdot);

    // hdd = -2 (pdot.pdot + dp . pddot), pddot = Apos (A x + B u)
    const Eigen::Matrix<double, 3, 12> AposA = Apos * lin.A;
    const Eigen::Matrix<double, 3, 4> AposB = Apos * lin.B;
    const double hdd_free = -2.0 * (pdot.squaredNorm() + dp.dot(AposA * xv));
    const Vec4 a = (-2.0 * dp.transpose() * AposB).transpose();

    const double alpha = spec.cbf_alpha;
    CbfConstraint c;
    c.a = a;
    c.b = -(hdd_free + 2.0 * alpha * hd + alpha * alpha * h);
    c.h = h;
    return c;
}

CbfResult cbf_qp_control(const SafetySpec& spec, const LqrGain& gain,
                         const Linearization& lin, const sim::State& x) {
    const CbfConstraint c = cbf_constraint(spec, lin, x);
    const sim::Wrench u_lqr = lqr_control(gain, x);
    Vec4 u;
    u << u_lqr.U1, u_lqr.U2, u_lqr.U3, u_lqr.U4;

    CbfResult out;
    const double slack = c.a.dot(u) - c.b;
    if (slack >= 0.0) {
        out.u = u_lqr;
        return out;
    }
    const double aa = c.a.squaredNorm();
    if (aa == 0.0) {
        out.u = u_lqr;
        out.fallback = true;
        return out;
    }
    // argmin |u - u_lqr|^2 s.t. a.u >= b: project onto the active hyperplane.
    const double lambda = (c.b - c.a.dot(u)) / aa;
    const Vec4 up = u + lambda * c.a;
    out.u = {up[0], up[1], up[2], up[3]};
    out.constraint_active = true;
    return out;
}

}  // namespace qfdi::control
