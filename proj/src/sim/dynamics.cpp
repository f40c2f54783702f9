#include "qfdi/sim/dynamics.hpp"

#include <cmath>

namespace qfdi::sim {

namespace {

State derivative_as_printed(const State& x, const Wrench& w,
                            const QuadParams& par) {
    const double vu = x[kVu], vv = x[kVv], vw = x[kVw];
    const double phi = x[kPhi], th = x[kTheta], psi = x[kPsi];
    const double r = x[kR], q = x[kQ], p = x[kP];
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    const double cth = std::cos(th), sth = std::sin(th), tth = std::tan(th);
    const double cpsi = std::cos(psi), spsi = std::sin(psi);

    State dx;
    dx[kPx] = (cphi * cpsi * sth + sphi * spsi) * vw -
              (spsi * cphi - cpsi * sphi * sth) * vv + vu * cpsi * cth;
    dx[kPy] = (sphi * spsi * sth + cphi * cpsi) * vv -
              (cpsi * sphi - spsi * cphi * sth) * vw + vu * spsi * cth;
    dx[kPz] = vw * cpsi * cphi - vu * sth + vv * sphi * cth;
    dx[kVu] = r * vv - q * vw + par.g * sth;
    dx[kVv] = p * vw - r * vu - par.g * sphi * cth;
    dx[kVw] = q * vu - p * vv + w.U1 / par.m - par.g * cth * cphi;
    dx[kPhi] = r * cphi / cth + q * sphi / cth;
    dx[kTheta] = q * cphi - r * sphi;
    dx[kPsi] = p + r * cphi * tth + q * sphi * tth;
    dx[kR] = (w.U2 - p * q * (par.Iyy - par.Ixx)) / par.Izz;
    dx[kQ] = (w.U3 - p * r * (par.Ixx - par.Izz)) / par.Iyy;
    dx[kP] = (w.U4 + q * r * (par.Izz - par.Iyy)) / par.Ixx;
    return dx;
}

State derivative_standard_zyx(const State& x, const Wrench& w,
                              const QuadParams& par) {
    const double vu = x[kVu], vv = x[kVv], vw = x[kVw];
    const double phi = x[kPhi], th = x[kTheta], psi = x[kPsi];
    const double r = x[kR], q = x[kQ], p = x[kP];
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    const double cth = std::cos(th), sth = std::sin(th), tth = std::tan(th);
    const double cpsi = std::cos(psi), spsi = std::sin(psi);

    State dx;
    // p-dot = R(phi,theta,psi) v with R = Rz Ry Rx
    dx[kPx] = vu * cth * cpsi + vv * (sphi * sth * cpsi - cphi * spsi) +
              vw * (cphi * sth * cpsi + sphi * spsi);
    dx[kPy] = vu * cth * spsi + vv * (sphi * sth * spsi + cphi * cpsi) +
              vw * (cphi * sth * spsi - sphi * cpsi);
    dx[kPz] = -vu * sth + vv * sphi * cth + vw * cphi * cth;
    dx[kVu] = r * vv - q * vw + par.g * sth;
    dx[kVv] = p * vw - r * vu - par.g * sphi * cth;
    dx[kVw] = q * vu - p * vv + w.U1 / par.m - par.g * cth * cphi;
    dx[kPhi] = p + (q * sphi + r * cphi) * tth;
    dx[kTheta] = q * cphi - r * sphi;
    dx[kPsi] = (q * sphi + r * cphi) / cth;
    dx[kR] = (w.U4 + p * q * (par.Ixx - par.Iyy)) / par.Izz;
    dx[kQ] = (w.U3 + p * r * (par.Izz - par.Ixx)) / par.Iyy;
    dx[kP] = (w.U2 + q * r * (par.Iyy - par.Izz)) / par.Ixx;
    return dx;
}

}  // namespace

State derivative(const State& x, const Wrench& w, const QuadParams& p,
                 Convention conv) {
    return conv == Convention::as_printed ? derivative_as_printed(x, w, p)
                                          : derivative_standard_zyx(x, w, p);
}

State step_rk4(const State& x, const Wrench& w, const QuadParams& p,
               Convention conv, double dt) {
    const State k1 = derivative(x, w, p, conv);
    State x2;
    for (int i = 0; i < 12; ++i) x2[i] = x[i] + 0.5 * dt * k1[i];
    const State k2 = derivative(x2, w, p, conv);
    for (int i = 0; i < 12; ++i) x2[i] = x[i] + 0.5 * dt * k2[i];
    const State k3 = derivative(x2, w, p, conv);
    for (int i = 0; i < 12; ++i) x2[i] = x[i] + dt * k3[i];
    const State k4 = derivative(x2, w, p, conv);
    State out;
    for (int i = 0; i < 12; ++i)
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

}  // namespace qfdi::sim
