#include "qfdi/sim/mixer.hpp"

#include <cmath>

namespace qfdi::sim {

namespace {

// Gauss-Jordan inverse of a 4x4; throws on a (near-)singular matrix.
std::array<std::array<double, 4>, 4> invert4(
    std::array<std::array<double, 4>, 4> a) {
    std::array<std::array<double, 4>, 4> inv{};
    for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300)
            throw ConfigError("Mixer: mixing matrix is singular");
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const double s = 1.0 / a[col][col];
        for (int c = 0; c < 4; ++c) {
            a[col][c] *= s;
            inv[col][c] *= s;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (int c = 0; c < 4; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

}  // namespace

Mixer::Mixer(const QuadParams& p) {
    const double ct = p.CT;
    const double a = p.d * p.CT * std::sqrt(2.0);
    const double cd = p.CD;
    M = {{{ct, ct, ct, ct},
          {-a, -a, a, a},
          {-a, a, a, -a},
          {-cd, cd, -cd, cd}}};
    Minv = invert4(M);
}

Wrench Mixer::mix(const MotorCommand& cmd) const {
    std::array<double, 4> u{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) u[static_cast<std::size_t>(r)] += M[r][c] * cmd.w_sq[static_cast<std::size_t>(c)];
    return Wrench::from_array(u);
}

Mixer::UnmixResult Mixer::unmix(const Wrench& w) const {
    const auto u = w.as_array();
    UnmixResult out;
    for (int r = 0; r < 4; ++r) {
        double v = 0.0;
        for (int c = 0; c < 4; ++c) v += Minv[r][c] * u[static_cast<std::size_t>(c)];
        if (v < 0.0) {
            v = 0.0;
            out.clamped = true;
        }
        out.cmd.w_sq[static_cast<std::size_t>(r)] = v;
    }
    return out;
}

Wrench mix(const MotorCommand& cmd, const QuadParams& p) {
    return Mixer(p).mix(cmd);
}

Mixer::UnmixResult unmix(const Wrench& w, const QuadParams& p) {
    return Mixer(p).unmix(w);
}

Wrench apply_fault(const Wrench& w_commanded, const FaultSchedule& sched,
                   std::int64_t step, const Mixer& mixer, bool* clamped) {
    if (step <= sched.onset_step || sched.fault.is_identity())
        return w_commanded;
    auto un = mixer.unmix(w_commanded);
    if (clamped && un.clamped) *clamped = true;
    MotorCommand scaled;
    for (std::size_t i = 0; i < 4; ++i)
        scaled.w_sq[i] = un.cmd.w_sq[i] * sched.fault.theta[i];
    return mixer.mix(scaled);
}

Wrench apply_fault(const Wrench& w_commanded, const FaultSchedule& sched,
                   std::int64_t step, const QuadParams& p) {
    return apply_fault(w_commanded, sched, step, Mixer(p), nullptr);
}

}  // namespace qfdi::sim
