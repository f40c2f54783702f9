#include "qfdi/sym/rotation.hpp"

#include <cmath>
#include <vector>

namespace qfdi::sym {

namespace {

using Mat4 = std::array<std::array<double, 4>, 4>;

Mat4 matmul(const Mat4& a, const Mat4& b) {
    Mat4 out{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k)
            for (int j = 0; j < 4; ++j) out[i][j] += a[i][k] * b[k][j];
    return out;
}

double rel_diff(const Mat4& a, const Mat4& b) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            num = std::max(num, std::abs(a[i][j] - b[i][j]));
            den = std::max(den, std::abs(b[i][j]));
        }
    return den == 0.0 ? num : num / den;
}

// role_map describes P through (P t)_role = t[role_map[role]].
Mat4 perm_matrix(const std::array<int, 4>& role_map) {
    Mat4 p{};
    for (int j = 0; j < 4; ++j) p[j][role_map[static_cast<std::size_t>(j)] - 1] = 1.0;
    return p;
}

// Exact small-angle-free entries for theta = k*pi/2.
void quarter_cs(int n, double& c, double& s) {
    switch (((n - 2) % 4 + 4) % 4) {
        case 0: c = 1.0; s = 0.0; break;
        case 1: c = 0.0; s = 1.0; break;
        case 2: c = -1.0; s = 0.0; break;
        default: c = 0.0; s = -1.0; break;
    }
}

Mat4 wrench_transform(int n, double yaw_sign) {
    double c, s;
    quarter_cs(n, c, s);
    Mat4 t{};
    t[0][0] = 1.0;
    t[1][1] = c; t[1][2] = s;
    t[2][1] = -s; t[2][2] = c;
    t[3][3] = yaw_sign;
    return t;
}

std::array<int, 4> invert_role_map(const std::array<int, 4>& role_map) {
    std::array<int, 4> motor_map{};
    for (int role = 1; role <= 4; ++role)
        motor_map[static_cast<std::size_t>(role_map[static_cast<std::size_t>(role - 1)] - 1)] = role;
    return motor_map;
}

void rotate_triple(double c, double s, double& a, double& b) {
    const double a2 = c * a + s * b;
    const double b2 = -s * a + c * b;
    a = a2;
    b = b2;
}

}  // namespace

CaseTable::CaseTable(const sim::QuadParams& params) : mixer_(params) {
    // Candidate permutations: the dihedral group on the motor ring
    // (4 cyclic shifts + 4 reflections), as role_map arrays.
    std::vector<std::array<int, 4>> candidates;
    for (int k = 0; k < 4; ++k) {
        std::array<int, 4> rm{};
        for (int j = 0; j < 4; ++j) rm[static_cast<std::size_t>(j)] = ((j + k) % 4) + 1;
        candidates.push_back(rm);
    }
    candidates.push_back({2, 1, 4, 3});
    candidates.push_back({4, 3, 2, 1});
    candidates.push_back({1, 4, 3, 2});
    candidates.push_back({3, 2, 1, 4});

    const Mat4& M = mixer_.M;
    for (int n = 1; n <= 4; ++n) {
        RotationCase rc;
        rc.n = n;
        rc.theta = std::fmod((n - 2) * (M_PI / 2.0) + 2.0 * M_PI, 2.0 * M_PI);
        quarter_cs(n, rc.cos_t, rc.sin_t);

        int hits = 0;
        for (const auto& rm : candidates) {
            for (double s : {1.0, -1.0}) {
                const Mat4 lhs = matmul(M, perm_matrix(rm));
                const Mat4 rhs = matmul(wrench_transform(n, s), M);
                if (rel_diff(lhs, rhs) < 1e-9) {
                    ++hits;
                    rc.role_map = rm;
                    rc.yaw_sign = s;
                }
            }
        }
        if (hits != 1)
            throw sim::ConfigError(
                "CaseTable: motor-permutation consistency equation does not "
                "have a unique solution");
        rc.motor_map = invert_role_map(rc.role_map);
        rc.wrench_map = wrench_transform(n, rc.yaw_sign);
        cases_[static_cast<std::size_t>(n - 1)] = rc;
    }

    // Mirror: transposition (1 2)(3 4) against diag(1, 1, -1, -1).
    const Mat4 tm{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}}};
    if (rel_diff(matmul(M, perm_matrix({2, 1, 4, 3})), matmul(tm, M)) >= 1e-9)
        throw sim::ConfigError("CaseTable: mirror consistency check failed");
    mirror_.motor_map = {2, 1, 4, 3};
    mirror_.wrench_map = tm;
}

const RotationCase& CaseTable::by_index(int n) const {
    if (n < 1 || n > 4) throw sim::ConfigError("CaseTable: case index in 1..4");
    return cases_[static_cast<std::size_t>(n - 1)];
}

const RotationCase& CaseTable::for_motor(int motor) const {
    if (motor < 1 || motor > 4)
        throw sim::ConfigError("CaseTable: motor index in 1..4");
    for (const auto& c : cases_)
        if (c.role_map[1] == motor) return c;
    throw sim::ConfigError("CaseTable: no case maps motor to role 2");
}

sim::State rotate_state(const sim::State& x, const RotationCase& rc,
                        sim::Convention conv) {
    const double c = rc.cos_t, s = rc.sin_t;
    sim::State out = x;
    rotate_triple(c, s, out[sim::kPx], out[sim::kPy]);
    rotate_triple(c, s, out[sim::kVu], out[sim::kVv]);
    rotate_triple(c, s, out[sim::kPhi], out[sim::kTheta]);
    if (conv == sim::Convention::as_printed) {
        rotate_triple(c, s, out[sim::kR], out[sim::kQ]);
    } else {
        // physical x-y rate components are (p, q); r is the z component
        rotate_triple(c, s, out[sim::kP], out[sim::kQ]);
    }
    return out;
}

sim::Output rotate_output(const sim::Output& y, const RotationCase& rc) {
    const double c = rc.cos_t, s = rc.sin_t;
    sim::Output out = y;
    rotate_triple(c, s, out.px, out.py);
    rotate_triple(c, s, out.phi, out.theta);
    return out;
}

std::array<double, 6> rotate_output6(const std::array<double, 6>& y,
                                     const RotationCase& rc) {
    const double c = rc.cos_t, s = rc.sin_t;
    std::array<double, 6> out = y;
    rotate_triple(c, s, out[0], out[1]);
    rotate_triple(c, s, out[3], out[4]);
    return out;
}

sim::MotorCommand permute_input(const sim::MotorCommand& cmd,
                                const RotationCase& rc) {
    sim::MotorCommand out;
    for (int role = 0; role < 4; ++role)
        out.w_sq[static_cast<std::size_t>(role)] =
            cmd.w_sq[static_cast<std::size_t>(rc.role_map[static_cast<std::size_t>(role)] - 1)];
    return out;
}

sim::Wrench permute_input(const sim::Wrench& w, const RotationCase& rc,
                          const sim::Mixer& mixer) {
    const auto un = mixer.unmix(w);
    return mixer.mix(permute_input(un.cmd, rc));
}

train::TrajectoryWindow canonicalize_window(const train::TrajectoryWindow& win,
                                            const RotationCase& rc,
                                            const sim::Mixer& mixer) {
    train::TrajectoryWindow out;
    out.y_seq.reserve(win.y_seq.size());
    out.u_seq.reserve(win.u_seq.size());
    out.resid_seq.reserve(win.resid_seq.size());
    for (const auto& y : win.y_seq) out.y_seq.push_back(rotate_output(y, rc));
    for (const auto& u : win.u_seq)
        out.u_seq.push_back(permute_input(u, rc, mixer));
    for (const auto& r : win.resid_seq)
        out.resid_seq.push_back(rotate_output6(r, rc));
    out.onset_offset = win.onset_offset;
    sim::FaultVector lab;
    for (int motor = 0; motor < 4; ++motor)
        lab.theta[static_cast<std::size_t>(rc.motor_map[static_cast<std::size_t>(motor)] - 1)] =
            win.label.theta[static_cast<std::size_t>(motor)];
    out.label = lab;
    return out;
}

sim::State mirror_state(const sim::State& x) {
    sim::State out = x;
    out[sim::kPx] = -x[sim::kPx];
    out[sim::kVu] = -x[sim::kVu];
    out[sim::kTheta] = -x[sim::kTheta];
    out[sim::kPsi] = -x[sim::kPsi];
    out[sim::kR] = -x[sim::kR];
    out[sim::kQ] = -x[sim::kQ];
    return out;
}

train::TrajectoryWindow mirror_window(const train::TrajectoryWindow& win,
                                      const MirrorCase& mc) {
    train::TrajectoryWindow out = win;
    for (auto& y : out.y_seq) {
        y.px = -y.px;
        y.theta = -y.theta;
        y.psi = -y.psi;
    }
    for (auto& u : out.u_seq) {
        u.U3 = -u.U3;
        u.U4 = -u.U4;
    }
    for (auto& r : out.resid_seq) {
        r[0] = -r[0];
        r[4] = -r[4];
        r[5] = -r[5];
    }
    sim::FaultVector lab;
    for (int motor = 0; motor < 4; ++motor)
        lab.theta[static_cast<std::size_t>(mc.motor_map[static_cast<std::size_t>(motor)] - 1)] =
            win.label.theta[static_cast<std::size_t>(motor)];
    out.label = lab;
    return out;
}

}  // namespace qfdi::sym
