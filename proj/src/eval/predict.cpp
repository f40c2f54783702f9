#include "qfdi/eval/predict.hpp"

namespace qfdi::eval {

Predictor net_predictor(const net::FdiNetwork& net) {
    return [&net](const train::TrajectoryWindow& win) {
        return net::forward(net, net::flatten_window(win, net.spec)).pred;
    };
}

Verdict predict(const Predictor& predictor, const train::TrajectoryWindow& win,
                const EvalConfig& cfg, const sym::CaseTable& table) {
    cfg.validate();
    Verdict v;
    v.min_score = std::numeric_limits<double>::infinity();
    int best_motor = 0;
    for (int n = 1; n <= 4; ++n) {
        const auto& rc = table.by_index(n);
        const auto canon = sym::canonicalize_window(win, rc, table.mixer());
        const auto pred = predictor(canon);
        for (int role = 1; role <= 4; ++role) {
            const double score = pred[static_cast<std::size_t>(role - 1)];
            const int motor = rc.role_map[static_cast<std::size_t>(role - 1)];
            const bool better =
                score < v.min_score ||
                (score == v.min_score &&
                 (n < v.case_index ||
                  (n == v.case_index && motor < best_motor)));
            if (better) {
                v.min_score = score;
                v.case_index = n;
                best_motor = motor;
            }
        }
    }
    v.argmin_motor = best_motor;
    v.fault_detected = v.min_score < cfg.theta_tol;
    if (v.fault_detected) v.motor = best_motor;
    return v;
}

Verdict predict(const net::FdiNetwork& net, const train::TrajectoryWindow& win,
                const EvalConfig& cfg, const sym::CaseTable& table) {
    if (net.spec.needs_residuals() && !win.has_residuals())
        throw net::ShapeError("predict: window lacks residuals for this network");
    if (static_cast<int>(win.length()) != net.spec.T)
        throw net::ShapeError("predict: window length mismatch");
    return predict(net_predictor(net), win, cfg, table);
}

}  // namespace qfdi::eval
