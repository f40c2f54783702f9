#pragma once
// Fault verdicts: evaluate the classifier on all four rotation cases of a
// window; a fault is declared when the global minimum predicted component
// drops below theta_tol, and the faulty physical motor is recovered through
// the minimizing case's motor map.

#include <cstdint>
#include <functional>
#include <optional>

#include "qfdi/net/network.hpp"
#include "qfdi/sym/rotation.hpp"

namespace qfdi::eval {

struct EvalConfig {
    double theta_tol = 0.2;
    std::int64_t n_test_traj = 250;  // split evenly across the five classes
    std::int64_t horizon = 200;
    std::int64_t onset = 100;

    void validate() const {
        if (!(theta_tol > 0 && theta_tol < 1))
            throw sim::ConfigError("EvalConfig: theta_tol in (0,1)");
    }
};

struct Verdict {
    bool fault_detected = false;
    std::optional<int> motor;  // present iff fault_detected
    double min_score = 1.0;
    int case_index = 0;
    int argmin_motor = 0;  // argmin location regardless of the threshold
};

// Window-level classifier: already-canonicalized window -> 4 predictions.
using Predictor =
    std::function<std::array<double, 4>(const train::TrajectoryWindow&)>;

Predictor net_predictor(const net::FdiNetwork& net);

// Ties break toward the lowest case index, then the lowest motor index.
Verdict predict(const Predictor& predictor, const train::TrajectoryWindow& win,
                const EvalConfig& cfg, const sym::CaseTable& table);

Verdict predict(const net::FdiNetwork& net, const train::TrajectoryWindow& win,
                const EvalConfig& cfg, const sym::CaseTable& table);

}  // namespace qfdi::eval
