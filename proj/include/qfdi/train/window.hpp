#pragma once
// Length-T sliding window of (output, commanded input, optional residual):
// the classifier's feature record.

#include <cstdint>
#include <vector>

#include "qfdi/sim/types.hpp"

namespace qfdi::train {

struct TrajectoryWindow {
    std::vector<sim::Output> y_seq;
    std::vector<sim::Wrench> u_seq;
    std::vector<std::array<double, 6>> resid_seq;  // empty unless model-based
    sim::FaultVector label;
    std::int64_t onset_offset = 0;  // trailing fault-affected samples, in [0, T]

    std::size_t length() const { return y_seq.size(); }
    bool has_residuals() const { return !resid_seq.empty(); }
};

}  // namespace qfdi::train
