#include "qfdi/net/types.hpp"

namespace qfdi::net {

const char* to_string(FeatureMode m) {
    switch (m) {
        case FeatureMode::model_free: return "model-free";
        case FeatureMode::model_based: return "model-based";
        case FeatureMode::residual_only: return "residual-only";
    }
    return "?";
}

FeatureMode feature_mode_from(const std::string& s) {
    if (s == "model-free") return FeatureMode::model_free;
    if (s == "model-based") return FeatureMode::model_based;
    if (s == "residual-only") return FeatureMode::residual_only;
    throw ShapeError("unknown feature mode: " + s);
}

std::vector<double> flatten_window(const train::TrajectoryWindow& win,
                                   const FeatureSpec& spec) {
    if (static_cast<int>(win.length()) != spec.T)
        throw ShapeError("flatten_window: window length != T");
    if (spec.needs_residuals() && !win.has_residuals())
        throw ShapeError("flatten_window: residuals required but absent");

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(spec.flat()));
    for (int t = 0; t < spec.T; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        if (spec.mode != FeatureMode::residual_only) {
            const auto y = win.y_seq[ti].as_array();
            out.insert(out.end(), y.begin(), y.end());
            const auto u = win.u_seq[ti].as_array();
            out.insert(out.end(), u.begin(), u.end());
        }
        if (spec.needs_residuals()) {
            const auto& r = win.resid_seq[ti];
            out.insert(out.end(), r.begin(), r.end());
        }
    }
    return out;
}

}  // namespace qfdi::net
