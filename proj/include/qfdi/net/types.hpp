#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfdi/train/window.hpp"

namespace qfdi::net {

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(numel_of(shape)), 0.0);
    }
    static std::int64_t numel_of(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) n *= d;
        return n;
    }
    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    int rows() const { return shape.at(0); }
    int cols() const { return shape.at(1); }
};

enum class FeatureMode { model_free, model_based, residual_only };

const char* to_string(FeatureMode m);
FeatureMode feature_mode_from(const std::string& s);

struct FeatureSpec {
    FeatureMode mode = FeatureMode::model_free;
    int p = 6;      // output dim
    int m = 4;      // input dim
    int T = 100;    // window length

    int per_step() const {
        switch (mode) {
            case FeatureMode::model_free: return p + m;
            case FeatureMode::model_based: return 2 * p + m;
            case FeatureMode::residual_only: return p;
        }
        return 0;
    }
    int flat() const { return per_step() * T; }
    bool needs_residuals() const { return mode != FeatureMode::model_free; }

    bool operator==(const FeatureSpec&) const = default;
};

// Row-major [T x per_step] feature block for one window. Channel order per
// step: y, then u, then residual, as the mode selects.
std::vector<double> flatten_window(const train::TrajectoryWindow& win,
                                   const FeatureSpec& spec);

}  // namespace qfdi::net
