#pragma once
// The four experiment protocols: rotation cases, fault levels, controller
// shift, and parameter perturbation. Each produces accuracy curves as
// uniform report rows (one row per curve point).

#include <map>
#include <string>

#include "qfdi/eval/predict.hpp"
#include "qfdi/train/trainer.hpp"

namespace qfdi::eval {

struct ReportRow {
    std::string experiment;
    std::string checkpoint;     // content hash of the checkpoint file
    std::string arch;           // mlp | lstm
    std::string feature_mode;   // model-free | model-based | residual-only
    std::string controller;     // lqr | cbf-qp
    std::string param_set;      // nominal | perturbed
    int motor = 0;              // 0 = no-fault rows
    double fault_level = 0.0;
    int case_n = 0;             // case under which the motor plays role 2
    std::int64_t overlap = 0;
    std::string metric;
    double value = 0.0;
    std::int64_t count = 0;
};

struct ExperimentReport {
    std::string experiment;
    std::vector<ReportRow> rows;

    // mean of `metric` over rows with overlap >= min_overlap, weighted by count
    double mean_over(const std::string& metric, std::int64_t min_overlap,
                     const std::map<std::string, std::string>& keys = {},
                     int motor = -1, double level = -1.0) const;
};

struct ExperimentContext {
    sim::QuadParams nominal = sim::nominal_params();
    sim::SimConfig sim;
    EvalConfig eval;
    control::SafetySpec safety;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    int T = 100;
    std::string checkpoint_hash = "none";
};

// Fig. 2: per-motor complete faults plus no-fault, verdict accuracy vs overlap.
ExperimentReport experiment_rotation_cases(const net::FdiNetwork& net,
                                           const ExperimentContext& ctx);

// Fig. 3: MLP vs LSTM across the fault-level grid; emits both the threshold
// verdict metric and the level-estimation metric (|pred - level| <= 0.05).
ExperimentReport experiment_fault_levels(const net::FdiNetwork& mlp,
                                         const net::FdiNetwork& lstm,
                                         const std::vector<double>& levels,
                                         const ExperimentContext& ctx);

// Fig. 4: accuracy on LQR- vs CBF-QP-generated test data for both feature modes.
ExperimentReport experiment_controller_shift(const net::FdiNetwork& model_free,
                                             const net::FdiNetwork& model_based,
                                             const ExperimentContext& ctx);

// Fig. 5: nominal vs perturbed plant; residuals always from the nominal
// reference model. Adds residual-magnitude distribution rows.
ExperimentReport experiment_param_perturbation(
    const net::FdiNetwork& model_free, const net::FdiNetwork& model_based,
    const sim::QuadParams& perturbed, const ExperimentContext& ctx);

}  // namespace qfdi::eval
