#pragma once

#include <vector>

#include "prpo/eval_metrics.hpp"
#include "prpo/qa_types.hpp"

namespace prpo {

// Per-step training diagnostics.
struct StepRecord {
    int step = 0;
    Stage stage = Stage::Explore;
    int k = 0;
    double objective = 0.0;
    double mean_reward = 0.0;
    // Mean over samples of the within-group std of total rewards.
    double reward_std = 0.0;
    double mean_kl = 0.0;
    double clip_fraction = 0.0;
    // Mean over samples of the std of per-generation mean scores.
    double mean_generation_std = 0.0;
    // Mean over generations of the dimension-wise std of the answer scores.
    double mean_cot_answer_std = 0.0;

    bool operator==(const StepRecord&) const = default;
};

struct RunReport {
    RunConfig config_echo;
    std::vector<StepRecord> per_step;
    MetricReport final_metrics;
    // Not serialized into the report file: it is the one nondeterministic field.
    double wall_time_seconds = 0.0;
};

}  // namespace prpo
