#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sscl/continual.hpp"
#include "sscl/grad_learner.hpp"
#include "sscl/metrics.hpp"
#include "sscl/stream.hpp"

namespace sscl {

enum class StreamType { TransformPermutation, TransformRotation, Split };

enum class Method {
    None,
    GradLearner,
    OnePL,
    ProbPL,
    NoiseUniform,
    NoiseNormal,
    NoiseUniformNormalized,
    NoiseNormalNormalized,
};

struct StreamConfig {
    StreamType type = StreamType::TransformPermutation;
    int num_tasks = 5;
    int num_classes = 10;
    int dim = 16;
    int samples_per_class = 50;
    int test_per_class = 20;
    double mean_radius = 4.0;
    int batch_size = 10;
    std::optional<std::uint64_t> data_seed;  // defaults to a run-seed-derived stream
};

struct PoolConfig {
    int size = 2000;
    double overlap = 0.5;
    int novel_classes = 8;
};

struct ExperimentConfig {
    StreamConfig stream;
    std::vector<std::size_t> model_hidden = {32};
    Strategy strategy = Strategy::Plain;
    Method method = Method::None;
    LearnerConfig learner;
    double policy_p = 0.15;
    std::size_t unlabeled_batch = 4;
    PoolConfig pool;
    double eta = 0.1;
    std::size_t memory_budget = 20;
    ProjectionConfig gem;
    double dcl_gamma = 0.9;
    std::vector<std::uint64_t> seeds = {0};
    std::string out_dir = "out";
    bool keep_trace = true;
};

/// Strict parse: unknown keys anywhere in the document are rejected.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct RunRecord {
    std::uint64_t seed = 0;
    ResultMatrix R;
    double acc = 0.0;
    double bwt = 0.0;
    double fwt = 0.0;
    double wall_sec = 0.0;
    std::size_t labeled_steps = 0;
    std::size_t policy_draws = 0;
    std::size_t unlabeled_draws = 0;    // nonempty draws (includes warmup window)
    std::size_t unlabeled_applied = 0;  // pseudo updates actually performed
    std::vector<double> fit_losses;     // mean fitness loss per labeled step
    std::vector<double> task_train_loss;
    std::vector<nlohmann::json> trace;  // one object per training step
};

RunRecord run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

/// One run per configured seed; concurrency capped by SSCL_THREADS.
std::vector<RunRecord> run_seeds(const ExperimentConfig& cfg);

struct SweepPoint {
    std::string label;
    std::vector<RunRecord> runs;
    bool failed = false;
    std::string error;
    double mean_acc = 0.0, std_acc = 0.0;
    double mean_bwt = 0.0, mean_fwt = 0.0;
};

struct SweepReport {
    std::string axis;
    std::vector<SweepPoint> points;
};

/// axis in {p, alpha, lambda, arch, batch}; arch values look like "64x16".
SweepReport run_sweep(const ExperimentConfig& base, const std::string& axis,
                      const std::vector<std::string>& values);

void emit_report(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                 const std::string& out_dir);
void emit_sweep_report(const ExperimentConfig& base, const SweepReport& report,
                       const std::string& out_dir);

std::string metrics_csv(const std::vector<RunRecord>& records);

/// Fitness-loss and cosine diagnostics over a trace.jsonl file.
nlohmann::json analyze_trace(const std::string& path);

}  // namespace sscl
