#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <vector>

#include "sscl/mlp.hpp"
#include "sscl/stream.hpp"

namespace sscl {

std::vector<double> flatten_grads(const ParamGrads& g);
ParamGrads unflatten_grads(const std::vector<double>& flat, const MlpModel& shapes);

/// Per-task FIFO ring buffers of past samples.
class EpisodicMemory {
public:
    explicit EpisodicMemory(std::size_t budget_per_task) : budget_(budget_per_task) {}

    void insert(const LabeledSample& s);
    const std::deque<LabeledSample>* buffer(int task) const;
    std::vector<int> tasks_with_samples() const;
    std::size_t budget() const { return budget_; }

private:
    std::size_t budget_;
    std::map<int, std::deque<LabeledSample>> buffers_;
};

struct ProjectionConfig {
    double margin = 0.0;
    std::size_t qp_max_iters = 2000;
    double qp_tolerance = 1e-9;
};

struct GemResult {
    std::vector<double> grad;
    bool projected = false;  // false when the input was already feasible
    bool converged = true;
    std::size_t iters = 0;
};

/// Projects g onto {v : <v, G_j> >= -margin for all j}. Solved in the dual by
/// projected-gradient ascent; the constraint count is the number of past
/// tasks, so the dual is tiny.
GemResult gem_project(const std::vector<double>& g,
                      const std::vector<std::vector<double>>& constraints,
                      const ProjectionConfig& cfg = {});

struct AccumulatorState {
    std::vector<double> g_acc;
    double decay = 0.9;
};

/// Single-constraint alignment against the decayed accumulated gradient;
/// updates the accumulator in place.
std::vector<double> dcl_align(const std::vector<double>& g, AccumulatorState& acc);

enum class Strategy { Plain, Gem, Dcl };

struct LabeledStepRecord {
    int task = 0;
    double loss = 0.0;
    Matrix mean_logit_grad;  // batch-mean d(loss)/d(logits)
    double tau = 0.0;        // its L2 norm
    bool gem_projected = false;
    bool gem_converged = true;
    std::vector<Matrix> sample_logits;  // pre-update logits, feed the learner
    std::vector<std::size_t> sample_labels;
};

/// One labeled training step: mean vanilla gradient over the batch, strategy
/// transform, SGD step, memory append. The recorded logit gradient and tau
/// feed the gradient learner.
LabeledStepRecord observe_labeled(Strategy strategy, MlpModel& model,
                                  const std::vector<LabeledSample>& batch,
                                  EpisodicMemory& memory, AccumulatorState& acc,
                                  double eta, const ProjectionConfig& proj = {});

/// Per-past-task constraint rows: gradient of the mean loss over each stored
/// buffer, flattened. Excludes current_task.
std::vector<std::vector<double>> memory_gradients(const MlpModel& model,
                                                  const EpisodicMemory& memory,
                                                  int current_task);

}  // namespace sscl
