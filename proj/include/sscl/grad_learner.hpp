#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "sscl/mlp.hpp"

namespace sscl {

struct LearnerConfig {
    std::vector<std::size_t> hidden = {64, 16};  // h architecture shorthand
    double alpha = 0.001;   // magnitude ratio, in [0,1]
    double lambda = 0.30;   // fitness loss scale
    double eta = 0.1;       // classifier learning rate, mirrored into the fitness loss
    double eta_hat = 0.1;   // learner learning rate
    std::size_t warmup = 50;  // labeled steps before predictions are applied
    bool straight_through = false;  // treat normalization as constant in backward
};

constexpr double kNormEps = 1e-12;

/// Learns the map from logits to gradients on labeled steps and emits
/// magnitude-normalized pseudo gradients for unlabeled logits.
class GradientLearner {
public:
    GradientLearner(std::size_t logit_dim, LearnerConfig cfg, std::uint64_t seed);

    Matrix predict_raw(const Matrix& z) const;

    /// g scaled to norm alpha*tau, direction preserved; zero when ||g|| is
    /// degenerate.
    static Matrix normalize(const Matrix& g, double tau, double alpha);

    static double fitness_loss(const Matrix& z, const Matrix& gbar, std::size_t y,
                               double eta, double lambda);

    struct LearnRecord {
        double tau = 0.0;
        double fit_loss = 0.0;
        bool skipped = false;  // degenerate ||g||, omega update skipped
    };

    /// One labeled learning step: refresh tau, train h on the fitness loss.
    LearnRecord learn_step(const Matrix& z, std::size_t y);

    /// Batch form: per-sample learner updates, then tau from the batch-mean
    /// vanilla gradient; counts as one learning step.
    std::vector<LearnRecord> observe_batch(const std::vector<Matrix>& zs,
                                           const std::vector<std::size_t>& ys);

    /// nullopt while still in warmup. Throws if no labeled step has been seen.
    std::optional<Matrix> predict_for_unlabeled(const Matrix& z) const;

    std::size_t step_count() const { return step_count_; }
    double tau_prev() const { return tau_prev_; }
    bool has_tau() const { return tau_prev_ >= 0.0; }
    const LearnerConfig& config() const { return cfg_; }
    const MlpModel& network() const { return h_; }
    MlpModel& network() { return h_; }

private:
    LearnRecord learn_one(const Matrix& z, std::size_t y);

    MlpModel h_;
    LearnerConfig cfg_;
    double tau_prev_ = -1.0;
    std::size_t step_count_ = 0;
};

/// Classifier update from a predicted gradient: backward with upstream = gbar,
/// then an SGD step. Identical plumbing to a labeled update.
void apply_unlabeled_update(MlpModel& model, const ForwardTape& tape, const Matrix& gbar,
                            double eta);

enum class NoiseKind { Uniform, Normal };

/// i.i.d. noise row vector: U(-1,1) or N(0,1).
Matrix noise_gradient(NoiseKind kind, std::size_t dim, std::mt19937_64& rng);

}  // namespace sscl
