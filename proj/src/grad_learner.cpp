#include "sscl/grad_learner.hpp"

#include <cmath>
#include <stdexcept>

namespace sscl {

GradientLearner::GradientLearner(std::size_t logit_dim, LearnerConfig cfg, std::uint64_t seed)
    : h_(make_mlp(arch_dims(logit_dim, cfg.hidden), seed)), cfg_(cfg) {
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
        throw std::invalid_argument("GradientLearner: alpha outside [0,1]");
    if (cfg.lambda <= 0.0) throw std::invalid_argument("GradientLearner: lambda must be > 0");
}

Matrix GradientLearner::predict_raw(const Matrix& z) const { return mlp_forward(h_, z); }

Matrix GradientLearner::normalize(const Matrix& g, double tau, double alpha) {
    if (tau < 0.0) throw std::invalid_argument("normalize: tau must be >= 0");
    const double n = l2_norm(g);
    if (n < kNormEps) return Matrix(g.rows, g.cols);
    return scale(g, alpha * tau / n);
}

double GradientLearner::fitness_loss(const Matrix& z, const Matrix& gbar, std::size_t y,
                                     double eta, double lambda) {
    if (!z.same_shape(gbar)) throw std::invalid_argument("fitness_loss: shape mismatch");
    Matrix shifted = z;
    add_inplace(shifted, gbar, -eta);
    return lambda * cross_entropy(shifted, y);
}

GradientLearner::LearnRecord GradientLearner::learn_one(const Matrix& z, std::size_t y) {
    LearnRecord rec;
    rec.tau = l2_norm(grad_cross_entropy(z, y));

    ForwardTape tape;
    const Matrix g = mlp_forward(h_, z, &tape);
    const double gnorm = l2_norm(g);
    if (gnorm < kNormEps) {
        rec.skipped = true;
        rec.fit_loss = fitness_loss(z, Matrix(z.rows, z.cols), y, cfg_.eta, cfg_.lambda);
        return rec;
    }
    const Matrix gbar = scale(g, cfg_.alpha * rec.tau / gnorm);
    rec.fit_loss = fitness_loss(z, gbar, y, cfg_.eta, cfg_.lambda);

    // d l_fit / d gbar = -lambda * eta * dCE/dz at the shifted logits.
    Matrix shifted = z;
    add_inplace(shifted, gbar, -cfg_.eta);
    Matrix d_gbar = scale(grad_cross_entropy(shifted, y), -cfg_.lambda * cfg_.eta);

    // Through the normalization Jacobian alpha*tau*(I/||g|| - g g^T/||g||^3),
    // or straight-through with the scale only.
    Matrix upstream(1, g.cols);
    const double s = cfg_.alpha * rec.tau / gnorm;
    if (cfg_.straight_through) {
        upstream = scale(d_gbar, s);
    } else {
        const double proj = dot(d_gbar, g) / (gnorm * gnorm);
        for (std::size_t j = 0; j < g.cols; ++j)
            upstream.data[j] = s * (d_gbar.data[j] - proj * g.data[j]);
    }

    sgd_step(h_, mlp_backward(h_, tape, upstream), cfg_.eta_hat);
    return rec;
}

GradientLearner::LearnRecord GradientLearner::learn_step(const Matrix& z, std::size_t y) {
    LearnRecord rec = learn_one(z, y);
    tau_prev_ = rec.tau;
    ++step_count_;
    return rec;
}

std::vector<GradientLearner::LearnRecord> GradientLearner::observe_batch(
    const std::vector<Matrix>& zs, const std::vector<std::size_t>& ys) {
    if (zs.empty() || zs.size() != ys.size())
        throw std::invalid_argument("observe_batch: bad batch");
    std::vector<LearnRecord> recs;
    Matrix mean_grad(1, zs.front().cols);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        recs.push_back(learn_one(zs[i], ys[i]));
        add_inplace(mean_grad, grad_cross_entropy(zs[i], ys[i]));
    }
    tau_prev_ = l2_norm(mean_grad) / static_cast<double>(zs.size());
    ++step_count_;
    return recs;
}

std::optional<Matrix> GradientLearner::predict_for_unlabeled(const Matrix& z) const {
    if (!has_tau())
        throw std::logic_error("predict_for_unlabeled: no labeled step seen yet");
    if (step_count_ < cfg_.warmup) return std::nullopt;
    return normalize(predict_raw(z), tau_prev_, cfg_.alpha);
}

void apply_unlabeled_update(MlpModel& model, const ForwardTape& tape, const Matrix& gbar,
                            double eta) {
    sgd_step(model, mlp_backward(model, tape, gbar), eta);
}

Matrix noise_gradient(NoiseKind kind, std::size_t dim, std::mt19937_64& rng) {
    if (dim < 1) throw std::invalid_argument("noise_gradient: dim must be >= 1");
    Matrix g(1, dim);
    if (kind == NoiseKind::Uniform) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (double& x : g.data) x = u(rng);
    } else {
        std::normal_distribution<double> n(0.0, 1.0);
        for (double& x : g.data) x = n(rng);
    }
    return g;
}

}  // namespace sscl
