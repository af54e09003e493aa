#include "sscl/continual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sscl {

std::vector<double> flatten_grads(const ParamGrads& g) {
    std::vector<double> flat;
    for (std::size_t i = 0; i < g.weights.size(); ++i) {
        flat.insert(flat.end(), g.weights[i].data.begin(), g.weights[i].data.end());
        flat.insert(flat.end(), g.biases[i].data.begin(), g.biases[i].data.end());
    }
    return flat;
}

ParamGrads unflatten_grads(const std::vector<double>& flat, const MlpModel& shapes) {
    ParamGrads g = zero_grads(shapes);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < g.weights.size(); ++i) {
        for (double& x : g.weights[i].data) x = flat.at(pos++);
        for (double& x : g.biases[i].data) x = flat.at(pos++);
    }
    if (pos != flat.size()) throw std::logic_error("unflatten_grads: length mismatch");
    return g;
}

void EpisodicMemory::insert(const LabeledSample& s) {
    auto& buf = buffers_[s.task];
    buf.push_back(s);
    while (buf.size() > budget_) buf.pop_front();
}

const std::deque<LabeledSample>* EpisodicMemory::buffer(int task) const {
    auto it = buffers_.find(task);
    return it == buffers_.end() ? nullptr : &it->second;
}

std::vector<int> EpisodicMemory::tasks_with_samples() const {
    std::vector<int> tasks;
    for (const auto& [t, buf] : buffers_)
        if (!buf.empty()) tasks.push_back(t);
    return tasks;
}

GemResult gem_project(const std::vector<double>& g,
                      const std::vector<std::vector<double>>& constraints,
                      const ProjectionConfig& cfg) {
    GemResult res;
    res.grad = g;
    const std::size_t k = constraints.size();
    if (k == 0) return res;

    std::vector<double> b(k);  // b_j = <G_j, g>
    bool violated = false;
    for (std::size_t j = 0; j < k; ++j) {
        if (constraints[j].size() != g.size())
            throw std::invalid_argument("gem_project: constraint dimension mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) s += constraints[j][i] * g[i];
        b[j] = s;
        if (s < 0.0) violated = true;
    }
    if (!violated) return res;  // feasible input returned unchanged
    res.projected = true;

    // Dual: minimize 1/2 v'Av + b'v over v >= 0, with A = G G'.
    std::vector<std::vector<double>> A(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            double s = 0.0;
            for (std::size_t d = 0; d < g.size(); ++d) s += constraints[i][d] * constraints[j][d];
            A[i][j] = A[j][i] = s;
        }
    double trace = 0.0;
    for (std::size_t i = 0; i < k; ++i) trace += A[i][i];
    const double step = trace > 0.0 ? 1.0 / trace : 1.0;  // trace bounds lambda_max for PSD A

    std::vector<double> v(k, 0.0), grad(k);
    res.converged = false;
    for (res.iters = 0; res.iters < cfg.qp_max_iters; ++res.iters) {
        double kkt = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double s = b[i];
            for (std::size_t j = 0; j < k; ++j) s += A[i][j] * v[j];
            grad[i] = s;
            const double r = v[i] > 0.0 ? std::abs(s) : std::min(0.0, s);
            kkt = std::max(kkt, std::abs(r));
        }
        if (kkt <= cfg.qp_tolerance) {
            res.converged = true;
            break;
        }
        for (std::size_t i = 0; i < k; ++i) v[i] = std::max(0.0, v[i] - step * grad[i]);
    }

    for (std::size_t j = 0; j < k; ++j) {
        const double vj = v[j] + cfg.margin;
        if (vj == 0.0) continue;
        for (std::size_t i = 0; i < g.size(); ++i) res.grad[i] += vj * constraints[j][i];
    }
    return res;
}

std::vector<double> dcl_align(const std::vector<double>& g, AccumulatorState& acc) {
    if (acc.g_acc.empty()) acc.g_acc.assign(g.size(), 0.0);
    if (acc.g_acc.size() != g.size()) throw std::invalid_argument("dcl_align: dimension mismatch");
    double corr = 0.0, nsq = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        corr += g[i] * acc.g_acc[i];
        nsq += acc.g_acc[i] * acc.g_acc[i];
    }
    std::vector<double> out = g;
    if (nsq > 0.0 && corr < 0.0) {
        const double c = corr / nsq;
        for (std::size_t i = 0; i < g.size(); ++i) out[i] -= c * acc.g_acc[i];
    }
    for (std::size_t i = 0; i < g.size(); ++i)
        acc.g_acc[i] = acc.decay * acc.g_acc[i] + out[i];
    return out;
}

namespace {

// Flattened gradient of the mean cross-entropy over a set of samples.
template <typename Range>
std::vector<double> mean_loss_gradient(const MlpModel& model, const Range& samples) {
    ParamGrads total = zero_grads(model);
    std::size_t n = 0;
    for (const LabeledSample& s : samples) {
        ForwardTape tape;
        const Matrix z = mlp_forward(model, s.x, &tape);
        accumulate(total, mlp_backward(model, tape,
                                       grad_cross_entropy(z, static_cast<std::size_t>(s.label))));
        ++n;
    }
    scale_grads(total, 1.0 / static_cast<double>(n));
    return flatten_grads(total);
}

}  // namespace

std::vector<std::vector<double>> memory_gradients(const MlpModel& model,
                                                  const EpisodicMemory& memory,
                                                  int current_task) {
    std::vector<std::vector<double>> rows;
    for (int t : memory.tasks_with_samples()) {
        if (t >= current_task) continue;
        rows.push_back(mean_loss_gradient(model, *memory.buffer(t)));
    }
    return rows;
}

LabeledStepRecord observe_labeled(Strategy strategy, MlpModel& model,
                                  const std::vector<LabeledSample>& batch,
                                  EpisodicMemory& memory, AccumulatorState& acc,
                                  double eta, const ProjectionConfig& proj) {
    if (batch.empty()) throw std::invalid_argument("observe_labeled: empty batch");
    const int task = batch.front().task;
    for (const auto& s : batch)
        if (s.task != task) throw std::logic_error("observe_labeled: mixed-task batch");

    LabeledStepRecord rec;
    rec.task = task;
    ParamGrads total = zero_grads(model);
    Matrix logit_grad(1, model.output_dim());
    for (const LabeledSample& s : batch) {
        ForwardTape tape;
        const Matrix z = mlp_forward(model, s.x, &tape);
        rec.loss += cross_entropy(z, static_cast<std::size_t>(s.label));
        const Matrix gz = grad_cross_entropy(z, static_cast<std::size_t>(s.label));
        add_inplace(logit_grad, gz);
        accumulate(total, mlp_backward(model, tape, gz));
        rec.sample_logits.push_back(z);
        rec.sample_labels.push_back(static_cast<std::size_t>(s.label));
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    rec.loss *= inv;
    scale_grads(total, inv);
    rec.mean_logit_grad = scale(logit_grad, inv);
    rec.tau = l2_norm(rec.mean_logit_grad);

    if (strategy == Strategy::Gem) {
        const auto rows = memory_gradients(model, memory, task);
        if (!rows.empty()) {
            GemResult pr = gem_project(flatten_grads(total), rows, proj);
            rec.gem_projected = pr.projected;
            rec.gem_converged = pr.converged;
            if (pr.projected) total = unflatten_grads(pr.grad, model);
        }
    } else if (strategy == Strategy::Dcl) {
        total = unflatten_grads(dcl_align(flatten_grads(total), acc), model);
    }

    sgd_step(model, total, eta);
    for (const LabeledSample& s : batch) memory.insert(s);
    return rec;
}

}  // namespace sscl
