#include "sscl/pl_baselines.hpp"

#include <algorithm>
#include <stdexcept>

#include "sscl/rng.hpp"

namespace sscl {

TeacherModel::TeacherModel(std::vector<std::size_t> backbone_dims, double eta, std::uint64_t seed)
    : backbone_(make_mlp(backbone_dims, mix_seed(seed, 0x746368))), eta_(eta), seed_(seed) {}

void TeacherModel::train_step(const std::vector<LabeledSample>& batch,
                              const std::vector<int>& task_classes) {
    if (batch.empty()) throw std::invalid_argument("TeacherModel::train_step: empty batch");
    const int task = batch.front().task;
    auto it = heads_.find(task);
    if (it == heads_.end()) {
        std::vector<std::size_t> dims = {backbone_.output_dim(), task_classes.size()};
        it = heads_.emplace(task, make_mlp(dims, mix_seed(seed_, 0x686400 + task),
                                           Activation::Identity))
                 .first;
        head_classes_[task] = task_classes;
    }
    MlpModel& head = it->second;
    const std::vector<int>& classes = head_classes_.at(task);

    ParamGrads bb_total = zero_grads(backbone_);
    ParamGrads head_total = zero_grads(head);
    for (const LabeledSample& s : batch) {
        const auto pos = std::find(classes.begin(), classes.end(), s.label);
        if (pos == classes.end())
            throw std::logic_error("TeacherModel::train_step: label not in task classes");
        const std::size_t local = static_cast<std::size_t>(pos - classes.begin());

        ForwardTape bb_tape, head_tape;
        const Matrix feat = mlp_forward(backbone_, s.x, &bb_tape);
        // The backbone's logits feed the head through the hidden nonlinearity.
        Matrix act = feat;
        for (double& v : act.data) v = v > 0.0 ? v : 0.0;
        const Matrix logits = mlp_forward(head, act, &head_tape);

        const Matrix gz = grad_cross_entropy(logits, local);
        ParamGrads head_g = mlp_backward(head, head_tape, gz);
        Matrix dfeat = head_g.input;
        for (std::size_t j = 0; j < dfeat.cols; ++j)
            if (feat.data[j] <= 0.0) dfeat.data[j] = 0.0;
        accumulate(head_total, head_g);
        accumulate(bb_total, mlp_backward(backbone_, bb_tape, dfeat));
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    scale_grads(bb_total, inv);
    scale_grads(head_total, inv);
    sgd_step(backbone_, bb_total, eta_);
    sgd_step(head, head_total, eta_);
}

Matrix TeacherModel::head_logits(const Matrix& x, int task) const {
    auto it = heads_.find(task);
    if (it == heads_.end()) throw std::logic_error("TeacherModel: no head for task");
    Matrix act = mlp_forward(backbone_, x);
    for (double& v : act.data) v = v > 0.0 ? v : 0.0;
    return mlp_forward(it->second, act);
}

int TeacherModel::predict_label(const Matrix& x, int task) const {
    const Matrix z = head_logits(x, task);
    std::size_t best = 0;
    for (std::size_t j = 1; j < z.cols; ++j)
        if (z.data[j] > z.data[best]) best = j;  // ties keep the lowest index
    return head_classes_.at(task)[best];
}

Matrix TeacherModel::predict_distribution(const Matrix& x, int task) const {
    return softmax(head_logits(x, task));
}

MlpModel* TeacherModel::head(int task) {
    auto it = heads_.find(task);
    return it == heads_.end() ? nullptr : &it->second;
}

const MlpModel* TeacherModel::head(int task) const {
    auto it = heads_.find(task);
    return it == heads_.end() ? nullptr : &it->second;
}

const std::vector<int>* TeacherModel::classes_of(int task) const {
    auto it = head_classes_.find(task);
    return it == head_classes_.end() ? nullptr : &it->second;
}

std::size_t TeacherModel::param_count() const {
    std::size_t n = backbone_.param_count();
    for (const auto& [t, head] : heads_) n += head.param_count();
    return n;
}

void student_update_hard(MlpModel& model, const Matrix& x, int pseudo_label, double eta) {
    ForwardTape tape;
    const Matrix z = mlp_forward(model, x, &tape);
    sgd_step(model, mlp_backward(model, tape,
                                 grad_cross_entropy(z, static_cast<std::size_t>(pseudo_label))),
             eta);
}

Matrix soft_upstream(const Matrix& logits, const std::vector<int>& task_classes,
                     const Matrix& p_hat) {
    if (p_hat.size() != task_classes.size())
        throw std::invalid_argument("soft_upstream: distribution size mismatch");
    Matrix masked(1, task_classes.size());
    for (std::size_t j = 0; j < task_classes.size(); ++j)
        masked.data[j] = logits.data[static_cast<std::size_t>(task_classes[j])];
    const Matrix probs = softmax(masked);
    Matrix upstream(1, logits.cols);
    for (std::size_t j = 0; j < task_classes.size(); ++j)
        upstream.data[static_cast<std::size_t>(task_classes[j])] = probs.data[j] - p_hat.data[j];
    return upstream;
}

void student_update_soft(MlpModel& model, const Matrix& x, const std::vector<int>& task_classes,
                         const Matrix& p_hat, double eta) {
    ForwardTape tape;
    const Matrix z = mlp_forward(model, x, &tape);
    sgd_step(model, mlp_backward(model, tape, soft_upstream(z, task_classes, p_hat)), eta);
}

}  // namespace sscl
