#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "sscl/mlp.hpp"
#include "sscl/stream.hpp"

namespace sscl {

/// Teacher for the pseudo-labeling baselines: a backbone mirroring the
/// student's hidden stack plus one linear head per observed task. Heads are
/// created lazily the first time a task is trained.
class TeacherModel {
public:
    /// backbone_dims: input dim through the student's penultimate dimension.
    TeacherModel(std::vector<std::size_t> backbone_dims, double eta, std::uint64_t seed);

    /// One SGD step on cross-entropy through backbone + task head. Labels are
    /// global class indices; task_classes maps them to head outputs.
    void train_step(const std::vector<LabeledSample>& batch,
                    const std::vector<int>& task_classes);

    /// One-hot pseudo label as a global class index; ties break low.
    int predict_label(const Matrix& x, int task) const;

    /// Softmax distribution over the task's classes (head output order).
    Matrix predict_distribution(const Matrix& x, int task) const;

    bool has_head(int task) const { return heads_.count(task) > 0; }
    std::size_t param_count() const;

    MlpModel& backbone() { return backbone_; }
    const MlpModel& backbone() const { return backbone_; }
    MlpModel* head(int task);
    const MlpModel* head(int task) const;
    const std::vector<int>* classes_of(int task) const;

private:
    Matrix head_logits(const Matrix& x, int task) const;

    MlpModel backbone_;
    std::map<int, MlpModel> heads_;  // single linear layer: feature dim -> class count
    std::map<int, std::vector<int>> head_classes_;
    double eta_;
    std::uint64_t seed_;
};

/// 1-PL student update: ordinary cross-entropy step with the pseudo label as
/// ground truth.
void student_update_hard(MlpModel& model, const Matrix& x, int pseudo_label, double eta);

/// P-PL student update against a soft distribution over task_classes;
/// upstream = softmax(z restricted to task_classes) - p_hat, scattered into
/// the full logit vector.
void student_update_soft(MlpModel& model, const Matrix& x, const std::vector<int>& task_classes,
                         const Matrix& p_hat, double eta);

/// The P-PL upstream vector alone, for testing.
Matrix soft_upstream(const Matrix& logits, const std::vector<int>& task_classes,
                     const Matrix& p_hat);

}  // namespace sscl
