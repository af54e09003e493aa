#pragma once

#include <string>
#include <vector>

#include "sscl/mlp.hpp"
#include "sscl/stream.hpp"

namespace sscl {

/// T x T accuracy matrix: at(i, j) = test accuracy on task j after training
/// through task i. b_bar holds per-task accuracy at random initialization.
struct ResultMatrix {
    std::size_t T = 0;
    std::vector<double> r;
    std::vector<double> b_bar;

    explicit ResultMatrix(std::size_t tasks = 0)
        : T(tasks), r(tasks * tasks, 0.0), b_bar(tasks, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return r[i * T + j]; }
    double at(std::size_t i, std::size_t j) const { return r[i * T + j]; }
};

/// Accuracy per task. With mask_classes, logits outside each task's class set
/// are excluded from the argmax (task-incremental protocol).
std::vector<double> evaluate_all_tasks(const MlpModel& model, const Continuum& continuum,
                                       bool mask_classes);

double acc(const ResultMatrix& R);
double bwt(const ResultMatrix& R);
double fwt(const ResultMatrix& R);

double cosine_similarity(const Matrix& a, const Matrix& b);

/// CSV with task indices as header row/column; 12 significant digits.
void export_confusion(const ResultMatrix& R, const std::string& path);
std::string confusion_csv(const ResultMatrix& R);

std::string format_double(double v);  // 12 significant digits, '.' separator

}  // namespace sscl
