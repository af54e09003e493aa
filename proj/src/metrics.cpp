#include "sscl/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace sscl {

std::vector<double> evaluate_all_tasks(const MlpModel& model, const Continuum& continuum,
                                       bool mask_classes) {
    std::vector<double> accs;
    accs.reserve(continuum.tasks.size());
    for (const Task& task : continuum.tasks) {
        if (task.test.empty()) throw std::logic_error("evaluate_all_tasks: empty test set");
        std::size_t correct = 0;
        for (const LabeledSample& s : task.test) {
            const Matrix z = mlp_forward(model, s.x);
            int best = -1;
            double best_val = -std::numeric_limits<double>::infinity();
            if (mask_classes) {
                for (int c : task.classes) {
                    if (z.data[static_cast<std::size_t>(c)] > best_val) {
                        best_val = z.data[static_cast<std::size_t>(c)];
                        best = c;
                    }
                }
            } else {
                for (std::size_t j = 0; j < z.cols; ++j) {
                    if (z.data[j] > best_val) {
                        best_val = z.data[j];
                        best = static_cast<int>(j);
                    }
                }
            }
            if (best == s.label) ++correct;
        }
        accs.push_back(static_cast<double>(correct) / static_cast<double>(task.test.size()));
    }
    return accs;
}

double acc(const ResultMatrix& R) {
    double s = 0.0;
    for (std::size_t i = 0; i < R.T; ++i) s += R.at(R.T - 1, i);
    return s / static_cast<double>(R.T);
}

double bwt(const ResultMatrix& R) {
    if (R.T < 2) throw std::logic_error("bwt: undefined for T < 2");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < R.T; ++i) s += R.at(R.T - 1, i) - R.at(i, i);
    return s / static_cast<double>(R.T - 1);
}

double fwt(const ResultMatrix& R) {
    if (R.T < 2) throw std::logic_error("fwt: undefined for T < 2");
    if (R.b_bar.size() != R.T) throw std::logic_error("fwt: b_bar not populated");
    double s = 0.0;
    for (std::size_t i = 1; i < R.T; ++i) s += R.at(i - 1, i) - R.b_bar[i];
    return s / static_cast<double>(R.T - 1);
}

double cosine_similarity(const Matrix& a, const Matrix& b) {
    const double na = l2_norm(a), nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("cosine_similarity: zero vector");
    return dot(a, b) / (na * nb);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string confusion_csv(const ResultMatrix& R) {
    std::string out = "task";
    for (std::size_t j = 0; j < R.T; ++j) out += "," + std::to_string(j);
    out += "\n";
    for (std::size_t i = 0; i < R.T; ++i) {
        out += std::to_string(i);
        for (std::size_t j = 0; j < R.T; ++j) out += "," + format_double(R.at(i, j));
        out += "\n";
    }
    return out;
}

void export_confusion(const ResultMatrix& R, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("export_confusion: cannot open " + path);
    f << confusion_csv(R);
}

}  // namespace sscl
