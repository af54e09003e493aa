#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sscl/matrix.hpp"

namespace sscl {

struct LabeledSample {
    Matrix x;   // 1 x dim
    int task = 0;
    int label = 0;  // global class index
};

struct UnlabeledSample {
    Matrix x;
    std::string source_tag;
};

/// Gaussian-cluster classification data. Class means sit on a hypersphere of
/// radius mean_radius; samples add unit isotropic noise. Means depend only on
/// (seed, num_classes, dim); noise additionally on noise_stream, so train and
/// test splits share the same clusters.
struct Dataset {
    int num_classes = 0;
    int dim = 0;
    double mean_radius = 0.0;
    std::uint64_t seed = 0;
    std::vector<Matrix> class_means;  // one 1 x dim row per class
    std::vector<Matrix> xs;
    std::vector<int> ys;
};

Dataset make_synthetic_dataset(int num_classes, int dim, int samples_per_class,
                               std::uint64_t seed, double mean_radius = 4.0,
                               std::uint64_t noise_stream = 0);

enum class TransformKind { FeaturePermutation, OrthogonalRotation };

struct Task {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
    std::vector<int> classes;  // global class indices present in this task
};

struct Continuum {
    std::vector<Task> tasks;
    int dim = 0;
    int num_classes = 0;  // size of the shared label space (model output dim)
    bool split_protocol = false;
};

/// Every task sees the full dataset under a fixed task-specific feature
/// transform; task 0 is the identity.
Continuum make_transform_tasks(const Dataset& train, const Dataset& test, int num_tasks,
                               TransformKind kind, std::uint64_t seed);

/// Disjoint class partition across tasks; num_classes must divide evenly.
Continuum make_split_tasks(const Dataset& train, const Dataset& test, int num_tasks,
                           std::uint64_t seed);

/// Mixture pool: `overlap` fraction from the labeled dataset's clusters
/// (labels discarded), the rest from disjoint novel-class clusters.
std::vector<UnlabeledSample> make_unlabeled_pool(const Dataset& labeled, int size,
                                                 std::uint64_t seed, double overlap,
                                                 int novel_classes = 8);

/// Gate draws one uniform variate per call from its own stream; sample-index
/// selection uses a second stream so the gate state is independent of p.
class SamplingPolicy {
public:
    SamplingPolicy(double p, std::size_t unlabeled_batch, std::uint64_t seed);

    std::vector<UnlabeledSample> draw(const std::vector<UnlabeledSample>& pool);

    double p() const { return p_; }
    std::size_t batch() const { return batch_; }
    double last_q() const { return last_q_; }

private:
    double p_;
    std::size_t batch_;
    std::mt19937_64 gate_rng_;
    std::mt19937_64 pick_rng_;
    double last_q_ = -1.0;
};

/// Shuffled one-pass batch order over a task's training samples.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::mt19937_64& rng);

}  // namespace sscl
