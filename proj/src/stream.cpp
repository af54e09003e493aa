#include "sscl/stream.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sscl/rng.hpp"

namespace sscl {

namespace {

Matrix random_unit_row(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix v(1, static_cast<std::size_t>(dim));
    double n = 0.0;
    do {
        for (double& x : v.data) x = normal(rng);
        n = l2_norm(v);
    } while (n < 1e-9);
    return scale(v, 1.0 / n);
}

std::vector<Matrix> make_means(int num_classes, int dim, double radius, std::mt19937_64& rng) {
    std::vector<Matrix> means;
    means.reserve(num_classes);
    for (int c = 0; c < num_classes; ++c) means.push_back(scale(random_unit_row(dim, rng), radius));
    return means;
}

// Random orthogonal matrix via Gram-Schmidt on a Gaussian matrix.
Matrix random_orthogonal(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Matrix> basis;
    while (static_cast<int>(basis.size()) < dim) {
        Matrix v(1, static_cast<std::size_t>(dim));
        for (double& x : v.data) x = normal(rng);
        for (const Matrix& b : basis) add_inplace(v, b, -dot(v, b));
        const double n = l2_norm(v);
        if (n < 1e-8) continue;  // degenerate draw, retry
        basis.push_back(scale(v, 1.0 / n));
    }
    Matrix q(static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) q(i, j) = basis[i](0, j);
    return q;
}

Matrix permute_features(const Matrix& x, const std::vector<std::size_t>& perm) {
    Matrix out(1, x.cols);
    for (std::size_t j = 0; j < x.cols; ++j) out(0, j) = x(0, perm[j]);
    return out;
}

}  // namespace

Dataset make_synthetic_dataset(int num_classes, int dim, int samples_per_class,
                               std::uint64_t seed, double mean_radius,
                               std::uint64_t noise_stream) {
    if (num_classes <= 0 || dim <= 0 || samples_per_class <= 0)
        throw std::invalid_argument("make_synthetic_dataset: counts must be positive");
    Dataset ds;
    ds.num_classes = num_classes;
    ds.dim = dim;
    ds.mean_radius = mean_radius;
    ds.seed = seed;
    std::mt19937_64 mean_rng(mix_seed(seed, 0x6d65616e));
    ds.class_means = make_means(num_classes, dim, mean_radius, mean_rng);
    std::mt19937_64 noise_rng(mix_seed(seed, 0x6e6f6973 + noise_stream));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int c = 0; c < num_classes; ++c) {
        for (int s = 0; s < samples_per_class; ++s) {
            Matrix x = ds.class_means[c];
            for (double& v : x.data) v += normal(noise_rng);
            ds.xs.push_back(std::move(x));
            ds.ys.push_back(c);
        }
    }
    return ds;
}

Continuum make_transform_tasks(const Dataset& train, const Dataset& test, int num_tasks,
                               TransformKind kind, std::uint64_t seed) {
    if (num_tasks < 2) throw std::invalid_argument("make_transform_tasks: need >= 2 tasks");
    Continuum c;
    c.dim = train.dim;
    c.num_classes = train.num_classes;
    c.split_protocol = false;
    std::vector<int> all_classes(train.num_classes);
    std::iota(all_classes.begin(), all_classes.end(), 0);
    for (int t = 0; t < num_tasks; ++t) {
        Task task;
        task.classes = all_classes;
        std::vector<std::size_t> perm;
        Matrix rot;
        if (t > 0) {
            std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
            if (kind == TransformKind::FeaturePermutation) {
                perm.resize(train.dim);
                std::iota(perm.begin(), perm.end(), 0);
                std::shuffle(perm.begin(), perm.end(), rng);
            } else {
                rot = random_orthogonal(train.dim, rng);
            }
        }
        auto apply = [&](const Matrix& x) {
            if (t == 0) return x;
            return kind == TransformKind::FeaturePermutation ? permute_features(x, perm)
                                                             : matmul(x, rot);
        };
        for (std::size_t i = 0; i < train.xs.size(); ++i)
            task.train.push_back({apply(train.xs[i]), t, train.ys[i]});
        for (std::size_t i = 0; i < test.xs.size(); ++i)
            task.test.push_back({apply(test.xs[i]), t, test.ys[i]});
        c.tasks.push_back(std::move(task));
    }
    return c;
}

Continuum make_split_tasks(const Dataset& train, const Dataset& test, int num_tasks,
                           std::uint64_t seed) {
    if (num_tasks < 2) throw std::invalid_argument("make_split_tasks: need >= 2 tasks");
    if (train.num_classes % num_tasks != 0)
        throw std::invalid_argument("make_split_tasks: num_classes not divisible by num_tasks");
    const int per_task = train.num_classes / num_tasks;
    std::vector<int> order(train.num_classes);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(seed, 0x73706c69));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> class_to_task(train.num_classes);
    Continuum c;
    c.dim = train.dim;
    c.num_classes = train.num_classes;
    c.split_protocol = true;
    c.tasks.resize(num_tasks);
    for (int t = 0; t < num_tasks; ++t) {
        for (int k = 0; k < per_task; ++k) {
            const int cls = order[t * per_task + k];
            c.tasks[t].classes.push_back(cls);
            class_to_task[cls] = t;
        }
        std::sort(c.tasks[t].classes.begin(), c.tasks[t].classes.end());
    }
    for (std::size_t i = 0; i < train.xs.size(); ++i) {
        const int t = class_to_task[train.ys[i]];
        c.tasks[t].train.push_back({train.xs[i], t, train.ys[i]});
    }
    for (std::size_t i = 0; i < test.xs.size(); ++i) {
        const int t = class_to_task[test.ys[i]];
        c.tasks[t].test.push_back({test.xs[i], t, test.ys[i]});
    }
    return c;
}

std::vector<UnlabeledSample> make_unlabeled_pool(const Dataset& labeled, int size,
                                                 std::uint64_t seed, double overlap,
                                                 int novel_classes) {
    if (overlap < 0.0 || overlap > 1.0)
        throw std::invalid_argument("make_unlabeled_pool: overlap outside [0,1]");
    std::mt19937_64 rng(mix_seed(seed, 0x706f6f6c));
    // Novel means live on a different-radius hypersphere, disjoint from the
    // labeled means by construction.
    std::vector<Matrix> novel_means =
        make_means(novel_classes, labeled.dim, labeled.mean_radius * 1.75, rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<UnlabeledSample> pool;
    pool.reserve(size);
    for (int i = 0; i < size; ++i) {
        const bool from_labeled = uniform_unit(rng) < overlap;
        const Matrix& mean =
            from_labeled
                ? labeled.class_means[rng() % static_cast<std::uint64_t>(labeled.num_classes)]
                : novel_means[rng() % static_cast<std::uint64_t>(novel_classes)];
        Matrix x = mean;
        for (double& v : x.data) v += normal(rng);
        pool.push_back({std::move(x), from_labeled ? "labeled-mixture" : "novel"});
    }
    return pool;
}

SamplingPolicy::SamplingPolicy(double p, std::size_t unlabeled_batch, std::uint64_t seed)
    : p_(p),
      batch_(unlabeled_batch),
      gate_rng_(mix_seed(seed, 0x67617465)),
      pick_rng_(mix_seed(seed, 0x7069636b)) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("SamplingPolicy: p outside [0,1]");
    if (unlabeled_batch < 1) throw std::invalid_argument("SamplingPolicy: batch must be >= 1");
}

std::vector<UnlabeledSample> SamplingPolicy::draw(const std::vector<UnlabeledSample>& pool) {
    if (pool.empty()) throw std::invalid_argument("SamplingPolicy::draw: empty pool");
    last_q_ = uniform_unit(gate_rng_);
    std::vector<UnlabeledSample> batch;
    if (last_q_ < p_) {
        batch.reserve(batch_);
        for (std::size_t i = 0; i < batch_; ++i)
            batch.push_back(pool[pick_rng_() % pool.size()]);
    }
    return batch;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::mt19937_64& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < n; i += batch_size) {
        batches.emplace_back(order.begin() + i,
                             order.begin() + std::min(n, i + batch_size));
    }
    return batches;
}

}  // namespace sscl
