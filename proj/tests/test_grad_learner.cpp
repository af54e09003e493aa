#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "sscl/grad_learner.hpp"

using namespace sscl;

namespace {

LearnerConfig small_cfg() {
    LearnerConfig cfg;
    cfg.hidden = {4};
    cfg.alpha = 0.5;
    cfg.lambda = 1.0;
    cfg.eta = 0.1;
    cfg.eta_hat = 0.05;
    cfg.warmup = 0;
    return cfg;
}

// Fitness loss as a pure function of the learner weights, for finite
// differences: normalize(h(z), tau(z,y), alpha) fed into the shifted CE.
double loss_of_omega(const MlpModel& h, const Matrix& z, std::size_t y,
                     const LearnerConfig& cfg) {
    const double tau = l2_norm(grad_cross_entropy(z, y));
    const Matrix gbar = GradientLearner::normalize(mlp_forward(h, z), tau, cfg.alpha);
    return GradientLearner::fitness_loss(z, gbar, y, cfg.eta, cfg.lambda);
}

}  // namespace

TEST_CASE("zero-initialized learner predicts zero and skips its update") {
    LearnerConfig cfg = small_cfg();
    GradientLearner gl(3, cfg, 7);
    gl.network() = make_zero_mlp(gl.network().dims);
    const Matrix z = Matrix::row({1.0, -0.5, 0.2});
    CHECK(l2_norm(gl.predict_raw(z)) == 0.0);

    const auto rec = gl.learn_step(z, 0);
    CHECK(rec.skipped);
    CHECK(rec.fit_loss == doctest::Approx(cfg.lambda * cross_entropy(z, 0)));
    for (const Matrix& w : gl.network().weights)
        CHECK(l2_norm(w) == 0.0);  // skipped update leaves omega untouched
}

TEST_CASE("predict_raw is deterministic and the (64,16) K=10 parameter count") {
    LearnerConfig cfg;
    cfg.hidden = {64, 16};
    GradientLearner a(10, cfg, 42), b(10, cfg, 42);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix z(1, 10);
    for (double& x : z.data) x = n(rng);
    CHECK(a.predict_raw(z) == b.predict_raw(z));

    const std::size_t expect = 10 * 64 + 64 + 64 * 16 + 16 + 16 * 10 + 10;
    CHECK(a.network().param_count() == expect);
    CHECK(a.network().dims == std::vector<std::size_t>{10, 64, 16, 10});
}

TEST_CASE("normalize hits alpha*tau magnitude and keeps direction") {
    const Matrix g = Matrix::row({3.0, 4.0});
    const Matrix out = GradientLearner::normalize(g, 10.0, 0.5);
    CHECK(out.data[0] == doctest::Approx(3.0));
    CHECK(out.data[1] == doctest::Approx(4.0));

    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        Matrix r(1, 6);
        for (double& x : r.data) x = n(rng);
        const double tau = std::abs(n(rng));
        const Matrix nr = GradientLearner::normalize(r, tau, 0.3);
        CHECK(l2_norm(nr) == doctest::Approx(0.3 * tau).epsilon(1e-12));
        // direction preserved: nr is a positive multiple of r
        CHECK(dot(nr, r) == doctest::Approx(l2_norm(nr) * l2_norm(r)).epsilon(1e-12));
    }

    CHECK(l2_norm(GradientLearner::normalize(g, 10.0, 0.0)) == 0.0);
    CHECK(l2_norm(GradientLearner::normalize(Matrix(1, 4), 2.0, 0.5)) == 0.0);
    CHECK_THROWS_AS(GradientLearner::normalize(g, -1.0, 0.5), std::invalid_argument);
}

TEST_CASE("fitness loss: zero shift, vanilla-direction descent, lambda scaling") {
    const Matrix z = Matrix::row({2.0, -1.0, 0.5});
    const std::size_t y = 2;
    const Matrix zero(1, 3);
    CHECK(GradientLearner::fitness_loss(z, zero, y, 0.1, 0.7) ==
          doctest::Approx(0.7 * cross_entropy(z, y)));

    // shifting along the vanilla gradient direction lowers the loss
    const Matrix vdir = GradientLearner::normalize(grad_cross_entropy(z, y), 1.0, 1.0);
    CHECK(GradientLearner::fitness_loss(z, vdir, y, 0.1, 1.0) <
          GradientLearner::fitness_loss(z, zero, y, 0.1, 1.0));

    const double l1 = GradientLearner::fitness_loss(z, vdir, y, 0.1, 0.4);
    const double l2 = GradientLearner::fitness_loss(z, vdir, y, 0.1, 0.8);
    CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(1e-12));

    CHECK_THROWS_AS(GradientLearner::fitness_loss(z, Matrix(1, 2), y, 0.1, 1.0),
                    std::invalid_argument);
}

TEST_CASE("learn_step gradient matches finite differences through normalization") {
    LearnerConfig cfg = small_cfg();
    cfg.eta_hat = 1.0;  // implied gradient = omega_before - omega_after
    GradientLearner gl(3, cfg, 11);
    const Matrix z = Matrix::row({0.8, -0.3, 1.1});
    const std::size_t y = 1;

    const MlpModel before = gl.network();
    gl.learn_step(z, y);
    const MlpModel& after = gl.network();

    const double h = 1e-6;
    for (std::size_t l = 0; l < before.num_layers(); ++l) {
        for (std::size_t i = 0; i < before.weights[l].size(); ++i) {
            MlpModel plus = before, minus = before;
            plus.weights[l].data[i] += h;
            minus.weights[l].data[i] -= h;
            const double fd = (loss_of_omega(plus, z, y, cfg) - loss_of_omega(minus, z, y, cfg)) /
                              (2.0 * h);
            const double got = before.weights[l].data[i] - after.weights[l].data[i];
            CHECK(got == doctest::Approx(fd).epsilon(1e-4).scale(1e-8));
        }
        for (std::size_t i = 0; i < before.biases[l].size(); ++i) {
            MlpModel plus = before, minus = before;
            plus.biases[l].data[i] += h;
            minus.biases[l].data[i] -= h;
            const double fd = (loss_of_omega(plus, z, y, cfg) - loss_of_omega(minus, z, y, cfg)) /
                              (2.0 * h);
            const double got = before.biases[l].data[i] - after.biases[l].data[i];
            CHECK(got == doctest::Approx(fd).epsilon(1e-4).scale(1e-8));
        }
    }
}

TEST_CASE("eta_hat = 0 refreshes tau without touching omega") {
    LearnerConfig cfg = small_cfg();
    cfg.eta_hat = 0.0;
    GradientLearner gl(3, cfg, 5);
    const MlpModel before = gl.network();
    const Matrix z = Matrix::row({1.0, 0.0, -1.0});
    const auto rec = gl.learn_step(z, 0);
    CHECK(gl.tau_prev() == doctest::Approx(rec.tau));
    CHECK(gl.tau_prev() == doctest::Approx(l2_norm(grad_cross_entropy(z, 0))));
    CHECK(gl.step_count() == 1);
    for (std::size_t l = 0; l < before.num_layers(); ++l)
        CHECK(before.weights[l] == gl.network().weights[l]);
}

TEST_CASE("repeated learning drives the fitness loss down") {
    LearnerConfig cfg;
    cfg.hidden = {16};
    cfg.alpha = 0.05;
    cfg.lambda = 1.0;
    cfg.eta = 0.5;
    cfg.eta_hat = 0.1;
    GradientLearner gl(4, cfg, 3);

    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 1.5);
    std::vector<Matrix> zs;
    std::vector<std::size_t> ys;
    for (int i = 0; i < 20; ++i) {
        Matrix z(1, 4);
        for (double& x : z.data) x = n(rng);
        zs.push_back(z);
        ys.push_back(rng() % 4);
    }

    std::vector<double> losses;
    for (int step = 0; step < 200; ++step)
        for (std::size_t i = 0; i < zs.size(); ++i)
            losses.push_back(gl.learn_step(zs[i], ys[i]).fit_loss);

    const std::size_t w = losses.size() / 5;
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        first += losses[i];
        last += losses[losses.size() - w + i];
    }
    CHECK(last / w < first / w);
}

TEST_CASE("observe_batch sets tau from the batch-mean gradient, one step") {
    LearnerConfig cfg = small_cfg();
    GradientLearner gl(3, cfg, 2);
    const std::vector<Matrix> zs = {Matrix::row({1.0, 0.0, 0.0}), Matrix::row({0.0, 1.0, 0.0})};
    const std::vector<std::size_t> ys = {0, 1};
    const auto recs = gl.observe_batch(zs, ys);
    REQUIRE(recs.size() == 2);
    CHECK(gl.step_count() == 1);

    Matrix mean(1, 3);
    add_inplace(mean, grad_cross_entropy(zs[0], ys[0]), 0.5);
    add_inplace(mean, grad_cross_entropy(zs[1], ys[1]), 0.5);
    CHECK(gl.tau_prev() == doctest::Approx(l2_norm(mean)).epsilon(1e-12));

    CHECK_THROWS_AS(gl.observe_batch({}, {}), std::invalid_argument);
}

TEST_CASE("predict_for_unlabeled warmup gate and tau reuse") {
    LearnerConfig cfg = small_cfg();
    cfg.warmup = 3;
    GradientLearner gl(3, cfg, 8);
    const Matrix z = Matrix::row({0.5, -0.2, 0.9});
    CHECK_THROWS_AS(gl.predict_for_unlabeled(z), std::logic_error);

    gl.learn_step(z, 0);
    CHECK_FALSE(gl.predict_for_unlabeled(z).has_value());
    gl.learn_step(z, 0);
    CHECK_FALSE(gl.predict_for_unlabeled(z).has_value());
    gl.learn_step(z, 0);
    const auto g1 = gl.predict_for_unlabeled(z);
    REQUIRE(g1.has_value());
    CHECK(l2_norm(*g1) == doctest::Approx(cfg.alpha * gl.tau_prev()).epsilon(1e-12));

    // consecutive unlabeled predictions reuse the same stored tau
    const Matrix z2 = Matrix::row({-1.0, 0.3, 0.1});
    const double tau_before = gl.tau_prev();
    const auto g2 = gl.predict_for_unlabeled(z2);
    REQUIRE(g2.has_value());
    CHECK(gl.tau_prev() == tau_before);
    CHECK(l2_norm(*g2) == doctest::Approx(cfg.alpha * tau_before).epsilon(1e-12));
}

TEST_CASE("apply_unlabeled_update matches labeled plumbing and alpha linearity") {
    MlpModel m = make_mlp({3, 5, 2}, 6);
    const Matrix x = Matrix::row({0.4, -0.7, 1.2});

    // zero pseudo gradient is a no-op
    MlpModel m0 = m;
    ForwardTape t0;
    mlp_forward(m0, x, &t0);
    apply_unlabeled_update(m0, t0, Matrix(1, 2), 0.1);
    for (std::size_t l = 0; l < m.num_layers(); ++l) CHECK(m0.weights[l] == m.weights[l]);

    // substituting the true vanilla gradient reproduces a labeled step
    MlpModel ma = m, mb = m;
    ForwardTape ta, tb;
    const Matrix za = mlp_forward(ma, x, &ta);
    mlp_forward(mb, x, &tb);
    apply_unlabeled_update(ma, ta, grad_cross_entropy(za, 1), 0.1);
    sgd_step(mb, mlp_backward(mb, tb, grad_cross_entropy(za, 1)), 0.1);
    for (std::size_t l = 0; l < m.num_layers(); ++l) CHECK(ma.weights[l] == mb.weights[l]);

    // pseudo-update magnitude is linear in alpha
    const Matrix g = Matrix::row({0.3, -0.8});
    auto delta_norm = [&](double alpha) {
        MlpModel mc = m;
        ForwardTape tc;
        mlp_forward(mc, x, &tc);
        apply_unlabeled_update(mc, tc, GradientLearner::normalize(g, 2.0, alpha), 0.1);
        double s = 0.0;
        for (std::size_t l = 0; l < m.num_layers(); ++l) {
            const Matrix dw = sub(mc.weights[l], m.weights[l]);
            const Matrix db = sub(mc.biases[l], m.biases[l]);
            s += dot(dw, dw) + dot(db, db);
        }
        return std::sqrt(s);
    };
    CHECK(delta_norm(0.4) == doctest::Approx(2.0 * delta_norm(0.2)).epsilon(1e-9));
}

TEST_CASE("noise gradients: support, moments, determinism") {
    std::mt19937_64 rng(77);
    double usum = 0.0, nsum = 0.0;
    std::size_t count = 0;
    for (int i = 0; i < 10000; ++i) {
        const Matrix u = noise_gradient(NoiseKind::Uniform, 10, rng);
        const Matrix g = noise_gradient(NoiseKind::Normal, 10, rng);
        for (double x : u.data) {
            CHECK(x >= -1.0);
            CHECK(x <= 1.0);
            usum += x;
        }
        for (double x : g.data) nsum += x;
        count += 10;
    }
    CHECK(std::abs(usum / count) < 0.02);
    CHECK(std::abs(nsum / count) < 0.02);

    std::mt19937_64 a(5), b(5);
    CHECK(noise_gradient(NoiseKind::Uniform, 8, a) == noise_gradient(NoiseKind::Uniform, 8, b));
    CHECK(noise_gradient(NoiseKind::Normal, 8, a) == noise_gradient(NoiseKind::Normal, 8, b));
    CHECK_THROWS_AS(noise_gradient(NoiseKind::Uniform, 0, rng), std::invalid_argument);
}

TEST_CASE("config validation") {
    LearnerConfig cfg = small_cfg();
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(GradientLearner(3, cfg, 1), std::invalid_argument);
    cfg.alpha = 0.5;
    cfg.lambda = 0.0;
    CHECK_THROWS_AS(GradientLearner(3, cfg, 1), std::invalid_argument);
}
