#include "sscl/mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sscl {

std::size_t MlpModel::param_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        n += weights[i].size();
        if (use_bias) n += biases[i].size();
    }
    return n;
}

MlpModel make_mlp(const std::vector<std::size_t>& dims, std::uint64_t seed,
                  Activation act, bool use_bias) {
    if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output dims");
    MlpModel m;
    m.dims = dims;
    m.activation = act;
    m.use_bias = use_bias;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const double sigma = std::sqrt(2.0 / static_cast<double>(dims[i]));
        Matrix w(dims[i], dims[i + 1]);
        for (double& x : w.data) x = sigma * normal(rng);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(1, dims[i + 1]);
    }
    return m;
}

MlpModel make_zero_mlp(const std::vector<std::size_t>& dims, Activation act, bool use_bias) {
    MlpModel m = make_mlp(dims, 0, act, use_bias);
    for (auto& w : m.weights) w = Matrix(w.rows, w.cols);
    for (auto& b : m.biases) b = Matrix(b.rows, b.cols);
    return m;
}

std::vector<std::size_t> arch_dims(std::size_t io_dim, const std::vector<std::size_t>& hidden) {
    std::vector<std::size_t> dims;
    dims.push_back(io_dim);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(io_dim);
    return dims;
}

namespace {
double act_fwd(Activation a, double x) {
    return a == Activation::Relu ? (x > 0.0 ? x : 0.0) : x;
}
double act_bwd(Activation a, double pre) {
    return a == Activation::Relu ? (pre > 0.0 ? 1.0 : 0.0) : 1.0;
}

void check_tape(const MlpModel& m, const ForwardTape& tape) {
    if (tape.pre.size() != m.num_layers() || tape.post.size() != m.num_layers() ||
        tape.input.cols != m.input_dim())
        throw std::logic_error("mlp_backward: tape does not match model");
    for (std::size_t i = 0; i < m.num_layers(); ++i) {
        if (tape.pre[i].cols != m.dims[i + 1] || tape.post[i].cols != m.dims[i + 1])
            throw std::logic_error("mlp_backward: tape does not match model");
    }
}
}  // namespace

Matrix mlp_forward(const MlpModel& m, const Matrix& x, ForwardTape* tape) {
    if (x.rows != 1 || x.cols != m.input_dim())
        throw std::invalid_argument("mlp_forward: input dimension mismatch");
    if (tape) {
        tape->input = x;
        tape->pre.clear();
        tape->post.clear();
    }
    Matrix cur = x;
    const std::size_t L = m.num_layers();
    for (std::size_t i = 0; i < L; ++i) {
        Matrix pre = matmul(cur, m.weights[i]);
        if (m.use_bias) add_inplace(pre, m.biases[i]);
        Matrix post = pre;
        if (i + 1 < L) {  // hidden layers only; logits stay affine
            for (double& v : post.data) v = act_fwd(m.activation, v);
        }
        if (tape) {
            tape->pre.push_back(pre);
            tape->post.push_back(post);
        }
        cur = std::move(post);
    }
    return cur;
}

ParamGrads mlp_backward(const MlpModel& m, const ForwardTape& tape, const Matrix& upstream) {
    check_tape(m, tape);
    if (upstream.rows != 1 || upstream.cols != m.output_dim())
        throw std::invalid_argument("mlp_backward: upstream shape mismatch");
    const std::size_t L = m.num_layers();
    ParamGrads g = zero_grads(m);
    Matrix delta = upstream;  // d loss / d pre-activation of current layer
    for (std::size_t li = L; li-- > 0;) {
        if (li + 1 < L) {
            for (std::size_t j = 0; j < delta.cols; ++j)
                delta.data[j] *= act_bwd(m.activation, tape.pre[li].data[j]);
        }
        const Matrix& in = li == 0 ? tape.input : tape.post[li - 1];
        g.weights[li] = matmul(transpose(in), delta);
        if (m.use_bias) g.biases[li] = delta;
        delta = matmul(delta, transpose(m.weights[li]));
    }
    g.input = delta;
    return g;
}

ParamGrads zero_grads(const MlpModel& m) {
    ParamGrads g;
    for (std::size_t i = 0; i < m.num_layers(); ++i) {
        g.weights.emplace_back(m.weights[i].rows, m.weights[i].cols);
        g.biases.emplace_back(1, m.biases[i].cols);
    }
    g.input = Matrix(1, m.input_dim());
    return g;
}

void accumulate(ParamGrads& into, const ParamGrads& g, double c) {
    for (std::size_t i = 0; i < into.weights.size(); ++i) {
        add_inplace(into.weights[i], g.weights[i], c);
        add_inplace(into.biases[i], g.biases[i], c);
    }
    add_inplace(into.input, g.input, c);
}

void scale_grads(ParamGrads& g, double c) {
    for (auto& w : g.weights)
        for (double& x : w.data) x *= c;
    for (auto& b : g.biases)
        for (double& x : b.data) x *= c;
    for (double& x : g.input.data) x *= c;
}

void sgd_step(MlpModel& m, const ParamGrads& grads, double eta) {
    if (grads.weights.size() != m.num_layers())
        throw std::invalid_argument("sgd_step: grads shape mismatch");
    for (std::size_t i = 0; i < m.num_layers(); ++i) {
        add_inplace(m.weights[i], grads.weights[i], -eta);
        if (m.use_bias) add_inplace(m.biases[i], grads.biases[i], -eta);
    }
}

}  // namespace sscl
