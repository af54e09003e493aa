#pragma once

#include <cstdint>
#include <vector>

#include "sscl/matrix.hpp"

namespace sscl {

enum class Activation { Relu, Identity };

/// Fully connected classifier / gradient learner. dims includes the input
/// dimension, e.g. {784, 100, 10} is a 784->100->10 net. The architecture
/// shorthand "(a, b)" for input/output dim m expands to {m, a, b, m}.
struct MlpModel {
    std::vector<std::size_t> dims;
    std::vector<Matrix> weights;  // weights[i]: dims[i] x dims[i+1]
    std::vector<Matrix> biases;   // biases[i]:  1 x dims[i+1]
    Activation activation = Activation::Relu;
    bool use_bias = true;

    std::size_t num_layers() const { return weights.size(); }
    std::size_t input_dim() const { return dims.front(); }
    std::size_t output_dim() const { return dims.back(); }
    std::size_t param_count() const;
};

/// He-style random init, deterministic under seed.
MlpModel make_mlp(const std::vector<std::size_t>& dims, std::uint64_t seed,
                  Activation act = Activation::Relu, bool use_bias = true);
MlpModel make_zero_mlp(const std::vector<std::size_t>& dims,
                       Activation act = Activation::Relu, bool use_bias = true);

/// Expands the "(hidden...)" shorthand around an io dimension.
std::vector<std::size_t> arch_dims(std::size_t io_dim, const std::vector<std::size_t>& hidden);

struct ForwardTape {
    Matrix input;                 // 1 x dims[0]
    std::vector<Matrix> pre;      // pre-activation per layer
    std::vector<Matrix> post;     // post-activation per layer (post.back() == logits)
};

struct ParamGrads {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
    Matrix input;  // gradient w.r.t. the input vector
};

/// Forward pass; logits are the final affine output, no softmax folded in.
Matrix mlp_forward(const MlpModel& m, const Matrix& x, ForwardTape* tape = nullptr);

/// Reverse-mode gradients for an arbitrary upstream d(loss)/d(logits) vector.
/// The upstream need not come from a loss; predicted pseudo gradients plug in
/// here unchanged.
ParamGrads mlp_backward(const MlpModel& m, const ForwardTape& tape, const Matrix& upstream);

ParamGrads zero_grads(const MlpModel& m);
void accumulate(ParamGrads& into, const ParamGrads& g, double c = 1.0);
void scale_grads(ParamGrads& g, double c);

void sgd_step(MlpModel& m, const ParamGrads& grads, double eta);

}  // namespace sscl
