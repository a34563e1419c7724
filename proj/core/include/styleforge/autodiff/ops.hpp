#pragma once

#include <cstddef>
#include <span>

#include "styleforge/autodiff/tape.hpp"
#include "styleforge/autodiff/tensor.hpp"
#include "styleforge/rng.hpp"

namespace styleforge::ad {

enum class Padding { Same, Valid };

/// 2-D convolution (cross-correlation) over an H x W x Cin input with a
/// Kh x Kw x Cin x Cout kernel. Kernel sides must be odd. Same padding keeps
/// the spatial size using zero fill.
Var conv2d(Tape& tape, Var input, Var kernel, Var bias, Padding padding);

/// 2x2 max pooling with stride 2. Odd sides are padded by replicating the
/// last row/column, so the output is ceil(H/2) x ceil(W/2). Ties go to the
/// lowest row-major position inside the window.
Var max_pool2d(Tape& tape, Var input);

Var relu(Tape& tape, Var input);

/// y = x^T W + b for x of length N, W of N x M, b of length M.
Var dense(Tape& tape, Var input, Var weights, Var bias);

/// Mean of squared differences; returns shape {1}.
Var mse(Tape& tape, Var a, Var b);

/// Channel Gram matrix F^T F / (H W) of an H x W x C activation, shape C x C.
Var gram(Tape& tape, Var activation);

Var add(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var a, double factor);
Var reshape(Tape& tape, Var a, Shape shape);

/// Stacks H x W x Ci inputs along the channel axis.
Var concat_channels(Tape& tape, std::span<const Var> inputs);

/// Inverted dropout: zeroes each element with probability rate and scales the
/// survivors by 1 / (1 - rate).
Var dropout(Tape& tape, Var input, double rate, Rng& rng);

/// -log softmax(logits)[label]; returns shape {1}.
Var softmax_cross_entropy(Tape& tape, Var logits, std::size_t label);

Tensor softmax(const Tensor& logits);

Shape conv2d_output_shape(const Shape& input, const Shape& kernel, Padding padding);
Shape max_pool2d_output_shape(const Shape& input);

}  // namespace styleforge::ad
