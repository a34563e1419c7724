#include "styleforge/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>

#include "styleforge/error.hpp"

namespace styleforge::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatMap as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMatMap(t.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

MatMap as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return MatMap(t.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) + ", got " +
                     shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

struct ConvGeometry {
  std::size_t height, width, in_ch;
  std::size_t kh, kw, out_ch;
  std::size_t pad_y, pad_x;
  std::size_t out_h, out_w;

  std::size_t patch() const { return kh * kw * in_ch; }
  std::size_t positions() const { return out_h * out_w; }
  bool pointwise() const { return kh == 1 && kw == 1; }
};

ConvGeometry conv_geometry(const Shape& input, const Shape& kernel, Padding padding) {
  if (input.size() != 3) throw ShapeError("conv2d: input must be H x W x C, got " + shape_string(input));
  if (kernel.size() != 4) throw ShapeError("conv2d: kernel must be Kh x Kw x Cin x Cout, got " + shape_string(kernel));
  ConvGeometry g{input[0], input[1], input[2], kernel[0], kernel[1], kernel[3], 0, 0, 0, 0};
  if (kernel[2] != g.in_ch) {
    throw ShapeError("conv2d: kernel expects " + std::to_string(kernel[2]) + " input channels, input " +
                     shape_string(input) + " has " + std::to_string(g.in_ch));
  }
  if (g.kh % 2 == 0 || g.kw % 2 == 0) {
    throw ShapeError("conv2d: kernel sides must be odd, got " + shape_string(kernel));
  }
  if (padding == Padding::Same) {
    g.pad_y = (g.kh - 1) / 2;
    g.pad_x = (g.kw - 1) / 2;
  } else if (g.height < g.kh || g.width < g.kw) {
    throw ShapeError("conv2d: input " + shape_string(input) + " smaller than kernel " + shape_string(kernel));
  }
  g.out_h = g.height + 2 * g.pad_y - g.kh + 1;
  g.out_w = g.width + 2 * g.pad_x - g.kw + 1;
  return g;
}

// Rows are output positions, columns run over (ky, kx, cin), matching the
// row-major layout of the kernel tensor.
Buffer im2col(const Tensor& input, const ConvGeometry& g) {
  Buffer cols(g.positions() * g.patch(), 0.0);
  const double* src = input.data().data();
  for (std::size_t oy = 0; oy < g.out_h; ++oy) {
    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
      double* row = cols.data() + (oy * g.out_w + ox) * g.patch();
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy + ky) - static_cast<std::ptrdiff_t>(g.pad_y);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const auto ix = static_cast<std::ptrdiff_t>(ox + kx) - static_cast<std::ptrdiff_t>(g.pad_x);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
          std::copy_n(src + (static_cast<std::size_t>(iy) * g.width + static_cast<std::size_t>(ix)) * g.in_ch,
                      g.in_ch, row + (ky * g.kw + kx) * g.in_ch);
        }
      }
    }
  }
  return cols;
}

void col2im_add(const RowMat& dcols, Tensor& dinput, const ConvGeometry& g) {
  double* dst = dinput.data().data();
  for (std::size_t oy = 0; oy < g.out_h; ++oy) {
    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
      const double* row = dcols.data() + (oy * g.out_w + ox) * g.patch();
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy + ky) - static_cast<std::ptrdiff_t>(g.pad_y);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const auto ix = static_cast<std::ptrdiff_t>(ox + kx) - static_cast<std::ptrdiff_t>(g.pad_x);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
          double* d = dst + (static_cast<std::size_t>(iy) * g.width + static_cast<std::size_t>(ix)) * g.in_ch;
          const double* s = row + (ky * g.kw + kx) * g.in_ch;
          for (std::size_t c = 0; c < g.in_ch; ++c) d[c] += s[c];
        }
      }
    }
  }
}

}  // namespace

Shape conv2d_output_shape(const Shape& input, const Shape& kernel, Padding padding) {
  const auto g = conv_geometry(input, kernel, padding);
  return {g.out_h, g.out_w, g.out_ch};
}

Var conv2d(Tape& tape, Var input, Var kernel, Var bias, Padding padding) {
  const Tensor& in = tape.value(input);
  const Tensor& k = tape.value(kernel);
  const Tensor& b = tape.value(bias);
  const ConvGeometry g = conv_geometry(in.shape(), k.shape(), padding);
  require_rank(b, 1, "conv2d", "bias");
  if (b.dim(0) != g.out_ch) {
    throw ShapeError("conv2d: bias has " + std::to_string(b.dim(0)) + " entries, kernel has " +
                     std::to_string(g.out_ch) + " output channels");
  }

  // Pointwise kernels read the input directly; otherwise unfold patches.
  auto cols = std::make_shared<Buffer>();
  const double* cols_data = in.data().data();
  if (!g.pointwise()) {
    *cols = im2col(in, g);
    cols_data = cols->data();
  }

  Tensor out({g.out_h, g.out_w, g.out_ch});
  {
    ConstMatMap p(cols_data, static_cast<Eigen::Index>(g.positions()), static_cast<Eigen::Index>(g.patch()));
    auto o = as_matrix(out, g.positions(), g.out_ch);
    o.noalias() = p * as_matrix(k, g.patch(), g.out_ch);
    o.rowwise() += ConstVecMap(b.data().data(), static_cast<Eigen::Index>(g.out_ch)).transpose();
  }

  const bool keep_cols = tape.requires_grad(kernel) && !g.pointwise();
  if (!keep_cols) cols.reset();

  return tape.record(std::move(out), {input, kernel, bias},
                     [=](Tape& t, const Tensor& gout) {
                       const auto go = as_matrix(gout, g.positions(), g.out_ch);
                       if (t.requires_grad(kernel)) {
                         const double* pdata = cols ? cols->data() : t.value(input).data().data();
                         ConstMatMap p(pdata, static_cast<Eigen::Index>(g.positions()),
                                       static_cast<Eigen::Index>(g.patch()));
                         as_matrix(t.grad_buffer(kernel), g.patch(), g.out_ch).noalias() += p.transpose() * go;
                       }
                       if (t.requires_grad(bias)) {
                         VecMap(t.grad_buffer(bias).data().data(), static_cast<Eigen::Index>(g.out_ch)) +=
                             go.colwise().sum().transpose();
                       }
                       if (t.requires_grad(input)) {
                         const auto km = as_matrix(t.value(kernel), g.patch(), g.out_ch);
                         if (g.pointwise()) {
                           as_matrix(t.grad_buffer(input), g.positions(), g.in_ch).noalias() += go * km.transpose();
                         } else {
                           RowMat dcols = go * km.transpose();
                           col2im_add(dcols, t.grad_buffer(input), g);
                         }
                       }
                     });
}

Shape max_pool2d_output_shape(const Shape& input) {
  if (input.size() != 3) throw ShapeError("max_pool2d: input must be H x W x C, got " + shape_string(input));
  return {(input[0] + 1) / 2, (input[1] + 1) / 2, input[2]};
}

Var max_pool2d(Tape& tape, Var input) {
  const Tensor& in = tape.value(input);
  if (in.empty()) throw ShapeError("max_pool2d: empty input");
  const Shape out_shape = max_pool2d_output_shape(in.shape());
  const std::size_t h = in.dim(0), w = in.dim(1), c = in.dim(2);
  const std::size_t oh = out_shape[0], ow = out_shape[1];

  Tensor out(out_shape);
  auto argmax = std::make_shared<std::vector<std::uint32_t>>(out.size());
  for (std::size_t oy = 0; oy < oh; ++oy) {
    const std::size_t rows[2] = {2 * oy, std::min(2 * oy + 1, h - 1)};
    for (std::size_t ox = 0; ox < ow; ++ox) {
      const std::size_t colsx[2] = {2 * ox, std::min(2 * ox + 1, w - 1)};
      for (std::size_t ch = 0; ch < c; ++ch) {
        std::size_t best = (rows[0] * w + colsx[0]) * c + ch;
        for (std::size_t ry : rows) {
          for (std::size_t rx : colsx) {
            const std::size_t idx = (ry * w + rx) * c + ch;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (oy * ow + ox) * c + ch;
        out[o] = in[best];
        (*argmax)[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return tape.record(std::move(out), {input}, [=](Tape& t, const Tensor& gout) {
    Tensor& gin = t.grad_buffer(input);
    for (std::size_t i = 0; i < gout.size(); ++i) gin[(*argmax)[i]] += gout[i];
  });
}

Var relu(Tape& tape, Var input) {
  const Tensor& in = tape.value(input);
  Tensor out = in;
  for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
  return tape.record(std::move(out), {input}, [=](Tape& t, const Tensor& gout) {
    const Tensor& x = t.value(input);
    Tensor& gin = t.grad_buffer(input);
    for (std::size_t i = 0; i < gout.size(); ++i) {
      if (x[i] > 0.0) gin[i] += gout[i];
    }
  });
}

Var dense(Tape& tape, Var input, Var weights, Var bias) {
  const Tensor& x = tape.value(input);
  const Tensor& w = tape.value(weights);
  const Tensor& b = tape.value(bias);
  require_rank(x, 1, "dense", "input");
  require_rank(w, 2, "dense", "weights");
  require_rank(b, 1, "dense", "bias");
  const std::size_t n = x.dim(0), m = w.dim(1);
  if (w.dim(0) != n || b.dim(0) != m) {
    throw ShapeError("dense: input " + shape_string(x.shape()) + ", weights " + shape_string(w.shape()) +
                     ", bias " + shape_string(b.shape()) + " are incompatible");
  }
  Tensor out({m});
  VecMap(out.data().data(), static_cast<Eigen::Index>(m)).noalias() =
      as_matrix(w, n, m).transpose() * ConstVecMap(x.data().data(), static_cast<Eigen::Index>(n)) +
      ConstVecMap(b.data().data(), static_cast<Eigen::Index>(m));
  return tape.record(std::move(out), {input, weights, bias}, [=](Tape& t, const Tensor& gout) {
    const ConstVecMap go(gout.data().data(), static_cast<Eigen::Index>(m));
    if (t.requires_grad(input)) {
      VecMap(t.grad_buffer(input).data().data(), static_cast<Eigen::Index>(n)).noalias() +=
          as_matrix(t.value(weights), n, m) * go;
    }
    if (t.requires_grad(weights)) {
      const ConstVecMap xv(t.value(input).data().data(), static_cast<Eigen::Index>(n));
      as_matrix(t.grad_buffer(weights), n, m).noalias() += xv * go.transpose();
    }
    if (t.requires_grad(bias)) {
      VecMap(t.grad_buffer(bias).data().data(), static_cast<Eigen::Index>(m)) += go;
    }
  });
}

Var mse(Tape& tape, Var a, Var b) {
  const Tensor& x = tape.value(a);
  const Tensor& y = tape.value(b);
  require_same_shape(x, y, "mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  const auto n = static_cast<double>(x.size());
  return tape.record(Tensor::scalar(sum / n), {a, b}, [=](Tape& t, const Tensor& gout) {
    const Tensor& xv = t.value(a);
    const Tensor& yv = t.value(b);
    const double factor = 2.0 * gout[0] / n;
    if (t.requires_grad(a)) {
      Tensor& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < xv.size(); ++i) ga[i] += factor * (xv[i] - yv[i]);
    }
    if (t.requires_grad(b)) {
      Tensor& gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < xv.size(); ++i) gb[i] -= factor * (xv[i] - yv[i]);
    }
  });
}

Var gram(Tape& tape, Var activation) {
  const Tensor& f = tape.value(activation);
  require_rank(f, 3, "gram", "activation");
  const std::size_t positions = f.dim(0) * f.dim(1);
  const std::size_t c = f.dim(2);
  const double norm = static_cast<double>(positions);

  Tensor out({c, c});
  {
    const auto fm = as_matrix(f, positions, c);
    auto g = as_matrix(out, c, c);
    g.noalias() = fm.transpose() * fm;
    g /= norm;
    // Mirror the upper triangle so the result is symmetric bit for bit.
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = i + 1; j < c; ++j) g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return tape.record(std::move(out), {activation}, [=](Tape& t, const Tensor& gout) {
    const auto go = as_matrix(gout, c, c);
    const RowMat sym = (go + go.transpose()) / norm;
    as_matrix(t.grad_buffer(activation), positions, c).noalias() +=
        as_matrix(t.value(activation), positions, c) * sym;
  });
}

Var add(Tape& tape, Var a, Var b) {
  const Tensor& x = tape.value(a);
  const Tensor& y = tape.value(b);
  require_same_shape(x, y, "add");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  return tape.record(std::move(out), {a, b}, [=](Tape& t, const Tensor& gout) {
    for (Var v : {a, b}) {
      if (!t.requires_grad(v)) continue;
      Tensor& g = t.grad_buffer(v);
      for (std::size_t i = 0; i < gout.size(); ++i) g[i] += gout[i];
    }
  });
}

Var scale(Tape& tape, Var a, double factor) {
  Tensor out = tape.value(a);
  for (auto& v : out.data()) v *= factor;
  return tape.record(std::move(out), {a}, [=](Tape& t, const Tensor& gout) {
    Tensor& g = t.grad_buffer(a);
    for (std::size_t i = 0; i < gout.size(); ++i) g[i] += factor * gout[i];
  });
}

Var reshape(Tape& tape, Var a, Shape shape) {
  Tensor out = tape.value(a).reshaped(std::move(shape));
  return tape.record(std::move(out), {a}, [=](Tape& t, const Tensor& gout) {
    Tensor& g = t.grad_buffer(a);
    for (std::size_t i = 0; i < gout.size(); ++i) g[i] += gout[i];
  });
}

Var concat_channels(Tape& tape, std::span<const Var> inputs) {
  if (inputs.empty()) throw ShapeError("concat_channels: no inputs");
  const Tensor& first = tape.value(inputs[0]);
  require_rank(first, 3, "concat_channels", "input");
  const std::size_t h = first.dim(0), w = first.dim(1);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (Var v : inputs) {
    const Tensor& t = tape.value(v);
    require_rank(t, 3, "concat_channels", "input");
    if (t.dim(0) != h || t.dim(1) != w) {
      throw ShapeError("concat_channels: spatial mismatch " + shape_string(first.shape()) + " vs " +
                       shape_string(t.shape()));
    }
    widths.push_back(t.dim(2));
    total += t.dim(2);
  }
  Tensor out({h, w, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor& src = tape.value(inputs[k]);
    for (std::size_t p = 0; p < h * w; ++p) {
      std::copy_n(src.data().data() + p * widths[k], widths[k], out.data().data() + p * total + offset);
    }
    offset += widths[k];
  }
  std::vector<Var> ins(inputs.begin(), inputs.end());
  return tape.record(std::move(out), ins, [=](Tape& t, const Tensor& gout) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < ins.size(); ++k) {
      if (t.requires_grad(ins[k])) {
        Tensor& g = t.grad_buffer(ins[k]);
        for (std::size_t p = 0; p < h * w; ++p) {
          for (std::size_t c = 0; c < widths[k]; ++c) g[p * widths[k] + c] += gout[p * total + off + c];
        }
      }
      off += widths[k];
    }
  });
}

Var dropout(Tape& tape, Var input, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("dropout: rate must be in [0, 1)");
  const Tensor& in = tape.value(input);
  auto mask = std::make_shared<std::vector<double>>(in.size());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& m : *mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  Tensor out = in;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*mask)[i];
  return tape.record(std::move(out), {input}, [=](Tape& t, const Tensor& gout) {
    Tensor& g = t.grad_buffer(input);
    for (std::size_t i = 0; i < gout.size(); ++i) g[i] += (*mask)[i] * gout[i];
  });
}

Tensor softmax(const Tensor& logits) {
  Tensor p = logits;
  const double top = *std::max_element(p.data().begin(), p.data().end());
  double sum = 0.0;
  for (auto& v : p.data()) {
    v = std::exp(v - top);
    sum += v;
  }
  for (auto& v : p.data()) v /= sum;
  return p;
}

Var softmax_cross_entropy(Tape& tape, Var logits, std::size_t label) {
  const Tensor& z = tape.value(logits);
  require_rank(z, 1, "softmax_cross_entropy", "logits");
  if (label >= z.size()) {
    throw InvalidArgument("softmax_cross_entropy: label " + std::to_string(label) + " out of range for " +
                          std::to_string(z.size()) + " classes");
  }
  const double top = *std::max_element(z.data().begin(), z.data().end());
  double sum = 0.0;
  for (double v : z.data()) sum += std::exp(v - top);
  const double loss = top + std::log(sum) - z[label];
  return tape.record(Tensor::scalar(loss), {logits}, [=](Tape& t, const Tensor& gout) {
    const Tensor p = softmax(t.value(logits));
    Tensor& g = t.grad_buffer(logits);
    for (std::size_t i = 0; i < p.size(); ++i) g[i] += gout[0] * (p[i] - (i == label ? 1.0 : 0.0));
  });
}

}  // namespace styleforge::ad
