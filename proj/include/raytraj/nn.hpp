#pragma once

// Forward-only float32 layers used by the camera encoder. Matrix products go
// through CBLAS sgemm; everything else is plain loops.
//
// Tensor layouts:
//   images  (frames, c, h, w)
//   tokens  (rows, n, c)    rows attend independently over their n positions

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "raytraj/errors.hpp"
#include "raytraj/tensor.hpp"

namespace raytraj::nn {

/// Row-major C = alpha * op(A) * op(B) + beta * C.
inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, float alpha,
                 const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta, float* c,
                 std::size_t ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
              static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a, static_cast<int>(lda), b,
              static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
}

inline float silu(float x) { return x / (1.0f + std::exp(-x)); }

inline void silu_inplace(std::span<float> xs) {
  for (float& x : xs) x = silu(x);
}

/// Deterministic parameter source: a 64-bit Mersenne Twister seeded with the
/// config seed. Each draw keeps the top 24 bits as a uniform value in [0, 1),
/// so the stream is identical on every platform and standard library.
class WeightGenerator {
 public:
  explicit WeightGenerator(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [-bound, bound).
  float uniform(float bound) {
    const float u = static_cast<float>(engine_() >> 40) * 0x1.0p-24f;
    return (2.0f * u - 1.0f) * bound;
  }

  void fill_uniform(std::vector<float>& v, float bound) {
    for (float& x : v) x = uniform(bound);
  }

 private:
  std::mt19937_64 engine_;
};

/// Bias initialization policy.
enum class BiasInit { Zero, Uniform };

/// y = x W^T + b applied to each row of a (rows, in) matrix.
struct Linear {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<float> weight;  // (out, in)
  std::vector<float> bias;    // (out)

  Linear() = default;
  Linear(std::size_t in_features, std::size_t out_features)
      : in(in_features), out(out_features), weight(in_features * out_features, 0.0f), bias(out_features, 0.0f) {}

  static Linear init(std::size_t in_features, std::size_t out_features, WeightGenerator& gen, BiasInit bias_init) {
    Linear l(in_features, out_features);
    const float bound = 1.0f / std::sqrt(static_cast<float>(in_features));
    gen.fill_uniform(l.weight, bound);
    if (bias_init == BiasInit::Uniform) gen.fill_uniform(l.bias, bound);
    return l;
  }

  static Linear identity(std::size_t features) {
    Linear l(features, features);
    for (std::size_t i = 0; i < features; ++i) l.weight[i * features + i] = 1.0f;
    return l;
  }

  void forward(const float* x, std::size_t rows, float* y) const {
    for (std::size_t r = 0; r < rows; ++r) std::copy(bias.begin(), bias.end(), y + r * out);
    gemm(false, true, rows, out, in, 1.0f, x, in, weight.data(), in, 1.0f, y, out);
  }

  [[nodiscard]] std::vector<float> forward(const std::vector<float>& x, std::size_t rows) const {
    std::vector<float> y(rows * out);
    forward(x.data(), rows, y.data());
    return y;
  }
};

/// Normalizes each row of a (rows, dim) matrix, then applies gamma and beta.
struct LayerNorm {
  std::size_t dim = 0;
  float eps = 1e-5f;
  std::vector<float> gamma;
  std::vector<float> beta;

  LayerNorm() = default;
  explicit LayerNorm(std::size_t d) : dim(d), gamma(d, 1.0f), beta(d, 0.0f) {}

  void forward(const float* x, std::size_t rows, float* y) const {
    for (std::size_t r = 0; r < rows; ++r) {
      const float* xr = x + r * dim;
      float* yr = y + r * dim;
      double mean = 0.0;
      for (std::size_t i = 0; i < dim; ++i) mean += xr[i];
      mean /= static_cast<double>(dim);
      double var = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double dv = xr[i] - mean;
        var += dv * dv;
      }
      var /= static_cast<double>(dim);
      const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
      for (std::size_t i = 0; i < dim; ++i) {
        yr[i] = static_cast<float>((xr[i] - mean) * inv) * gamma[i] + beta[i];
      }
    }
  }
};

/// 2-D convolution over (frames, c, h, w) with square kernels, zero padding.
struct Conv2d {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t pad = 1;
  std::vector<float> weight;  // (out, in * kernel * kernel)
  std::vector<float> bias;    // (out)

  Conv2d() = default;
  Conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t k, std::size_t s, std::size_t p)
      : in(in_ch), out(out_ch), kernel(k), stride(s), pad(p), weight(out_ch * in_ch * k * k, 0.0f), bias(out_ch, 0.0f) {}

  static Conv2d init(std::size_t in_ch, std::size_t out_ch, std::size_t k, std::size_t s, std::size_t p,
                     WeightGenerator& gen, BiasInit bias_init) {
    Conv2d c(in_ch, out_ch, k, s, p);
    const float bound = 1.0f / std::sqrt(static_cast<float>(in_ch * k * k));
    gen.fill_uniform(c.weight, bound);
    if (bias_init == BiasInit::Uniform) gen.fill_uniform(c.bias, bound);
    return c;
  }

  [[nodiscard]] std::size_t out_extent(std::size_t extent) const { return (extent + 2 * pad - kernel) / stride + 1; }

  [[nodiscard]] Tensor forward(const Tensor& x) const {
    if (x.rank() != 4 || x.dim(1) != in) {
      throw Error(Errc::ShapeMismatch, "conv expects (frames, " + std::to_string(in) + ", h, w), got " +
                                           to_string(x.shape()));
    }
    const std::size_t frames = x.dim(0);
    const std::size_t h = x.dim(2);
    const std::size_t w = x.dim(3);
    const std::size_t ho = out_extent(h);
    const std::size_t wo = out_extent(w);
    const std::size_t cols = ho * wo;
    const std::size_t patch = in * kernel * kernel;

    Tensor y({frames, out, ho, wo});
    std::vector<float> col(patch * cols);
    for (std::size_t f = 0; f < frames; ++f) {
      const float* src = x.data().data() + f * in * h * w;
      im2col(src, h, w, ho, wo, col.data());
      float* dst = y.data().data() + f * out * cols;
      for (std::size_t o = 0; o < out; ++o) std::fill_n(dst + o * cols, cols, bias[o]);
      gemm(false, false, out, cols, patch, 1.0f, weight.data(), patch, col.data(), cols, 1.0f, dst, cols);
    }
    return y;
  }

 private:
  // col has shape (in * k * k, ho * wo).
  void im2col(const float* src, std::size_t h, std::size_t w, std::size_t ho, std::size_t wo, float* col) const {
    const auto ih = static_cast<std::ptrdiff_t>(h);
    const auto iw = static_cast<std::ptrdiff_t>(w);
    std::size_t row = 0;
    for (std::size_t c = 0; c < in; ++c) {
      const float* plane = src + c * h * w;
      for (std::size_t ky = 0; ky < kernel; ++ky) {
        for (std::size_t kx = 0; kx < kernel; ++kx, ++row) {
          float* dst = col + row * ho * wo;
          for (std::size_t oy = 0; oy < ho; ++oy) {
            const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(pad);
            float* drow = dst + oy * wo;
            if (y < 0 || y >= ih) {
              std::fill_n(drow, wo, 0.0f);
              continue;
            }
            const float* srow = plane + static_cast<std::size_t>(y) * w;
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const std::ptrdiff_t xx =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(pad);
              drow[ox] = (xx < 0 || xx >= iw) ? 0.0f : srow[xx];
            }
          }
        }
      }
    }
  }
};

/// conv3x3 (stride s) -> SiLU -> conv3x3, plus a skip path that is the
/// identity when shapes agree and a 1x1 conv (stride s) otherwise.
struct ResnetBlock {
  Conv2d conv1;
  Conv2d conv2;
  bool has_skip = false;
  Conv2d skip;

  static ResnetBlock init(std::size_t in_ch, std::size_t out_ch, std::size_t stride, WeightGenerator& gen,
                          BiasInit bias_init) {
    ResnetBlock b;
    b.conv1 = Conv2d::init(in_ch, out_ch, 3, stride, 1, gen, bias_init);
    b.conv2 = Conv2d::init(out_ch, out_ch, 3, 1, 1, gen, bias_init);
    b.has_skip = in_ch != out_ch || stride != 1;
    if (b.has_skip) b.skip = Conv2d::init(in_ch, out_ch, 1, stride, 0, gen, bias_init);
    return b;
  }

  [[nodiscard]] Tensor forward(const Tensor& x) const {
    Tensor h = conv1.forward(x);
    silu_inplace(h.data());
    h = conv2.forward(h);
    if (has_skip) {
      const Tensor s = skip.forward(x);
      for (std::size_t i = 0; i < h.size(); ++i) h[i] += s[i];
    } else {
      for (std::size_t i = 0; i < h.size(); ++i) h[i] += x[i];
    }
    return h;
  }
};

/// Fixed sinusoidal embedding for `positions` steps of width `dim`:
/// pe[p][2i] = sin(p / 10000^(2i/dim)), pe[p][2i+1] = cos(same).
inline std::vector<float> sinusoidal_embedding(std::size_t positions, std::size_t dim) {
  std::vector<float> pe(positions * dim);
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
      const double angle = static_cast<double>(p) * freq;
      pe[p * dim + i] = static_cast<float>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return pe;
}

/// Softmax probabilities captured during an attention pass, laid out as
/// (rows, heads, n, n).
struct AttentionProbe {
  std::vector<float> probabilities;
  std::size_t rows = 0;
  std::size_t heads = 0;
  std::size_t positions = 0;
};

/// Temporal transformer block over (rows, n, c) tokens:
///
///   z  = x + PosEmb(x)
///   z1 = LayerNorm(z)
///   z2 = MultiHeadSelfAttention(z1) + z
///   z3 = LayerNorm(z2)
///   y  = MLP(z3) + z2
struct TemporalAttention {
  std::size_t dim = 0;
  std::size_t heads = 1;
  bool use_pos_emb = true;
  LayerNorm norm1;
  Linear to_q;
  Linear to_k;
  Linear to_v;
  Linear to_out;
  LayerNorm norm2;
  Linear fc1;
  Linear fc2;

  static TemporalAttention init(std::size_t dim, std::size_t heads, std::size_t mlp_ratio, bool use_pos_emb,
                                WeightGenerator& gen, BiasInit bias_init) {
    if (heads == 0 || dim % heads != 0) {
      throw Error(Errc::InvalidConfig, "attention width " + std::to_string(dim) + " is not divisible by " +
                                           std::to_string(heads) + " heads");
    }
    TemporalAttention a;
    a.dim = dim;
    a.heads = heads;
    a.use_pos_emb = use_pos_emb;
    a.norm1 = LayerNorm(dim);
    a.to_q = Linear::init(dim, dim, gen, bias_init);
    a.to_k = Linear::init(dim, dim, gen, bias_init);
    a.to_v = Linear::init(dim, dim, gen, bias_init);
    a.to_out = Linear::init(dim, dim, gen, bias_init);
    a.norm2 = LayerNorm(dim);
    a.fc1 = Linear::init(dim, dim * mlp_ratio, gen, bias_init);
    a.fc2 = Linear::init(dim * mlp_ratio, dim, gen, bias_init);
    return a;
  }

  /// Multi-head self-attention of (rows, n, dim) tokens over the n axis.
  [[nodiscard]] std::vector<float> self_attention(const std::vector<float>& x, std::size_t rows, std::size_t n,
                                                  AttentionProbe* probe = nullptr) const {
    const std::size_t tokens = rows * n;
    const std::vector<float> q = to_q.forward(x, tokens);
    const std::vector<float> k = to_k.forward(x, tokens);
    const std::vector<float> v = to_v.forward(x, tokens);
    const std::size_t dh = dim / heads;
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));

    if (probe) {
      probe->rows = rows;
      probe->heads = heads;
      probe->positions = n;
      probe->probabilities.assign(rows * heads * n * n, 0.0f);
    }

    std::vector<float> mixed(tokens * dim, 0.0f);
    std::vector<float> p(n);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t base = r * n * dim;
      for (std::size_t hd = 0; hd < heads; ++hd) {
        const std::size_t off = hd * dh;
        for (std::size_t i = 0; i < n; ++i) {
          const float* qi = q.data() + base + i * dim + off;
          float max_s = -INFINITY;
          for (std::size_t j = 0; j < n; ++j) {
            const float* kj = k.data() + base + j * dim + off;
            float s = 0.0f;
            for (std::size_t d = 0; d < dh; ++d) s += qi[d] * kj[d];
            p[j] = s * scale;
            max_s = std::max(max_s, p[j]);
          }
          float denom = 0.0f;
          for (std::size_t j = 0; j < n; ++j) {
            p[j] = std::exp(p[j] - max_s);
            denom += p[j];
          }
          for (std::size_t j = 0; j < n; ++j) p[j] /= denom;

          float* oi = mixed.data() + base + i * dim + off;
          for (std::size_t j = 0; j < n; ++j) {
            const float* vj = v.data() + base + j * dim + off;
            for (std::size_t d = 0; d < dh; ++d) oi[d] += p[j] * vj[d];
          }
          if (probe) {
            std::copy(p.begin(), p.end(), probe->probabilities.begin() + ((r * heads + hd) * n + i) * n);
          }
        }
      }
    }
    return to_out.forward(mixed, tokens);
  }

  [[nodiscard]] Tensor forward(const Tensor& x, AttentionProbe* probe = nullptr) const {
    if (x.rank() != 3 || x.dim(2) != dim) {
      throw Error(Errc::ShapeMismatch, "temporal attention expects (rows, n, " + std::to_string(dim) + "), got " +
                                           to_string(x.shape()));
    }
    const std::size_t rows = x.dim(0);
    const std::size_t n = x.dim(1);
    const std::size_t tokens = rows * n;

    std::vector<float> z(x.buffer());
    if (use_pos_emb) {
      const std::vector<float> pe = sinusoidal_embedding(n, dim);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < n * dim; ++i) z[r * n * dim + i] += pe[i];
    }

    std::vector<float> z1(tokens * dim);
    norm1.forward(z.data(), tokens, z1.data());
    std::vector<float> z2 = self_attention(z1, rows, n, probe);
    for (std::size_t i = 0; i < z2.size(); ++i) z2[i] += z[i];

    std::vector<float> z3(tokens * dim);
    norm2.forward(z2.data(), tokens, z3.data());
    std::vector<float> hidden = fc1.forward(z3, tokens);
    silu_inplace(hidden);
    std::vector<float> y = fc2.forward(hidden, tokens);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += z2[i];
    return Tensor(x.shape(), std::move(y));
  }
};

}  // namespace raytraj::nn
