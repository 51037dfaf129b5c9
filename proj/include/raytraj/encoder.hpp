#pragma once

// Camera encoder: maps a Plücker embedding sequence (b, n, 6, h, w) to four
// feature maps at strides 8, 16, 32 and 64.
//
//   pixel unshuffle (x8)           b x n x 384 x h/8  x w/8
//   3x3 conv                       b x n x c1  x h/8  x w/8
//   scale 1: res, attn             b x n x c1  x h/8  x w/8
//   scale 2: down, attn, res, attn b x n x c2  x h/16 x w/16
//   scale 3: down, attn, res, attn b x n x c3  x h/32 x w/32
//   scale 4: down, attn, res, attn b x n x c4  x h/64 x w/64
//
// Weights are pseudo-random from the config seed; no training happens here.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "raytraj/errors.hpp"
#include "raytraj/nn.hpp"
#include "raytraj/tensor.hpp"

namespace raytraj::encoder {

inline constexpr std::size_t kScales = 4;
inline constexpr std::size_t kStages = 6;

struct EncoderConfig {
  std::size_t unshuffle_factor = 8;
  std::array<std::size_t, kScales> channels{320, 640, 1280, 1280};
  std::size_t heads = 8;
  std::size_t mlp_ratio = 4;
  std::uint64_t seed = 0;
  std::size_t input_channels = 6;
  bool use_pos_emb = true;
  nn::BiasInit bias_init = nn::BiasInit::Zero;
};

inline void validate(const EncoderConfig& cfg) {
  if (cfg.unshuffle_factor < 1) throw Error(Errc::InvalidConfig, "unshuffle factor must be >= 1");
  if (cfg.input_channels < 1) throw Error(Errc::InvalidConfig, "input channels must be >= 1");
  if (cfg.mlp_ratio < 1) throw Error(Errc::InvalidConfig, "mlp ratio must be >= 1");
  if (cfg.heads < 1) throw Error(Errc::InvalidConfig, "head count must be >= 1");
  for (std::size_t c : cfg.channels) {
    if (c == 0) throw Error(Errc::InvalidConfig, "scale channels must be positive");
    if (c % cfg.heads != 0) {
      throw Error(Errc::InvalidConfig,
                  "scale width " + std::to_string(c) + " is not divisible by " + std::to_string(cfg.heads) + " heads");
    }
  }
}

/// Space-to-channel rearrangement over the last two axes. Output channel
/// c * r^2 + dy * r + dx holds input (c, y * r + dy, x * r + dx).
inline Tensor pixel_unshuffle(const Tensor& x, std::size_t r) {
  if (x.rank() < 3) throw Error(Errc::ShapeMismatch, "pixel_unshuffle needs (..., c, h, w)");
  if (r < 1) throw Error(Errc::InvalidArgument, "unshuffle factor must be >= 1");
  const std::size_t rank = x.rank();
  const std::size_t c = x.dim(rank - 3);
  const std::size_t h = x.dim(rank - 2);
  const std::size_t w = x.dim(rank - 1);
  if (h % r != 0 || w % r != 0) {
    throw Error(Errc::IndivisibleDims, "spatial dims " + std::to_string(h) + "x" + std::to_string(w) +
                                           " not divisible by " + std::to_string(r));
  }
  const std::size_t ho = h / r;
  const std::size_t wo = w / r;
  Shape shape(x.shape().begin(), x.shape().end() - 3);
  shape.insert(shape.end(), {c * r * r, ho, wo});
  Tensor out(shape);
  const std::size_t lead = x.size() == 0 ? 0 : x.size() / (c * h * w);

  for (std::size_t b = 0; b < lead; ++b) {
    const float* src = x.data().data() + b * c * h * w;
    float* dst = out.data().data() + b * c * h * w;
    for (std::size_t ci = 0; ci < c; ++ci)
      for (std::size_t dy = 0; dy < r; ++dy)
        for (std::size_t dx = 0; dx < r; ++dx) {
          const std::size_t oc = (ci * r + dy) * r + dx;
          for (std::size_t y = 0; y < ho; ++y)
            for (std::size_t xx = 0; xx < wo; ++xx) {
              dst[(oc * ho + y) * wo + xx] = src[(ci * h + y * r + dy) * w + xx * r + dx];
            }
        }
  }
  return out;
}

/// Inverse of pixel_unshuffle.
inline Tensor pixel_shuffle(const Tensor& x, std::size_t r) {
  if (x.rank() < 3) throw Error(Errc::ShapeMismatch, "pixel_shuffle needs (..., c, h, w)");
  const std::size_t rank = x.rank();
  const std::size_t cr = x.dim(rank - 3);
  if (r < 1 || cr % (r * r) != 0) throw Error(Errc::IndivisibleDims, "channels not divisible by r^2");
  const std::size_t c = cr / (r * r);
  const std::size_t ho = x.dim(rank - 2);
  const std::size_t wo = x.dim(rank - 1);
  const std::size_t h = ho * r;
  const std::size_t w = wo * r;
  Shape shape(x.shape().begin(), x.shape().end() - 3);
  shape.insert(shape.end(), {c, h, w});
  Tensor out(shape);
  const std::size_t lead = x.size() == 0 ? 0 : x.size() / (cr * ho * wo);

  for (std::size_t b = 0; b < lead; ++b) {
    const float* src = x.data().data() + b * c * h * w;
    float* dst = out.data().data() + b * c * h * w;
    for (std::size_t ci = 0; ci < c; ++ci)
      for (std::size_t dy = 0; dy < r; ++dy)
        for (std::size_t dx = 0; dx < r; ++dx) {
          const std::size_t oc = (ci * r + dy) * r + dx;
          for (std::size_t y = 0; y < ho; ++y)
            for (std::size_t xx = 0; xx < wo; ++xx) {
              dst[(ci * h + y * r + dy) * w + xx * r + dx] = src[(oc * ho + y) * wo + xx];
            }
        }
  }
  return out;
}

/// Output shapes of: unshuffle, input conv, scales 1-4.
inline std::array<Shape, kStages> shape_schedule(const EncoderConfig& cfg, std::size_t b, std::size_t n, std::size_t h,
                                                 std::size_t w) {
  const std::size_t r = cfg.unshuffle_factor;
  const std::size_t total = r * 8;
  if (h % total != 0 || w % total != 0) {
    throw Error(Errc::IndivisibleDims, "height and width must be divisible by " + std::to_string(total) + ", got " +
                                           std::to_string(h) + "x" + std::to_string(w));
  }
  const std::size_t c0 = cfg.input_channels * r * r;
  const auto& c = cfg.channels;
  return {Shape{b, n, c0, h / r, w / r},
          Shape{b, n, c[0], h / r, w / r},
          Shape{b, n, c[0], h / r, w / r},
          Shape{b, n, c[1], h / (2 * r), w / (2 * r)},
          Shape{b, n, c[2], h / (4 * r), w / (4 * r)},
          Shape{b, n, c[3], h / (8 * r), w / (8 * r)}};
}

/// (b, n, c, h, w) -> (b * h * w, n, c) so that attention runs over n.
inline Tensor to_temporal_tokens(const Tensor& x) {
  const std::size_t b = x.dim(0), n = x.dim(1), c = x.dim(2), h = x.dim(3), w = x.dim(4);
  const std::size_t hw = h * w;
  Tensor out({b * hw, n, c});
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t ci = 0; ci < c; ++ci) {
        const float* src = x.data().data() + ((bi * n + t) * c + ci) * hw;
        for (std::size_t p = 0; p < hw; ++p) out[((bi * hw + p) * n + t) * c + ci] = src[p];
      }
  return out;
}

inline Tensor from_temporal_tokens(const Tensor& tokens, std::size_t b, std::size_t h, std::size_t w) {
  const std::size_t n = tokens.dim(1), c = tokens.dim(2);
  const std::size_t hw = h * w;
  Tensor out({b, n, c, h, w});
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t ci = 0; ci < c; ++ci) {
        float* dst = out.data().data() + ((bi * n + t) * c + ci) * hw;
        for (std::size_t p = 0; p < hw; ++p) dst[p] = tokens[((bi * hw + p) * n + t) * c + ci];
      }
  return out;
}

struct EncoderScale {
  bool has_down = false;
  nn::ResnetBlock down;
  nn::TemporalAttention down_attention;
  nn::ResnetBlock res;
  nn::TemporalAttention res_attention;
};

struct MultiScaleCameraFeatures {
  std::array<Tensor, kScales> scales;      // each (b, n, c_k, h_k, w_k)
  std::array<Shape, kStages> stage_shapes;  // as observed during the pass
};

class CameraEncoder {
 public:
  explicit CameraEncoder(const EncoderConfig& cfg) : cfg_(cfg) {
    validate(cfg_);
    nn::WeightGenerator gen(cfg_.seed);
    const std::size_t c0 = cfg_.input_channels * cfg_.unshuffle_factor * cfg_.unshuffle_factor;
    conv_in_ = nn::Conv2d::init(c0, cfg_.channels[0], 3, 1, 1, gen, cfg_.bias_init);
    std::size_t prev = cfg_.channels[0];
    for (std::size_t s = 0; s < kScales; ++s) {
      const std::size_t ch = cfg_.channels[s];
      EncoderScale& sc = scales_[s];
      sc.has_down = s > 0;
      if (sc.has_down) {
        sc.down = nn::ResnetBlock::init(prev, ch, 2, gen, cfg_.bias_init);
        sc.down_attention =
            nn::TemporalAttention::init(ch, cfg_.heads, cfg_.mlp_ratio, cfg_.use_pos_emb, gen, cfg_.bias_init);
      }
      sc.res = nn::ResnetBlock::init(ch, ch, 1, gen, cfg_.bias_init);
      sc.res_attention =
          nn::TemporalAttention::init(ch, cfg_.heads, cfg_.mlp_ratio, cfg_.use_pos_emb, gen, cfg_.bias_init);
      prev = ch;
    }
  }

  [[nodiscard]] const EncoderConfig& config() const { return cfg_; }
  [[nodiscard]] const nn::Conv2d& input_conv() const { return conv_in_; }
  [[nodiscard]] const std::array<EncoderScale, kScales>& scales() const { return scales_; }

  /// Accepts (n, 6, h, w) (treated as b = 1) or (b, n, 6, h, w).
  [[nodiscard]] MultiScaleCameraFeatures forward(const Tensor& plucker) const {
    Tensor x = plucker.rank() == 4 ? plucker.reshaped(prepend_one(plucker.shape())) : plucker;
    if (x.rank() != 5 || x.dim(2) != cfg_.input_channels) {
      throw Error(Errc::ShapeMismatch, "encoder expects (b, n, " + std::to_string(cfg_.input_channels) +
                                           ", h, w), got " + to_string(plucker.shape()));
    }
    const std::size_t b = x.dim(0), n = x.dim(1);
    shape_schedule(cfg_, b, n, x.dim(3), x.dim(4));  // divisibility check

    MultiScaleCameraFeatures out;
    x = pixel_unshuffle(x, cfg_.unshuffle_factor);
    out.stage_shapes[0] = x.shape();

    x = run_conv(conv_in_, x, b, n);
    out.stage_shapes[1] = x.shape();

    for (std::size_t s = 0; s < kScales; ++s) {
      const EncoderScale& sc = scales_[s];
      if (sc.has_down) {
        x = run_block(sc.down, x, b, n);
        x = run_attention(sc.down_attention, x);
      }
      x = run_block(sc.res, x, b, n);
      x = run_attention(sc.res_attention, x);
      out.stage_shapes[2 + s] = x.shape();
      out.scales[s] = x;
    }
    return out;
  }

 private:
  static Shape prepend_one(const Shape& s) {
    Shape out{1};
    out.insert(out.end(), s.begin(), s.end());
    return out;
  }

  static Tensor frames_view(Tensor x) {
    const Shape s = x.shape();
    return std::move(x).reshaped({s[0] * s[1], s[2], s[3], s[4]});
  }

  static Tensor batch_view(Tensor x, std::size_t b, std::size_t n) {
    const Shape s = x.shape();
    return std::move(x).reshaped({b, n, s[1], s[2], s[3]});
  }

  static Tensor run_conv(const nn::Conv2d& conv, const Tensor& x, std::size_t b, std::size_t n) {
    return batch_view(conv.forward(frames_view(x)), b, n);
  }

  static Tensor run_block(const nn::ResnetBlock& block, const Tensor& x, std::size_t b, std::size_t n) {
    return batch_view(block.forward(frames_view(x)), b, n);
  }

  static Tensor run_attention(const nn::TemporalAttention& attn, const Tensor& x) {
    const Tensor tokens = attn.forward(to_temporal_tokens(x));
    return from_temporal_tokens(tokens, x.dim(0), x.dim(3), x.dim(4));
  }

  EncoderConfig cfg_;
  nn::Conv2d conv_in_;
  std::array<EncoderScale, kScales> scales_;
};

/// Camera feature injection: Linear(z + c) applied per position over the
/// channel axis of (b, n, c, h, w) feature maps.
inline Tensor fuse(const Tensor& z, const Tensor& c, const nn::Linear& linear) {
  if (z.shape() != c.shape()) {
    throw Error(Errc::ShapeMismatch, "latent " + to_string(z.shape()) + " and camera " + to_string(c.shape()) +
                                         " features differ in shape");
  }
  if (z.rank() != 5) throw Error(Errc::ShapeMismatch, "fuse expects (b, n, c, h, w) feature maps");
  const std::size_t ch = z.dim(2);
  if (linear.in != ch || linear.out != ch) {
    throw Error(Errc::ShapeMismatch, "fusion layer must map " + std::to_string(ch) + " channels to themselves");
  }
  const std::size_t frames = z.dim(0) * z.dim(1);
  const std::size_t hw = z.dim(3) * z.dim(4);

  std::vector<float> sum(z.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = z[i] + c[i];

  Tensor out(z.shape());
  for (std::size_t f = 0; f < frames; ++f) {
    float* dst = out.data().data() + f * ch * hw;
    for (std::size_t o = 0; o < ch; ++o) std::fill_n(dst + o * hw, hw, linear.bias[o]);
    nn::gemm(false, false, ch, hw, ch, 1.0f, linear.weight.data(), ch, sum.data() + f * ch * hw, hw, 1.0f, dst, hw);
  }
  return out;
}

}  // namespace raytraj::encoder
