#include "clric/autograd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "clric/error.hpp"

namespace clric::ag {

namespace {

using detail::Node;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), ErrorKind::kConfiguration,
          std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
}

// Builds the result node and wires up a backward closure when any input
// is trainable and recording is on.
Tensor make_result(Shape shape, std::vector<float> values, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->is_leaf = false;
  bool needs = false;
  for (const auto& t : inputs) needs = needs || t.requires_grad();
  if (needs && grad_mode_enabled()) {
    node->requires_grad = true;
    for (auto& t : inputs) node->parents.push_back(t.node_ptr());
    node->backward = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

// Returns the parent's gradient buffer when it wants one, else nullptr.
std::vector<float>* grad_of(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad ? &p.grad_buffer() : nullptr;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<float> out(a.numel());
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto* g = grad_of(self, k)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

Tensor scale(const Tensor& x, float factor) {
  std::vector<float> out(x.numel());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * factor;
  return make_result(x.shape(), std::move(out), {x}, [factor](Node& self) {
    auto& g = *grad_of(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Tensor relu(const Tensor& x) {
  std::vector<float> out(x.numel());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > 0.0f ? xv[i] : 0.0f;
  return make_result(x.shape(), std::move(out), {x}, [](Node& self) {
    auto& g = *grad_of(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (self.values[i] > 0.0f) g[i] += self.grad[i];
    }
  });
}

Tensor exp(const Tensor& x) {
  std::vector<float> out(x.numel());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(xv[i]);
  return make_result(x.shape(), std::move(out), {x}, [](Node& self) {
    auto& g = *grad_of(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * self.values[i];
  });
}

Tensor clamp(const Tensor& x, float lo, float hi) {
  require(lo <= hi, ErrorKind::kConfiguration, "clamp: lo > hi");
  std::vector<float> out(x.numel());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] < lo ? lo : (xv[i] > hi ? hi : xv[i]);
  return make_result(x.shape(), std::move(out), {x}, [lo, hi](Node& self) {
    Node& parent = *self.parents[0];
    auto& g = parent.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const float v = parent.values[i];
      if (v >= lo && v <= hi) g[i] += self.grad[i];
    }
  });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (float v : x.values()) acc += v;
  return make_result({1}, {static_cast<float>(acc)}, {x}, [](Node& self) {
    auto& g = *grad_of(self, 0);
    const float up = self.grad[0];
    for (auto& gi : g) gi += up;
  });
}

Tensor mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  auto av = a.values(), bv = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = static_cast<double>(av[i]) - bv[i];
    acc += d * d;
  }
  const double n = static_cast<double>(av.size());
  return make_result({1}, {static_cast<float>(acc / n)}, {a, b}, [n](Node& self) {
    const Node& pa = *self.parents[0];
    const Node& pb = *self.parents[1];
    const double up = self.grad[0];
    for (std::size_t k = 0; k < 2; ++k) {
      auto* g = grad_of(self, k);
      if (!g) continue;
      const double sign = k == 0 ? 1.0 : -1.0;
      for (std::size_t i = 0; i < g->size(); ++i) {
        const double d = static_cast<double>(pa.values[i]) - pb.values[i];
        (*g)[i] += static_cast<float>(sign * 2.0 * d / n * up);
      }
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  require(element_count(shape) == x.numel(), ErrorKind::kConfiguration,
          "reshape: " + shape_string(x.shape()) + " -> " + shape_string(shape));
  std::vector<float> out(x.values().begin(), x.values().end());
  return make_result(std::move(shape), std::move(out), {x}, [](Node& self) {
    auto& g = *grad_of(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor round_ste(const Tensor& x) {
  std::vector<float> out(x.numel());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::round(xv[i]);
  return make_result(x.shape(), std::move(out), {x}, [](Node& self) {
    auto& g = *grad_of(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require(input.rank() == 3 && weight.rank() == 4 && bias.rank() == 1, ErrorKind::kConfiguration,
          "conv2d expects input (C,H,W), weight (Co,Ci,k,k), bias (Co)");
  const int ci = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int co = weight.dim(0), k = weight.dim(2);
  require(weight.dim(1) == ci, ErrorKind::kConfiguration,
          "conv2d: weight expects " + std::to_string(weight.dim(1)) + " input channels, got " + std::to_string(ci));
  require(weight.dim(3) == k && (k == 1 || k == 3), ErrorKind::kConfiguration, "conv2d: kernel must be 1x1 or 3x3");
  require(bias.dim(0) == co, ErrorKind::kConfiguration, "conv2d: bias length must equal output channels");

  const int pad = k / 2;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<float> out(static_cast<std::size_t>(co) * plane);
  const float* in = input.values().data();
  const float* wt = weight.values().data();
  const float* bs = bias.values().data();

  for (int o = 0; o < co; ++o) {
    float* dst = out.data() + o * plane;
    std::fill(dst, dst + plane, bs[o]);
    for (int c = 0; c < ci; ++c) {
      const float* src = in + c * plane;
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const float wv = wt[((o * ci + c) * k + ky) * k + kx];
          const int dy = ky - pad, dx = kx - pad;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          for (int y = std::max(0, -dy); y < std::min(h, h - dy); ++y) {
            float* drow = dst + static_cast<std::size_t>(y) * w;
            const float* srow = src + static_cast<std::size_t>(y + dy) * w + dx;
            for (int x = x0; x < x1; ++x) drow[x] += wv * srow[x];
          }
        }
      }
    }
  }

  return make_result({co, h, w}, std::move(out), {input, weight, bias},
                     [ci, co, h, w, k, pad, plane](Node& self) {
    const Node& pin = *self.parents[0];
    const Node& pw = *self.parents[1];
    const float* up = self.grad.data();
    if (auto* gb = grad_of(self, 2)) {
      for (int o = 0; o < co; ++o) {
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc += up[o * plane + i];
        (*gb)[o] += static_cast<float>(acc);
      }
    }
    auto* gw = grad_of(self, 1);
    auto* gi = grad_of(self, 0);
    for (int o = 0; o < co; ++o) {
      const float* urow0 = up + o * plane;
      for (int c = 0; c < ci; ++c) {
        const float* src = pin.values.data() + c * plane;
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            const std::size_t widx = ((static_cast<std::size_t>(o) * ci + c) * k + ky) * k + kx;
            const float wv = pw.values[widx];
            const int dy = ky - pad, dx = kx - pad;
            const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
            float wacc = 0.0f;
            for (int y = std::max(0, -dy); y < std::min(h, h - dy); ++y) {
              const float* urow = urow0 + static_cast<std::size_t>(y) * w;
              const std::size_t soff = static_cast<std::size_t>(y + dy) * w + dx;
              if (gw) {
                const float* srow = src + soff;
                for (int x = x0; x < x1; ++x) wacc += urow[x] * srow[x];
              }
              if (gi) {
                float* grow = gi->data() + c * plane + soff;
                for (int x = x0; x < x1; ++x) grow[x] += wv * urow[x];
              }
            }
            if (gw) (*gw)[widx] += wacc;
          }
        }
      }
    }
  });
}

Tensor conv_transpose2x(const Tensor& input, const Tensor& kernel, int out_h, int out_w) {
  require(kernel.rank() == 2 && kernel.dim(0) == 8 && kernel.dim(1) == 8, ErrorKind::kConfiguration,
          "conv_transpose2x: kernel must be 8x8, got " + shape_string(kernel.shape()));
  require(input.rank() == 3 && input.dim(0) == 1, ErrorKind::kConfiguration,
          "conv_transpose2x: input must be (1,H,W), got " + shape_string(input.shape()));
  const int h = input.dim(1), w = input.dim(2);
  if (out_h == 0) out_h = 2 * h;
  if (out_w == 0) out_w = 2 * w;
  require(out_h >= 1 && out_h <= 2 * h && out_w >= 1 && out_w <= 2 * w, ErrorKind::kConfiguration,
          "conv_transpose2x: output extents out of range");

  // Per output row/column: the four contributing input indices (clamped) and
  // the kernel taps they use.
  struct Taps {
    int index[4];
    int tap[4];
  };
  auto make_taps = [](int n_out, int n_in) {
    std::vector<Taps> taps(n_out);
    for (int o = 0; o < n_out; ++o) {
      const int phase = o & 1, base = (o >> 1) - 2 + phase;
      for (int a = 0; a < 4; ++a) {
        const int m = base + a;
        taps[o].index[a] = std::clamp(m, 0, n_in - 1);
        taps[o].tap[a] = o - 2 * m + 3;
      }
    }
    return taps;
  };
  auto rows = make_taps(out_h, h);
  auto cols = make_taps(out_w, w);

  const float* in = input.values().data();
  const float* kv = kernel.values().data();
  std::vector<float> out(static_cast<std::size_t>(out_h) * out_w);
  for (int oy = 0; oy < out_h; ++oy) {
    const Taps& ry = rows[oy];
    for (int ox = 0; ox < out_w; ++ox) {
      const Taps& rx = cols[ox];
      float acc = 0.0f;
      for (int a = 0; a < 4; ++a) {
        const float* irow = in + static_cast<std::size_t>(ry.index[a]) * w;
        const float* krow = kv + ry.tap[a] * 8;
        for (int b = 0; b < 4; ++b) acc += irow[rx.index[b]] * krow[rx.tap[b]];
      }
      out[static_cast<std::size_t>(oy) * out_w + ox] = acc;
    }
  }

  return make_result({1, out_h, out_w}, std::move(out), {input, kernel},
                     [rows = std::move(rows), cols = std::move(cols), w, out_h, out_w](Node& self) {
    const Node& pin = *self.parents[0];
    const Node& pk = *self.parents[1];
    auto* gi = grad_of(self, 0);
    auto* gk = grad_of(self, 1);
    for (int oy = 0; oy < out_h; ++oy) {
      const Taps& ry = rows[oy];
      for (int ox = 0; ox < out_w; ++ox) {
        const Taps& rx = cols[ox];
        const float up = self.grad[static_cast<std::size_t>(oy) * out_w + ox];
        if (up == 0.0f) continue;
        for (int a = 0; a < 4; ++a) {
          const std::size_t irow = static_cast<std::size_t>(ry.index[a]) * w;
          const int krow = ry.tap[a] * 8;
          for (int b = 0; b < 4; ++b) {
            if (gi) (*gi)[irow + rx.index[b]] += up * pk.values[krow + rx.tap[b]];
            if (gk) (*gk)[krow + rx.tap[b]] += up * pin.values[irow + rx.index[b]];
          }
        }
      }
    }
  });
}

Tensor concat_channels(std::span<const Tensor> parts) {
  require(!parts.empty(), ErrorKind::kConfiguration, "concat_channels: no inputs");
  const int h = parts[0].dim(1), w = parts[0].dim(2);
  int channels = 0;
  for (const auto& p : parts) {
    require(p.rank() == 3 && p.dim(1) == h && p.dim(2) == w, ErrorKind::kConfiguration,
            "concat_channels: spatial extents differ");
    channels += p.dim(0);
  }
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(channels) * h * w);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return make_result({channels, h, w}, std::move(out), inputs, [](Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      const std::size_t n = self.parents[k]->values.size();
      if (auto* g = grad_of(self, k)) {
        for (std::size_t i = 0; i < n; ++i) (*g)[i] += self.grad[offset + i];
      }
      offset += n;
    }
  });
}

Tensor slice_channel(const Tensor& x, int index) {
  require(index >= 0 && index < x.dim(0), ErrorKind::kConfiguration, "slice_channel: index out of range");
  Shape shape = x.shape();
  shape[0] = 1;
  const std::size_t n = element_count(shape);
  const std::size_t offset = static_cast<std::size_t>(index) * n;
  std::vector<float> out(x.values().begin() + offset, x.values().begin() + offset + n);
  return make_result(std::move(shape), std::move(out), {x}, [offset, n](Node& self) {
    auto& g = *grad_of(self, 0);
    for (std::size_t i = 0; i < n; ++i) g[offset + i] += self.grad[i];
  });
}

Tensor gather_context(const Tensor& grid, std::span<const std::pair<int, int>> offsets) {
  require(grid.rank() == 3 && grid.dim(0) == 1, ErrorKind::kConfiguration, "gather_context: grid must be (1,h,w)");
  const int h = grid.dim(1), w = grid.dim(2);
  const int n_ctx = static_cast<int>(offsets.size());
  const std::size_t n = static_cast<std::size_t>(h) * w;
  // Source index per (context, position); -1 where the neighbour is outside.
  std::vector<std::ptrdiff_t> source(static_cast<std::size_t>(n_ctx) * n, -1);
  for (int j = 0; j < n_ctx; ++j) {
    const auto [dr, dc] = offsets[j];
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const int rr = r + dr, cc = c + dc;
        if (rr >= 0 && rr < h && cc >= 0 && cc < w) {
          source[j * n + static_cast<std::size_t>(r) * w + c] = static_cast<std::ptrdiff_t>(rr) * w + cc;
        }
      }
    }
  }
  std::vector<float> out(source.size(), 0.0f);
  auto gv = grid.values();
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source[i] >= 0) out[i] = gv[source[i]];
  }
  return make_result({n_ctx, 1, static_cast<int>(n)}, std::move(out), {grid},
                     [source = std::move(source)](Node& self) {
    auto& g = *grad_of(self, 0);
    for (std::size_t i = 0; i < source.size(); ++i) {
      if (source[i] >= 0) g[source[i]] += self.grad[i];
    }
  });
}

namespace {

constexpr double kProbabilityFloor = 1.0 / 65536.0;

struct LaplaceInterval {
  double p;
  double dp_dv;
  double dp_dmu;
  double dp_db;
};

// Mass of Laplace(mu, b) on [v - 1/2, v + 1/2] and its partial derivatives.
// Each branch is written to avoid cancellation in the tails.
LaplaceInterval laplace_interval(double v, double mu, double b) {
  const double lo = v - 0.5 - mu, hi = v + 0.5 - mu;
  const double e_lo = std::exp(-std::abs(lo) / b), e_hi = std::exp(-std::abs(hi) / b);
  double p;
  if (lo >= 0.0) {
    p = 0.5 * (e_lo - e_hi);
  } else if (hi <= 0.0) {
    p = 0.5 * (e_hi - e_lo);
  } else {
    p = 1.0 - 0.5 * e_lo - 0.5 * e_hi;
  }
  const double f_lo = e_lo / (2.0 * b), f_hi = e_hi / (2.0 * b);
  const double dp_dv = f_hi - f_lo;
  return {p, dp_dv, -dp_dv, -(hi * f_hi - lo * f_lo) / b};
}

}  // namespace

Tensor laplace_rate_bits(const Tensor& values, const Tensor& mu, const Tensor& b) {
  require_same_shape(values, mu, "laplace_rate_bits");
  require_same_shape(values, b, "laplace_rate_bits");
  const std::size_t n = values.numel();
  std::vector<float> out(n);
  auto vv = values.values(), mv = mu.values(), bv = b.values();
  for (std::size_t i = 0; i < n; ++i) {
    const double p = laplace_interval(vv[i], mv[i], bv[i]).p;
    out[i] = static_cast<float>(-std::log2(std::max(p, kProbabilityFloor)));
  }
  return make_result(values.shape(), std::move(out), {values, mu, b}, [](Node& self) {
    const Node& pv = *self.parents[0];
    const Node& pm = *self.parents[1];
    const Node& pb = *self.parents[2];
    auto* gv = grad_of(self, 0);
    auto* gm = grad_of(self, 1);
    auto* gb = grad_of(self, 2);
    for (std::size_t i = 0; i < self.values.size(); ++i) {
      const auto li = laplace_interval(pv.values[i], pm.values[i], pb.values[i]);
      if (li.p <= kProbabilityFloor) continue;
      const double dbits_dp = -1.0 / (li.p * std::numbers::ln2);
      const double up = self.grad[i] * dbits_dp;
      if (gv) (*gv)[i] += static_cast<float>(up * li.dp_dv);
      if (gm) (*gm)[i] += static_cast<float>(up * li.dp_dmu);
      if (gb) (*gb)[i] += static_cast<float>(up * li.dp_db);
    }
  });
}

}  // namespace clric::ag
