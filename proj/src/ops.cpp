// src/ops.cpp

// Copyright 2026  The avwws Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "avwws/ops.hpp"

#include <algorithm>
#include <cmath>

#include "avwws/error.hpp"

namespace avwws::ops {

using detail::Node;

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         to_string(t.shape()));
  }
}

// Gradient buffer of input i, or nullptr when that input is constant.
std::vector<double>* grad_of(Node& self, std::size_t i) {
  Node& in = *self.inputs[i];
  return in.requires_grad ? &in.grad : nullptr;
}

inline double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// C[M x N] += A[M x K] * B[K x N]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[M x K] += A[M x N] * B[K x N]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      c[i * k + p] += acc;
    }
  }
}

// C[K x N] += A[M x K]^T * B[M x N]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make_op("add", a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto* g = grad_of(self, k)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return make_op("sub", a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_op("mul", a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i] * bv[i];
    }
    if (auto* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i] * av[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * s;
  return make_op("scale", a.shape(), std::move(out), {a}, [s](Node& self) {
    auto& g = self.inputs[0]->grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * s;
  });
}

Tensor scale_by(const Tensor& a, const Tensor& s) {
  if (s.size() != 1) throw DimensionError("scale_by: scale must have one element, got " + to_string(s.shape()));
  const double sv = s[0];
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * sv;
  return make_op("scale_by", a.shape(), std::move(out), {a, s}, [](Node& self) {
    const auto& av = self.inputs[0]->value;
    const double sv = self.inputs[1]->value[0];
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i] * sv;
    }
    if (auto* g = grad_of(self, 1)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) acc += self.grad[i] * av[i];
      (*g)[0] += acc;
    }
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  const std::size_t d = x.shape().back();
  if (bias.size() != d) {
    throw DimensionError("add_bias: bias " + to_string(bias.shape()) + " does not match last axis of " +
                         to_string(x.shape()));
  }
  std::vector<double> out(x.size());
  auto xv = x.data();
  auto bv = bias.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + bv[i % d];
  return make_op("add_bias", x.shape(), std::move(out), {x, bias}, [d](Node& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i % d] += self.grad[i];
    }
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return make_op("relu", x.shape(), std::move(out), {x}, [](Node& self) {
    const auto& xv = self.inputs[0]->value;
    auto& g = self.inputs[0]->grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (xv[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(x[i]);
  return make_op("sigmoid", x.shape(), std::move(out), {x}, [](Node& self) {
    auto& g = self.inputs[0]->grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double y = self.value[i];
      g[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

Tensor swish(const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * sigmoid_scalar(x[i]);
  return make_op("swish", x.shape(), std::move(out), {x}, [](Node& self) {
    const auto& xv = self.inputs[0]->value;
    auto& g = self.inputs[0]->grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double s = sigmoid_scalar(xv[i]);
      g[i] += self.grad[i] * (s + xv[i] * s * (1.0 - s));
    }
  });
}

Tensor glu(const Tensor& x) {
  const std::size_t d2 = x.shape().back();
  if (d2 % 2 != 0) {
    throw DimensionError("glu: last axis must be even, got " + to_string(x.shape()));
  }
  const std::size_t d = d2 / 2;
  const std::size_t rows = x.size() / d2;
  Shape shape = x.shape();
  shape.back() = d;
  std::vector<double> out(rows * d);
  auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      out[r * d + j] = xv[r * d2 + j] * sigmoid_scalar(xv[r * d2 + d + j]);
    }
  }
  return make_op("glu", std::move(shape), std::move(out), {x}, [rows, d](Node& self) {
    const auto& xv = self.inputs[0]->value;
    auto& g = self.inputs[0]->grad;
    const std::size_t d2 = 2 * d;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        const double a = xv[r * d2 + j];
        const double s = sigmoid_scalar(xv[r * d2 + d + j]);
        const double up = self.grad[r * d + j];
        g[r * d2 + j] += up * s;
        g[r * d2 + d + j] += up * a * s * (1.0 - s);
      }
    }
  });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return make_op("sum", {1}, {acc}, {x}, [](Node& self) {
    auto& g = self.inputs[0]->grad;
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ, " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  return make_op("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    if (auto* g = grad_of(self, 0)) gemm_nt(self.grad.data(), bv.data(), g->data(), m, n, k);
    if (auto* g = grad_of(self, 1)) gemm_tn(av.data(), self.grad.data(), g->data(), m, k, n);
  });
}

Tensor transpose(const Tensor& a) {
  require_rank("transpose", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  auto av = a.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  }
  return make_op("transpose", {n, m}, std::move(out), {a}, [m, n](Node& self) {
    auto& g = self.inputs[0]->grad;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j * m + i];
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add_bias(matmul(x, w), b);
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for " + to_string(x.shape()));
  }
  const Shape& s = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = s[axis];
  std::vector<double> out(x.size());
  auto xv = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = xv[base];
      for (std::size_t j = 1; j < len; ++j) mx = std::max(mx, xv[base + j * inner]);
      double z = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        const double e = std::exp(xv[base + j * inner] - mx);
        out[base + j * inner] = e;
        z += e;
      }
      for (std::size_t j = 0; j < len; ++j) out[base + j * inner] /= z;
    }
  }
  return make_op("softmax", s, std::move(out), {x}, [outer, inner, len](Node& self) {
    auto& g = self.inputs[0]->grad;
    const auto& y = self.value;
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * len * inner + in;
        double dot = 0.0;
        for (std::size_t j = 0; j < len; ++j) dot += self.grad[base + j * inner] * y[base + j * inner];
        for (std::size_t j = 0; j < len; ++j) {
          const std::size_t idx = base + j * inner;
          g[idx] += y[idx] * (self.grad[idx] - dot);
        }
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (!(eps > 0.0)) throw ConfigError("layer_norm: eps must be positive");
  const std::size_t d = x.shape().back();
  if (gain.size() != d || bias.size() != d) {
    throw DimensionError("layer_norm: gain " + to_string(gain.shape()) + " / bias " +
                         to_string(bias.shape()) + " do not match last axis of " + to_string(x.shape()));
  }
  const std::size_t rows = x.size() / d;
  std::vector<double> out(x.size());
  // Normalized values and inverse std are kept for the backward pass.
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(rows);
  auto xv = x.data();
  auto gv = gain.data();
  auto bv = bias.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * is;
      xhat[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  return make_op("layer_norm", x.shape(), std::move(out), {x, gain, bias},
                 [d, rows, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
                   const auto& gv = self.inputs[1]->value;
                   auto* gx = grad_of(self, 0);
                   auto* gg = grad_of(self, 1);
                   auto* gb = grad_of(self, 2);
                   const double inv_d = 1.0 / static_cast<double>(d);
                   for (std::size_t r = 0; r < rows; ++r) {
                     const double* up = self.grad.data() + r * d;
                     const double* h = xhat.data() + r * d;
                     if (gg) {
                       for (std::size_t j = 0; j < d; ++j) (*gg)[j] += up[j] * h[j];
                     }
                     if (gb) {
                       for (std::size_t j = 0; j < d; ++j) (*gb)[j] += up[j];
                     }
                     if (gx) {
                       double s1 = 0.0, s2 = 0.0;
                       for (std::size_t j = 0; j < d; ++j) {
                         const double gh = up[j] * gv[j];
                         s1 += gh;
                         s2 += gh * h[j];
                       }
                       for (std::size_t j = 0; j < d; ++j) {
                         const double gh = up[j] * gv[j];
                         (*gx)[r * d + j] += inv_std[r] * (gh - inv_d * s1 - h[j] * inv_d * s2);
                       }
                     }
                   }
                 });
}

Tensor conv2d(const Tensor& x, const Tensor& kernels, std::pair<std::size_t, std::size_t> stride) {
  require_rank("conv2d", x, 3);
  require_rank("conv2d", kernels, 4);
  const auto [st, sf] = stride;
  if (st == 0 || sf == 0) throw ConfigError("conv2d: stride must be positive");
  const std::size_t t = x.dim(0), f = x.dim(1), cin = x.dim(2);
  const std::size_t kt = kernels.dim(0), kf = kernels.dim(1), cout = kernels.dim(3);
  if (kernels.dim(2) != cin) {
    throw DimensionError("conv2d: kernel " + to_string(kernels.shape()) + " input channels differ from " +
                         to_string(x.shape()));
  }
  if (kt > t || kf > f) {
    throw DimensionError("conv2d: kernel " + to_string(kernels.shape()) + " larger than input " +
                         to_string(x.shape()));
  }
  const std::size_t ot = (t - kt) / st + 1, of = (f - kf) / sf + 1;
  std::vector<double> out(ot * of * cout, 0.0);
  auto xv = x.data();
  auto kv = kernels.data();
  for (std::size_t i = 0; i < ot; ++i) {
    for (std::size_t j = 0; j < of; ++j) {
      double* o = out.data() + (i * of + j) * cout;
      for (std::size_t a = 0; a < kt; ++a) {
        for (std::size_t b = 0; b < kf; ++b) {
          const double* xin = xv.data() + ((i * st + a) * f + (j * sf + b)) * cin;
          const double* kk = kv.data() + (a * kf + b) * cin * cout;
          for (std::size_t c = 0; c < cin; ++c) {
            const double xc = xin[c];
            const double* krow = kk + c * cout;
            for (std::size_t co = 0; co < cout; ++co) o[co] += xc * krow[co];
          }
        }
      }
    }
  }
  return make_op("conv2d", {ot, of, cout}, std::move(out), {x, kernels},
                 [=](Node& self) {
                   const auto& xv = self.inputs[0]->value;
                   const auto& kv = self.inputs[1]->value;
                   auto* gx = grad_of(self, 0);
                   auto* gk = grad_of(self, 1);
                   for (std::size_t i = 0; i < ot; ++i) {
                     for (std::size_t j = 0; j < of; ++j) {
                       const double* up = self.grad.data() + (i * of + j) * cout;
                       for (std::size_t a = 0; a < kt; ++a) {
                         for (std::size_t b = 0; b < kf; ++b) {
                           const std::size_t xoff = ((i * st + a) * f + (j * sf + b)) * cin;
                           const std::size_t koff = (a * kf + b) * cin * cout;
                           for (std::size_t c = 0; c < cin; ++c) {
                             const double* krow = kv.data() + koff + c * cout;
                             if (gx) {
                               double acc = 0.0;
                               for (std::size_t co = 0; co < cout; ++co) acc += up[co] * krow[co];
                               (*gx)[xoff + c] += acc;
                             }
                             if (gk) {
                               const double xc = xv[xoff + c];
                               double* gkrow = gk->data() + koff + c * cout;
                               for (std::size_t co = 0; co < cout; ++co) gkrow[co] += xc * up[co];
                             }
                           }
                         }
                       }
                     }
                   }
                 });
}

Tensor depthwise_conv1d(const Tensor& x, const Tensor& kernel) {
  require_rank("depthwise_conv1d", x, 2);
  require_rank("depthwise_conv1d", kernel, 2);
  const std::size_t t = x.dim(0), d = x.dim(1), k = kernel.dim(0);
  if (kernel.dim(1) != d) {
    throw DimensionError("depthwise_conv1d: kernel " + to_string(kernel.shape()) + " vs input " +
                         to_string(x.shape()));
  }
  if (k % 2 == 0) throw ConfigError("depthwise_conv1d: kernel length must be odd");
  const long half = static_cast<long>(k / 2);
  std::vector<double> out(t * d, 0.0);
  auto xv = x.data();
  auto kv = kernel.data();
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      const long src = static_cast<long>(i) + static_cast<long>(a) - half;
      if (src < 0 || src >= static_cast<long>(t)) continue;
      const double* xr = xv.data() + static_cast<std::size_t>(src) * d;
      const double* kr = kv.data() + a * d;
      for (std::size_t c = 0; c < d; ++c) out[i * d + c] += xr[c] * kr[c];
    }
  }
  return make_op("depthwise_conv1d", {t, d}, std::move(out), {x, kernel}, [=](Node& self) {
    const auto& xv = self.inputs[0]->value;
    const auto& kv = self.inputs[1]->value;
    auto* gx = grad_of(self, 0);
    auto* gk = grad_of(self, 1);
    for (std::size_t i = 0; i < t; ++i) {
      const double* up = self.grad.data() + i * d;
      for (std::size_t a = 0; a < k; ++a) {
        const long src = static_cast<long>(i) + static_cast<long>(a) - half;
        if (src < 0 || src >= static_cast<long>(t)) continue;
        const std::size_t s = static_cast<std::size_t>(src);
        for (std::size_t c = 0; c < d; ++c) {
          if (gx) (*gx)[s * d + c] += up[c] * kv[a * d + c];
          if (gk) (*gk)[a * d + c] += up[c] * xv[s * d + c];
        }
      }
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return make_op("reshape", std::move(shape), std::move(out), {x}, [](Node& self) {
    auto& g = self.inputs[0]->grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  if (count == 0 || begin + count > x.dim(0)) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + to_string(x.shape()));
  }
  const std::size_t row = x.size() / x.dim(0);
  Shape shape = x.shape();
  shape[0] = count;
  auto xv = x.data();
  std::vector<double> out(xv.begin() + begin * row, xv.begin() + (begin + count) * row);
  return make_op("slice_rows", std::move(shape), std::move(out), {x}, [begin, row](Node& self) {
    auto& g = self.inputs[0]->grad;
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[begin * row + i] += self.grad[i];
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  std::size_t rows = 0;
  std::vector<double> out;
  for (const Tensor& p : parts) {
    if (Shape(p.shape().begin() + 1, p.shape().end()) != tail) {
      throw DimensionError("concat_rows: " + to_string(p.shape()) + " incompatible with " +
                           to_string(parts[0].shape()));
    }
    rows += p.dim(0);
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  Shape shape = parts[0].shape();
  shape[0] = rows;
  return make_op("concat_rows", std::move(shape), std::move(out), parts, [](Node& self) {
    std::size_t off = 0;
    for (auto& in : self.inputs) {
      if (in->requires_grad) {
        for (std::size_t i = 0; i < in->value.size(); ++i) in->grad[i] += self.grad[off + i];
      }
      off += in->value.size();
    }
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  require_rank("slice_cols", x, 2);
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (count == 0 || begin + count > n) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + to_string(x.shape()));
  }
  std::vector<double> out(m * count);
  auto xv = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(xv.begin() + i * n + begin, count, out.begin() + i * count);
  }
  return make_op("slice_cols", {m, count}, std::move(out), {x}, [m, n, begin, count](Node& self) {
    auto& g = self.inputs[0]->grad;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < count; ++j) g[i * n + begin + j] += self.grad[i * count + j];
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t m = parts[0].dim(0);
  std::size_t n = 0;
  for (const Tensor& p : parts) {
    require_rank("concat_cols", p, 2);
    if (p.dim(0) != m) {
      throw DimensionError("concat_cols: " + to_string(p.shape()) + " incompatible with " +
                           to_string(parts[0].shape()));
    }
    n += p.dim(1);
  }
  std::vector<double> out(m * n);
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    const std::size_t w = p.dim(1);
    auto pv = p.data();
    for (std::size_t i = 0; i < m; ++i) std::copy_n(pv.begin() + i * w, w, out.begin() + i * n + off);
    off += w;
  }
  return make_op("concat_cols", {m, n}, std::move(out), parts, [m, n](Node& self) {
    std::size_t off = 0;
    for (auto& in : self.inputs) {
      const std::size_t w = in->shape[1];
      if (in->requires_grad) {
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < w; ++j) in->grad[i * w + j] += self.grad[i * n + off + j];
        }
      }
      off += w;
    }
  });
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& index) {
  if (index.empty()) throw DimensionError("gather_rows: empty index");
  const std::size_t rows = x.dim(0);
  const std::size_t row = x.size() / rows;
  std::vector<double> out(index.size() * row);
  auto xv = x.data();
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= rows) {
      throw DimensionError("gather_rows: index " + std::to_string(index[i]) + " out of range for " +
                           to_string(x.shape()));
    }
    std::copy_n(xv.begin() + index[i] * row, row, out.begin() + i * row);
  }
  Shape shape = x.shape();
  shape[0] = index.size();
  return make_op("gather_rows", std::move(shape), std::move(out), {x}, [index, row](Node& self) {
    auto& g = self.inputs[0]->grad;
    for (std::size_t i = 0; i < index.size(); ++i) {
      for (std::size_t j = 0; j < row; ++j) g[index[i] * row + j] += self.grad[i * row + j];
    }
  });
}

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                            const Tensor& w_out, const Tensor& b_out) {
  require_rank("multi_head_attention", q, 2);
  require_same_shape("multi_head_attention", q, k);
  require_same_shape("multi_head_attention", q, v);
  const std::size_t d = q.dim(1);
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("multi_head_attention: width " + std::to_string(d) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  const std::size_t dk = d / heads;
  const double scale_factor = 1.0 / std::sqrt(static_cast<double>(dk));
  std::vector<Tensor> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Tensor qh = heads == 1 ? q : slice_cols(q, h * dk, dk);
    Tensor kh = heads == 1 ? k : slice_cols(k, h * dk, dk);
    Tensor vh = heads == 1 ? v : slice_cols(v, h * dk, dk);
    Tensor scores = scale(matmul(qh, transpose(kh)), scale_factor);
    outs.push_back(matmul(softmax(scores, 1), vh));
  }
  Tensor joined = heads == 1 ? outs[0] : concat_cols(outs);
  return linear(joined, w_out, b_out);
}

}  // namespace avwws::ops
