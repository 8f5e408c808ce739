// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "pfmg/ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace pfmg {
namespace {

template <Real S>
Tensor<S> finish(Tape<S>* tape, Shape shape, std::vector<S> data,
                 std::vector<const Tensor<S>*> inputs, BackwardFn<S> backward) {
  if (!tape) return Tensor<S>(std::move(shape), std::move(data));
  return tape->record(std::move(shape), std::move(data), std::move(inputs), std::move(backward));
}

// Extents before, along and after an axis.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

// Iteration plan for a broadcast elementwise op, padded to rank 4.
struct Broadcast {
  Shape out;
  std::array<std::size_t, kMaxRank> ext{1, 1, 1, 1};
  std::array<std::size_t, kMaxRank> sx{0, 0, 0, 0};
  std::array<std::size_t, kMaxRank> sy{0, 0, 0, 0};

  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::size_t o = 0;
    for (std::size_t i0 = 0; i0 < ext[0]; ++i0) {
      for (std::size_t i1 = 0; i1 < ext[1]; ++i1) {
        for (std::size_t i2 = 0; i2 < ext[2]; ++i2) {
          std::size_t bx = i0 * sx[0] + i1 * sx[1] + i2 * sx[2];
          std::size_t by = i0 * sy[0] + i1 * sy[1] + i2 * sy[2];
          for (std::size_t i3 = 0; i3 < ext[3]; ++i3, ++o) {
            fn(o, bx + i3 * sx[3], by + i3 * sy[3]);
          }
        }
      }
    }
  }
};

Broadcast plan_broadcast(const Shape& x, const Shape& y) {
  if (x.size() != y.size()) {
    throw DimensionError("broadcast needs equal ranks: " + to_string(x) + " vs " + to_string(y));
  }
  Broadcast b;
  const std::size_t pad = kMaxRank - x.size();
  std::size_t stride_x = 1;
  std::size_t stride_y = 1;
  b.out.resize(x.size());
  for (std::size_t k = x.size(); k-- > 0;) {
    if (x[k] != y[k] && x[k] != 1 && y[k] != 1) {
      throw DimensionError("cannot broadcast " + to_string(x) + " with " + to_string(y));
    }
    b.out[k] = std::max(x[k], y[k]);
    b.ext[pad + k] = b.out[k];
    b.sx[pad + k] = x[k] == 1 ? 0 : stride_x;
    b.sy[pad + k] = y[k] == 1 ? 0 : stride_y;
    stride_x *= x[k];
    stride_y *= y[k];
  }
  return b;
}

}  // namespace

template <Real S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0)) {
    throw DimensionError("matmul of " + to_string(a.shape()) + " and " + to_string(b.shape()));
  }
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  std::vector<S> out(m * n, S(0));
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    S* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const S aip = A[i * k + p];
      const S* brow = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  Tape<S>* tape = common_tape({&a, &b});
  return finish<S>(tape, {m, n}, std::move(out), {&a, &b},
                   [a = a.detach(), b = b.detach(), m, k, n](std::span<const S> g,
                                                             std::span<std::vector<S>* const> gin) {
                     auto A = a.data();
                     auto B = b.data();
                     if (gin[0]) {
                       S* ga = gin[0]->data();
                       for (std::size_t i = 0; i < m; ++i) {
                         for (std::size_t p = 0; p < k; ++p) {
                           S acc = 0;
                           const S* brow = B.data() + p * n;
                           const S* grow = g.data() + i * n;
                           for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                           ga[i * k + p] += acc;
                         }
                       }
                     }
                     if (gin[1]) {
                       S* gb = gin[1]->data();
                       for (std::size_t i = 0; i < m; ++i) {
                         const S* grow = g.data() + i * n;
                         for (std::size_t p = 0; p < k; ++p) {
                           const S aip = A[i * k + p];
                           S* gbrow = gb + p * n;
                           for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
                         }
                       }
                     }
                   });
}

template <Real S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& kernel) {
  if (kernel.rank() != 4 || kernel.extent(0) != kernel.extent(1)) {
    throw ConfigError("conv2d kernel must be k x k x c_in x c_out, got " +
                      to_string(kernel.shape()));
  }
  if (kernel.extent(0) % 2 == 0) {
    throw ConfigError("conv2d kernel size must be odd, got " + std::to_string(kernel.extent(0)));
  }
  if (x.rank() != 4 || x.extent(3) != kernel.extent(2)) {
    throw DimensionError("conv2d input " + to_string(x.shape()) + " does not match kernel " +
                         to_string(kernel.shape()));
  }
  const std::size_t T = x.extent(0), h = x.extent(1), w = x.extent(2), ci = x.extent(3);
  const std::size_t k = kernel.extent(0), co = kernel.extent(3);
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);

  // Visits every (output cell, kernel tap) pair whose input cell is in range.
  auto taps = [=](auto&& fn) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) {
          const std::size_t out_cell = (t * h + y) * w + xx;
          for (std::size_t dy = 0; dy < k; ++dy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y + dy) - pad;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t dx = 0; dx < k; ++dx) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(xx + dx) - pad;
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              const std::size_t in_cell = (t * h + static_cast<std::size_t>(iy)) * w +
                                          static_cast<std::size_t>(ix);
              fn(out_cell * co, in_cell * ci, (dy * k + dx) * ci * co);
            }
          }
        }
      }
    }
  };

  std::vector<S> out(T * h * w * co, S(0));
  auto X = x.data();
  auto K = kernel.data();
  taps([&](std::size_t o, std::size_t in, std::size_t kk) {
    S* dst = out.data() + o;
    for (std::size_t c = 0; c < ci; ++c) {
      const S xv = X[in + c];
      const S* krow = K.data() + kk + c * co;
      for (std::size_t j = 0; j < co; ++j) dst[j] += xv * krow[j];
    }
  });

  Tape<S>* tape = common_tape({&x, &kernel});
  return finish<S>(tape, {T, h, w, co}, std::move(out), {&x, &kernel},
                   [x = x.detach(), kernel = kernel.detach(), taps, ci, co](
                       std::span<const S> g, std::span<std::vector<S>* const> gin) {
                     auto X = x.data();
                     auto K = kernel.data();
                     S* gx = gin[0] ? gin[0]->data() : nullptr;
                     S* gk = gin[1] ? gin[1]->data() : nullptr;
                     taps([&](std::size_t o, std::size_t in, std::size_t kk) {
                       const S* go = g.data() + o;
                       for (std::size_t c = 0; c < ci; ++c) {
                         const S* krow = K.data() + kk + c * co;
                         if (gx) {
                           S acc = 0;
                           for (std::size_t j = 0; j < co; ++j) acc += go[j] * krow[j];
                           gx[in + c] += acc;
                         }
                         if (gk) {
                           const S xv = X[in + c];
                           S* gkrow = gk + kk + c * co;
                           for (std::size_t j = 0; j < co; ++j) gkrow[j] += xv * go[j];
                         }
                       }
                     });
                   });
}

template <Real S>
Tensor<S> apply_activation(Activation kind, const Tensor<S>& x, std::size_t axis) {
  auto X = x.data();
  std::vector<S> out(X.size());
  Tape<S>* tape = common_tape({&x});

  if (kind == Activation::softmax) {
    if (axis >= x.rank()) {
      throw DimensionError("softmax axis " + std::to_string(axis) + " invalid for shape " +
                           to_string(x.shape()));
    }
    const AxisSplit s = split_at(x.shape(), axis);
    for (std::size_t a = 0; a < s.outer; ++a) {
      for (std::size_t b = 0; b < s.inner; ++b) {
        const std::size_t base = a * s.extent * s.inner + b;
        S peak = X[base];
        for (std::size_t i = 1; i < s.extent; ++i) peak = std::max(peak, X[base + i * s.inner]);
        S total = 0;
        for (std::size_t i = 0; i < s.extent; ++i) {
          const S e = std::exp(X[base + i * s.inner] - peak);
          out[base + i * s.inner] = e;
          total += e;
        }
        for (std::size_t i = 0; i < s.extent; ++i) out[base + i * s.inner] /= total;
      }
    }
    if (!tape) return Tensor<S>(x.shape(), std::move(out));
    auto y = std::make_shared<const std::vector<S>>(out);
    return tape->record(x.shape(), std::move(out), {&x},
                        [y, s](std::span<const S> g, std::span<std::vector<S>* const> gin) {
                          if (!gin[0]) return;
                          S* gx = gin[0]->data();
                          const auto& Y = *y;
                          for (std::size_t a = 0; a < s.outer; ++a) {
                            for (std::size_t b = 0; b < s.inner; ++b) {
                              const std::size_t base = a * s.extent * s.inner + b;
                              S dot = 0;
                              for (std::size_t i = 0; i < s.extent; ++i) {
                                dot += g[base + i * s.inner] * Y[base + i * s.inner];
                              }
                              for (std::size_t i = 0; i < s.extent; ++i) {
                                const std::size_t j = base + i * s.inner;
                                gx[j] += Y[j] * (g[j] - dot);
                              }
                            }
                          }
                        });
  }

  for (std::size_t i = 0; i < X.size(); ++i) {
    switch (kind) {
      case Activation::relu: out[i] = X[i] > S(0) ? X[i] : S(0); break;
      case Activation::sigmoid: out[i] = S(1) / (S(1) + std::exp(-X[i])); break;
      case Activation::tanh: out[i] = std::tanh(X[i]); break;
      case Activation::softmax: break;
    }
  }
  if (!tape) return Tensor<S>(x.shape(), std::move(out));
  auto y = std::make_shared<const std::vector<S>>(out);
  return tape->record(x.shape(), std::move(out), {&x},
                      [y, kind](std::span<const S> g, std::span<std::vector<S>* const> gin) {
                        if (!gin[0]) return;
                        S* gx = gin[0]->data();
                        const auto& Y = *y;
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          switch (kind) {
                            case Activation::relu: gx[i] += Y[i] > S(0) ? g[i] : S(0); break;
                            case Activation::sigmoid: gx[i] += g[i] * Y[i] * (S(1) - Y[i]); break;
                            case Activation::tanh: gx[i] += g[i] * (S(1) - Y[i] * Y[i]); break;
                            case Activation::softmax: break;
                          }
                        }
                      });
}

template <Real S>
Tensor<S> reduce(Reduction kind, const Tensor<S>& x) {
  auto X = x.data();
  Tape<S>* tape = common_tape({&x});

  if (kind == Reduction::avg_spatial) {
    if (x.rank() != 4) {
      throw DimensionError("avg_spatial needs T x h x w x c, got " + to_string(x.shape()));
    }
    const std::size_t T = x.extent(0), n = x.extent(1) * x.extent(2), c = x.extent(3);
    const S inv = S(1) / static_cast<S>(n);
    std::vector<S> out(T * c, S(0));
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t p = 0; p < n; ++p) {
        const S* src = X.data() + (t * n + p) * c;
        for (std::size_t j = 0; j < c; ++j) out[t * c + j] += src[j];
      }
      for (std::size_t j = 0; j < c; ++j) out[t * c + j] *= inv;
    }
    return finish<S>(tape, {T, c}, std::move(out), {&x},
                     [T, n, c, inv](std::span<const S> g, std::span<std::vector<S>* const> gin) {
                       if (!gin[0]) return;
                       S* gx = gin[0]->data();
                       for (std::size_t t = 0; t < T; ++t) {
                         for (std::size_t p = 0; p < n; ++p) {
                           for (std::size_t j = 0; j < c; ++j) {
                             gx[(t * n + p) * c + j] += g[t * c + j] * inv;
                           }
                         }
                       }
                     });
  }

  if (x.rank() != 2) {
    throw DimensionError("time reduction needs T x d, got " + to_string(x.shape()));
  }
  const std::size_t T = x.extent(0), d = x.extent(1);
  std::vector<S> out(d);
  if (kind == Reduction::sum_time) {
    std::fill(out.begin(), out.end(), S(0));
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < d; ++j) out[j] += X[t * d + j];
    }
    return finish<S>(tape, {1, d}, std::move(out), {&x},
                     [T, d](std::span<const S> g, std::span<std::vector<S>* const> gin) {
                       if (!gin[0]) return;
                       S* gx = gin[0]->data();
                       for (std::size_t t = 0; t < T; ++t) {
                         for (std::size_t j = 0; j < d; ++j) gx[t * d + j] += g[j];
                       }
                     });
  }

  std::vector<std::size_t> argmax(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    S best = X[j];
    for (std::size_t t = 1; t < T; ++t) {
      if (X[t * d + j] > best) {
        best = X[t * d + j];
        argmax[j] = t;
      }
    }
    out[j] = best;
  }
  return finish<S>(tape, {1, d}, std::move(out), {&x},
                   [argmax = std::move(argmax), d](std::span<const S> g,
                                                   std::span<std::vector<S>* const> gin) {
                     if (!gin[0]) return;
                     S* gx = gin[0]->data();
                     for (std::size_t j = 0; j < d; ++j) gx[argmax[j] * d + j] += g[j];
                   });
}

template <Real S>
Tensor<S> combine(Combination kind, const Tensor<S>& x, const Tensor<S>& y, std::size_t axis) {
  Tape<S>* tape = common_tape({&x, &y});
  auto X = x.data();
  auto Y = y.data();

  if (kind == Combination::concat) {
    if (x.rank() != y.rank() || axis >= x.rank()) {
      throw DimensionError("cannot concat " + to_string(x.shape()) + " and " +
                           to_string(y.shape()) + " along axis " + std::to_string(axis));
    }
    for (std::size_t k = 0; k < x.rank(); ++k) {
      if (k != axis && x.extent(k) != y.extent(k)) {
        throw DimensionError("cannot concat " + to_string(x.shape()) + " and " +
                             to_string(y.shape()) + " along axis " + std::to_string(axis));
      }
    }
    const AxisSplit sx = split_at(x.shape(), axis);
    const AxisSplit sy = split_at(y.shape(), axis);
    const std::size_t bx = sx.extent * sx.inner;  // contiguous block per outer index
    const std::size_t by = sy.extent * sy.inner;
    Shape shape = x.shape();
    shape[axis] += y.extent(axis);
    std::vector<S> out;
    out.reserve(X.size() + Y.size());
    for (std::size_t a = 0; a < sx.outer; ++a) {
      out.insert(out.end(), X.begin() + a * bx, X.begin() + (a + 1) * bx);
      out.insert(out.end(), Y.begin() + a * by, Y.begin() + (a + 1) * by);
    }
    return finish<S>(tape, std::move(shape), std::move(out), {&x, &y},
                     [outer = sx.outer, bx, by](std::span<const S> g,
                                                std::span<std::vector<S>* const> gin) {
                       for (std::size_t a = 0; a < outer; ++a) {
                         const S* src = g.data() + a * (bx + by);
                         if (gin[0]) {
                           S* gx = gin[0]->data() + a * bx;
                           for (std::size_t i = 0; i < bx; ++i) gx[i] += src[i];
                         }
                         if (gin[1]) {
                           S* gy = gin[1]->data() + a * by;
                           for (std::size_t i = 0; i < by; ++i) gy[i] += src[bx + i];
                         }
                       }
                     });
  }

  const Broadcast plan = plan_broadcast(x.shape(), y.shape());
  std::vector<S> out(numel(plan.out));
  if (kind == Combination::add_broadcast) {
    plan.for_each([&](std::size_t o, std::size_t i, std::size_t j) { out[o] = X[i] + Y[j]; });
    return finish<S>(tape, plan.out, std::move(out), {&x, &y},
                     [plan](std::span<const S> g, std::span<std::vector<S>* const> gin) {
                       S* gx = gin[0] ? gin[0]->data() : nullptr;
                       S* gy = gin[1] ? gin[1]->data() : nullptr;
                       plan.for_each([&](std::size_t o, std::size_t i, std::size_t j) {
                         if (gx) gx[i] += g[o];
                         if (gy) gy[j] += g[o];
                       });
                     });
  }
  plan.for_each([&](std::size_t o, std::size_t i, std::size_t j) { out[o] = X[i] * Y[j]; });
  return finish<S>(tape, plan.out, std::move(out), {&x, &y},
                   [plan, x = x.detach(), y = y.detach()](std::span<const S> g,
                                                          std::span<std::vector<S>* const> gin) {
                     auto X = x.data();
                     auto Y = y.data();
                     S* gx = gin[0] ? gin[0]->data() : nullptr;
                     S* gy = gin[1] ? gin[1]->data() : nullptr;
                     plan.for_each([&](std::size_t o, std::size_t i, std::size_t j) {
                       if (gx) gx[i] += g[o] * Y[j];
                       if (gy) gy[j] += g[o] * X[i];
                     });
                   });
}

template <Real S>
Tensor<S> sum(const Tensor<S>& x) {
  S total = 0;
  for (S v : x.data()) total += v;
  Tape<S>* tape = common_tape({&x});
  return finish<S>(tape, {1}, {total}, {&x},
                   [](std::span<const S> g, std::span<std::vector<S>* const> gin) {
                     if (!gin[0]) return;
                     for (S& v : *gin[0]) v += g[0];
                   });
}

template <Real S>
Tensor<S> affine(const Tensor<S>& x, S scale, S shift) {
  auto X = x.data();
  std::vector<S> out(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) out[i] = scale * X[i] + shift;
  Tape<S>* tape = common_tape({&x});
  return finish<S>(tape, x.shape(), std::move(out), {&x},
                   [scale](std::span<const S> g, std::span<std::vector<S>* const> gin) {
                     if (!gin[0]) return;
                     S* gx = gin[0]->data();
                     for (std::size_t i = 0; i < g.size(); ++i) gx[i] += scale * g[i];
                   });
}

template <Real S>
Tensor<S> log_clamped(const Tensor<S>& x, S floor) {
  auto X = x.data();
  std::vector<S> out(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) out[i] = std::log(std::max(X[i], floor));
  Tape<S>* tape = common_tape({&x});
  return finish<S>(tape, x.shape(), std::move(out), {&x},
                   [x = x.detach(), floor](std::span<const S> g,
                                           std::span<std::vector<S>* const> gin) {
                     if (!gin[0]) return;
                     S* gx = gin[0]->data();
                     auto X = x.data();
                     for (std::size_t i = 0; i < g.size(); ++i) {
                       if (X[i] > floor) gx[i] += g[i] / X[i];
                     }
                   });
}

template <Real S>
Tensor<S> transpose(const Tensor<S>& x) {
  if (x.rank() != 2) throw DimensionError("transpose needs a matrix, got " + to_string(x.shape()));
  const std::size_t m = x.extent(0), n = x.extent(1);
  auto X = x.data();
  std::vector<S> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = X[i * n + j];
  }
  Tape<S>* tape = common_tape({&x});
  return finish<S>(tape, {n, m}, std::move(out), {&x},
                   [m, n](std::span<const S> g, std::span<std::vector<S>* const> gin) {
                     if (!gin[0]) return;
                     S* gx = gin[0]->data();
                     for (std::size_t i = 0; i < m; ++i) {
                       for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += g[j * m + i];
                     }
                   });
}

template <Real S>
Tensor<S> reshape(const Tensor<S>& x, Shape shape) {
  validate_shape(shape);
  if (numel(shape) != x.size()) {
    throw DimensionError("cannot reshape " + to_string(x.shape()) + " to " + to_string(shape));
  }
  std::vector<S> out(x.data().begin(), x.data().end());
  Tape<S>* tape = common_tape({&x});
  return finish<S>(tape, std::move(shape), std::move(out), {&x},
                   [](std::span<const S> g, std::span<std::vector<S>* const> gin) {
                     if (!gin[0]) return;
                     S* gx = gin[0]->data();
                     for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                   });
}

template <Real S>
Tensor<S> slice(const Tensor<S>& x, std::size_t axis, std::size_t begin, std::size_t end) {
  if (axis >= x.rank() || begin >= end || end > x.extent(axis)) {
    throw DimensionError("slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") on axis " + std::to_string(axis) + " of " + to_string(x.shape()));
  }
  const AxisSplit s = split_at(x.shape(), axis);
  const std::size_t len = (end - begin) * s.inner;
  auto X = x.data();
  std::vector<S> out;
  out.reserve(s.outer * len);
  for (std::size_t a = 0; a < s.outer; ++a) {
    auto first = X.begin() + a * s.extent * s.inner + begin * s.inner;
    out.insert(out.end(), first, first + len);
  }
  Shape shape = x.shape();
  shape[axis] = end - begin;
  Tape<S>* tape = common_tape({&x});
  return finish<S>(tape, std::move(shape), std::move(out), {&x},
                   [s, begin, len](std::span<const S> g, std::span<std::vector<S>* const> gin) {
                     if (!gin[0]) return;
                     S* gx = gin[0]->data();
                     for (std::size_t a = 0; a < s.outer; ++a) {
                       S* dst = gx + a * s.extent * s.inner + begin * s.inner;
                       for (std::size_t i = 0; i < len; ++i) dst[i] += g[a * len + i];
                     }
                   });
}

template <Real S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& weight) {
  if (weight.rank() != 2 || x.extent(x.rank() - 1) != weight.extent(0)) {
    throw DimensionError("linear map " + to_string(weight.shape()) + " cannot act on " +
                         to_string(x.shape()));
  }
  if (x.rank() == 2) return matmul(x, weight);
  const std::size_t rows = x.size() / weight.extent(0);
  Shape out_shape = x.shape();
  out_shape.back() = weight.extent(1);
  return reshape(matmul(reshape(x, {rows, weight.extent(0)}), weight), std::move(out_shape));
}

template <Real S>
bool all_finite(const Tensor<S>& x) {
  return std::all_of(x.data().begin(), x.data().end(), [](S v) { return std::isfinite(v); });
}

#define PFMG_INSTANTIATE_OPS(S)                                                          \
  template Tensor<S> matmul(const Tensor<S>&, const Tensor<S>&);                         \
  template Tensor<S> conv2d(const Tensor<S>&, const Tensor<S>&);                         \
  template Tensor<S> apply_activation(Activation, const Tensor<S>&, std::size_t);        \
  template Tensor<S> reduce(Reduction, const Tensor<S>&);                                \
  template Tensor<S> combine(Combination, const Tensor<S>&, const Tensor<S>&,            \
                             std::size_t);                                               \
  template Tensor<S> sum(const Tensor<S>&);                                              \
  template Tensor<S> affine(const Tensor<S>&, S, S);                                     \
  template Tensor<S> log_clamped(const Tensor<S>&, S);                                   \
  template Tensor<S> transpose(const Tensor<S>&);                                        \
  template Tensor<S> reshape(const Tensor<S>&, Shape);                                   \
  template Tensor<S> slice(const Tensor<S>&, std::size_t, std::size_t, std::size_t);     \
  template Tensor<S> linear(const Tensor<S>&, const Tensor<S>&);                         \
  template bool all_finite(const Tensor<S>&);

PFMG_INSTANTIATE_OPS(float)
PFMG_INSTANTIATE_OPS(double)

#undef PFMG_INSTANTIATE_OPS

}  // namespace pfmg
