#include "tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace gait {

Var Tape::emplace(Tensor value, std::function<void(Tape&)> bwd) {
  Node n;
  n.grad = Tensor(value.shape, 0.0);
  n.value = std::move(value);
  n.backward = std::move(bwd);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(Tensor value) { return emplace(std::move(value), {}); }
Var Tape::constant(Tensor value) { return emplace(std::move(value), {}); }

static void check_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!same_shape(a, b))
    throw ShapeMismatch(std::string(op) + ": " + shape_str(a.shape) + " vs " +
                        shape_str(b.shape));
}

// Index of the op's own output node, taken before it is emplaced.
static int next_idx(const Tape& t) { return static_cast<int>(t.node_count()); }

Var Tape::add(Var a, Var b) {
  check_same(value(a), value(b), "add");
  Tensor out = value(a);
  for (int i = 0; i < out.size(); ++i) out[i] += value(b)[i];
  int o = next_idx(*this);
  return emplace(std::move(out), [a, b, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (int i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  check_same(value(a), value(b), "sub");
  Tensor out = value(a);
  for (int i = 0; i < out.size(); ++i) out[i] -= value(b)[i];
  int o = next_idx(*this);
  return emplace(std::move(out), [a, b, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (int i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  check_same(value(a), value(b), "mul");
  Tensor out = value(a);
  for (int i = 0; i < out.size(); ++i) out[i] *= value(b)[i];
  int o = next_idx(*this);
  return emplace(std::move(out), [a, b, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (int i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * vb[i];
      gb[i] += g[i] * va[i];
    }
  });
}

Var Tape::scale(Var a, double c) {
  Tensor out = value(a);
  for (double& v : out.data) v *= c;
  int o = next_idx(*this);
  return emplace(std::move(out), [a, c, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

Var Tape::add_scalar(Var a, double c) {
  Tensor out = value(a);
  for (double& v : out.data) v += c;
  int o = next_idx(*this);
  return emplace(std::move(out), [a, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var Tape::relu(Var a) {
  Tensor out = value(a);
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  int o = next_idx(*this);
  return emplace(std::move(out), [a, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    const Tensor& va = t.value(a);
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < g.size(); ++i)
      if (va[i] > 0.0) ga[i] += g[i];
  });
}

Var Tape::sigmoid(Var a) {
  Tensor out = value(a);
  for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  int o = next_idx(*this);
  return emplace(std::move(out), [a, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    const Tensor& y = t.value(Var{o});
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var Tape::tanh_(Var a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::tanh(v);
  int o = next_idx(*this);
  return emplace(std::move(out), [a, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    const Tensor& y = t.value(Var{o});
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var Tape::sqrt_(Var a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::sqrt(v);
  int o = next_idx(*this);
  return emplace(std::move(out), [a, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    const Tensor& y = t.value(Var{o});
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * 0.5 / y[i];
  });
}

Var Tape::recip(Var a) {
  Tensor out = value(a);
  for (double& v : out.data) v = 1.0 / v;
  int o = next_idx(*this);
  return emplace(std::move(out), [a, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    const Tensor& y = t.value(Var{o});
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < g.size(); ++i) ga[i] -= g[i] * y[i] * y[i];
  });
}

Var Tape::softmax(Var v) {
  const Tensor& x = value(v);
  Tensor out = x;
  double mx = *std::max_element(x.data.begin(), x.data.end());
  double s = 0.0;
  for (double& e : out.data) {
    e = std::exp(e - mx);
    s += e;
  }
  for (double& e : out.data) e /= s;
  int o = next_idx(*this);
  return emplace(std::move(out), [v, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    const Tensor& y = t.value(Var{o});
    Tensor& gv = t.grad_mut(v);
    double gy = 0.0;
    for (int i = 0; i < g.size(); ++i) gy += g[i] * y[i];
    for (int i = 0; i < g.size(); ++i) gv[i] += y[i] * (g[i] - gy);
  });
}

Var Tape::matvec(Var w, Var x) {
  const Tensor& vw = value(w);
  const Tensor& vx = value(x);
  if (vw.ndim() != 2 || vx.ndim() != 1 || vw.dim(1) != vx.dim(0))
    throw ShapeMismatch("matvec: " + shape_str(vw.shape) + " * " +
                        shape_str(vx.shape));
  int m = vw.dim(0), n = vw.dim(1);
  Tensor out({m});
  for (int r = 0; r < m; ++r) {
    double acc = 0.0;
    const double* row = &vw.data[static_cast<size_t>(r) * n];
    for (int c = 0; c < n; ++c) acc += row[c] * vx[c];
    out[r] = acc;
  }
  int o = next_idx(*this);
  return emplace(std::move(out), [w, x, m, n, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    const Tensor& vw = t.value(w);
    const Tensor& vx = t.value(x);
    Tensor& gw = t.grad_mut(w);
    Tensor& gx = t.grad_mut(x);
    for (int r = 0; r < m; ++r) {
      double gr = g[r];
      const double* row = &vw.data[static_cast<size_t>(r) * n];
      double* grow = &gw.data[static_cast<size_t>(r) * n];
      for (int c = 0; c < n; ++c) {
        grow[c] += gr * vx[c];
        gx[c] += gr * row[c];
      }
    }
  });
}

Var Tape::linear(Var w, Var x, Var b) { return add(matvec(w, x), b); }

Var Tape::conv2d(Var in, Var w, Var b, int padding) {
  const Tensor& vi = value(in);
  const Tensor& vw = value(w);
  const Tensor& vb = value(b);
  if (vi.ndim() != 3 || vw.ndim() != 4)
    throw ShapeMismatch("conv2d: input must be [H,W,C], weights [kh,kw,Cin,Cout]");
  int H = vi.dim(0), W = vi.dim(1), Cin = vi.dim(2);
  int kh = vw.dim(0), kw = vw.dim(1), Cout = vw.dim(3);
  if (vw.dim(2) != Cin)
    throw ShapeMismatch("conv2d: channel mismatch, input " + shape_str(vi.shape) +
                        " weights " + shape_str(vw.shape));
  if (vb.ndim() != 1 || vb.dim(0) != Cout)
    throw ShapeMismatch("conv2d: bias must be [Cout]");
  int Ho = H + 2 * padding - kh + 1;
  int Wo = W + 2 * padding - kw + 1;
  if (Ho <= 0 || Wo <= 0) throw ShapeMismatch("conv2d: kernel larger than input");

  Tensor out({Ho, Wo, Cout});
  for (int y = 0; y < Ho; ++y)
    for (int x = 0; x < Wo; ++x) {
      double* op = &out.data[static_cast<size_t>((y * Wo + x)) * Cout];
      for (int co = 0; co < Cout; ++co) op[co] = vb[co];
      for (int ky = 0; ky < kh; ++ky) {
        int iy = y + ky - padding;
        if (iy < 0 || iy >= H) continue;
        for (int kx = 0; kx < kw; ++kx) {
          int ix = x + kx - padding;
          if (ix < 0 || ix >= W) continue;
          const double* ip = &vi.data[static_cast<size_t>((iy * W + ix)) * Cin];
          const double* wp =
              &vw.data[static_cast<size_t>(((ky * kw + kx)) * Cin) * Cout];
          for (int ci = 0; ci < Cin; ++ci) {
            double iv = ip[ci];
            const double* wr = wp + static_cast<size_t>(ci) * Cout;
            for (int co = 0; co < Cout; ++co) op[co] += iv * wr[co];
          }
        }
      }
    }
  int o = next_idx(*this);
  auto bwd = [in, w, b, padding, H, W, Cin, kh, kw, Cout, Ho, Wo, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    const Tensor& vi = t.value(in);
    const Tensor& vw = t.value(w);
    Tensor& gi = t.grad_mut(in);
    Tensor& gw = t.grad_mut(w);
    Tensor& gb = t.grad_mut(b);
    for (int y = 0; y < Ho; ++y)
      for (int x = 0; x < Wo; ++x) {
        const double* gp = &g.data[static_cast<size_t>((y * Wo + x)) * Cout];
        for (int co = 0; co < Cout; ++co) gb[co] += gp[co];
        for (int ky = 0; ky < kh; ++ky) {
          int iy = y + ky - padding;
          if (iy < 0 || iy >= H) continue;
          for (int kx = 0; kx < kw; ++kx) {
            int ix = x + kx - padding;
            if (ix < 0 || ix >= W) continue;
            const double* ip = &vi.data[static_cast<size_t>((iy * W + ix)) * Cin];
            double* gip = &gi.data[static_cast<size_t>((iy * W + ix)) * Cin];
            size_t wbase = static_cast<size_t>((ky * kw + kx)) * Cin * Cout;
            for (int ci = 0; ci < Cin; ++ci) {
              const double* wr = &vw.data[wbase + static_cast<size_t>(ci) * Cout];
              double* gwr = &gw.data[wbase + static_cast<size_t>(ci) * Cout];
              double iv = ip[ci];
              double acc = 0.0;
              for (int co = 0; co < Cout; ++co) {
                acc += gp[co] * wr[co];
                gwr[co] += gp[co] * iv;
              }
              gip[ci] += acc;
            }
          }
        }
      }
  };
  return emplace(std::move(out), std::move(bwd));
}

Var Tape::maxpool2(Var in) {
  const Tensor& vi = value(in);
  if (vi.ndim() != 3) throw ShapeMismatch("maxpool2: input must be [H,W,C]");
  int H = vi.dim(0), W = vi.dim(1), C = vi.dim(2);
  if (H % 2 != 0 || W % 2 != 0)
    throw ShapeMismatch("maxpool2: H and W must be even, got " + shape_str(vi.shape));
  int Ho = H / 2, Wo = W / 2;
  Tensor out({Ho, Wo, C});
  // first-occurrence argmax, recorded for the backward route
  auto argmax = std::make_shared<std::vector<int>>(out.data.size());
  for (int y = 0; y < Ho; ++y)
    for (int x = 0; x < Wo; ++x)
      for (int c = 0; c < C; ++c) {
        double best = -1e300;
        int best_i = -1;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            int i = ((2 * y + dy) * W + (2 * x + dx)) * C + c;
            if (vi[i] > best) {
              best = vi[i];
              best_i = i;
            }
          }
        int oi = (y * Wo + x) * C + c;
        out[oi] = best;
        (*argmax)[static_cast<size_t>(oi)] = best_i;
      }
  int o = next_idx(*this);
  return emplace(std::move(out), [in, argmax, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    Tensor& gi = t.grad_mut(in);
    for (int i = 0; i < g.size(); ++i)
      gi[(*argmax)[static_cast<size_t>(i)]] += g[i];
  });
}

Var Tape::reshape(Var a, std::vector<int> shape) {
  const Tensor& va = value(a);
  if (numel(shape) != va.size())
    throw ShapeMismatch("reshape: " + shape_str(va.shape) + " -> " + shape_str(shape));
  Tensor out;
  out.shape = std::move(shape);
  out.data = va.data;
  int o = next_idx(*this);
  return emplace(std::move(out), [a, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var Tape::concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat: no inputs");
  int total = 0;
  for (Var p : parts) {
    if (value(p).ndim() != 1) throw ShapeMismatch("concat: inputs must be 1-D");
    total += value(p).size();
  }
  Tensor out({total});
  int off = 0;
  for (Var p : parts) {
    const Tensor& vp = value(p);
    std::copy(vp.data.begin(), vp.data.end(), out.data.begin() + off);
    off += vp.size();
  }
  int o = next_idx(*this);
  auto ps = parts;
  return emplace(std::move(out), [ps, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    int off = 0;
    for (Var p : ps) {
      Tensor& gp = t.grad_mut(p);
      for (int i = 0; i < gp.size(); ++i) gp[i] += g[off + i];
      off += gp.size();
    }
  });
}

Var Tape::slice0(Var a, int lo, int hi) {
  const Tensor& va = value(a);
  if (va.ndim() < 1 || lo < 0 || hi > va.dim(0) || lo >= hi)
    throw ShapeMismatch("slice0: bad range");
  int inner = va.size() / va.dim(0);
  std::vector<int> oshape = va.shape;
  oshape[0] = hi - lo;
  Tensor out(oshape);
  std::copy(va.data.begin() + static_cast<size_t>(lo) * inner,
            va.data.begin() + static_cast<size_t>(hi) * inner, out.data.begin());
  int o = next_idx(*this);
  return emplace(std::move(out), [a, lo, inner, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < g.size(); ++i) ga[lo * inner + i] += g[i];
  });
}

Var Tape::mean_stack(const std::vector<Var>& parts) {
  if (parts.empty()) throw EmptySequence("mean_stack: no inputs");
  const Tensor& first = value(parts[0]);
  for (Var p : parts) check_same(value(p), first, "mean_stack");
  // per-element sorted accumulation keeps the mean bit-exact under any
  // permutation of the inputs
  Tensor out(first.shape, 0.0);
  double inv = 1.0 / static_cast<double>(parts.size());
  std::vector<double> addends(parts.size());
  for (int i = 0; i < out.size(); ++i) {
    for (size_t p = 0; p < parts.size(); ++p) addends[p] = value(parts[p])[i];
    std::sort(addends.begin(), addends.end());
    double acc = 0.0;
    for (double v : addends) acc += v;
    out[i] = acc * inv;
  }
  int o = next_idx(*this);
  auto ps = parts;
  return emplace(std::move(out), [ps, inv, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    for (Var p : ps) {
      Tensor& gp = t.grad_mut(p);
      for (int i = 0; i < g.size(); ++i) gp[i] += inv * g[i];
    }
  });
}

Var Tape::sum(Var a) {
  const Tensor& va = value(a);
  double s = 0.0;
  for (double v : va.data) s += v;
  int o = next_idx(*this);
  return emplace(Tensor::scalar(s), [a, o](Tape& t) {
    double g = t.grad(Var{o})[0];
    Tensor& ga = t.grad_mut(a);
    for (double& v : ga.data) v += g;
  });
}

Var Tape::dot(Var a, Var b) { return sum(mul(a, b)); }

Var Tape::pick(Var v, int i) {
  const Tensor& vv = value(v);
  if (i < 0 || i >= vv.size()) throw ShapeMismatch("pick: index out of range");
  int o = next_idx(*this);
  return emplace(Tensor::scalar(vv[i]), [v, i, o](Tape& t) {
    t.grad_mut(v)[i] += t.grad(Var{o})[0];
  });
}

Var Tape::bmul(Var v, Var s) {
  const Tensor& vv = value(v);
  const Tensor& vs = value(s);
  if (vs.size() != 1) throw ShapeMismatch("bmul: scale must be scalar");
  Tensor out = vv;
  for (double& e : out.data) e *= vs[0];
  int o = next_idx(*this);
  return emplace(std::move(out), [v, s, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    const Tensor& vv = t.value(v);
    double sv = t.value(s)[0];
    Tensor& gv = t.grad_mut(v);
    double& gs = t.grad_mut(s)[0];
    for (int i = 0; i < g.size(); ++i) {
      gv[i] += g[i] * sv;
      gs += g[i] * vv[i];
    }
  });
}

Var Tape::mul_const(Var a, const Tensor& mask) {
  check_same(value(a), mask, "mul_const");
  Tensor out = value(a);
  for (int i = 0; i < out.size(); ++i) out[i] *= mask[i];
  int o = next_idx(*this);
  auto m = std::make_shared<Tensor>(mask);
  return emplace(std::move(out), [a, m, o](Tape& t) {
    const Tensor& g = t.grad(Var{o});
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * (*m)[i];
  });
}

void Tape::backward(Var loss) {
  if (value(loss).size() != 1)
    throw ShapeMismatch("backward: loss must be a scalar");
  for (auto& n : nodes_) std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
  grad_mut(loss)[0] = 1.0;
  for (int i = loss.idx; i >= 0; --i) {
    auto& n = nodes_[static_cast<size_t>(i)];
    if (n.backward) n.backward(*this);
  }
}

double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                  double eps) {
  Tensor g_ad;
  {
    Tape t;
    Var in = t.input(x);
    Var loss = f(t, in);
    t.backward(loss);
    g_ad = t.grad(in);
  }
  double max_rel = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    auto eval = [&](double v) {
      Tensor xp = x;
      xp[i] = v;
      Tape t;
      Var in = t.input(xp);
      return t.value(f(t, in))[0];
    };
    double fd = (eval(x[i] + eps) - eval(x[i] - eps)) / (2.0 * eps);
    double ad = g_ad[i];
    double rel = std::abs(ad - fd) / std::max(1e-8, std::abs(ad) + std::abs(fd));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace gait
