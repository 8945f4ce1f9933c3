#include "stereoflow/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "detail/warp_kernel.hpp"

namespace stereoflow {

namespace {

void ensure_shape(Field& f, int h, int w, int c) {
  if (f.height() != h || f.width() != w || f.channels() != c) {
    f = Field(h, w, c);
  }
}

void check_same_tape(const Tape* t, Var a) {
  if (a.tape != t || a.id < 0) {
    throw ShapeError("operand does not belong to this tape");
  }
}

}  // namespace

const Field& Var::value() const { return tape->value(*this); }
const Field& Var::grad() const { return tape->grad(*this); }
Shape Var::shape() const { return tape->value(*this).shape(); }

const Tape::Node& Tape::node_of(Var v) const {
  check_same_tape(this, v);
  return nodes_[static_cast<std::size_t>(v.id)];
}

Var Tape::push(Node node) {
  compute(node);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Field initial) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(initial);
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Field value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  n.needs_grad = false;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::set_leaf(Var v, const Field& value) {
  check_same_tape(this, v);
  Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (n.op != Op::Leaf) throw ShapeError("set_leaf on a non-leaf node");
  require_same_shape(n.value, value, "set_leaf");
  std::memcpy(n.value.data(), value.data(), value.size() * sizeof(double));
}

Var Tape::add(Var a, Var b) {
  check_same_tape(this, a);
  check_same_tape(this, b);
  require_same_shape(nodes_[a.id].value, nodes_[b.id].value, "add");
  Node n;
  n.op = Op::Add;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  check_same_tape(this, a);
  check_same_tape(this, b);
  require_same_shape(nodes_[a.id].value, nodes_[b.id].value, "sub");
  Node n;
  n.op = Op::Sub;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  check_same_tape(this, a);
  check_same_tape(this, b);
  require_same_shape(nodes_[a.id].value, nodes_[b.id].value, "mul");
  Node n;
  n.op = Op::Mul;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push(std::move(n));
}

Var Tape::div(Var a, Var b) {
  check_same_tape(this, a);
  check_same_tape(this, b);
  require_same_shape(nodes_[a.id].value, nodes_[b.id].value, "div");
  Node n;
  n.op = Op::Div;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push(std::move(n));
}

Var Tape::abs(Var a) {
  check_same_tape(this, a);
  Node n;
  n.op = Op::Abs;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::square(Var a) {
  check_same_tape(this, a);
  Node n;
  n.op = Op::Square;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::sqrt(Var a) {
  check_same_tape(this, a);
  Node n;
  n.op = Op::Sqrt;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::exp(Var a) {
  check_same_tape(this, a);
  Node n;
  n.op = Op::Exp;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::clampmin(Var a, double floor) {
  check_same_tape(this, a);
  Node n;
  n.op = Op::ClampMin;
  n.a = a.id;
  n.p0 = floor;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::affine(Var a, double scale, double shift) {
  check_same_tape(this, a);
  Node n;
  n.op = Op::Affine;
  n.a = a.id;
  n.p0 = scale;
  n.p1 = shift;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::spatial_gradient(Var a, Axis axis, int order) {
  check_same_tape(this, a);
  if (order != 1 && order != 2) throw ShapeError("spatial_gradient order must be 1 or 2");
  Node n;
  n.op = Op::SpatialGradient;
  n.a = a.id;
  n.i0 = axis == Axis::X ? 0 : 1;
  n.i1 = order;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::box_mean(Var a, int window) {
  check_same_tape(this, a);
  if (window < 1 || window % 2 == 0) throw ShapeError("box_mean window must be odd and positive");
  Node n;
  n.op = Op::BoxMean;
  n.a = a.id;
  n.i0 = window;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::channel_mean(Var a) {
  check_same_tape(this, a);
  Node n;
  n.op = Op::ChannelMean;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::downsample2(Var a) {
  check_same_tape(this, a);
  Node n;
  n.op = Op::Downsample2;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::upsample_bilinear(Var a, int target_h, int target_w) {
  check_same_tape(this, a);
  const Field& v = nodes_[a.id].value;
  if (target_h < v.height() || target_w < v.width()) {
    throw ShapeError("upsample_bilinear target smaller than source");
  }
  Node n;
  n.op = Op::UpsampleBilinear;
  n.a = a.id;
  n.i0 = target_h;
  n.i1 = target_w;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::warp(Var source, Var corr) {
  check_same_tape(this, source);
  check_same_tape(this, corr);
  require_same_extent(nodes_[source.id].value, nodes_[corr.id].value, "warp");
  if (nodes_[corr.id].value.channels() != 2) {
    throw ShapeError("warp displacement field must have 2 channels");
  }
  Node n;
  n.op = Op::Warp;
  n.a = source.id;
  n.b = corr.id;
  n.needs_grad = nodes_[source.id].needs_grad || nodes_[corr.id].needs_grad;
  return push(std::move(n));
}

Var Tape::reduce_sum(Var a) {
  check_same_tape(this, a);
  Node n;
  n.op = Op::ReduceSum;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::reduce_mean(Var a) {
  check_same_tape(this, a);
  Node n;
  n.op = Op::ReduceMean;
  n.a = a.id;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

Var Tape::reduce_mean(Var a, Field mask) {
  check_same_tape(this, a);
  require_same_shape(nodes_[a.id].value, mask, "reduce_mean mask");
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask.data()[i] < 0.0) throw ShapeError("reduce_mean mask must be nonnegative");
  }
  Node n;
  n.op = Op::ReduceMeanMasked;
  n.a = a.id;
  n.mask = std::move(mask);
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

void Tape::compute(Node& n) {
  switch (n.op) {
    case Op::Leaf:
    case Op::Constant:
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const Field& a = nodes_[n.a].value;
      const Field& b = nodes_[n.b].value;
      ensure_shape(n.value, a.height(), a.width(), a.channels());
      const double* pa = a.data();
      const double* pb = b.data();
      double* po = n.value.data();
      const std::size_t sz = a.size();
      switch (n.op) {
        case Op::Add:
          for (std::size_t i = 0; i < sz; ++i) po[i] = pa[i] + pb[i];
          break;
        case Op::Sub:
          for (std::size_t i = 0; i < sz; ++i) po[i] = pa[i] - pb[i];
          break;
        case Op::Mul:
          for (std::size_t i = 0; i < sz; ++i) po[i] = pa[i] * pb[i];
          break;
        default:
          for (std::size_t i = 0; i < sz; ++i) po[i] = pa[i] / pb[i];
          break;
      }
      return;
    }
    case Op::Abs:
    case Op::Square:
    case Op::Sqrt:
    case Op::Exp:
    case Op::ClampMin:
    case Op::Affine: {
      const Field& a = nodes_[n.a].value;
      ensure_shape(n.value, a.height(), a.width(), a.channels());
      const double* pa = a.data();
      double* po = n.value.data();
      const std::size_t sz = a.size();
      switch (n.op) {
        case Op::Abs:
          for (std::size_t i = 0; i < sz; ++i) po[i] = std::fabs(pa[i]);
          break;
        case Op::Square:
          for (std::size_t i = 0; i < sz; ++i) po[i] = pa[i] * pa[i];
          break;
        case Op::Sqrt:
          for (std::size_t i = 0; i < sz; ++i) po[i] = std::sqrt(pa[i]);
          break;
        case Op::Exp:
          for (std::size_t i = 0; i < sz; ++i) po[i] = std::exp(pa[i]);
          break;
        case Op::ClampMin:
          for (std::size_t i = 0; i < sz; ++i) po[i] = std::max(pa[i], n.p0);
          break;
        default:
          for (std::size_t i = 0; i < sz; ++i) po[i] = n.p0 * pa[i] + n.p1;
          break;
      }
      return;
    }
    case Op::SpatialGradient: {
      const Field& a = nodes_[n.a].value;
      const int h = a.height(), w = a.width(), c = a.channels();
      ensure_shape(n.value, h, w, c);
      Field& out = n.value;
      std::fill(out.data(), out.data() + out.size(), 0.0);
      const int order = n.i1;
      if (n.i0 == 0) {
        for (int y = 0; y < h; ++y)
          for (int ch = 0; ch < c; ++ch) {
            if (order == 1) {
              for (int x = 0; x + 1 < w; ++x)
                out(y, x, ch) = a(y, x + 1, ch) - a(y, x, ch);
            } else {
              for (int x = 1; x + 1 < w; ++x)
                out(y, x, ch) = a(y, x + 1, ch) - 2.0 * a(y, x, ch) + a(y, x - 1, ch);
            }
          }
      } else {
        for (int x = 0; x < w; ++x)
          for (int ch = 0; ch < c; ++ch) {
            if (order == 1) {
              for (int y = 0; y + 1 < h; ++y)
                out(y, x, ch) = a(y + 1, x, ch) - a(y, x, ch);
            } else {
              for (int y = 1; y + 1 < h; ++y)
                out(y, x, ch) = a(y + 1, x, ch) - 2.0 * a(y, x, ch) + a(y - 1, x, ch);
            }
          }
      }
      return;
    }
    case Op::BoxMean: {
      const Field& a = nodes_[n.a].value;
      const int h = a.height(), w = a.width(), c = a.channels();
      const int r = n.i0 / 2;
      ensure_shape(n.value, h, w, c);
      for (int y = 0; y < h; ++y) {
        const int yy0 = std::max(0, y - r), yy1 = std::min(h - 1, y + r);
        for (int x = 0; x < w; ++x) {
          const int xx0 = std::max(0, x - r), xx1 = std::min(w - 1, x + r);
          const double inv = 1.0 / double((yy1 - yy0 + 1) * (xx1 - xx0 + 1));
          for (int ch = 0; ch < c; ++ch) {
            double s = 0.0;
            for (int yy = yy0; yy <= yy1; ++yy)
              for (int xx = xx0; xx <= xx1; ++xx) s += a(yy, xx, ch);
            n.value(y, x, ch) = s * inv;
          }
        }
      }
      return;
    }
    case Op::ChannelMean: {
      const Field& a = nodes_[n.a].value;
      const int h = a.height(), w = a.width(), c = a.channels();
      ensure_shape(n.value, h, w, 1);
      const double inv = 1.0 / c;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          double s = 0.0;
          for (int ch = 0; ch < c; ++ch) s += a(y, x, ch);
          n.value(y, x) = s * inv;
        }
      return;
    }
    case Op::Downsample2: {
      const Field& a = nodes_[n.a].value;
      const int h = a.height(), w = a.width(), c = a.channels();
      const int oh = (h + 1) / 2, ow = (w + 1) / 2;
      ensure_shape(n.value, oh, ow, c);
      for (int y = 0; y < oh; ++y) {
        const int y0 = 2 * y, y1 = std::min(2 * y + 1, h - 1);
        for (int x = 0; x < ow; ++x) {
          const int x0 = 2 * x, x1 = std::min(2 * x + 1, w - 1);
          for (int ch = 0; ch < c; ++ch) {
            n.value(y, x, ch) = 0.25 * (a(y0, x0, ch) + a(y0, x1, ch) +
                                        a(y1, x0, ch) + a(y1, x1, ch));
          }
        }
      }
      return;
    }
    case Op::UpsampleBilinear: {
      const Field& a = nodes_[n.a].value;
      ensure_shape(n.value, n.i0, n.i1, a.channels());
      n.value = stereoflow::upsample_bilinear(a, n.i0, n.i1);
      return;
    }
    case Op::Warp: {
      const Field& src = nodes_[n.a].value;
      const Field& corr = nodes_[n.b].value;
      ensure_shape(n.value, src.height(), src.width(), src.channels());
      detail::warp_forward(src, corr, n.value);
      return;
    }
    case Op::ReduceSum: {
      const Field& a = nodes_[n.a].value;
      ensure_shape(n.value, 1, 1, 1);
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i];
      n.value(0, 0) = s;
      return;
    }
    case Op::ReduceMean: {
      const Field& a = nodes_[n.a].value;
      ensure_shape(n.value, 1, 1, 1);
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i];
      n.value(0, 0) = a.size() ? s / double(a.size()) : 0.0;
      return;
    }
    case Op::ReduceMeanMasked: {
      const Field& a = nodes_[n.a].value;
      ensure_shape(n.value, 1, 1, 1);
      double num = 0.0, den = 0.0;
      const double* pa = a.data();
      const double* pm = n.mask.data();
      for (std::size_t i = 0; i < a.size(); ++i) {
        num += pa[i] * pm[i];
        den += pm[i];
      }
      if (den > 0.0) {
        n.value(0, 0) = num / den;
      } else {
        n.value(0, 0) = 0.0;
        ++degenerate_events_;
      }
      return;
    }
  }
}

void Tape::forward() {
  degenerate_events_ = 0;
  for (Node& n : nodes_) compute(n);
}

Field& Tape::grad_buffer(int id, const Shape& shape) {
  Field& g = grads_[static_cast<std::size_t>(id)];
  if (!grad_live_[static_cast<std::size_t>(id)]) {
    if (g.shape() != shape) g = Field(shape.height, shape.width, shape.channels);
    std::fill(g.data(), g.data() + g.size(), 0.0);
    grad_live_[static_cast<std::size_t>(id)] = true;
  }
  return g;
}

void Tape::propagate(int id) {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.op == Op::Leaf || n.op == Op::Constant) return;
  const Field& g = grads_[static_cast<std::size_t>(id)];
  const bool need_a = n.a >= 0 && nodes_[n.a].needs_grad;
  const bool need_b = n.b >= 0 && nodes_[n.b].needs_grad;
  if (!need_a && !need_b) return;

  switch (n.op) {
    case Op::Add: {
      if (need_a) {
        Field& ga = grad_buffer(n.a, nodes_[n.a].value.shape());
        for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i];
      }
      if (need_b) {
        Field& gb = grad_buffer(n.b, nodes_[n.b].value.shape());
        for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] += g.data()[i];
      }
      return;
    }
    case Op::Sub: {
      if (need_a) {
        Field& ga = grad_buffer(n.a, nodes_[n.a].value.shape());
        for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i];
      }
      if (need_b) {
        Field& gb = grad_buffer(n.b, nodes_[n.b].value.shape());
        for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] -= g.data()[i];
      }
      return;
    }
    case Op::Mul: {
      const Field& av = nodes_[n.a].value;
      const Field& bv = nodes_[n.b].value;
      if (need_a) {
        Field& ga = grad_buffer(n.a, av.shape());
        for (std::size_t i = 0; i < g.size(); ++i)
          ga.data()[i] += g.data()[i] * bv.data()[i];
      }
      if (need_b) {
        Field& gb = grad_buffer(n.b, bv.shape());
        for (std::size_t i = 0; i < g.size(); ++i)
          gb.data()[i] += g.data()[i] * av.data()[i];
      }
      return;
    }
    case Op::Div: {
      const Field& av = nodes_[n.a].value;
      const Field& bv = nodes_[n.b].value;
      if (need_a) {
        Field& ga = grad_buffer(n.a, av.shape());
        for (std::size_t i = 0; i < g.size(); ++i)
          ga.data()[i] += g.data()[i] / bv.data()[i];
      }
      if (need_b) {
        Field& gb = grad_buffer(n.b, bv.shape());
        for (std::size_t i = 0; i < g.size(); ++i)
          gb.data()[i] -= g.data()[i] * av.data()[i] / (bv.data()[i] * bv.data()[i]);
      }
      return;
    }
    case Op::Abs: {
      if (!need_a) return;
      const Field& av = nodes_[n.a].value;
      Field& ga = grad_buffer(n.a, av.shape());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = av.data()[i] > 0.0 ? 1.0 : (av.data()[i] < 0.0 ? -1.0 : 0.0);
        ga.data()[i] += g.data()[i] * s;
      }
      return;
    }
    case Op::Square: {
      if (!need_a) return;
      const Field& av = nodes_[n.a].value;
      Field& ga = grad_buffer(n.a, av.shape());
      for (std::size_t i = 0; i < g.size(); ++i)
        ga.data()[i] += 2.0 * av.data()[i] * g.data()[i];
      return;
    }
    case Op::Sqrt: {
      if (!need_a) return;
      Field& ga = grad_buffer(n.a, nodes_[n.a].value.shape());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = n.value.data()[i];
        if (r > 0.0) ga.data()[i] += 0.5 * g.data()[i] / r;
      }
      return;
    }
    case Op::Exp: {
      if (!need_a) return;
      Field& ga = grad_buffer(n.a, nodes_[n.a].value.shape());
      for (std::size_t i = 0; i < g.size(); ++i)
        ga.data()[i] += g.data()[i] * n.value.data()[i];
      return;
    }
    case Op::ClampMin: {
      if (!need_a) return;
      const Field& av = nodes_[n.a].value;
      Field& ga = grad_buffer(n.a, av.shape());
      for (std::size_t i = 0; i < g.size(); ++i)
        if (av.data()[i] > n.p0) ga.data()[i] += g.data()[i];
      return;
    }
    case Op::Affine: {
      if (!need_a) return;
      Field& ga = grad_buffer(n.a, nodes_[n.a].value.shape());
      for (std::size_t i = 0; i < g.size(); ++i)
        ga.data()[i] += n.p0 * g.data()[i];
      return;
    }
    case Op::SpatialGradient: {
      if (!need_a) return;
      const Field& av = nodes_[n.a].value;
      Field& ga = grad_buffer(n.a, av.shape());
      const int h = av.height(), w = av.width(), c = av.channels();
      const int order = n.i1;
      if (n.i0 == 0) {
        for (int y = 0; y < h; ++y)
          for (int ch = 0; ch < c; ++ch) {
            if (order == 1) {
              for (int x = 0; x + 1 < w; ++x) {
                const double gv = g(y, x, ch);
                ga(y, x + 1, ch) += gv;
                ga(y, x, ch) -= gv;
              }
            } else {
              for (int x = 1; x + 1 < w; ++x) {
                const double gv = g(y, x, ch);
                ga(y, x + 1, ch) += gv;
                ga(y, x, ch) -= 2.0 * gv;
                ga(y, x - 1, ch) += gv;
              }
            }
          }
      } else {
        for (int x = 0; x < w; ++x)
          for (int ch = 0; ch < c; ++ch) {
            if (order == 1) {
              for (int y = 0; y + 1 < h; ++y) {
                const double gv = g(y, x, ch);
                ga(y + 1, x, ch) += gv;
                ga(y, x, ch) -= gv;
              }
            } else {
              for (int y = 1; y + 1 < h; ++y) {
                const double gv = g(y, x, ch);
                ga(y + 1, x, ch) += gv;
                ga(y, x, ch) -= 2.0 * gv;
                ga(y - 1, x, ch) += gv;
              }
            }
          }
      }
      return;
    }
    case Op::BoxMean: {
      if (!need_a) return;
      const Field& av = nodes_[n.a].value;
      Field& ga = grad_buffer(n.a, av.shape());
      const int h = av.height(), w = av.width(), c = av.channels();
      const int r = n.i0 / 2;
      // Scatter g(p)/count(p) over p's window; windows are symmetric, so
      // gather the pre-divided field instead.
      for (int y = 0; y < h; ++y) {
        const int yy0 = std::max(0, y - r), yy1 = std::min(h - 1, y + r);
        for (int x = 0; x < w; ++x) {
          const int xx0 = std::max(0, x - r), xx1 = std::min(w - 1, x + r);
          const double inv = 1.0 / double((yy1 - yy0 + 1) * (xx1 - xx0 + 1));
          for (int ch = 0; ch < c; ++ch) {
            const double gv = g(y, x, ch) * inv;
            for (int yy = yy0; yy <= yy1; ++yy)
              for (int xx = xx0; xx <= xx1; ++xx) ga(yy, xx, ch) += gv;
          }
        }
      }
      return;
    }
    case Op::ChannelMean: {
      if (!need_a) return;
      const Field& av = nodes_[n.a].value;
      Field& ga = grad_buffer(n.a, av.shape());
      const int h = av.height(), w = av.width(), c = av.channels();
      const double inv = 1.0 / c;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double gv = g(y, x) * inv;
          for (int ch = 0; ch < c; ++ch) ga(y, x, ch) += gv;
        }
      return;
    }
    case Op::Downsample2: {
      if (!need_a) return;
      const Field& av = nodes_[n.a].value;
      Field& ga = grad_buffer(n.a, av.shape());
      const int h = av.height(), w = av.width(), c = av.channels();
      const int oh = n.value.height(), ow = n.value.width();
      for (int y = 0; y < oh; ++y) {
        const int y0 = 2 * y, y1 = std::min(2 * y + 1, h - 1);
        for (int x = 0; x < ow; ++x) {
          const int x0 = 2 * x, x1 = std::min(2 * x + 1, w - 1);
          for (int ch = 0; ch < c; ++ch) {
            const double gv = 0.25 * g(y, x, ch);
            ga(y0, x0, ch) += gv;
            ga(y0, x1, ch) += gv;
            ga(y1, x0, ch) += gv;
            ga(y1, x1, ch) += gv;
          }
        }
      }
      return;
    }
    case Op::UpsampleBilinear: {
      if (!need_a) return;
      const Field& av = nodes_[n.a].value;
      Field& ga = grad_buffer(n.a, av.shape());
      const int h = av.height(), w = av.width(), c = av.channels();
      const int th = n.i0, tw = n.i1;
      const double sy = th > 1 ? double(h - 1) / (th - 1) : 0.0;
      const double sx = tw > 1 ? double(w - 1) / (tw - 1) : 0.0;
      for (int y = 0; y < th; ++y) {
        const double fy = y * sy;
        int y0 = static_cast<int>(fy);
        if (y0 > h - 2) y0 = std::max(h - 2, 0);
        const int y1 = std::min(y0 + 1, h - 1);
        const double wy = fy - y0;
        for (int x = 0; x < tw; ++x) {
          const double fx = x * sx;
          int x0 = static_cast<int>(fx);
          if (x0 > w - 2) x0 = std::max(w - 2, 0);
          const int x1 = std::min(x0 + 1, w - 1);
          const double wx = fx - x0;
          for (int ch = 0; ch < c; ++ch) {
            const double gv = g(y, x, ch);
            ga(y0, x0, ch) += (1.0 - wy) * (1.0 - wx) * gv;
            ga(y0, x1, ch) += (1.0 - wy) * wx * gv;
            ga(y1, x0, ch) += wy * (1.0 - wx) * gv;
            ga(y1, x1, ch) += wy * wx * gv;
          }
        }
      }
      return;
    }
    case Op::Warp: {
      const Field& src = nodes_[n.a].value;
      const Field& corr = nodes_[n.b].value;
      const int h = src.height(), w = src.width(), c = src.channels();
      Field* gsrc = need_a ? &grad_buffer(n.a, src.shape()) : nullptr;
      Field* gcorr = need_b ? &grad_buffer(n.b, corr.shape()) : nullptr;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const detail::BilinearTap t =
              detail::make_tap(x + corr(y, x, 0), y + corr(y, x, 1), w, h);
          const double w00 = (1.0 - t.fy) * (1.0 - t.fx);
          const double w01 = (1.0 - t.fy) * t.fx;
          const double w10 = t.fy * (1.0 - t.fx);
          const double w11 = t.fy * t.fx;
          double du = 0.0, dv = 0.0;
          for (int ch = 0; ch < c; ++ch) {
            const double gv = g(y, x, ch);
            if (gsrc) {
              (*gsrc)(t.y0, t.x0, ch) += w00 * gv;
              (*gsrc)(t.y0, t.x1, ch) += w01 * gv;
              (*gsrc)(t.y1, t.x0, ch) += w10 * gv;
              (*gsrc)(t.y1, t.x1, ch) += w11 * gv;
            }
            if (gcorr) {
              const double dx = (1.0 - t.fy) * (src(t.y0, t.x1, ch) - src(t.y0, t.x0, ch)) +
                                t.fy * (src(t.y1, t.x1, ch) - src(t.y1, t.x0, ch));
              const double dy = (1.0 - t.fx) * (src(t.y1, t.x0, ch) - src(t.y0, t.x0, ch)) +
                                t.fx * (src(t.y1, t.x1, ch) - src(t.y0, t.x1, ch));
              du += gv * dx;
              dv += gv * dy;
            }
          }
          if (gcorr) {
            if (t.inside_x) (*gcorr)(y, x, 0) += du;
            if (t.inside_y) (*gcorr)(y, x, 1) += dv;
          }
        }
      }
      return;
    }
    case Op::ReduceSum: {
      if (!need_a) return;
      const Field& av = nodes_[n.a].value;
      Field& ga = grad_buffer(n.a, av.shape());
      const double gv = g(0, 0);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] += gv;
      return;
    }
    case Op::ReduceMean: {
      if (!need_a) return;
      const Field& av = nodes_[n.a].value;
      Field& ga = grad_buffer(n.a, av.shape());
      const double gv = g(0, 0) / double(av.size());
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] += gv;
      return;
    }
    case Op::ReduceMeanMasked: {
      if (!need_a) return;
      const Field& av = nodes_[n.a].value;
      double den = 0.0;
      for (std::size_t i = 0; i < n.mask.size(); ++i) den += n.mask.data()[i];
      if (den <= 0.0) return;  // degenerate mask: zero gradient
      Field& ga = grad_buffer(n.a, av.shape());
      const double gv = g(0, 0) / den;
      for (std::size_t i = 0; i < ga.size(); ++i)
        ga.data()[i] += gv * n.mask.data()[i];
      return;
    }
    default:
      return;
  }
}

void Tape::backward(Var loss) {
  check_same_tape(this, loss);
  const Field& lv = nodes_[loss.id].value;
  if (lv.size() != 1) throw ShapeError("backward requires a scalar loss");
  grads_.resize(nodes_.size());
  grad_live_.assign(nodes_.size(), false);
  grad_buffer(loss.id, lv.shape())(0, 0) = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    if (grad_live_[static_cast<std::size_t>(id)] &&
        nodes_[static_cast<std::size_t>(id)].needs_grad) {
      propagate(id);
    }
  }
}

const Field& Tape::value(Var v) const { return node_of(v).value; }

const Field& Tape::grad(Var v) const {
  check_same_tape(this, v);
  const std::size_t id = static_cast<std::size_t>(v.id);
  if (id >= grads_.size() || !grad_live_[id]) {
    // Node did not participate in the last backward pass: gradient is zero.
    static thread_local Field zero;
    zero = Field::like(nodes_[id].value, 0.0);
    return zero;
  }
  return grads_[id];
}

double Tape::scalar(Var v) const {
  const Field& f = node_of(v).value;
  if (f.size() != 1) throw ShapeError("scalar() on a non-scalar var");
  return f(0, 0);
}

void Tape::clear() {
  nodes_.clear();
  grads_.clear();
  grad_live_.clear();
  degenerate_events_ = 0;
}

}  // namespace stereoflow
