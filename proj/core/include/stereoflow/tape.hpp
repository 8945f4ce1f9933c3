#pragma once

#include <cstddef>
#include <vector>

#include "stereoflow/field.hpp"

namespace stereoflow {

class Tape;

// Handle to a node on a tape. Cheap to copy; only valid for the tape that
// created it and until that tape is cleared.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Field& value() const;
  const Field& grad() const;
  Shape shape() const;
};

// Reverse-mode differentiation record over whole-field operations.
//
// Usage: record leaves/constants, compose operations (each op runs its
// forward kernel immediately), then backward(loss) for gradients. A built
// graph can be re-evaluated cheaply: set_leaf() new values, forward(),
// backward() — node storage is reused, nothing is reallocated.
//
// One tape is a single logical thread of execution; distinct tapes are
// fully independent and may run in parallel.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable input; gradients accumulate here.
  Var leaf(Field initial);
  // Non-differentiable input (images, masks held fixed, ...).
  Var constant(Field value);
  void set_leaf(Var v, const Field& value);

  // Elementwise. Binary operands must share shape exactly.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var abs(Var a);
  Var square(Var a);
  Var sqrt(Var a);
  Var exp(Var a);
  Var clampmin(Var a, double floor);     // max(a, floor)
  Var affine(Var a, double scale, double shift);  // scale*a + shift

  // Structural.
  Var spatial_gradient(Var a, Axis axis, int order);
  Var box_mean(Var a, int window);  // per-channel clipped-window mean
  Var channel_mean(Var a);
  Var downsample2(Var a);
  Var upsample_bilinear(Var a, int target_h, int target_w);

  // Backward bilinear warp: out(p) = sample(source, p + corr(p)), sample
  // coordinates clamped to the border. Gradients flow to source values and
  // to corr displacements (zero where the clamp is active).
  Var warp(Var source, Var corr);

  // Reductions to 1x1x1 scalars.
  Var reduce_sum(Var a);
  Var reduce_mean(Var a);
  // sum(a*mask)/sum(mask); mask is held as a constant. A mask summing to
  // zero yields value 0 with zero gradient and bumps the degeneracy counter.
  Var reduce_mean(Var a, Field mask);

  // Recompute every non-input node, in recording order.
  void forward();
  // Accumulate d(loss)/d(node) for every node contributing to `loss`,
  // which must be scalar-shaped.
  void backward(Var loss);

  const Field& value(Var v) const;
  const Field& grad(Var v) const;
  double scalar(Var v) const;  // value of a 1x1x1 var

  void clear();
  std::size_t node_count() const { return nodes_.size(); }
  // Number of degenerate-mask reductions seen by the last forward pass
  // (including recording-time evaluation of nodes added since).
  int degenerate_mask_events() const { return degenerate_events_; }

 private:
  enum class Op {
    Leaf,
    Constant,
    Add,
    Sub,
    Mul,
    Div,
    Abs,
    Square,
    Sqrt,
    Exp,
    ClampMin,
    Affine,
    SpatialGradient,
    BoxMean,
    ChannelMean,
    Downsample2,
    UpsampleBilinear,
    Warp,
    ReduceSum,
    ReduceMean,
    ReduceMeanMasked,
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    double p0 = 0.0;
    double p1 = 0.0;
    int i0 = 0;
    int i1 = 0;
    Field value;
    Field mask;  // ReduceMeanMasked only
    bool needs_grad = false;
  };

  Var push(Node node);
  void compute(Node& n);
  void propagate(int id);
  Field& grad_buffer(int id, const Shape& shape);
  const Node& node_of(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Field> grads_;
  std::vector<bool> grad_live_;
  int degenerate_events_ = 0;
};

// Expression sugar so loss assembly reads like the math.
inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }
inline Var operator*(double s, Var a) { return a.tape->affine(a, s, 0.0); }
inline Var operator+(Var a, double c) { return a.tape->affine(a, 1.0, c); }
inline Var operator-(double c, Var a) { return a.tape->affine(a, -1.0, c); }

}  // namespace stereoflow
