#pragma once

#include <functional>
#include <vector>

#include "tensor.hpp"

namespace gait {

class Tape;

/// Handle to a node on a Tape.
struct Var {
  int idx = -1;
};

/// Reverse-mode autodiff tape. Nodes are appended during the forward pass;
/// backward() replays them once in reverse order, accumulating gradients.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var input(Tensor value);
  Var constant(Tensor value);  // same as input; name documents intent

  const Tensor& value(Var v) const { return nodes_[static_cast<size_t>(v.idx)].value; }
  const Tensor& grad(Var v) const { return nodes_[static_cast<size_t>(v.idx)].grad; }

  // elementwise, same shape
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);

  Var relu(Var a);
  Var sigmoid(Var a);
  Var tanh_(Var a);
  Var sqrt_(Var a);  // requires strictly positive values
  Var recip(Var a);  // elementwise 1/x, x nonzero
  Var softmax(Var v);  // 1-D

  Var matvec(Var w, Var x);               // [m,n]*[n] -> [m]
  Var linear(Var w, Var x, Var b);        // matvec + bias
  Var conv2d(Var in, Var w, Var b, int padding);  // in [H,W,Cin], w [kh,kw,Cin,Cout]
  Var maxpool2(Var in);                   // [H,W,C] -> [H/2,W/2,C], window 2 stride 2

  Var reshape(Var a, std::vector<int> shape);
  Var concat(const std::vector<Var>& parts);        // 1-D concatenation
  Var slice0(Var a, int lo, int hi);                // slice along first axis
  Var mean_stack(const std::vector<Var>& parts);    // elementwise mean of same-shape tensors
  Var sum(Var a);                                   // -> scalar [1]
  Var dot(Var a, Var b);                            // -> scalar [1]
  Var pick(Var v, int i);                           // element as scalar [1]
  Var bmul(Var v, Var s);                           // vector times scalar node
  Var mul_const(Var a, const Tensor& mask);         // elementwise by fixed tensor (dropout)

  void backward(Var loss);  // loss must be scalar [1]

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&)> backward;  // empty for leaves
  };

  Var emplace(Tensor value, std::function<void(Tape&)> bwd);
  Tensor& grad_mut(Var v) { return nodes_[static_cast<size_t>(v.idx)].grad; }

  std::vector<Node> nodes_;
};

/// Max relative error between reverse-mode and central-difference gradients
/// of a scalar-valued function of one tensor.
double grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                  double eps = 1e-5);

}  // namespace gait
