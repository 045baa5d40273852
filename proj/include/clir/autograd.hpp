#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace clir::ag {

using Mat = Eigen::MatrixXd;

// Named trainable tensor with a persistent gradient accumulator. Gradients
// are added to by Tape::backward and cleared by the optimizer between steps.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

// Reverse-mode tape over dense matrices. Nodes are created in topological
// order by the free functions below; backward() walks them in reverse. One
// tape per forward pass; all math in 64-bit floats.
class Tape {
 public:
  struct Var {
    Tape* tape = nullptr;
    std::int32_t id = -1;

    const Mat& value() const { return tape->value_at(id); }
    const Mat& grad() const { return tape->grad_at(id); }
  };

  Var constant(Mat v);
  // Leaf sharing the parameter's storage; backward adds into p.grad.
  Var param(Parameter& p);
  Var make_node(Mat value, std::function<void()> backprop);

  const Mat& value_at(std::int32_t id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.value;
  }
  Mat& grad_at(std::int32_t id) { return nodes_[id].grad; }
  const Mat& grad_at(std::int32_t id) const { return nodes_[id].grad; }

  // Seeds the (1x1) root gradient with `seed` and propagates. Accumulates:
  // parameter gradients are not cleared here.
  void backward(const Var& root, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    const Mat* external = nullptr;
    Mat grad;
    std::function<void()> backprop;
  };
  std::vector<Node> nodes_;
};

using Var = Tape::Var;

Var matmul(Var a, Var b);       // A * B
Var matmul_nt(Var a, Var b);    // A * B^T
Var add(Var a, Var b);          // same shape
Var add_rowvec(Var a, Var b);   // broadcast 1xN row vector over rows of MxN
Var mul(Var a, Var b);          // elementwise
Var scale(Var a, double s);
Var softmax_rows(Var a);
Var layer_norm_rows(Var x, Var gain, Var bias, double eps);
Var gelu(Var x);                // exact erf form
Var sigmoid(Var x);
Var rows(Var x, Eigen::Index start, Eigen::Index count);
Var cols(Var x, Eigen::Index start, Eigen::Index count);
Var hconcat(std::span<const Var> parts);
// Embedding lookup straight from a parameter table; backward scatters into
// table.grad without materializing a table-sized node.
Var gather_rows(Tape& tape, Parameter& table, std::span<const std::int64_t> ids);
// Numerically stable fused sigmoid + binary cross-entropy on a 1x1 logit.
Var bce_with_logit(Var logit, double label);

double sigmoid_value(double x);

}  // namespace clir::ag
