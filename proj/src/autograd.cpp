#include "clir/autograd.hpp"

#include <cmath>
#include <utility>

#include "clir/error.hpp"

namespace clir::ag {

namespace {

void check_same_tape(const Var& a, const Var& b) {
  if (a.tape != b.tape) throw ContractError("autograd: operands belong to different tapes");
}

// id the next created node will get
std::int32_t next_id(const Tape& t) { return static_cast<std::int32_t>(t.size()); }

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

}  // namespace

Var Tape::constant(Mat v) {
  Node n;
  n.value = std::move(v);
  n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::param(Parameter& p) {
  std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  Node n;
  n.external = &p.value;
  n.grad = Mat::Zero(p.value.rows(), p.value.cols());
  Parameter* pp = &p;
  Tape* self = this;
  n.backprop = [self, id, pp]() { pp->grad += self->grad_at(id); };
  nodes_.push_back(std::move(n));
  return Var{this, id};
}

Var Tape::make_node(Mat value, std::function<void()> backprop) {
  Node n;
  n.value = std::move(value);
  n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

void Tape::backward(const Var& root, double seed) {
  if (root.tape != this) throw ContractError("autograd: backward on foreign var");
  const Mat& rv = value_at(root.id);
  if (rv.rows() != 1 || rv.cols() != 1)
    throw ContractError("autograd: backward root must be 1x1");
  nodes_[root.id].grad(0, 0) += seed;
  for (std::int32_t i = root.id; i >= 0; --i) {
    if (nodes_[i].backprop) nodes_[i].backprop();
  }
}

Var matmul(Var a, Var b) {
  check_same_tape(a, b);
  Tape* t = a.tape;
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (av.cols() != bv.rows()) throw ContractError("matmul: inner dimensions differ");
  std::int32_t id = next_id(*t);
  return t->make_node(av * bv, [t, a, b, id]() {
    const Mat& g = t->grad_at(id);
    t->grad_at(a.id) += g * b.value().transpose();
    t->grad_at(b.id) += a.value().transpose() * g;
  });
}

Var matmul_nt(Var a, Var b) {
  check_same_tape(a, b);
  Tape* t = a.tape;
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (av.cols() != bv.cols()) throw ContractError("matmul_nt: inner dimensions differ");
  std::int32_t id = next_id(*t);
  return t->make_node(av * bv.transpose(), [t, a, b, id]() {
    const Mat& g = t->grad_at(id);
    t->grad_at(a.id) += g * b.value();
    t->grad_at(b.id) += g.transpose() * a.value();
  });
}

Var add(Var a, Var b) {
  check_same_tape(a, b);
  Tape* t = a.tape;
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols())
    throw ContractError("add: shapes differ");
  std::int32_t id = next_id(*t);
  return t->make_node(av + bv, [t, a, b, id]() {
    const Mat& g = t->grad_at(id);
    t->grad_at(a.id) += g;
    t->grad_at(b.id) += g;
  });
}

Var add_rowvec(Var a, Var b) {
  check_same_tape(a, b);
  Tape* t = a.tape;
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (bv.rows() != 1 || bv.cols() != av.cols())
    throw ContractError("add_rowvec: expected a 1xN bias matching columns");
  Mat y = av;
  y.rowwise() += bv.row(0);
  std::int32_t id = next_id(*t);
  return t->make_node(std::move(y), [t, a, b, id]() {
    const Mat& g = t->grad_at(id);
    t->grad_at(a.id) += g;
    t->grad_at(b.id) += g.colwise().sum();
  });
}

Var mul(Var a, Var b) {
  check_same_tape(a, b);
  Tape* t = a.tape;
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols())
    throw ContractError("mul: shapes differ");
  std::int32_t id = next_id(*t);
  return t->make_node(av.cwiseProduct(bv), [t, a, b, id]() {
    const Mat& g = t->grad_at(id);
    t->grad_at(a.id) += g.cwiseProduct(b.value());
    t->grad_at(b.id) += g.cwiseProduct(a.value());
  });
}

Var scale(Var a, double s) {
  Tape* t = a.tape;
  std::int32_t id = next_id(*t);
  return t->make_node(a.value() * s, [t, a, s, id]() {
    t->grad_at(a.id) += t->grad_at(id) * s;
  });
}

Var softmax_rows(Var a) {
  Tape* t = a.tape;
  const Mat& av = a.value();
  Mat y(av.rows(), av.cols());
  for (Eigen::Index r = 0; r < av.rows(); ++r) {
    double mx = av.row(r).maxCoeff();
    Eigen::RowVectorXd e = (av.row(r).array() - mx).exp().matrix();
    y.row(r) = e / e.sum();
  }
  std::int32_t id = next_id(*t);
  return t->make_node(std::move(y), [t, a, id]() {
    const Mat& g = t->grad_at(id);
    const Mat& yv = t->value_at(id);
    Mat& ga = t->grad_at(a.id);
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      double dot = g.row(r).cwiseProduct(yv.row(r)).sum();
      ga.row(r) += yv.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
    }
  });
}

Var layer_norm_rows(Var x, Var gain, Var bias, double eps) {
  check_same_tape(x, gain);
  check_same_tape(x, bias);
  Tape* t = x.tape;
  const Mat& xv = x.value();
  const Mat& gv = gain.value();
  const Mat& bv = bias.value();
  Eigen::Index d = xv.cols();
  if (gv.rows() != 1 || gv.cols() != d || bv.rows() != 1 || bv.cols() != d)
    throw ContractError("layer_norm_rows: gain/bias must be 1xN matching columns");
  Mat xhat(xv.rows(), d);
  Eigen::VectorXd inv_std(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    double mean = xv.row(r).mean();
    Eigen::RowVectorXd c = (xv.row(r).array() - mean).matrix();
    double var = c.squaredNorm() / static_cast<double>(d);
    double is = 1.0 / std::sqrt(var + eps);
    inv_std(r) = is;
    xhat.row(r) = c * is;
  }
  Mat y = ((xhat.array().rowwise() * gv.row(0).array()).rowwise() + bv.row(0).array())
              .matrix();
  std::int32_t id = next_id(*t);
  return t->make_node(std::move(y),
                      [t, x, gain, bias, id, xhat = std::move(xhat),
                       inv_std = std::move(inv_std), d]() {
    const Mat& g = t->grad_at(id);
    t->grad_at(bias.id) += g.colwise().sum();
    t->grad_at(gain.id) += g.cwiseProduct(xhat).colwise().sum();
    Mat& gx = t->grad_at(x.id);
    const Mat& gv = t->value_at(gain.id);
    double dd = static_cast<double>(d);
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      Eigen::RowVectorXd dxhat = g.row(r).cwiseProduct(gv.row(0));
      double m1 = dxhat.mean();
      double m2 = dxhat.cwiseProduct(xhat.row(r)).sum() / dd;
      gx.row(r) +=
          (inv_std(r) * (dxhat.array() - m1 - xhat.row(r).array() * m2)).matrix();
    }
  });
}

Var gelu(Var x) {
  Tape* t = x.tape;
  const Mat& xv = x.value();
  Mat y = xv.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  });
  std::int32_t id = next_id(*t);
  return t->make_node(std::move(y), [t, x, id]() {
    const Mat& g = t->grad_at(id);
    const Mat& xv = t->value_at(x.id);
    Mat d = xv.unaryExpr([](double v) {
      double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      return cdf + v * pdf;
    });
    t->grad_at(x.id) += g.cwiseProduct(d);
  });
}

double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

Var sigmoid(Var x) {
  Tape* t = x.tape;
  Mat y = x.value().unaryExpr([](double v) { return sigmoid_value(v); });
  std::int32_t id = next_id(*t);
  return t->make_node(std::move(y), [t, x, id]() {
    const Mat& g = t->grad_at(id);
    const Mat& yv = t->value_at(id);
    t->grad_at(x.id) +=
        g.cwiseProduct(yv.cwiseProduct((1.0 - yv.array()).matrix()));
  });
}

Var rows(Var x, Eigen::Index start, Eigen::Index count) {
  Tape* t = x.tape;
  const Mat& xv = x.value();
  if (start < 0 || count < 0 || start + count > xv.rows())
    throw ContractError("rows: slice out of range");
  std::int32_t id = next_id(*t);
  return t->make_node(xv.middleRows(start, count), [t, x, start, count, id]() {
    t->grad_at(x.id).middleRows(start, count) += t->grad_at(id);
  });
}

Var cols(Var x, Eigen::Index start, Eigen::Index count) {
  Tape* t = x.tape;
  const Mat& xv = x.value();
  if (start < 0 || count < 0 || start + count > xv.cols())
    throw ContractError("cols: slice out of range");
  std::int32_t id = next_id(*t);
  return t->make_node(xv.middleCols(start, count), [t, x, start, count, id]() {
    t->grad_at(x.id).middleCols(start, count) += t->grad_at(id);
  });
}

Var hconcat(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("hconcat: no operands");
  Tape* t = parts[0].tape;
  Eigen::Index rows = parts[0].value().rows();
  Eigen::Index total = 0;
  for (const Var& p : parts) {
    check_same_tape(parts[0], p);
    if (p.value().rows() != rows) throw ContractError("hconcat: row counts differ");
    total += p.value().cols();
  }
  Mat y(rows, total);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    y.middleCols(at, p.value().cols()) = p.value();
    at += p.value().cols();
  }
  std::vector<Var> held(parts.begin(), parts.end());
  std::int32_t id = next_id(*t);
  return t->make_node(std::move(y), [t, held = std::move(held), id]() {
    const Mat& g = t->grad_at(id);
    Eigen::Index at = 0;
    for (const Var& p : held) {
      Eigen::Index c = p.value().cols();
      t->grad_at(p.id) += g.middleCols(at, c);
      at += c;
    }
  });
}

Var gather_rows(Tape& tape, Parameter& table, std::span<const std::int64_t> ids) {
  const Mat& tv = table.value;
  Mat y(static_cast<Eigen::Index>(ids.size()), tv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::int64_t r = ids[i];
    if (r < 0 || r >= tv.rows()) throw ContractError("gather_rows: id out of range");
    y.row(static_cast<Eigen::Index>(i)) = tv.row(r);
  }
  Tape* t = &tape;
  std::vector<std::int64_t> held(ids.begin(), ids.end());
  Parameter* pp = &table;
  std::int32_t id = next_id(*t);
  return t->make_node(std::move(y), [t, pp, held = std::move(held), id]() {
    const Mat& g = t->grad_at(id);
    for (std::size_t i = 0; i < held.size(); ++i)
      pp->grad.row(held[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var bce_with_logit(Var logit, double label) {
  Tape* t = logit.tape;
  const Mat& zv = logit.value();
  if (zv.rows() != 1 || zv.cols() != 1)
    throw ContractError("bce_with_logit: logit must be 1x1");
  double z = zv(0, 0);
  // log(1 + e^z) - y*z, evaluated without overflow on either sign
  double loss = (z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - label * z;
  Mat y(1, 1);
  y(0, 0) = loss;
  std::int32_t id = next_id(*t);
  return t->make_node(std::move(y), [t, logit, label, id]() {
    double g = t->grad_at(id)(0, 0);
    double z = t->value_at(logit.id)(0, 0);
    t->grad_at(logit.id)(0, 0) += g * (sigmoid_value(z) - label);
  });
}

}  // namespace clir::ag
