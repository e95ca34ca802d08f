#pragma once

// Reverse-mode differentiation over dense row-major matrices.
//
// A Tape records every operation of one forward computation. Each recorded
// node holds its value, a lazily allocated gradient of the same shape, and a
// closure that pushes its gradient to its inputs. Var is a cheap handle to a
// node; the free functions below build the graph.

#include <Eigen/Core>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hetjssp::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Named trainable tensor. grad has the shape of value.
template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;

  Eigen::Index size() const { return value.size(); }
};

template <typename Scalar>
class Tape;

template <typename Scalar>
class Var {
 public:
  Var() = default;
  Var(Tape<Scalar>* tape, int id) : tape_(tape), id_(id) {}

  Tape<Scalar>& tape() const { return *tape_; }
  int id() const { return id_; }
  const Matrix<Scalar>& value() const { return tape_->value(id_); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Convenience for 1x1 results.
  Scalar item() const {
    assert(value().size() == 1);
    return value()(0, 0);
  }

 private:
  Tape<Scalar>* tape_ = nullptr;
  int id_ = -1;
};

template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  using BackwardFn = std::function<void(Tape&)>;

  /// With grad disabled only values are recorded; backward() is unavailable.
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  Var<Scalar> constant(Mat value) {
    nodes_.push_back({std::move(value), Mat(), false, nullptr, nullptr});
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  Var<Scalar> parameter(Parameter<Scalar>& p) {
    nodes_.push_back({p.value, Mat(), grad_enabled_, nullptr, grad_enabled_ ? &p : nullptr});
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  /// Appends a node computed from `inputs`. `fn` runs during backward only
  /// when at least one input requires a gradient.
  Var<Scalar> record(Mat value, std::initializer_list<int> inputs, BackwardFn fn) {
    bool needs = false;
    if (grad_enabled_) {
      for (int i : inputs) needs = needs || nodes_[i].requires_grad;
    }
    nodes_.push_back({std::move(value), Mat(), needs, needs ? std::move(fn) : nullptr, nullptr});
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  const Mat& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

  /// Gradient buffer of a node, zero-initialized on first access.
  Mat& grad(int id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  /// Propagates d(loss)/d(node) for every recorded node, accumulates into the
  /// parameters that were bound with parameter(), then discards the record.
  void backward(Var<Scalar> loss) {
    if (!grad_enabled_) throw std::logic_error("backward: tape was recorded without gradients");
    if (nodes_.empty() || loss.id() < 0) throw std::logic_error("backward: nothing recorded");
    if (loss.value().size() != 1) throw std::logic_error("backward: loss must be a scalar");
    grad(loss.id()).setOnes();
    for (int id = loss.id(); id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.requires_grad || n.grad.size() == 0) continue;
      if (n.backward) n.backward(*this);
      if (n.param != nullptr) {
        if (n.param->grad.size() == 0) n.param->grad = Mat::Zero(n.value.rows(), n.value.cols());
        n.param->grad += n.grad;
      }
    }
    clear();
  }

  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad;
    BackwardFn backward;
    Parameter<Scalar>* param;
  };

  bool grad_enabled_;
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Elementwise and linear-algebra primitives.

template <typename Scalar>
Var<Scalar> matmul(Var<Scalar> a, Var<Scalar> b) {
  auto& t = a.tape();
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Matrix<Scalar> out = a.value() * b.value();
  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    if (t.requires_grad(ia)) t.grad(ia).noalias() += go * t.value(ib).transpose();
    if (t.requires_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * go;
  });
}

template <typename Scalar>
Var<Scalar> operator+(Var<Scalar> a, Var<Scalar> b) {
  auto& t = a.tape();
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: shape mismatch");
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() + b.value(), {ia, ib}, [ia, ib, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    if (t.requires_grad(ia)) t.grad(ia) += go;
    if (t.requires_grad(ib)) t.grad(ib) += go;
  });
}

template <typename Scalar>
Var<Scalar> operator-(Var<Scalar> a, Var<Scalar> b) {
  auto& t = a.tape();
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("sub: shape mismatch");
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() - b.value(), {ia, ib}, [ia, ib, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    if (t.requires_grad(ia)) t.grad(ia) += go;
    if (t.requires_grad(ib)) t.grad(ib) -= go;
  });
}

template <typename Scalar>
Var<Scalar> operator*(Scalar s, Var<Scalar> a) {
  auto& t = a.tape();
  const int ia = a.id();
  return t.record(s * a.value(), {ia}, [ia, s, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    t.grad(ia) += s * t.grad(io);
  });
}

/// Hadamard product.
template <typename Scalar>
Var<Scalar> cwise_mul(Var<Scalar> a, Var<Scalar> b) {
  auto& t = a.tape();
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("cwise_mul: shape mismatch");
  const int ia = a.id(), ib = b.id();
  Matrix<Scalar> out = a.value().cwiseProduct(b.value());
  return t.record(std::move(out), {ia, ib}, [ia, ib, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    if (t.requires_grad(ia)) t.grad(ia) += go.cwiseProduct(t.value(ib));
    if (t.requires_grad(ib)) t.grad(ib) += go.cwiseProduct(t.value(ia));
  });
}

/// x + 1 * row, with `row` a 1 x cols bias.
template <typename Scalar>
Var<Scalar> add_bias(Var<Scalar> x, Var<Scalar> row) {
  auto& t = x.tape();
  if (row.rows() != 1 || row.cols() != x.cols()) throw std::invalid_argument("add_bias: bias shape mismatch");
  const int ix = x.id(), ib = row.id();
  Matrix<Scalar> out = x.value().rowwise() + row.value().row(0);
  return t.record(std::move(out), {ix, ib}, [ix, ib, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    if (t.requires_grad(ix)) t.grad(ix) += go;
    if (t.requires_grad(ib)) t.grad(ib) += go.colwise().sum();
  });
}

template <typename Scalar>
Var<Scalar> relu(Var<Scalar> x) {
  auto& t = x.tape();
  const int ix = x.id();
  Matrix<Scalar> out = x.value().cwiseMax(Scalar(0));
  return t.record(std::move(out), {ix}, [ix, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    t.grad(ix) += (t.value(ix).array() > Scalar(0)).select(t.grad(io), Scalar(0)).matrix();
  });
}

template <typename Scalar>
Var<Scalar> exp(Var<Scalar> x) {
  auto& t = x.tape();
  const int ix = x.id();
  Matrix<Scalar> out = x.value().array().exp().matrix();
  return t.record(std::move(out), {ix}, [ix, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    t.grad(ix) += t.grad(io).cwiseProduct(t.value(io));
  });
}

template <typename Scalar>
Var<Scalar> square(Var<Scalar> x) {
  auto& t = x.tape();
  const int ix = x.id();
  Matrix<Scalar> out = x.value().array().square().matrix();
  return t.record(std::move(out), {ix}, [ix, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    t.grad(ix) += Scalar(2) * t.grad(io).cwiseProduct(t.value(ix));
  });
}

/// Gradient passes where lo <= x <= hi.
template <typename Scalar>
Var<Scalar> clamp(Var<Scalar> x, Scalar lo, Scalar hi) {
  auto& t = x.tape();
  const int ix = x.id();
  Matrix<Scalar> out = x.value().cwiseMax(lo).cwiseMin(hi);
  return t.record(std::move(out), {ix}, [ix, lo, hi, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& xv = t.value(ix).array();
    t.grad(ix) += ((xv >= lo) && (xv <= hi)).select(t.grad(io).array(), Scalar(0)).matrix();
  });
}

/// Elementwise min; ties route the gradient to `a`.
template <typename Scalar>
Var<Scalar> minimum(Var<Scalar> a, Var<Scalar> b) {
  auto& t = a.tape();
  const int ia = a.id(), ib = b.id();
  Matrix<Scalar> out = a.value().cwiseMin(b.value());
  return t.record(std::move(out), {ia, ib}, [ia, ib, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto take_a = (t.value(ia).array() <= t.value(ib).array()).eval();
    const auto& go = t.grad(io).array();
    if (t.requires_grad(ia)) t.grad(ia).array() += take_a.select(go, Scalar(0));
    if (t.requires_grad(ib)) t.grad(ib).array() += take_a.select(Scalar(0), go);
  });
}

/// Elementwise max; ties route the gradient to `a`.
template <typename Scalar>
Var<Scalar> maximum(Var<Scalar> a, Var<Scalar> b) {
  auto& t = a.tape();
  const int ia = a.id(), ib = b.id();
  Matrix<Scalar> out = a.value().cwiseMax(b.value());
  return t.record(std::move(out), {ia, ib}, [ia, ib, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto take_a = (t.value(ia).array() >= t.value(ib).array()).eval();
    const auto& go = t.grad(io).array();
    if (t.requires_grad(ia)) t.grad(ia).array() += take_a.select(go, Scalar(0));
    if (t.requires_grad(ib)) t.grad(ib).array() += take_a.select(Scalar(0), go);
  });
}

template <typename Scalar>
Var<Scalar> sum(Var<Scalar> x) {
  auto& t = x.tape();
  const int ix = x.id();
  Matrix<Scalar> out(1, 1);
  out(0, 0) = x.value().sum();
  return t.record(std::move(out), {ix}, [ix, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    t.grad(ix).array() += t.grad(io)(0, 0);
  });
}

template <typename Scalar>
Var<Scalar> mean(Var<Scalar> x) {
  if (x.value().size() == 0) throw std::invalid_argument("mean: empty tensor");
  return (Scalar(1) / static_cast<Scalar>(x.value().size())) * sum(x);
}

/// [a | b] side by side.
template <typename Scalar>
Var<Scalar> concat_cols(Var<Scalar> a, Var<Scalar> b) {
  auto& t = a.tape();
  if (a.rows() != b.rows()) throw std::invalid_argument("concat_cols: row count mismatch");
  Matrix<Scalar> out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const int ia = a.id(), ib = b.id();
  const auto ca = a.cols(), cb = b.cols();
  return t.record(std::move(out), {ia, ib}, [ia, ib, ca, cb, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    if (t.requires_grad(ia)) t.grad(ia) += go.leftCols(ca);
    if (t.requires_grad(ib)) t.grad(ib) += go.rightCols(cb);
  });
}

/// [a ; b] stacked vertically.
template <typename Scalar>
Var<Scalar> concat_rows(Var<Scalar> a, Var<Scalar> b) {
  auto& t = a.tape();
  if (a.cols() != b.cols()) throw std::invalid_argument("concat_rows: column count mismatch");
  Matrix<Scalar> out(a.rows() + b.rows(), a.cols());
  out << a.value(), b.value();
  const int ia = a.id(), ib = b.id();
  const auto ra = a.rows(), rb = b.rows();
  return t.record(std::move(out), {ia, ib}, [ia, ib, ra, rb, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    if (t.requires_grad(ia)) t.grad(ia) += go.topRows(ra);
    if (t.requires_grad(ib)) t.grad(ib) += go.bottomRows(rb);
  });
}

// ---------------------------------------------------------------------------
// Graph primitives. Index vectors are shared so closures stay cheap.

using Index = std::shared_ptr<const std::vector<int>>;

inline Index make_index(std::vector<int> idx) {
  return std::make_shared<const std::vector<int>>(std::move(idx));
}

/// out.row(k) = x.row(idx[k]).
template <typename Scalar>
Var<Scalar> gather_rows(Var<Scalar> x, Index idx) {
  auto& t = x.tape();
  const auto& xv = x.value();
  Matrix<Scalar> out(static_cast<Eigen::Index>(idx->size()), xv.cols());
  for (std::size_t k = 0; k < idx->size(); ++k) {
    assert((*idx)[k] >= 0 && (*idx)[k] < xv.rows());
    out.row(static_cast<Eigen::Index>(k)) = xv.row((*idx)[k]);
  }
  const int ix = x.id();
  return t.record(std::move(out), {ix}, [ix, idx, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    auto& gx = t.grad(ix);
    for (std::size_t k = 0; k < idx->size(); ++k) gx.row((*idx)[k]) += go.row(static_cast<Eigen::Index>(k));
  });
}

/// out.row(idx[k]) += x.row(k), with `rows` output rows.
template <typename Scalar>
Var<Scalar> scatter_add_rows(Var<Scalar> x, Index idx, Eigen::Index rows) {
  auto& t = x.tape();
  const auto& xv = x.value();
  if (static_cast<Eigen::Index>(idx->size()) != xv.rows()) throw std::invalid_argument("scatter_add_rows: index length");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(rows, xv.cols());
  for (std::size_t k = 0; k < idx->size(); ++k) out.row((*idx)[k]) += xv.row(static_cast<Eigen::Index>(k));
  const int ix = x.id();
  return t.record(std::move(out), {ix}, [ix, idx, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    auto& gx = t.grad(ix);
    for (std::size_t k = 0; k < idx->size(); ++k) gx.row(static_cast<Eigen::Index>(k)) += go.row((*idx)[k]);
  });
}

/// Per-head scaled dot products: out(e, h) = scale * <a(e, block h), b(e, block h)>,
/// where the columns split into `heads` contiguous blocks.
template <typename Scalar>
Var<Scalar> head_dot(Var<Scalar> a, Var<Scalar> b, int heads, Scalar scale) {
  auto& t = a.tape();
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.cols() % heads != 0) {
    throw std::invalid_argument("head_dot: shape mismatch");
  }
  const Eigen::Index width = a.cols() / heads;
  Matrix<Scalar> out(a.rows(), heads);
  for (int h = 0; h < heads; ++h) {
    out.col(h) = scale * a.value().middleCols(h * width, width).cwiseProduct(b.value().middleCols(h * width, width)).rowwise().sum();
  }
  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib, heads, width, scale, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    for (int h = 0; h < heads; ++h) {
      const auto g = (scale * go.col(h)).eval();
      if (t.requires_grad(ia)) {
        t.grad(ia).middleCols(h * width, width) += (t.value(ib).middleCols(h * width, width).array().colwise() * g.array()).matrix();
      }
      if (t.requires_grad(ib)) {
        t.grad(ib).middleCols(h * width, width) += (t.value(ia).middleCols(h * width, width).array().colwise() * g.array()).matrix();
      }
    }
  });
}

/// Scales each head block of v by the matching column of w:
/// out(e, block h) = w(e, h) * v(e, block h).
template <typename Scalar>
Var<Scalar> head_scale(Var<Scalar> v, Var<Scalar> w) {
  auto& t = v.tape();
  const int heads = static_cast<int>(w.cols());
  if (v.rows() != w.rows() || v.cols() % heads != 0) throw std::invalid_argument("head_scale: shape mismatch");
  const Eigen::Index width = v.cols() / heads;
  Matrix<Scalar> out(v.rows(), v.cols());
  for (int h = 0; h < heads; ++h) {
    out.middleCols(h * width, width) = (v.value().middleCols(h * width, width).array().colwise() * w.value().col(h).array()).matrix();
  }
  const int iv = v.id(), iw = w.id();
  return t.record(std::move(out), {iv, iw}, [iv, iw, heads, width, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    for (int h = 0; h < heads; ++h) {
      if (t.requires_grad(iv)) {
        t.grad(iv).middleCols(h * width, width) += (go.middleCols(h * width, width).array().colwise() * t.value(iw).col(h).array()).matrix();
      }
      if (t.requires_grad(iw)) {
        t.grad(iw).col(h) += go.middleCols(h * width, width).cwiseProduct(t.value(iv).middleCols(h * width, width)).rowwise().sum();
      }
    }
  });
}

/// Softmax of each column taken separately within every segment of rows.
/// Rows with seg[r] == s form segment s. Empty segments produce nothing.
template <typename Scalar>
Var<Scalar> segment_softmax(Var<Scalar> x, Index seg, Eigen::Index segments) {
  auto& t = x.tape();
  const auto& xv = x.value();
  if (static_cast<Eigen::Index>(seg->size()) != xv.rows()) throw std::invalid_argument("segment_softmax: index length");
  Matrix<Scalar> peak = Matrix<Scalar>::Constant(segments, xv.cols(), -std::numeric_limits<Scalar>::infinity());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) peak.row((*seg)[r]) = peak.row((*seg)[r]).cwiseMax(xv.row(r));
  Matrix<Scalar> out(xv.rows(), xv.cols());
  Matrix<Scalar> total = Matrix<Scalar>::Zero(segments, xv.cols());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    out.row(r) = (xv.row(r) - peak.row((*seg)[r])).array().exp().matrix();
    total.row((*seg)[r]) += out.row(r);
  }
  for (Eigen::Index r = 0; r < xv.rows(); ++r) out.row(r) = out.row(r).cwiseQuotient(total.row((*seg)[r]));
  const int ix = x.id();
  return t.record(std::move(out), {ix}, [ix, seg, segments, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    const auto& y = t.value(io);
    Matrix<Scalar> dot = Matrix<Scalar>::Zero(segments, y.cols());
    for (Eigen::Index r = 0; r < y.rows(); ++r) dot.row((*seg)[r]) += go.row(r).cwiseProduct(y.row(r));
    auto& gx = t.grad(ix);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      gx.row(r) += y.row(r).cwiseProduct(go.row(r) - dot.row((*seg)[r]));
    }
  });
}

/// Row-wise layer normalization with learned gain and bias (1 x cols each).
template <typename Scalar>
Var<Scalar> layer_norm(Var<Scalar> x, Var<Scalar> gain, Var<Scalar> bias, Scalar eps = Scalar(1e-5)) {
  auto& t = x.tape();
  const auto& xv = x.value();
  const Eigen::Index n = xv.cols();
  auto mu = xv.rowwise().mean().eval();
  Matrix<Scalar> centered = xv.colwise() - mu;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_std =
      (centered.array().square().rowwise().sum() / static_cast<Scalar>(n) + eps).rsqrt().matrix();
  auto normed = std::make_shared<Matrix<Scalar>>((centered.array().colwise() * inv_std.array()).matrix());
  Matrix<Scalar> out = (normed->array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += bias.value().row(0);
  const int ix = x.id(), ig = gain.id(), ib = bias.id();
  return t.record(std::move(out), {ix, ig, ib},
                  [ix, ig, ib, n, normed, inv_std, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    if (t.requires_grad(ig)) t.grad(ig) += go.cwiseProduct(*normed).colwise().sum();
    if (t.requires_grad(ib)) t.grad(ib) += go.colwise().sum();
    if (t.requires_grad(ix)) {
      Matrix<Scalar> gn = (go.array().rowwise() * t.value(ig).row(0).array()).matrix();
      auto mean_g = (gn.rowwise().sum() / static_cast<Scalar>(n)).eval();
      auto mean_gx = (gn.cwiseProduct(*normed).rowwise().sum() / static_cast<Scalar>(n)).eval();
      Matrix<Scalar> gx = gn.colwise() - mean_g;
      gx -= (normed->array().colwise() * mean_gx.array()).matrix();
      t.grad(ix) += (gx.array().colwise() * inv_std.array()).matrix();
    }
  });
}

/// Inverted dropout: survivors are scaled by 1 / (1 - rate). `draw` returns
/// uniforms in [0, 1).
template <typename Scalar, typename Uniform>
Var<Scalar> dropout(Var<Scalar> x, Scalar rate, Uniform&& draw) {
  auto& t = x.tape();
  if (rate <= Scalar(0)) return x;
  const auto& xv = x.value();
  auto keep = std::make_shared<Matrix<Scalar>>(xv.rows(), xv.cols());
  const Scalar scale = Scalar(1) / (Scalar(1) - rate);
  for (Eigen::Index k = 0; k < keep->size(); ++k) keep->data()[k] = draw() < rate ? Scalar(0) : scale;
  Matrix<Scalar> out = xv.cwiseProduct(*keep);
  const int ix = x.id();
  return t.record(std::move(out), {ix}, [ix, keep, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    t.grad(ix) += t.grad(io).cwiseProduct(*keep);
  });
}

/// Log-softmax of a column of logits taken within each segment over the
/// entries allowed by `mask`. Masked entries are -inf and receive no gradient.
/// Every segment must contain at least one allowed entry.
template <typename Scalar>
Var<Scalar> masked_log_softmax(Var<Scalar> logits, std::shared_ptr<const std::vector<bool>> mask, Index seg,
                               Eigen::Index segments) {
  auto& t = logits.tape();
  const auto& z = logits.value();
  if (z.cols() != 1 || static_cast<Eigen::Index>(mask->size()) != z.rows()) {
    throw std::invalid_argument("masked_log_softmax: expects an N x 1 column and N mask entries");
  }
  constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> peak(segments, kNegInf), total(segments, Scalar(0));
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    if ((*mask)[r]) peak[(*seg)[r]] = std::max(peak[(*seg)[r]], z(r, 0));
  }
  for (Eigen::Index s = 0; s < segments; ++s) {
    if (peak[s] == kNegInf) throw std::invalid_argument("masked_log_softmax: segment with no valid entry");
  }
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    if ((*mask)[r]) total[(*seg)[r]] += std::exp(z(r, 0) - peak[(*seg)[r]]);
  }
  Matrix<Scalar> out(z.rows(), 1);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    out(r, 0) = (*mask)[r] ? z(r, 0) - peak[(*seg)[r]] - std::log(total[(*seg)[r]]) : kNegInf;
  }
  const int iz = logits.id();
  return t.record(std::move(out), {iz}, [iz, mask, seg, segments, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    const auto& y = t.value(io);
    std::vector<Scalar> gsum(segments, Scalar(0));
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      if ((*mask)[r]) gsum[(*seg)[r]] += go(r, 0);
    }
    auto& gz = t.grad(iz);
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      if ((*mask)[r]) gz(r, 0) += go(r, 0) - std::exp(y(r, 0)) * gsum[(*seg)[r]];
    }
  });
}

/// Entropy -sum p log p per segment over allowed entries of a log-prob column.
template <typename Scalar>
Var<Scalar> masked_entropy(Var<Scalar> log_probs, std::shared_ptr<const std::vector<bool>> mask, Index seg,
                           Eigen::Index segments) {
  auto& t = log_probs.tape();
  const auto& lp = log_probs.value();
  Matrix<Scalar> out = Matrix<Scalar>::Zero(segments, 1);
  for (Eigen::Index r = 0; r < lp.rows(); ++r) {
    if ((*mask)[r]) out((*seg)[r], 0) -= std::exp(lp(r, 0)) * lp(r, 0);
  }
  const int il = log_probs.id();
  return t.record(std::move(out), {il}, [il, mask, seg, io = static_cast<int>(t.size())](Tape<Scalar>& t) {
    const auto& go = t.grad(io);
    const auto& lp = t.value(il);
    auto& gl = t.grad(il);
    for (Eigen::Index r = 0; r < lp.rows(); ++r) {
      if ((*mask)[r]) gl(r, 0) -= go((*seg)[r], 0) * std::exp(lp(r, 0)) * (lp(r, 0) + Scalar(1));
    }
  });
}

}  // namespace hetjssp::nn
