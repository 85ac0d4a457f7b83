#ifndef CIRCNET_RELUNET_HPP
#define CIRCNET_RELUNET_HPP

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "circnet/dyadic.hpp"

namespace circnet {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using SparseRows = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

using Index = Eigen::Index;

// y = W x + b; no activation
template <typename Scalar>
struct AffineLayer {
  SparseRows<Scalar> weights;
  VectorX<Scalar> bias;

  AffineLayer() = default;
  AffineLayer(SparseRows<Scalar> w, VectorX<Scalar> b) : weights(std::move(w)), bias(std::move(b)) {
    if (weights.rows() != bias.size()) throw std::invalid_argument("AffineLayer: bias size does not match rows");
    weights.prune(Scalar(0));
    weights.makeCompressed();
  }
  static AffineLayer from_dense(const MatrixX<Scalar>& w, const VectorX<Scalar>& b) {
    return AffineLayer(w.sparseView(Scalar(0), Scalar(0)), b);
  }

  Index in_width() const { return weights.cols(); }
  Index out_width() const { return weights.rows(); }
  Index nonzeros() const {
    Index n = weights.nonZeros();
    for (Index i = 0; i < bias.size(); ++i) n += bias[i] != Scalar(0);
    return n;
  }
  template <typename Derived>
  VectorX<Scalar> apply(const Eigen::MatrixBase<Derived>& x) const {
    return weights * x + bias;
  }
  bool operator==(const AffineLayer& o) const {
    return in_width() == o.in_width() && out_width() == o.out_width() && bias == o.bias &&
           MatrixX<Scalar>(weights) == MatrixX<Scalar>(o.weights);
  }
};

template <typename Scalar>
inline Scalar relu(const Scalar& x) {
  return x > Scalar(0) ? x : Scalar(0);
}

/**
 * Chain of affine layers with ReLU between consecutive layers, none after
 * the last.  depth = number of hidden activations.
 **/
template <typename Scalar>
class Mlp {
public:
  using Layer = AffineLayer<Scalar>;

  Mlp() = default;
  explicit Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("Mlp: at least one layer required");
    for (size_t i = 1; i < layers_.size(); ++i)
      if (layers_[i].in_width() != layers_[i - 1].out_width())
        throw std::invalid_argument("Mlp: width mismatch between layers " + std::to_string(i - 1) +
                                    " and " + std::to_string(i));
  }

  const std::vector<Layer>& layers() const { return layers_; }
  bool empty() const { return layers_.empty(); }
  Index in_width() const { return layers_.front().in_width(); }
  Index out_width() const { return layers_.back().out_width(); }
  int depth() const { return static_cast<int>(layers_.size()) - 1; }
  Index width() const {
    Index w = 0;
    for (size_t i = 0; i + 1 < layers_.size(); ++i) w = std::max(w, layers_[i].out_width());
    return w;
  }
  Index nonzeros() const {
    Index n = 0;
    for (const auto& l : layers_) n += l.nonzeros();
    return n;
  }

  template <typename Derived>
  VectorX<Scalar> evaluate(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != in_width())
      throw std::invalid_argument("evaluate: input width " + std::to_string(x.size()) + ", network expects " +
                                  std::to_string(in_width()));
    VectorX<Scalar> h = x;
    for (size_t i = 0; i < layers_.size(); ++i) {
      h = layers_[i].apply(h);
      if (i + 1 < layers_.size()) h = h.unaryExpr([](const Scalar& v) { return relu(v); });
    }
    return h;
  }

  bool operator==(const Mlp& o) const { return layers_ == o.layers_; }

private:
  std::vector<Layer> layers_;
};

template <typename Scalar>
SparseRows<Scalar> identity_sparse(Index n) {
  SparseRows<Scalar> m(n, n);
  m.setIdentity();
  return m;
}

template <typename Scalar>
SparseRows<Scalar> vstack(const SparseRows<Scalar>& a, const SparseRows<Scalar>& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("vstack: column mismatch");
  std::vector<Eigen::Triplet<Scalar>> t;
  t.reserve(a.nonZeros() + b.nonZeros());
  for (Index r = 0; r < a.outerSize(); ++r)
    for (typename SparseRows<Scalar>::InnerIterator it(a, r); it; ++it) t.emplace_back(r, it.col(), it.value());
  for (Index r = 0; r < b.outerSize(); ++r)
    for (typename SparseRows<Scalar>::InnerIterator it(b, r); it; ++it)
      t.emplace_back(a.rows() + r, it.col(), it.value());
  SparseRows<Scalar> m(a.rows() + b.rows(), a.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

template <typename Scalar>
SparseRows<Scalar> hstack(const SparseRows<Scalar>& a, const SparseRows<Scalar>& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("hstack: row mismatch");
  std::vector<Eigen::Triplet<Scalar>> t;
  t.reserve(a.nonZeros() + b.nonZeros());
  for (Index r = 0; r < a.outerSize(); ++r)
    for (typename SparseRows<Scalar>::InnerIterator it(a, r); it; ++it) t.emplace_back(r, it.col(), it.value());
  for (Index r = 0; r < b.outerSize(); ++r)
    for (typename SparseRows<Scalar>::InnerIterator it(b, r); it; ++it)
      t.emplace_back(r, a.cols() + it.col(), it.value());
  SparseRows<Scalar> m(a.rows(), a.cols() + b.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

template <typename Scalar>
SparseRows<Scalar> block_diag(const std::vector<const SparseRows<Scalar>*>& blocks) {
  Index rows = 0, cols = 0;
  for (auto* b : blocks) {
    rows += b->rows();
    cols += b->cols();
  }
  std::vector<Eigen::Triplet<Scalar>> t;
  Index r0 = 0, c0 = 0;
  for (auto* b : blocks) {
    for (Index r = 0; r < b->outerSize(); ++r)
      for (typename SparseRows<Scalar>::InnerIterator it(*b, r); it; ++it)
        t.emplace_back(r0 + r, c0 + it.col(), it.value());
    r0 += b->rows();
    c0 += b->cols();
  }
  SparseRows<Scalar> m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// exact identity on R^n: ReLU(x) - ReLU(-x); depth 1, width 2n, 4n params
template <typename Scalar>
Mlp<Scalar> identity_net(Index n) {
  if (n < 1) throw std::invalid_argument("identity_net: n must be positive");
  SparseRows<Scalar> id = identity_sparse<Scalar>(n);
  SparseRows<Scalar> neg = -id;
  AffineLayer<Scalar> in(vstack(id, neg), VectorX<Scalar>::Zero(2 * n));
  AffineLayer<Scalar> out(hstack(id, neg), VectorX<Scalar>::Zero(n));
  return Mlp<Scalar>({in, out});
}

/**
 * g after f.  With fuse, the affine maps at the seam are multiplied out
 * (depth f + depth g).  Without, the seam passes through an exact identity
 * pair (depth f + depth g + 1) so both networks stay visible layer by layer.
 **/
template <typename Scalar>
Mlp<Scalar> compose(const Mlp<Scalar>& f, const Mlp<Scalar>& g, bool fuse = false) {
  if (f.out_width() != g.in_width())
    throw std::invalid_argument("compose: out_width(f)=" + std::to_string(f.out_width()) +
                                " != in_width(g)=" + std::to_string(g.in_width()));
  std::vector<AffineLayer<Scalar>> layers(f.layers().begin(), f.layers().end() - 1);
  const auto& last = f.layers().back();
  const auto& first = g.layers().front();
  if (fuse) {
    SparseRows<Scalar> w = first.weights * last.weights;
    VectorX<Scalar> b = first.weights * last.bias + first.bias;
    layers.emplace_back(std::move(w), std::move(b));
  } else {
    SparseRows<Scalar> neg = -last.weights;
    layers.emplace_back(vstack(last.weights, neg), (VectorX<Scalar>(2 * last.bias.size()) << last.bias, -last.bias).finished());
    SparseRows<Scalar> gneg = -first.weights;
    layers.emplace_back(hstack(first.weights, gneg), first.bias);
  }
  layers.insert(layers.end(), g.layers().begin() + 1, g.layers().end());
  return Mlp<Scalar>(std::move(layers));
}

// extend f by identity layers until it has the requested depth
template <typename Scalar>
Mlp<Scalar> pad_depth(Mlp<Scalar> f, int depth) {
  while (f.depth() < depth) f = compose(f, identity_net<Scalar>(f.out_width()), true);
  return f;
}

enum class InputMode { Disjoint, Shared };

/**
 * Block-diagonal stacking.  Disjoint: branch i reads its own slice of the
 * input.  Shared: every branch reads the whole input.  Shorter branches are
 * padded with identity nets to the common depth.
 **/
template <typename Scalar>
Mlp<Scalar> parallelize(const std::vector<Mlp<Scalar>>& nets, InputMode mode = InputMode::Disjoint) {
  if (nets.empty()) throw std::invalid_argument("parallelize: no networks");
  if (nets.size() == 1) return nets.front();
  int depth = 0;
  for (const auto& n : nets) depth = std::max(depth, n.depth());
  std::vector<Mlp<Scalar>> padded;
  padded.reserve(nets.size());
  for (const auto& n : nets) {
    if (mode == InputMode::Shared && n.in_width() != nets.front().in_width())
      throw std::invalid_argument("parallelize: shared input requires equal input widths");
    padded.push_back(pad_depth(n, depth));
  }
  std::vector<AffineLayer<Scalar>> layers;
  for (int l = 0; l <= depth; ++l) {
    std::vector<const SparseRows<Scalar>*> ws;
    Index bias_len = 0;
    for (const auto& n : padded) {
      ws.push_back(&n.layers()[l].weights);
      bias_len += n.layers()[l].bias.size();
    }
    VectorX<Scalar> b(bias_len);
    Index off = 0;
    for (const auto& n : padded) {
      const auto& nb = n.layers()[l].bias;
      b.segment(off, nb.size()) = nb;
      off += nb.size();
    }
    if (l == 0 && mode == InputMode::Shared) {
      SparseRows<Scalar> w = *ws.front();
      for (size_t i = 1; i < ws.size(); ++i) w = vstack(w, *ws[i]);
      layers.emplace_back(std::move(w), std::move(b));
    } else {
      layers.emplace_back(block_diag(ws), std::move(b));
    }
  }
  return Mlp<Scalar>(std::move(layers));
}

// affine-only network (depth 0)
template <typename Scalar>
Mlp<Scalar> linear_net(const MatrixX<Scalar>& w, const VectorX<Scalar>& b) {
  return Mlp<Scalar>({AffineLayer<Scalar>::from_dense(w, b)});
}

// fold a fixed linear map into the input side of f: x -> f(P x + c)
template <typename Scalar>
Mlp<Scalar> precompose_linear(const SparseRows<Scalar>& p, const VectorX<Scalar>& c, const Mlp<Scalar>& f) {
  if (p.rows() != f.in_width()) throw std::invalid_argument("precompose_linear: width mismatch");
  std::vector<AffineLayer<Scalar>> layers = f.layers();
  const auto& first = f.layers().front();
  layers.front() = AffineLayer<Scalar>(SparseRows<Scalar>(first.weights * p), first.weights * c + first.bias);
  return Mlp<Scalar>(std::move(layers));
}

// x -> P f(x) + c
template <typename Scalar>
Mlp<Scalar> postcompose_linear(const Mlp<Scalar>& f, const SparseRows<Scalar>& p, const VectorX<Scalar>& c) {
  if (p.cols() != f.out_width()) throw std::invalid_argument("postcompose_linear: width mismatch");
  std::vector<AffineLayer<Scalar>> layers = f.layers();
  const auto& last = f.layers().back();
  layers.back() = AffineLayer<Scalar>(SparseRows<Scalar>(p * last.weights), p * last.bias + c);
  return Mlp<Scalar>(std::move(layers));
}

enum class SpecialMatrix { A2B, A2BMinus, Pi2B, LShift, RShift, Ones };

template <typename Scalar>
MatrixX<Scalar> special_matrix(SpecialMatrix kind, Index b) {
  if (b < 1) throw std::invalid_argument("special_matrix: B must be positive");
  using M = MatrixX<Scalar>;
  M id = M::Identity(b, b);
  switch (kind) {
    case SpecialMatrix::A2B: {
      M m(b, 2 * b);
      m << id, id;
      return m;
    }
    case SpecialMatrix::A2BMinus: {
      M m(b, 2 * b);
      m << id, -id;
      return m;
    }
    case SpecialMatrix::Pi2B: {
      M m = M::Zero(2 * b, 2 * b);
      m.topRightCorner(b, b) = id;
      m.bottomLeftCorner(b, b) = id;
      return m;
    }
    case SpecialMatrix::LShift: {
      // (L a)_i = a_{i+1}, most significant bit first
      M m = M::Zero(b, b);
      for (Index i = 0; i + 1 < b; ++i) m(i, i + 1) = Scalar(1);
      return m;
    }
    case SpecialMatrix::RShift: {
      M m = M::Zero(b, b);
      for (Index i = 1; i < b; ++i) m(i, i - 1) = Scalar(1);
      return m;
    }
    case SpecialMatrix::Ones:
      return M::Constant(b, 1, Scalar(1));
  }
  throw std::invalid_argument("special_matrix: unknown kind");
}

struct ComplexityReport {
  long depth = 0;
  long width = 0;
  long nonzero_params = 0;
  std::optional<long> bound_depth;
  std::optional<long> bound_width;
  std::optional<long> bound_params;
  std::string source;

  bool depth_ok() const { return !bound_depth || depth <= *bound_depth; }
  bool width_ok() const { return !bound_width || width <= *bound_width; }
  bool params_ok() const { return !bound_params || nonzero_params <= *bound_params; }
  bool within_bounds() const { return depth_ok() && width_ok() && params_ok(); }
};

template <typename Scalar>
ComplexityReport stats(const Mlp<Scalar>& net) {
  ComplexityReport r;
  r.depth = net.depth();
  r.width = static_cast<long>(net.width());
  r.nonzero_params = static_cast<long>(net.nonzeros());
  return r;
}

using Net = Mlp<Dyadic>;
using Vec = VectorX<Dyadic>;

inline Vec to_vec(const std::vector<Dyadic>& v) {
  Vec r(static_cast<Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) r[static_cast<Index>(i)] = v[i];
  return r;
}

inline std::vector<Dyadic> from_vec(const Vec& v) { return std::vector<Dyadic>(v.data(), v.data() + v.size()); }

}  // namespace circnet

#endif
