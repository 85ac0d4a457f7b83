#ifndef CIRCNET_NETBUILDER_HPP
#define CIRCNET_NETBUILDER_HPP

#include <map>
#include <utility>
#include <vector>

#include "circnet/relunet.hpp"

namespace circnet {

/**
 * Affine form over the units of one layer of a network under construction.
 * layer == -1 marks a pure constant.
 **/
template <typename Scalar>
struct Affine {
  int layer = -1;
  std::vector<std::pair<Index, Scalar>> terms;
  Scalar constant = Scalar(0);

  Affine() = default;
  Affine(const Scalar& c) : constant(c) {}
  Affine(int c) : constant(Scalar(c)) {}

  static Affine unit(int layer, Index i) {
    Affine a;
    a.layer = layer;
    a.terms.emplace_back(i, Scalar(1));
    return a;
  }

  Affine& operator+=(const Affine& o) {
    join(o);
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
  }
  Affine& operator-=(const Affine& o) { return *this += -o; }
  Affine& operator*=(const Scalar& s) {
    for (auto& t : terms) t.second *= s;
    constant *= s;
    return *this;
  }
  Affine operator-() const {
    Affine r = *this;
    r *= Scalar(-1);
    return r;
  }
  friend Affine operator+(Affine a, const Affine& b) { return a += b; }
  friend Affine operator-(Affine a, const Affine& b) { return a -= b; }
  friend Affine operator*(Affine a, const Scalar& s) { return a *= s; }
  friend Affine operator*(const Scalar& s, Affine a) { return a *= s; }

private:
  void join(const Affine& o) {
    if (o.layer == -1) return;
    if (layer == -1) layer = o.layer;
    else if (layer != o.layer) throw std::logic_error("Affine: mixing units of different layers");
  }
};

template <typename Scalar>
using AffineVec = std::vector<Affine<Scalar>>;

template <typename Scalar>
Affine<Scalar> sum(const AffineVec<Scalar>& xs) {
  Affine<Scalar> s;
  for (const auto& x : xs) s += x;
  return s;
}

/**
 * Layer-by-layer construction.  relu() closes a hidden layer whose units are
 * ReLU of the given forms and returns forms referring to the new units;
 * finish() emits the output layer.
 **/
template <typename Scalar>
class NetBuilder {
public:
  explicit NetBuilder(Index in_width) : width_(in_width) {
    if (in_width < 1) throw std::invalid_argument("NetBuilder: input width must be positive");
  }

  AffineVec<Scalar> inputs() const {
    if (layer_ != 0) throw std::logic_error("NetBuilder: inputs() after first layer");
    AffineVec<Scalar> v;
    for (Index i = 0; i < width_; ++i) v.push_back(Affine<Scalar>::unit(0, i));
    return v;
  }

  int depth() const { return layer_; }

  AffineVec<Scalar> relu(const AffineVec<Scalar>& pre) {
    if (pre.empty()) throw std::invalid_argument("NetBuilder: empty layer");
    layers_.push_back(make_layer(pre));
    ++layer_;
    width_ = static_cast<Index>(pre.size());
    AffineVec<Scalar> out;
    out.reserve(pre.size());
    for (Index i = 0; i < width_; ++i) out.push_back(Affine<Scalar>::unit(layer_, i));
    return out;
  }

  Affine<Scalar> relu1(const Affine<Scalar>& pre) { return relu(AffineVec<Scalar>{pre}).front(); }

  // values known to be >= 0 on the domain pass through one unit each
  AffineVec<Scalar> carry(const AffineVec<Scalar>& xs) const { return xs; }

  Mlp<Scalar> finish(const AffineVec<Scalar>& outputs) {
    if (outputs.empty()) throw std::invalid_argument("NetBuilder: no outputs");
    layers_.push_back(make_layer(outputs));
    Mlp<Scalar> net(std::move(layers_));
    layers_.clear();
    return net;
  }

private:
  AffineLayer<Scalar> make_layer(const AffineVec<Scalar>& forms) const {
    std::vector<Eigen::Triplet<Scalar>> trip;
    VectorX<Scalar> b(static_cast<Index>(forms.size()));
    for (size_t r = 0; r < forms.size(); ++r) {
      const auto& f = forms[r];
      if (f.layer != -1 && f.layer != layer_) throw std::logic_error("NetBuilder: form refers to a stale layer");
      std::map<Index, Scalar> merged;
      for (const auto& t : f.terms) {
        if (t.first < 0 || t.first >= width_) throw std::logic_error("NetBuilder: unit index out of range");
        merged[t.first] += t.second;
      }
      for (const auto& [c, v] : merged)
        if (v != Scalar(0)) trip.emplace_back(static_cast<Index>(r), c, v);
      b[static_cast<Index>(r)] = f.constant;
    }
    SparseRows<Scalar> w(static_cast<Index>(forms.size()), width_);
    w.setFromTriplets(trip.begin(), trip.end());
    return AffineLayer<Scalar>(std::move(w), std::move(b));
  }

  Index width_;
  int layer_ = 0;
  std::vector<AffineLayer<Scalar>> layers_;
};

// x = ReLU(x) - ReLU(-x); two units per coordinate
template <typename Scalar>
AffineVec<Scalar> pass_signed(NetBuilder<Scalar>& nb, const AffineVec<Scalar>& xs) {
  AffineVec<Scalar> pre;
  for (const auto& x : xs) {
    pre.push_back(x);
    pre.push_back(-x);
  }
  AffineVec<Scalar> h = nb.relu(pre);
  AffineVec<Scalar> out;
  for (size_t i = 0; i < xs.size(); ++i) out.push_back(h[2 * i] - h[2 * i + 1]);
  return out;
}

}  // namespace circnet

#endif
