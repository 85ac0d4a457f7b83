// Layer-at-a-time construction with values carried across layers.
#ifndef CIRCNET_STAGE_HPP
#define CIRCNET_STAGE_HPP

#include <map>
#include <vector>

#include "circnet/netbuilder.hpp"

namespace circnet::detail {

using Form = Affine<Dyadic>;
using Forms = AffineVec<Dyadic>;

inline Forms concat(Forms a, const Forms& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline Forms slice(const Forms& v, size_t from, size_t len) {
  return Forms(v.begin() + static_cast<long>(from), v.begin() + static_cast<long>(from + len));
}

/**
 * Wraps NetBuilder with held slots.  Every held form is re-emitted at each
 * new layer: nonnegative slots as ReLU(f) (one unit), signed slots as
 * ReLU(f), ReLU(-f) (two units).  A nonnegative slot holding a form that
 * can be negative applies a genuine ReLU, which is how side computations
 * ride along with the main one.
 **/
class Stage {
public:
  explicit Stage(Index in_width) : nb_(in_width) {}

  Forms inputs() const { return nb_.inputs(); }
  int depth() const { return nb_.depth(); }

  int hold(const Forms& v, bool is_signed = false) {
    slots_[next_] = Slot{v, is_signed};
    return next_++;
  }
  const Forms& peek(int slot) const { return slots_.at(slot).forms; }
  void set(int slot, const Forms& v) { slots_.at(slot).forms = v; }
  Forms take(int slot) {
    Forms v = slots_.at(slot).forms;
    slots_.erase(slot);
    return v;
  }

  Forms relu(const Forms& pre) {
    Forms all = pre;
    for (const auto& [id, s] : slots_) {
      for (const auto& f : s.forms) {
        all.push_back(f);
        if (s.is_signed) all.push_back(-f);
      }
    }
    Forms h = nb_.relu(all);
    size_t k = pre.size();
    for (auto& [id, s] : slots_) {
      for (auto& f : s.forms) {
        if (s.is_signed) {
          f = h[k] - h[k + 1];
          k += 2;
        } else {
          f = h[k++];
        }
      }
    }
    return Forms(h.begin(), h.begin() + static_cast<long>(pre.size()));
  }

  // advance every held slot by one layer without new units
  Form relu1(const Form& pre) { return relu(Forms{pre})[0]; }
  void tick() { relu({}); }

  Net finish(const Forms& outputs) {
    if (!slots_.empty()) throw std::logic_error("Stage: slots still held at finish");
    return nb_.finish(outputs);
  }

private:
  struct Slot {
    Forms forms;
    bool is_signed = false;
  };
  NetBuilder<Dyadic> nb_;
  std::map<int, Slot> slots_;
  int next_ = 0;
};

/**
 * Inline a finished network: its first layer reads the given forms, its
 * hidden layers become layers of the stage, and its output layer comes back
 * as forms over the stage's current layer (fused composition).
 **/
struct Sub {
  const Net* net = nullptr;
  Forms in;
  bool nonneg_out = false;  // outputs known to be >= 0 (cheaper padding)
};

inline Forms affine_apply(const AffineLayer<Dyadic>& l, const Forms& in) {
  if (static_cast<Index>(in.size()) != l.in_width()) throw std::logic_error("inline: width mismatch");
  Forms out;
  out.reserve(static_cast<size_t>(l.out_width()));
  for (Index r = 0; r < l.out_width(); ++r) {
    Form f(l.bias[r]);
    for (SparseRows<Dyadic>::InnerIterator it(l.weights, r); it; ++it) f += in[static_cast<size_t>(it.col())] * it.value();
    out.push_back(f);
  }
  return out;
}

// runs all subs in lockstep; shorter ones are carried until the longest ends
inline std::vector<Forms> run_parallel(Stage& st, const std::vector<Sub>& subs) {
  int depth = 0;
  for (const auto& s : subs) depth = std::max(depth, s.net->depth());
  std::vector<Forms> cur;
  for (const auto& s : subs) cur.push_back(s.in);
  std::vector<int> held(subs.size(), -1);
  for (int l = 0; l < depth; ++l) {
    Forms pre;
    std::vector<size_t> off(subs.size(), 0);
    for (size_t i = 0; i < subs.size(); ++i) {
      int d = subs[i].net->depth();
      if (l < d) {
        off[i] = pre.size();
        Forms z = affine_apply(subs[i].net->layers()[static_cast<size_t>(l)], cur[i]);
        pre.insert(pre.end(), z.begin(), z.end());
      } else if (l == d) {
        cur[i] = affine_apply(subs[i].net->layers().back(), cur[i]);
        held[i] = st.hold(cur[i], !subs[i].nonneg_out);
      }
    }
    Forms h = st.relu(pre);
    for (size_t i = 0; i < subs.size(); ++i) {
      if (l < subs[i].net->depth())
        cur[i] = slice(h, off[i], static_cast<size_t>(subs[i].net->layers()[static_cast<size_t>(l)].out_width()));
    }
  }
  std::vector<Forms> out(subs.size());
  for (size_t i = 0; i < subs.size(); ++i) {
    if (held[i] >= 0) out[i] = st.take(held[i]);
    else out[i] = affine_apply(subs[i].net->layers().back(), cur[i]);
  }
  return out;
}

inline Forms run_net(Stage& st, const Net& net, const Forms& in) {
  return run_parallel(st, {Sub{&net, in, false}}).front();
}

}  // namespace circnet::detail

#endif
