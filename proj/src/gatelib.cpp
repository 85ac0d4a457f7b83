#include "circnet/gatelib.hpp"

#include <algorithm>

#include "circnet/bounds.hpp"
#include "circnet/fixnum.hpp"
#include "stage.hpp"

namespace circnet {

using detail::concat;
using detail::Form;
using detail::Forms;
using detail::run_net;
using detail::run_parallel;
using detail::slice;
using detail::Stage;
using detail::Sub;

namespace {

Dyadic p2(int k) { return Dyadic::pow2(k); }

Forms bit_constants(const BitString& b) {
  Forms f;
  for (uint8_t v : b.bits) f.emplace_back(Dyadic(static_cast<int>(v)));
  return f;
}

// ---- logic ----

Net logic_net(GateOp op, int B) {
  size_t n = static_cast<size_t>(B);
  bool unary = op == GateOp::Not;
  Stage st(unary ? B : 2 * B);
  Forms x = st.inputs();
  Forms a = slice(x, 0, n), b = unary ? Forms{} : slice(x, n, n);
  Forms pre, out;
  switch (op) {
    case GateOp::Not:
      for (size_t i = 0; i < n; ++i) pre.push_back(1 - a[i]);
      return st.finish(st.relu(pre));
    case GateOp::And:
      for (size_t i = 0; i < n; ++i) pre.push_back(a[i] + b[i] - 1);
      return st.finish(st.relu(pre));
    case GateOp::Or: {
      for (size_t i = 0; i < n; ++i) pre.push_back(1 - a[i] - b[i]);
      Forms h = st.relu(pre);
      for (auto& f : h) f = 1 - f;
      return st.finish(st.relu(h));
    }
    case GateOp::Xor: {
      for (size_t i = 0; i < n; ++i) pre.push_back(a[i] + b[i]);
      for (size_t i = 0; i < n; ++i) pre.push_back(a[i] + b[i] - 1);
      Forms h = st.relu(pre);
      Forms mid;
      for (size_t i = 0; i < n; ++i) mid.push_back(h[i] - h[n + i] * Dyadic(2));
      return st.finish(st.relu(mid));
    }
    case GateOp::Nand: {
      for (size_t i = 0; i < n; ++i) pre.push_back(a[i] + b[i] - 1);
      Forms h = st.relu(pre);
      for (auto& f : h) f = 1 - f;
      return st.finish(st.relu(h));
    }
    case GateOp::Imply:
    case GateOp::Leq:
    case GateOp::Geq: {
      for (size_t i = 0; i < n; ++i) pre.push_back(op == GateOp::Geq ? b[i] - a[i] : a[i] - b[i]);
      Forms h = st.relu(pre);
      for (auto& f : h) f = 1 - f;
      return st.finish(h);
    }
    case GateOp::Equal: {
      for (size_t i = 0; i < n; ++i) pre.push_back(a[i] - b[i]);
      for (size_t i = 0; i < n; ++i) pre.push_back(b[i] - a[i]);
      Forms h = st.relu(pre);
      Forms s;
      for (size_t i = 0; i < n; ++i) s.push_back(h[i] + h[n + i]);
      Forms d = st.relu(s);
      for (auto& f : d) f = 1 - f;
      return st.finish(st.relu(d));
    }
    default:
      throw std::invalid_argument("logic_net: not a logic gate");
  }
}

// ---- min trees and comparators ----

// min of values known to be >= 0: min(a,b) = a - ReLU(a - b), two units per pair
Form min_tree_nonneg(Stage& st, Forms v) {
  while (v.size() > 1) {
    Forms pre;
    for (size_t i = 0; i + 1 < v.size(); i += 2) {
      pre.push_back(v[i]);
      pre.push_back(v[i] - v[i + 1]);
    }
    if (v.size() % 2) pre.push_back(v.back());
    Forms h = st.relu(pre);
    Forms next;
    size_t k = 0;
    for (size_t i = 0; i + 1 < v.size(); i += 2, k += 2) next.push_back(h[k] - h[k + 1]);
    if (v.size() % 2) next.push_back(h[k]);
    v = next;
  }
  return v.front();
}

// min{x,y} = ReLU(y) - ReLU(-y) - ReLU(y - x); max uses + ReLU(x - y)
Form extremum_tree(Stage& st, Forms v, bool take_max) {
  while (v.size() > 1) {
    Forms pre;
    for (size_t i = 0; i + 1 < v.size(); i += 2) {
      const Form& x = v[i];
      const Form& y = v[i + 1];
      pre.push_back(y);
      pre.push_back(-y);
      pre.push_back(take_max ? x - y : y - x);
    }
    if (v.size() % 2) {
      pre.push_back(v.back());
      pre.push_back(-v.back());
    }
    Forms h = st.relu(pre);
    Forms next;
    size_t k = 0;
    for (size_t i = 0; i + 1 < v.size(); i += 2, k += 3)
      next.push_back(take_max ? h[k] - h[k + 1] + h[k + 2] : h[k] - h[k + 1] - h[k + 2]);
    if (v.size() % 2) next.push_back(h[k] - h[k + 1]);
    v = next;
  }
  return v.front();
}

// odd-even transposition sort, ascending
Forms sort_network(Stage& st, Forms v, bool nonneg) {
  size_t n = v.size();
  for (size_t round = 0; round < n; ++round) {
    Forms pre;
    std::vector<int> kind(n, 0);  // 1: first of a pair
    for (size_t i = round % 2; i + 1 < n; i += 2) kind[i] = 1;
    for (size_t i = 0; i < n; ++i) {
      if (kind[i] == 1) {
        const Form& x = v[i];
        const Form& y = v[i + 1];
        pre.push_back(x);
        if (!nonneg) pre.push_back(-x);
        pre.push_back(y);
        if (!nonneg) pre.push_back(-y);
        pre.push_back(y - x);
        ++i;
      } else {
        pre.push_back(v[i]);
        if (!nonneg) pre.push_back(-v[i]);
      }
    }
    Forms h = st.relu(pre);
    Forms next;
    size_t k = 0;
    auto val = [&]() {
      Form f = nonneg ? h[k] : h[k] - h[k + 1];
      k += nonneg ? 1 : 2;
      return f;
    };
    for (size_t i = 0; i < n; ++i) {
      if (kind[i] == 1) {
        Form x = val();
        Form y = val();
        Form r = h[k++];
        next.push_back(y - r);  // min
        next.push_back(x + r);  // max
        ++i;
      } else {
        next.push_back(val());
      }
    }
    v = next;
  }
  return v;
}

Form median_form(Stage& st, const Forms& x, bool nonneg) {
  Forms s = sort_network(st, x, nonneg);
  size_t n = s.size();
  if (n % 2) return s[n / 2];
  return (s[n / 2 - 1] + s[n / 2]) * p2(-1);
}

// ---- analytic ----

// Phi_[c,inf)(x) = ReLU(1 - ReLU(2^(p+1) (c - x))), exact on the 2^-p lattice
Forms step_forms(Stage& st, const Form& x, const std::vector<Dyadic>& cs, int p) {
  Dyadic s = p2(p + 1);
  Forms pre;
  for (const auto& c : cs) pre.push_back((Form(c) - x) * s);
  Forms h = st.relu(pre);
  for (auto& f : h) f = 1 - f;
  return st.relu(h);
}

// floor of x on the 2^-p lattice with floor(x) in [nmin, nmax]:
// min over n of S + (n - S) I_[n,n+1)(x), sentinel S = nmax + 2^-p-1
Form floor_forms(Stage& st, const Form& x, int p, int64_t nmin, int64_t nmax) {
  if (nmin == nmax) {
    st.tick();
    return Form(Dyadic(static_cast<long long>(nmin)));
  }
  std::vector<Dyadic> cs;
  for (int64_t c = nmin; c <= nmax + 1; ++c) cs.emplace_back(static_cast<long long>(c));
  Forms phi = step_forms(st, x, cs, p);
  Dyadic S = Dyadic(static_cast<long long>(nmax)) + p2(-p - 1);
  Dyadic base(static_cast<long long>(nmin));
  Forms cand;
  for (int64_t n = nmin; n <= nmax; ++n) {
    size_t i = static_cast<size_t>(n - nmin);
    Form ind = phi[i] - phi[i + 1];
    cand.push_back(Form(S - base) + ind * (Dyadic(static_cast<long long>(n)) - S));
  }
  return min_tree_nonneg(st, cand) + Form(base);
}

Net floor_net(int p, int64_t nmin, int64_t nmax, const Dyadic& scale = Dyadic(1)) {
  Stage st(1);
  Form f = floor_forms(st, st.inputs()[0] * scale, p, nmin, nmax);
  return st.finish({f});
}

Net indicator_net(GateOp op, const Dyadic& a, const Dyadic& b, int q) {
  Stage st(1);
  Form x = st.inputs()[0];
  Dyadic eps = p2(-q);
  switch (op) {
    case GateOp::IndHalfLine:
      return st.finish(step_forms(st, x, {a}, q));
    case GateOp::IndOpenHalfLine: {
      Form h = st.relu({(x - Form(a)) * p2(q + 1) + 1})[0];
      return st.finish(st.relu({1 - h}));
    }
    case GateOp::IndClosed: {
      Forms phi = step_forms(st, x, {a, b + eps}, q);
      return st.finish({phi[0] - phi[1]});
    }
    case GateOp::IndHalfOpen: {
      Forms phi = step_forms(st, x, {a, b}, q);
      return st.finish({phi[0] - phi[1]});
    }
    case GateOp::IndHalfOpenComplement: {
      Forms phi = step_forms(st, x, {a, b}, q);
      return st.finish({1 - phi[0] + phi[1]});
    }
    default:
      throw std::invalid_argument("indicator_net: not an interval indicator");
  }
}

Net point_net(const std::vector<Dyadic>& a, int q) {
  size_t d = a.size();
  Stage st(static_cast<Index>(d));
  Forms x = st.inputs();
  Forms pre;
  for (size_t i = 0; i < d; ++i) {
    pre.push_back(x[i] - Form(a[i]));
    pre.push_back(Form(a[i]) - x[i]);
  }
  Forms h = st.relu(pre);
  Forms close;
  for (size_t i = 0; i < d; ++i) close.push_back(1 - (h[2 * i] + h[2 * i + 1]) * p2(q + 1));
  Forms c = st.relu(close);
  Form miss = st.relu1(Form(Dyadic(static_cast<long long>(d))) - sum(c));
  return st.finish({st.relu1(1 - miss)});
}

Net constant_net(const std::vector<Dyadic>& c, int in_arity) {
  Stage st(in_arity);
  Forms pre;
  for (const auto& v : c) {
    pre.emplace_back(-v);
    pre.emplace_back(v);
  }
  Forms h = st.relu(pre);
  Forms out;
  for (size_t i = 0; i < c.size(); ++i) out.push_back(h[2 * i + 1] - h[2 * i]);
  return st.finish(out);
}

// g(x) = ReLU(1 - ReLU(1 - x) - ReLU(x - 1)); f = g(x) + g(x - 2) + g(x + 2)
Net mod2_net() {
  Stage st(1);
  Form x = st.inputs()[0];
  Forms pre;
  for (int shift : {0, 2, -2}) {
    Form y = x - Form(Dyadic(shift));
    pre.push_back(1 - y);
    pre.push_back(y - 1);
  }
  Forms h = st.relu(pre);
  Forms g;
  for (size_t i = 0; i < 3; ++i) g.push_back(1 - h[2 * i] - h[2 * i + 1]);
  return st.finish({sum(st.relu(g))});
}

// ---- bitwise arithmetic (most significant bit first) ----

// a + b mod 2^seg on each consecutive segment of seg bits; seg layers
Forms add_seg(Stage& st, Forms a, Forms b, size_t seg) {
  size_t n = a.size();
  if (b.size() != n || seg == 0 || n % seg) throw std::logic_error("add_seg: bad widths");
  for (size_t it = 0; it < seg; ++it) {
    Forms pre;
    for (size_t i = 0; i < n; ++i) pre.push_back(a[i] + b[i]);
    for (size_t i = 0; i < n; ++i) pre.push_back(a[i] + b[i] - 1);
    Forms h = st.relu(pre);
    Forms na, nb;
    for (size_t i = 0; i < n; ++i) {
      na.push_back(h[i] - h[n + i] * Dyadic(2));
      bool last_in_seg = (i + 1) % seg == 0;
      nb.push_back(last_in_seg ? Form() : h[n + i + 1]);
    }
    a = na;
    b = nb;
  }
  return a;
}

Forms comp_seg(Stage& st, const Forms& a, size_t seg) {
  Forms na, one;
  for (size_t i = 0; i < a.size(); ++i) {
    na.push_back(1 - a[i]);
    one.emplace_back((i + 1) % seg == 0 ? Dyadic(1) : Dyadic(0));
  }
  return add_seg(st, na, one, seg);
}

// sign-magnitude <-> two's complement on each segment (sign bit first):
// AND(NOT rho, lowered) + AND(rho, COMP(lowered)); the two terms have
// disjoint support so their ADD is their sum
Forms int_to_twos_seg(Stage& st, const Forms& a, size_t seg) {
  size_t n = a.size();
  Forms lowered = a, rho;
  for (size_t s = 0; s < n; s += seg) {
    rho.push_back(a[s]);
    lowered[s] = Form();
  }
  int h_rho = st.hold(rho);
  int h_low = st.hold(lowered);
  Forms comp = comp_seg(st, lowered, seg);
  rho = st.take(h_rho);
  lowered = st.take(h_low);
  Forms pre;
  for (size_t i = 0; i < n; ++i) pre.push_back(lowered[i] - rho[i / seg]);
  for (size_t i = 0; i < n; ++i) pre.push_back(rho[i / seg] + comp[i] - 1);
  Forms h = st.relu(pre);
  Forms out;
  for (size_t i = 0; i < n; ++i) out.push_back(h[i] + h[n + i]);
  return out;
}

Forms mult_forms(Stage& st, const Forms& a, const Forms& b) {
  size_t B = a.size();
  Forms pre;
  int hb = st.hold(b);
  int ha = st.hold(slice(a, 1, B - 1));
  for (size_t j = 0; j < B; ++j) pre.push_back(a[0] + b[j] - 1);
  Forms acc = st.relu(pre);
  if (B == 1) {
    st.take(hb);
    st.take(ha);
  }
  for (size_t i = 1; i < B; ++i) {
    Forms bf = st.peek(hb);
    Forms rest = st.peek(ha);
    Form ai = rest.front();
    if (i + 1 == B) {
      st.take(hb);
      st.take(ha);
    } else {
      st.set(ha, slice(rest, 1, rest.size() - 1));
    }
    int hacc = st.hold(acc);
    Forms p;
    for (size_t j = 0; j < B; ++j) p.push_back(ai + bf[j] - 1);
    p = st.relu(p);
    acc = st.take(hacc);
    Forms shifted;
    for (size_t j = 0; j + 1 < B; ++j) shifted.push_back(acc[j + 1]);
    shifted.emplace_back();
    acc = add_seg(st, shifted, p, B);
  }
  return acc;
}

Net bitwise_net(const GateKind& g) {
  size_t B = static_cast<size_t>(g.B);
  Stage st(input_arity(g));
  Forms x = st.inputs();
  switch (g.op) {
    case GateOp::LShift:
    case GateOp::RShift: {
      Forms h = st.relu(x);
      Forms out;
      for (size_t i = 0; i < B; ++i) {
        if (g.op == GateOp::LShift) out.push_back(i + 1 < B ? h[i + 1] : Form());
        else out.push_back(i > 0 ? h[i - 1] : Form());
      }
      return st.finish(out);
    }
    case GateOp::BitAdd:
      return st.finish(add_seg(st, slice(x, 0, B), slice(x, B, B), B));
    case GateOp::BitAddN: {
      std::vector<Forms> ops;
      for (int i = 0; i < g.n; ++i) ops.push_back(slice(x, static_cast<size_t>(i) * B, B));
      while (ops.size() > 1) {
        Forms a, b;
        size_t pairs = ops.size() / 2;
        for (size_t i = 0; i < pairs; ++i) {
          a = concat(a, ops[2 * i]);
          b = concat(b, ops[2 * i + 1]);
        }
        int odd = ops.size() % 2 ? st.hold(ops.back()) : -1;
        Forms s = add_seg(st, a, b, B);
        std::vector<Forms> next;
        for (size_t i = 0; i < pairs; ++i) next.push_back(slice(s, i * B, B));
        if (odd >= 0) next.push_back(st.take(odd));
        ops = next;
      }
      return st.finish(ops.front());
    }
    case GateOp::BitMult:
      return st.finish(mult_forms(st, slice(x, 0, B), slice(x, B, B)));
    case GateOp::Comp:
      return st.finish(comp_seg(st, x, B + 1));
    case GateOp::Embed: {
      Forms h = st.relu(x);
      return st.finish(concat({h[0]}, h));
    }
    case GateOp::IntToTwos:
      return st.finish(int_to_twos_seg(st, x, B + 1));
    case GateOp::ExactAdd: {
      Forms a = slice(x, 0, B + 1), b = slice(x, B + 1, B + 1);
      return st.finish(add_seg(st, concat({a[0]}, a), concat({b[0]}, b), B + 2));
    }
    default:
      throw std::invalid_argument("bitwise_net: not a bitwise gate");
  }
}

// ---- codecs ----

// K = M + 2^-q-1; h1 = ReLU(y - K s), h2 = ReLU(y + K s - K), value h1 - h2
Net decoder_net(int M, int q) {
  size_t w = static_cast<size_t>(2 * q + 2);
  Stage st(static_cast<Index>(w));
  Forms x = st.inputs();
  Form y;
  for (size_t i = 0; i + 1 < w; ++i) y += x[i] * p2(q - static_cast<int>(i));
  Form s = x[w - 1];
  Dyadic K = Dyadic(M) + p2(-q - 1);
  Forms h = st.relu({y - s * K, y + s * K - Form(K)});
  return st.finish({h[0] - h[1]});
}

Net sign_int_rem_net(int M, int q) {
  GateKind g = GateKind::codec(GateOp::SignIntRem, q, M);
  int64_t top = input_domain(g)[0].hi.floor();
  Stage st(1);
  Form x = st.inputs()[0];
  Forms h = st.relu({x, -x});
  Form absx = h[0] + h[1];
  int hs = st.hold({1 - h[1] * p2(q + 1)});
  int ha = st.hold({absx});
  Form n = floor_forms(st, absx, q, 0, top);
  absx = st.take(ha)[0];
  Form s = st.take(hs)[0];
  return st.finish({n, absx - n, s});
}

Net remainder_bits_net(int q) {
  std::vector<Net> floors;
  for (int i = 1; i <= q; ++i) floors.push_back(floor_net(q - i, 0, (int64_t(1) << i) - 1, p2(i)));
  Stage st(1);
  Form r = st.inputs()[0];
  std::vector<Sub> subs;
  for (const auto& f : floors) subs.push_back(Sub{&f, {r}, true});
  auto outs = run_parallel(st, subs);
  Forms bits;
  Form prev;
  for (int i = 1; i <= q; ++i) {
    Form cur = outs[static_cast<size_t>(i - 1)][0];
    bits.push_back(cur - prev * Dyadic(2));
    prev = cur;
  }
  return st.finish(bits);
}

Net integer_bits_net(int M, int q) {
  int64_t top = std::min<int64_t>(M, (int64_t(1) << (q + 1)) - 1);
  std::vector<Net> floors;
  std::vector<int> ms;
  for (int m = 1; m <= q; ++m) {
    if ((top >> m) == 0) break;
    floors.push_back(floor_net(m, 0, top >> m, p2(-m)));
    ms.push_back(m);
  }
  Stage st(1);
  Form n = st.inputs()[0];
  std::vector<Forms> outs;
  Form n_now = n;
  if (!floors.empty()) {
    int hn = st.hold({n});
    std::vector<Sub> subs;
    for (const auto& f : floors) subs.push_back(Sub{&f, {n}, true});
    outs = run_parallel(st, subs);
    n_now = st.take(hn)[0];
  } else {
    n_now = st.relu({n})[0];
  }
  // gamma_m = floor(n / 2^m), beta_m = gamma_m - 2 gamma_(m+1)
  std::vector<Form> gamma(static_cast<size_t>(q + 2));
  gamma[0] = n_now;
  for (size_t i = 0; i < ms.size(); ++i) gamma[static_cast<size_t>(ms[i])] = outs[i][0];
  Forms bits;
  for (int m = q; m >= 0; --m) bits.push_back(gamma[static_cast<size_t>(m)] - gamma[static_cast<size_t>(m + 1)] * Dyadic(2));
  return st.finish(bits);
}

Net encoder_net(int M, int q) {
  Net sir = sign_int_rem_net(M, q);
  Net ib = integer_bits_net(M, q);
  Net rb = remainder_bits_net(q);
  Stage st(1);
  Forms nrs = run_net(st, sir, st.inputs());
  int hs = st.hold({nrs[2]});
  auto outs = run_parallel(st, {Sub{&ib, {nrs[0]}, true}, Sub{&rb, {nrs[1]}, true}});
  Form s = st.take(hs)[0];
  Forms bits = concat(outs[0], outs[1]);
  bits.push_back(1 - s);
  return st.finish(bits);
}

// ---- modular arithmetic on the 2q+2 bit layout ----

// codec layout (magnitude bits, sign) -> integer layout (sign, magnitude bits)
Forms to_int_layout(const Forms& v) {
  Forms r{v.back()};
  for (size_t i = 0; i + 1 < v.size(); ++i) r.push_back(v[i]);
  return r;
}

Forms from_int_layout(const Forms& v) {
  Forms r(v.begin() + 1, v.end());
  r.push_back(v.front());
  return r;
}

Net modular_add_core(int q) {
  size_t w = static_cast<size_t>(2 * q + 2);
  Stage st(static_cast<Index>(2 * w));
  Forms x = st.inputs();
  Forms both = concat(to_int_layout(slice(x, 0, w)), to_int_layout(slice(x, w, w)));
  Forms t = int_to_twos_seg(st, both, w);
  Forms s = add_seg(st, slice(t, 0, w), slice(t, w, w), w);
  return st.finish(from_int_layout(int_to_twos_seg(st, s, w)));
}

Net modular_mult_core(int q) {
  size_t w = static_cast<size_t>(2 * q + 2);
  size_t W = static_cast<size_t>(4 * q + 2);
  Net mult = bitwise_net(GateKind::bitwise(GateOp::BitMult, static_cast<int>(W)));
  Net sign = logic_net(GateOp::Xor, 1);
  Stage st(static_cast<Index>(2 * w));
  Forms x = st.inputs();
  Forms ma(W - (w - 1)), mb(W - (w - 1));
  for (size_t i = 0; i + 1 < w; ++i) {
    ma.push_back(x[i]);
    mb.push_back(x[w + i]);
  }
  auto outs = run_parallel(st, {Sub{&mult, concat(ma, mb), true}, Sub{&sign, {x[w - 1], x[2 * w - 1]}, true}});
  int hs = st.hold(outs[1]);
  // round half up: add back the first dropped fraction bit in place
  Forms prod = outs[0];
  size_t pos = static_cast<size_t>(3 * q + 2);
  Forms pick(W);
  pick[pos] = prod[pos];
  Forms g = add_seg(st, prod, pick, W);
  Form sg = st.take(hs)[0];
  Forms out = slice(g, static_cast<size_t>(q + 1), w - 1);
  out.push_back(sg);
  return st.finish(out);
}

// ---- tropical ----

Net tropical_net(GateOp op, int n) {
  Stage st(n);
  Forms x = st.inputs();
  switch (op) {
    case GateOp::Min:
      return st.finish({extremum_tree(st, x, false)});
    case GateOp::Max:
      return st.finish({extremum_tree(st, x, true)});
    case GateOp::Median:
      return st.finish({median_form(st, x, false)});
    case GateOp::Majority: {
      // Phi(m) = 2 ReLU(m) - 2 ReLU(m - 1/2)
      Form m = median_form(st, x, true);
      Forms h = st.relu({m, m - Form(p2(-1))});
      return st.finish({(h[0] - h[1]) * Dyadic(2)});
    }
    default:
      throw std::invalid_argument("tropical_net: not a tropical gate");
  }
}

// ---- quantifiers ----

Net quantifier_net(const GateKind& g) {
  Net inner = gate_network(*g.inner);
  bool exists = g.op == GateOp::Exists;
  int free = input_arity(g);
  Stage st(free);
  Forms y = st.inputs();
  size_t copies = size_t(1) << g.B1;
  std::vector<Sub> subs;
  for (size_t v = 0; v < copies; ++v)
    subs.push_back(Sub{&inner, concat(bit_constants(BitString::from_uint(v, static_cast<size_t>(g.B1))), y), true});
  auto outs = run_parallel(st, subs);
  Forms vals;
  for (const auto& o : outs) vals.push_back(exists ? 1 - o[0] : o[0]);
  Form m = min_tree_nonneg(st, st.relu(vals));
  return st.finish({exists ? 1 - m : m});
}

}  // namespace

Net gate_network(const GateKind& g) {
  validate_gate(g);
  switch (g.op) {
    case GateOp::Not: case GateOp::And: case GateOp::Or: case GateOp::Xor: case GateOp::Nand:
    case GateOp::Imply: case GateOp::Equal: case GateOp::Leq: case GateOp::Geq:
      return logic_net(g.op, g.B);
    case GateOp::Forall:
    case GateOp::Exists:
      return quantifier_net(g);
    case GateOp::Constant:
      return constant_net(g.vec, g.n);
    case GateOp::IndHalfLine: case GateOp::IndOpenHalfLine: case GateOp::IndClosed: case GateOp::IndHalfOpen:
    case GateOp::IndHalfOpenComplement:
      return indicator_net(g.op, g.a, g.b, g.q);
    case GateOp::PointIndicator:
      return point_net(g.vec, g.q);
    case GateOp::Floor:
      return floor_net(g.q, -g.M, g.M);
    case GateOp::Mod2:
      return mod2_net();
    case GateOp::LShift: case GateOp::RShift: case GateOp::BitAdd: case GateOp::BitAddN: case GateOp::BitMult:
    case GateOp::Comp: case GateOp::Embed: case GateOp::IntToTwos: case GateOp::ExactAdd:
      return bitwise_net(g);
    case GateOp::BitDecoder:
      return decoder_net(g.M, g.q);
    case GateOp::BitEncoder:
      return encoder_net(g.M, g.q);
    case GateOp::SignIntRem:
      return sign_int_rem_net(g.M, g.q);
    case GateOp::RemainderBits:
      return remainder_bits_net(g.q);
    case GateOp::IntegerBits:
      return integer_bits_net(g.M, g.q);
    case GateOp::ModAdd:
    case GateOp::ModMult: {
      LoweredGate l = lower_gate(g);
      Net n = l.core;
      if (l.pre) n = compose(*l.pre, n, true);
      if (l.post) n = compose(n, *l.post, true);
      return n;
    }
    case GateOp::Min: case GateOp::Max: case GateOp::Median: case GateOp::Majority:
      return tropical_net(g.op, g.n);
    case GateOp::Identity:
      return identity_net<Dyadic>(g.n);
  }
  throw std::logic_error("gate_network: unhandled op");
}

LoweredGate lower_gate(const GateKind& g) {
  validate_gate(g);
  if (g.op != GateOp::ModAdd && g.op != GateOp::ModMult) return LoweredGate{gate_network(g), std::nullopt, std::nullopt};
  Net core = g.op == GateOp::ModAdd ? modular_add_core(g.q) : modular_mult_core(g.q);
  if (g.bits) return LoweredGate{core, std::nullopt, std::nullopt};
  int m_enc = (1 << (g.q + 1)) - 1;
  Net enc = encoder_net(m_enc, g.q);
  Net pre = parallelize<Dyadic>({enc, enc});
  Net post = decoder_net(1 << (g.q + 1), g.q);
  return LoweredGate{core, pre, post};
}

GateEmulator build_gate(const GateKind& g) {
  GateEmulator e;
  e.kind = g;
  e.net = gate_network(g);
  e.domain = input_domain(g);
  e.report = stats(e.net);
  attach_declared_bounds(g, e.report);
  return e;
}

GateEmulator build_logic(GateOp op, int B) { return build_gate(GateKind::logic(op, B)); }
GateEmulator build_forall(const GateKind& inner, int B1) { return build_gate(GateKind::forall(inner, B1)); }
GateEmulator build_exists(const GateKind& inner, int B1) { return build_gate(GateKind::forall(inner, B1, true)); }
GateEmulator build_constant(const std::vector<Dyadic>& c, int in_arity) {
  return build_gate(GateKind::constant(c, in_arity));
}
GateEmulator build_indicator(GateOp variant, const Dyadic& a, const Dyadic& b, int q) {
  return build_gate(GateKind::indicator(variant, a, b, q));
}
GateEmulator build_point_indicator(const std::vector<Dyadic>& a, int q) { return build_gate(GateKind::point(a, q)); }
GateEmulator build_floor(int M, int q) { return build_gate(GateKind::floor(M, q)); }
GateEmulator build_mod2() { return build_gate(GateKind::mod2()); }
GateEmulator build_shift(GateOp dir, int B) { return build_gate(GateKind::bitwise(dir, B)); }
GateEmulator build_bit_adder(int B) { return build_gate(GateKind::bitwise(GateOp::BitAdd, B)); }
GateEmulator build_bit_adder_n(int B, int n) { return build_gate(GateKind::add_n(B, n)); }
GateEmulator build_bit_multiplier(int B) { return build_gate(GateKind::bitwise(GateOp::BitMult, B)); }
GateEmulator build_comp(int B) { return build_gate(GateKind::bitwise(GateOp::Comp, B)); }
GateEmulator build_embed(int B) { return build_gate(GateKind::bitwise(GateOp::Embed, B)); }
GateEmulator build_int_conversion(int B) { return build_gate(GateKind::bitwise(GateOp::IntToTwos, B)); }
GateEmulator build_exact_adder(int B) { return build_gate(GateKind::bitwise(GateOp::ExactAdd, B)); }
GateEmulator build_bit_decoder(int M, int q) { return build_gate(GateKind::codec(GateOp::BitDecoder, q, M)); }
GateEmulator build_bit_encoder(int M, int q) { return build_gate(GateKind::codec(GateOp::BitEncoder, q, M)); }
GateEmulator build_sign_int_rem(int M, int q) { return build_gate(GateKind::codec(GateOp::SignIntRem, q, M)); }
GateEmulator build_remainder_bits(int q) { return build_gate(GateKind::codec(GateOp::RemainderBits, q)); }
GateEmulator build_integer_bits(int M, int q) { return build_gate(GateKind::codec(GateOp::IntegerBits, q, M)); }
GateEmulator build_modular_add(int q, bool bit_ports) {
  return build_gate(GateKind::modular(GateOp::ModAdd, q, bit_ports));
}
GateEmulator build_modular_mult(int q, bool bit_ports) {
  return build_gate(GateKind::modular(GateOp::ModMult, q, bit_ports));
}
GateEmulator build_min(int n) { return build_gate(GateKind::tropical(GateOp::Min, n)); }
GateEmulator build_max(int n) { return build_gate(GateKind::tropical(GateOp::Max, n)); }
GateEmulator build_median(int n) { return build_gate(GateKind::tropical(GateOp::Median, n)); }
GateEmulator build_majority(int n) { return build_gate(GateKind::tropical(GateOp::Majority, n)); }
GateEmulator build_identity(int n) { return build_gate(GateKind::identity(n)); }

}  // namespace circnet
