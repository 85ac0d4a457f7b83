#include "circnet/netio.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace circnet {

namespace {

Dyadic entry(const nlohmann::json& v) {
  if (!v.is_string()) throw std::invalid_argument("network file: numbers must be strings like \"3/2^2\"");
  return Dyadic::parse(v.get<std::string>());
}

}  // namespace

nlohmann::ordered_json net_to_json(const Net& net) {
  nlohmann::ordered_json j;
  j["format_version"] = kNetFormatVersion;
  j["kind"] = "mlp";
  j["in_width"] = net.in_width();
  auto layers = nlohmann::ordered_json::array();
  for (const auto& l : net.layers()) {
    MatrixX<Dyadic> w = MatrixX<Dyadic>(l.weights);
    nlohmann::ordered_json jl;
    auto rows = nlohmann::ordered_json::array();
    for (Index r = 0; r < w.rows(); ++r) {
      auto row = nlohmann::ordered_json::array();
      for (Index c = 0; c < w.cols(); ++c) row.push_back(w(r, c).str());
      rows.push_back(std::move(row));
    }
    auto bias = nlohmann::ordered_json::array();
    for (Index r = 0; r < l.bias.size(); ++r) bias.push_back(l.bias[r].str());
    jl["weights"] = std::move(rows);
    jl["bias"] = std::move(bias);
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  return j;
}

Net net_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != kNetFormatVersion)
    throw std::invalid_argument("network file: unsupported format_version");
  if (j.at("kind").get<std::string>() != "mlp") throw std::invalid_argument("network file: kind must be \"mlp\"");
  Index in = j.at("in_width").get<Index>();
  std::vector<AffineLayer<Dyadic>> layers;
  for (const auto& jl : j.at("layers")) {
    const auto& rows = jl.at("weights");
    const auto& bias = jl.at("bias");
    Index nr = static_cast<Index>(rows.size());
    if (static_cast<Index>(bias.size()) != nr) throw std::invalid_argument("network file: bias length differs from row count");
    MatrixX<Dyadic> w = MatrixX<Dyadic>::Zero(nr, in);
    VectorX<Dyadic> b(nr);
    for (Index r = 0; r < nr; ++r) {
      const auto& row = rows[static_cast<size_t>(r)];
      if (static_cast<Index>(row.size()) != in)
        throw std::invalid_argument("network file: layer " + std::to_string(layers.size()) + " row " + std::to_string(r) +
                                    " has " + std::to_string(row.size()) + " entries, expected " + std::to_string(in));
      for (Index c = 0; c < in; ++c) w(r, c) = entry(row[static_cast<size_t>(c)]);
      b[r] = entry(bias[static_cast<size_t>(r)]);
    }
    layers.push_back(AffineLayer<Dyadic>::from_dense(w, b));
    in = nr;
  }
  return Net(std::move(layers));
}

std::string serialize_net(const Net& net) { return net_to_json(net).dump(1) + "\n"; }

Net deserialize_net(const std::string& text) { return net_from_json(nlohmann::json::parse(text)); }

void save_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f << text;
  if (!f) throw std::runtime_error(path + ": write failed");
}

std::string load_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<size_t>(i)] = digits[v & 15];
  return s;
}

PrecisionLint precision_lint(const Net& net, int q) {
  PrecisionLint out;
  // R_{q+1}: multiples of 2^-(q+1) with magnitude at most 2^(q+2) - 2^-(q+1)
  Dyadic top = Dyadic::pow2(q + 2) - Dyadic::pow2(-(q + 1));
  auto check = [&](const Dyadic& v) {
    if (v == Dyadic(0)) return;
    ++out.entries;
    Dyadic a = v < Dyadic(0) ? -v : v;
    if (v.exponent() > q + 1 || a > top) ++out.off_grid;
  };
  for (const auto& l : net.layers()) {
    for (Index k = 0; k < l.weights.outerSize(); ++k)
      for (SparseRows<Dyadic>::InnerIterator it(l.weights, k); it; ++it) check(it.value());
    for (Index r = 0; r < l.bias.size(); ++r) check(l.bias[r]);
  }
  return out;
}

}  // namespace circnet
