#ifndef CIRCNET_NETIO_HPP
#define CIRCNET_NETIO_HPP

#include <string>

#include <json.hpp>

#include "circnet/relunet.hpp"

namespace circnet {

inline constexpr int kNetFormatVersion = 1;

/**
 * Network files are JSON with a fixed key order:
 *   {"format_version": 1, "kind": "mlp", "in_width": n, "layers": [
 *      {"weights": [["1", "-3/2^1"], ...], "bias": ["0", ...]}, ...]}
 * Entries are exact dyadics written "m" or "m/2^k", rows dense.
 **/
nlohmann::ordered_json net_to_json(const Net& net);
Net net_from_json(const nlohmann::json& j);

std::string serialize_net(const Net& net);
Net deserialize_net(const std::string& text);

void save_text(const std::string& path, const std::string& text);
std::string load_text(const std::string& path);

// 64-bit FNV-1a, used for content hashes in certificates
uint64_t fnv1a(const std::string& bytes);
std::string hex64(uint64_t v);

struct PrecisionLint {
  long entries = 0;       // nonzero weights and biases
  long off_grid = 0;      // entries outside R_{q+1}
};
// which parameters fall outside the weight grid R_{q+1}
PrecisionLint precision_lint(const Net& net, int q);

}  // namespace circnet

#endif
