#pragma once

// Serialisation: model catalog JSON, config hashing, and the on-disk spectrum
// cache (JSON lines keyed by model hash, h, k, N and E_max).

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqweyl/geometry.hpp"
#include "eqweyl/modespec.hpp"

namespace eqweyl {

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal form used in every CSV.
std::string format_double(double x);

/// Named invariant potentials: zero, half_one_minus_cos = (1 - cos s)/2, cos2 = cos^2 s.
RevolutionSurface apply_potential(RevolutionSurface model, const std::string& potential_id);
const std::vector<std::string>& potential_names();

/// {name, L, boundary, exact_backend, action_profile, samples: {s, a, V}}.
nlohmann::ordered_json model_json(const RevolutionSurface& model, int samples = 65);
nlohmann::ordered_json model_catalog_json(int samples = 65);

/// Hash of the model's data sampled on a fixed grid, for cache keys.
std::string model_hash(const RevolutionSurface& model);

struct CacheKey {
  std::string model_hash;
  double h = 0.0;
  int k = 0;
  std::size_t N = 0;  // 0 for exact spectra
  double E_max = 0.0;

  std::string str() const;
};

/// Append-only JSON-lines file. Entries whose key string differs are ignored,
/// so stale data is never returned. Safe for concurrent use.
class SpectrumCache {
 public:
  explicit SpectrumCache(std::string path);

  /// Records with eigenvectors re-attached to `grid` when stored.
  std::optional<std::vector<EigenRecord>> lookup(const CacheKey& key,
                                                 std::shared_ptr<const ModeGrid> grid) const;
  void store(const CacheKey& key, const std::vector<EigenRecord>& records);
  std::size_t size() const;

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::map<std::string, nlohmann::json> entries_;
};

}  // namespace eqweyl
