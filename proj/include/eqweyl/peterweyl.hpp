#pragma once

// Character bookkeeping for the circle group: isotypic labels, semiclassical
// character families and eigenspace multiplicity tables.

#include <map>
#include <ostream>
#include <variant>
#include <vector>

#include "eqweyl/modespec.hpp"

namespace eqweyl {

struct Character {
  int k = 0;
  int d_chi = 1;           // dimension of the irreducible representation
  int isotropy_mult = 1;   // multiplicity of the trivial rep of H in the restriction

  friend bool operator==(const Character&, const Character&) = default;
};

/// A finite set of characters for every h: either a fixed list of k, or all
/// |k| <= floor(h^-theta).
class CharacterFamily {
 public:
  static CharacterFamily fixed(std::vector<int> ks);
  static CharacterFamily power_law(double theta);

  bool is_fixed() const { return fixed_; }
  double theta() const { return theta_; }
  const std::vector<int>& fixed_ks() const { return ks_; }

 private:
  bool fixed_ = true;
  double theta_ = 0.0;
  std::vector<int> ks_;
};

/// Characters of the family at h, ascending in k.
std::vector<Character> family_at(const CharacterFamily& fam, double h);

/// Largest |k| in the family at h.
int family_max_k(const CharacterFamily& fam, double h);

/// r(h) = h^{theta N} mean_{k in W_h} |k|^N / isotropy_mult, one entry per h.
std::vector<double> growth_rate_estimate(const CharacterFamily& fam, int order,
                                         const std::vector<double>& h_list);

struct EigenCluster {
  double E = 0.0;               // mean of the member eigenvalues
  std::size_t dim = 0;          // number of eigenfunctions in the cluster
  std::map<int, std::size_t> mult;  // k -> count
};

struct SpectrumTable {
  double h = 0.0;
  std::vector<EigenRecord> records;  // sorted by (E, k, j)
  std::vector<EigenCluster> clusters;
  /// Highest energy through which mode k is known complete.
  std::map<int, double> coverage;
};

/// Clusters eigenvalues whose consecutive gap is within eps_cluster relative
/// (absolute below unit energy). Throws MixedParameters when h differs.
SpectrumTable multiplicity_table(std::vector<EigenRecord> records, double eps_cluster = 1e-9,
                                 const std::map<int, double>& coverage = {});

/// Rows (E, dim, k, mult), one per cluster and k with nonzero multiplicity.
void write_multiplicity_csv(std::ostream& os, const SpectrumTable& table);

}  // namespace eqweyl
