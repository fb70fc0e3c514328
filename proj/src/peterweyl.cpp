#include "eqweyl/peterweyl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "eqweyl/errors.hpp"

namespace eqweyl {

CharacterFamily CharacterFamily::fixed(std::vector<int> ks) {
  if (ks.empty()) throw ValidationError("fixed character family needs at least one k");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  CharacterFamily f;
  f.fixed_ = true;
  f.ks_ = std::move(ks);
  return f;
}

CharacterFamily CharacterFamily::power_law(double theta) {
  if (!(theta >= 0.0)) throw ValidationError("growth rate must be nonnegative");
  CharacterFamily f;
  f.fixed_ = false;
  f.theta_ = theta;
  return f;
}

int family_max_k(const CharacterFamily& fam, double h) {
  if (fam.is_fixed()) {
    int m = 0;
    for (int k : fam.fixed_ks()) m = std::max(m, std::abs(k));
    return m;
  }
  // Guard against h^-theta landing a rounding error below an integer.
  const double bound = std::pow(h, -fam.theta());
  const double r = std::round(bound);
  const double K = std::abs(bound - r) <= 1e-12 * r ? r : std::floor(bound);
  return static_cast<int>(std::max(1.0, K));
}

std::vector<Character> family_at(const CharacterFamily& fam, double h) {
  if (!(h > 0.0 && h <= 1.0)) throw ValidationError("h must lie in (0, 1]");
  std::vector<Character> out;
  if (fam.is_fixed()) {
    for (int k : fam.fixed_ks()) out.push_back({k});
    return out;
  }
  const int K = family_max_k(fam, h);
  for (int k = -K; k <= K; ++k) out.push_back({k});
  return out;
}

std::vector<double> growth_rate_estimate(const CharacterFamily& fam, int order,
                                         const std::vector<double>& h_list) {
  if (order < 0 || order > 6) throw ValidationError("derivative order must be in [0, 6]");
  std::vector<double> out;
  out.reserve(h_list.size());
  for (double h : h_list) {
    const auto chars = family_at(fam, h);
    double acc = 0.0;
    for (const auto& c : chars)
      acc += std::pow(std::abs(static_cast<double>(c.k)), order) / c.isotropy_mult;
    out.push_back(std::pow(h, fam.theta() * order) * acc / static_cast<double>(chars.size()));
  }
  return out;
}

SpectrumTable multiplicity_table(std::vector<EigenRecord> records, double eps_cluster,
                                 const std::map<int, double>& coverage) {
  SpectrumTable t;
  t.coverage = coverage;
  if (records.empty()) return t;
  t.h = records.front().h;
  for (const auto& r : records)
    if (r.h != t.h) throw MixedParameters("records mix different values of h");
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    if (a.E != b.E) return a.E < b.E;
    if (a.k != b.k) return a.k < b.k;
    return a.j < b.j;
  });
  t.records = std::move(records);

  std::size_t start = 0;
  for (std::size_t i = 1; i <= t.records.size(); ++i) {
    const bool split =
        i == t.records.size() ||
        t.records[i].E - t.records[i - 1].E >
            eps_cluster * std::max(1.0, std::abs(t.records[i - 1].E));
    if (!split) continue;
    EigenCluster c;
    double sum = 0.0;
    for (std::size_t q = start; q < i; ++q) {
      sum += t.records[q].E;
      ++c.mult[t.records[q].k];
    }
    c.dim = i - start;
    c.E = sum / static_cast<double>(c.dim);
    t.clusters.push_back(std::move(c));
    start = i;
  }
  return t;
}

void write_multiplicity_csv(std::ostream& os, const SpectrumTable& table) {
  os << "E,dim,k,mult\n";
  char buf[64];
  for (const auto& c : table.clusters) {
    std::snprintf(buf, sizeof buf, "%.17g", c.E);
    for (const auto& [k, m] : c.mult) os << buf << ',' << c.dim << ',' << k << ',' << m << '\n';
  }
}

}  // namespace eqweyl
