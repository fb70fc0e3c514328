#include "eqweyl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "eqweyl/errors.hpp"

namespace eqweyl {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const std::vector<std::string>& potential_names() {
  static const std::vector<std::string> names{"zero", "half_one_minus_cos", "cos2"};
  return names;
}

RevolutionSurface apply_potential(RevolutionSurface model, const std::string& id) {
  if (id == "zero") return model;
  if (id == "half_one_minus_cos")
    return with_potential(
        std::move(model), [](double s) { return 0.5 * (1.0 - std::cos(s)); },
        [](double s) { return 0.5 * std::sin(s); });
  if (id == "cos2")
    return with_potential(
        std::move(model), [](double s) { return std::cos(s) * std::cos(s); },
        [](double s) { return -std::sin(2.0 * s); });
  throw ValidationError("unknown potential '" + id + "'");
}

nlohmann::ordered_json model_json(const RevolutionSurface& m, int samples) {
  nlohmann::ordered_json j;
  j["name"] = m.name;
  j["L"] = m.L;
  j["boundary"] = to_string(m.boundary);
  j["exact_backend"] = to_string(m.exact_backend);
  const ActionProfile p = action_profile(m);
  j["action_profile"] = {{"kappa", p.kappa},
                         {"Lambda", p.Lambda},
                         {"principal_isotropy_order", p.principal_isotropy_order},
                         {"fixed_points", p.fixed_points}};
  std::vector<double> s(samples), a(samples), V(samples);
  for (int i = 0; i < samples; ++i) {
    s[i] = m.L * i / (samples - 1);
    a[i] = m.a(s[i]);
    V[i] = m.V(s[i]);
  }
  j["samples"] = {{"s", s}, {"a", a}, {"V", V}};
  return j;
}

nlohmann::ordered_json model_catalog_json(int samples) {
  nlohmann::ordered_json cat = nlohmann::ordered_json::array();
  for (const auto& name : builtin_names()) cat.push_back(model_json(builtin_model(name), samples));
  return cat;
}

std::string model_hash(const RevolutionSurface& m) {
  std::string bytes = m.name + '|' + format_double(m.L) + '|' + to_string(m.boundary) + '|' +
                      to_string(m.exact_backend);
  for (int i = 0; i <= 256; ++i) {
    const double s = m.L * i / 256.0;
    bytes += '|' + format_double(m.a(s)) + ',' + format_double(m.V(s));
  }
  return hex64(fnv1a64(bytes));
}

std::string CacheKey::str() const {
  return model_hash + ':' + format_double(h) + ':' + std::to_string(k) + ':' +
         std::to_string(N) + ':' + format_double(E_max);
}

SpectrumCache::SpectrumCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("key")) continue;  // torn write
    auto key = j["key"].get<std::string>();
    entries_[std::move(key)] = std::move(j);
  }
}

std::optional<std::vector<EigenRecord>> SpectrumCache::lookup(
    const CacheKey& key, std::shared_ptr<const ModeGrid> grid) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(key.str());
  if (it == entries_.end()) return std::nullopt;
  const auto& j = *it;
  std::vector<EigenRecord> out;
  const auto& E = j.second.at("E");
  const bool vectors = j.second.contains("u");
  for (std::size_t i = 0; i < E.size(); ++i) {
    EigenRecord r;
    r.E = E[i].get<double>();
    r.k = key.k;
    r.h = key.h;
    r.j = i;
    r.provenance = key.N == 0 ? Provenance::Exact : Provenance::FiniteDifference;
    r.grid = grid;
    if (vectors) r.u = j.second["u"][i].get<std::vector<double>>();
    out.push_back(std::move(r));
  }
  return out;
}

void SpectrumCache::store(const CacheKey& key, const std::vector<EigenRecord>& records) {
  nlohmann::json j;
  j["key"] = key.str();
  std::vector<double> E;
  for (const auto& r : records) E.push_back(r.E);
  j["E"] = E;
  if (!records.empty() && !records.front().u.empty()) {
    auto& u = j["u"] = nlohmann::json::array();
    for (const auto& r : records) u.push_back(r.u);
  }
  std::lock_guard lock(mu_);
  if (entries_.count(key.str())) return;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot write spectrum cache " + path_);
  out << j.dump() << '\n';
  entries_[key.str()] = std::move(j);
}

std::size_t SpectrumCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

}  // namespace eqweyl
