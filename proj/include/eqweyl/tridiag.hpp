#pragma once

// Symmetric tridiagonal matrices, optionally with the cyclic corner entry
// produced by periodic discretisations, and the eigen-kernels used by the mode
// solver: Sturm-count bisection and inverse iteration.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace eqweyl {

struct SymTridiag {
  std::vector<double> diag;     // n entries
  std::vector<double> offdiag;  // n-1 entries, (i, i+1)
  double corner = 0.0;          // (0, n-1) when periodic
  bool periodic = false;

  std::size_t size() const { return diag.size(); }
  void multiply(std::span<const double> x, std::span<double> y) const;
  double norm_inf() const;
  /// Gershgorin enclosure [lo, hi] of the spectrum.
  std::pair<double, double> gershgorin() const;
};

/// Number of eigenvalues strictly below x (Sylvester inertia).
std::size_t count_below(const SymTridiag& t, double x);

/// Eigenvalues with ascending indices in [first, last), bisected to width
/// max(abs_tol, 4 eps |lambda|).
std::vector<double> bisect_eigenvalues(const SymTridiag& t, std::size_t first,
                                       std::size_t last, double abs_tol = 1e-12);

/// Banded LU with partial pivoting of (T - shift I). Periodic matrices are
/// factored in an interleaved ordering that makes them pentadiagonal.
class ShiftedFactor {
 public:
  ShiftedFactor(const SymTridiag& t, double shift);
  /// Solves (T - shift) x = b in place.
  void solve(std::span<double> b) const;

 private:
  std::size_t n_;
  int kl_;
  int width_;                     // kl + ku + kl + 1 stored columns per row
  std::vector<std::size_t> perm_;  // position -> original index
  std::vector<double> rows_;      // row r stores columns [r - kl, r + ku + kl]
  std::vector<double> mult_;      // kl multipliers per elimination step
  std::vector<std::size_t> pivot_;
  mutable std::vector<double> scratch_;
};

struct InverseIterationOptions {
  int max_iterations = 50;
  double cluster_rel = 1e-8;  // gap / ||T|| below which vectors are re-orthogonalised
  unsigned long long seed = 0x5eedULL;
};

/// Unit eigenvectors for the given (ascending) eigenvalues; `rayleigh`
/// receives the Rayleigh quotients. Throws EigvecFailure carrying the index on
/// non-convergence.
std::vector<std::vector<double>> inverse_iteration(
    const SymTridiag& t, std::span<const double> eigenvalues,
    const InverseIterationOptions& opts = {}, std::vector<double>* rayleigh = nullptr);

}  // namespace eqweyl
