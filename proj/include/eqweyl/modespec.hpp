#pragma once

// Spectrum of P(h) = -h^2 Delta + V restricted to the isotypic component of
// the character k, by separation of variables: the radial Sturm-Liouville
// problem -h^2 (1/a)(a f')' + (h^2 k^2 / a^2 + V) f = E f.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eqweyl/geometry.hpp"
#include "eqweyl/tridiag.hpp"

namespace eqweyl {

struct ModeGrid {
  std::size_t N = 0;
  double L = 0.0;
  double spacing = 0.0;
  Boundary boundary = Boundary::Poles;
  std::vector<double> nodes;

  /// Poles: midpoints s_i = (i + 1/2) L / N. Periodic: s_i = i L / N.
  static ModeGrid make(const RevolutionSurface& model, std::size_t N);
};

struct ModeOperator {
  int k = 0;
  double h = 1.0;
  std::shared_ptr<const ModeGrid> grid;
  SymTridiag matrix;            // similarity-symmetrised with diag(sqrt a)
  std::vector<double> sqrt_a;   // sqrt(a(s_i)), for transforming vectors back
  std::vector<double> a;        // a(s_i)
  double potential_min = 0.0;
  bool grid_too_coarse = false;  // warning, see assemble_mode_operator
};

enum class Provenance { Exact, FiniteDifference };

struct EigenRecord {
  double E = 0.0;
  int k = 0;
  double h = 1.0;
  std::size_t j = 0;  // index within the mode, ascending energy
  Provenance provenance = Provenance::FiniteDifference;
  // Radial vector on `grid` normalised so 2 pi sum |u_i|^2 a(s_i) spacing = 1.
  // Empty when only eigenvalues were requested.
  std::vector<double> u;
  std::shared_ptr<const ModeGrid> grid;
};

/// Conservative flux discretisation of the k-mode operator. Sets
/// grid_too_coarse for k != 0 on pole models when spacing > a(s*)/(4|k|),
/// s* being the innermost node that is classically allowed at the reference
/// energy V_min + 4 (min effective potential - V_min).
ModeOperator assemble_mode_operator(const RevolutionSurface& model, int k,
                                    double h, std::shared_ptr<const ModeGrid> grid);

struct SolveOptions {
  bool vectors = true;
  std::size_t cap = 100000;
  double abs_tol = 1e-12;
};

/// All eigenpairs with E <= E_max, ascending. Throws SpectrumCapExceeded or
/// EigvecFailure.
std::vector<EigenRecord> solve_modes(const ModeOperator& op, double E_max,
                                     const SolveOptions& opts = {});

/// Closed-form spectrum (V = 0 only). Eigenvectors are sampled on `grid` when
/// given. Sphere: E = h^2 l(l+1), l >= |k|. Flat torus: E = h^2 (k^2 + m^2),
/// ordered m = 0, 1, -1, 2, -2, ... Throws NoExactBackend.
std::vector<EigenRecord> exact_spectrum(const RevolutionSurface& model, int k,
                                        double h, double E_max,
                                        std::shared_ptr<const ModeGrid> grid = nullptr);

/// Exact eigenvector sample for the sphere (degree l, order k) or the flat
/// torus (Fourier index m) on the grid, normalised like EigenRecord::u.
std::vector<double> exact_eigenvector(const RevolutionSurface& model, int k,
                                      long long index, const ModeGrid& grid);

/// beta(E) * 2 pi sum b0(s_i) |u_i|^2 a(s_i) spacing.
double observable_expectation(const EigenRecord& rec, const RevolutionSurface& model,
                              const RealFn& b0, const RealFn& beta);

/// Weighted inner product 2 pi sum u_i v_i a(s_i) spacing.
double weighted_inner(const RevolutionSurface& model, const ModeGrid& grid,
                      const std::vector<double>& u, const std::vector<double>& v);

/// Normalised fully-normalised associated Legendre values P̄_l^m(x) for
/// l = m..lmax (so that sum over the sphere of |P̄ e^{im phi}|^2 = 1).
std::vector<double> normalized_legendre_column(int m, int lmax, double x);

}  // namespace eqweyl
