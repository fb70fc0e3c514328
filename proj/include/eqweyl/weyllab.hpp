#pragma once

// Left-hand sides of the equivariant Weyl laws and trace formula, evaluated
// from spectra, and log-log fits of their deviation from the leading terms.

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "eqweyl/geometry.hpp"
#include "eqweyl/mollify.hpp"
#include "eqweyl/peterweyl.hpp"

namespace eqweyl {

/// B = b0(s) beta(P(h)): <B u_j, u_j> = beta(E_j) <b0 u_j, u_j>.
struct Observable {
  std::string name = "identity";
  RealFn b0;                          // multiplication part
  RealFn beta;                        // spectral part
  std::optional<double> b0_constant;  // set when b0 is constant
  /// Closed form of <b0 Y, Y> for the round sphere harmonic of degree l and
  /// order m, when known; lets exact sources skip eigenvectors.
  std::function<double(long long l, int m)> sphere_moment;

  static Observable identity();
  /// Scales the multiplication part by alpha.
  Observable scaled(double alpha) const;
};

/// Eigenvalues of P(h) mode by mode, with the b0 moment of each eigenfunction.
class SpectrumSource {
 public:
  using Visitor = std::function<void(double E, double b0_moment)>;
  virtual ~SpectrumSource() = default;
  virtual double h() const = 0;
  /// Energy through which the spectrum of mode k is complete.
  virtual double coverage(int k) const = 0;
  /// Calls visit for every eigenfunction of mode k with lo <= E <= hi.
  virtual void visit(int k, double lo, double hi, const Observable& obs,
                     const Visitor& visit) const = 0;
};

/// Records from a SpectrumTable; moments use stored eigenvectors unless b0 is
/// constant.
class TableSource final : public SpectrumSource {
 public:
  TableSource(const SpectrumTable& table, const RevolutionSurface& model);
  double h() const override { return table_.h; }
  double coverage(int k) const override;
  void visit(int k, double lo, double hi, const Observable& obs,
             const Visitor& visit) const override;

 private:
  const SpectrumTable& table_;
  const RevolutionSurface& model_;
  std::map<int, std::vector<const EigenRecord*>> by_mode_;
};

/// Closed-form spectra enumerated on the fly; complete at every energy.
class ExactSource final : public SpectrumSource {
 public:
  ExactSource(const RevolutionSurface& model, double h);
  double h() const override { return h_; }
  double coverage(int) const override { return std::numeric_limits<double>::infinity(); }
  void visit(int k, double lo, double hi, const Observable& obs,
             const Visitor& visit) const override;

 private:
  const RevolutionSurface& model_;
  double h_;
};

struct SpectralWindow {
  double c = 1.0;
  double delta = 0.1;
  /// Shoulder exponent for the coverage margin; <= 0 selects the optimal
  /// value (1 - (2 kappa + 3) theta)/(2 kappa + 4) - delta.
  double lambda = 0.0;
  bool strict = true;

  double width(double h) const;
  /// Throws ValidationError in strict mode when delta is outside (0, 1/(2 kappa + 4)).
  void check(int kappa = 1) const;
};

/// True when theta < (1 - (2 kappa + 4) delta)/(2 kappa + 3).
bool family_within_theorem(double theta, double delta, int kappa = 1);

/// Shoulder exponent used for the coverage margin of a window and family.
double window_shoulder_exponent(const SpectralWindow& w, double theta, int kappa = 1);

/// Energy through which every mode must be complete before a window sum at h:
/// c + h^delta plus the shoulder margin 3 h^lambda h^delta.
double window_coverage_need(const SpectralWindow& w, double h, double theta, int kappa = 1);

/// (2 pi) h^{1 - delta} sum over u_j in mode chi with E_j in [c, c + h^delta]
/// of <B u_j, u_j> / (d_chi [pi_chi|_H : 1]).
double weyl_lhs_single(const SpectrumSource& src, const Character& chi,
                       const SpectralWindow& window, const Observable& obs);

/// Family average of the single-character sums.
double weyl_lhs_family(const SpectrumSource& src, const CharacterFamily& fam,
                       const SpectralWindow& window, const Observable& obs);

/// Multiplicity form: sum over the repeated index j of mult_chi(E_j) /
/// (dim E_j [pi_chi|_H : 1]), family averaged and scaled like weyl_lhs_family.
double counting_lhs(const SpectrumTable& table, const CharacterFamily& fam,
                    const SpectralWindow& window);

/// (2 pi h) / #W_h sum_chi sum_{u_j in mode chi} rho(E_j) <B u_j, u_j> / (d [pi:1]).
double trace_lhs(const SpectrumSource& src, const CharacterFamily& fam,
                 const TestFunction& rho, const Observable& obs);

struct WeylRow {
  double h = 0.0;
  double lhs = 0.0;
  double leading = 0.0;
  double abs_error = 0.0;
};

struct FitParameters {
  double delta = 0.0;
  double theta = 0.0;
  int kappa = 1;
  int Lambda = 1;
};

struct WeylReport {
  std::string theorem;
  std::string model;
  FitParameters params;
  bool theorem_mode = true;  // false when parameters leave the theorem's range
  std::vector<WeylRow> rows;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double slope_logcorrected = 0.0;
  double predicted_exponent = 0.0;
  bool pass = false;
};

/// Exponent of the remainder bound: min(delta, (1 - (2 kappa + 3) theta)/(2 kappa + 4) - delta)
/// for the Weyl laws, 1 - (2 kappa + 3)(delta + theta) for the trace formula.
double predicted_exponent(const std::string& theorem, const FitParameters& p);

/// Least-squares slope of log|error| against log h, raw and with the
/// (log 1/h)^{Lambda - 1} factor divided out. A nonpositive error gives a slope
/// of +infinity. Needs at least 4 values of h spanning 2 decades.
WeylReport compare_and_fit(const std::vector<double>& h_list, const std::vector<double>& lhs,
                           const std::vector<double>& leading, const FitParameters& params,
                           std::string theorem = {}, std::string model = {});

/// Columns (theorem, model, h, lhs, leading, abs_error); `header` lines are
/// written first, each prefixed with '#'.
void write_report_csv(std::ostream& os, const WeylReport& report,
                      const std::vector<std::string>& header = {});

/// {slope, slope_logcorrected, predicted_exponent, pass, ...}
std::string report_summary_json(const WeylReport& report);

}  // namespace eqweyl
