#pragma once

// Ground-state expectation value z = <g|eta|g> of the lattice twist for a
// filled lower band, built as a product of per-momentum factors.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "twistphase/band.hpp"
#include "twistphase/models.hpp"

namespace twistphase {

inline constexpr double kDefaultIllDefinedThreshold = 1e-12;

struct ModeFactor {
  cplx value{1.0, 0.0};
  KPoint k;
  double log_abs = 0.0;
  double arg = 0.0;

  static ModeFactor from_value(cplx value, const KPoint& k = {});
};

/// (beta_-, beta_-) element of exp(-(2 pi / N) M), M = [[K', K], [-K*, K'*]]:
///   cos(2 pi Omega / N) - (K' / Omega) sin(2 pi Omega / N).
ModeFactor mode_factor(const ModeCouplings& c, long n_total);

/// The per-mode bracket in its expanded form, with lambda_pm = +-i Omega and
/// C_pm^2 = -|K|^2 + (lambda_pm - K')^2. Equals the complex conjugate of
/// mode_factor whenever K != 0, and 1 when K = 0.
ModeFactor mode_factor_printed(const ModeCouplings& c, long n_total);

struct TwistResult {
  cplx z{1.0, 0.0};
  double gamma_g = 0.0;  // NaN when ill-defined
  double log_abs_z = 0.0;
  std::size_t n_modes = 0;
  std::vector<KPoint> singular_modes;
  bool ill_defined = false;
  double max_factor_abs = 0.0;
  double threshold = kDefaultIllDefinedThreshold;
};

/// Log-domain product in the given order. Arguments are summed as reals and
/// reduced once; exactly real factors contribute exact half turns.
TwistResult accumulate(std::span<const ModeFactor> factors, double threshold = kDefaultIllDefinedThreshold);

std::optional<double> geometric_phase(const TwistResult& r);
std::optional<double> geometric_phase(cplx z, double threshold = kDefaultIllDefinedThreshold);

enum class NConvention { TotalModes, LinearSize };

struct EvalOptions {
  int twist_axis = 0;  // 0-based
  double threshold = kDefaultIllDefinedThreshold;
  NConvention n_convention = NConvention::TotalModes;
  unsigned workers = 1;
};

/// The N entering 2 pi / N for this grid and convention.
long twist_modes(const MomentumGrid& grid, const EvalOptions& opt);

/// z over every non-singular grid mode; singular modes are listed in the result.
/// Throws TrivialTwist, SymmetryViolation, or EvaluationError (all modes singular).
TwistResult evaluate(const ModelSpec& model, const MomentumGrid& grid, const EvalOptions& opt = {});

}  // namespace twistphase
