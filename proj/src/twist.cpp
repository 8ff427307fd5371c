#include "twistphase/twist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "twistphase/errors.hpp"
#include "twistphase/parallel.hpp"

namespace twistphase {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSmallOmega = 1e-12;

}  // namespace

ModeFactor ModeFactor::from_value(cplx value, const KPoint& k) {
  ModeFactor f;
  f.value = value;
  f.k = k;
  f.log_abs = std::log(std::abs(value));
  f.arg = std::arg(value);
  return f;
}

ModeFactor mode_factor(const ModeCouplings& c, long n_total) {
  if (n_total < 1) throw InvalidDimension("mode count must be positive");
  const double omega = c.omega();
  const double t = 2.0 * kPi / static_cast<double>(n_total);
  if (omega < kSmallOmega) return ModeFactor::from_value(1.0 - t * c.kprime);
  const double phase = t * omega;
  return ModeFactor::from_value(std::cos(phase) - (c.kprime / omega) * std::sin(phase));
}

ModeFactor mode_factor_printed(const ModeCouplings& c, long n_total) {
  if (n_total < 1) throw InvalidDimension("mode count must be positive");
  const double k2 = std::norm(c.kbig);
  if (k2 == 0.0) return ModeFactor::from_value(cplx(1.0, 0.0));  // |K|^2 annihilates both terms
  const double omega = c.omega();
  const double t = 2.0 * kPi / static_cast<double>(n_total);
  const cplx lam_p(0.0, omega), lam_m(0.0, -omega);
  const cplx cp2 = -k2 + (lam_p - c.kprime) * (lam_p - c.kprime);
  const cplx cm2 = -k2 + (lam_m - c.kprime) * (lam_m - c.kprime);
  if (cp2 == 0.0 || cm2 == 0.0) throw DegenerateCoefficient("C_+^2 or C_-^2 vanishes");
  const cplx v = 1.0 - (k2 / cp2) * (std::exp(t * lam_p) - 1.0) - (k2 / cm2) * (std::exp(t * lam_m) - 1.0);
  return ModeFactor::from_value(v);
}

TwistResult accumulate(std::span<const ModeFactor> factors, double threshold) {
  TwistResult r;
  r.threshold = threshold;
  r.n_modes = factors.size();
  double log_sum = 0.0;
  double arg_sum = 0.0;
  std::size_t half_turns = 0;
  for (const auto& f : factors) {
    log_sum += f.log_abs;
    r.max_factor_abs = std::max(r.max_factor_abs, std::abs(f.value));
    if (f.value.imag() == 0.0) {
      if (f.value.real() < 0.0) ++half_turns;
    } else {
      arg_sum += f.arg;
    }
  }
  const double phase = principal_angle(arg_sum + ((half_turns % 2) ? kPi : 0.0));
  const double mag = std::exp(log_sum);
  r.log_abs_z = log_sum;
  if (phase == 0.0)
    r.z = cplx(mag, 0.0);
  else if (phase == kPi)
    r.z = cplx(-mag, 0.0);
  else
    r.z = std::polar(mag, phase);
  r.ill_defined = !(log_sum >= std::log(threshold));
  r.gamma_g = r.ill_defined ? std::numeric_limits<double>::quiet_NaN() : phase;
  return r;
}

std::optional<double> geometric_phase(const TwistResult& r) {
  if (r.ill_defined) return std::nullopt;
  return r.gamma_g;
}

std::optional<double> geometric_phase(cplx z, double threshold) {
  if (!(std::abs(z) >= threshold)) return std::nullopt;
  return principal_angle(std::arg(z));
}

long twist_modes(const MomentumGrid& grid, const EvalOptions& opt) {
  if (opt.n_convention == NConvention::LinearSize) return grid.dims().at(opt.twist_axis);
  return static_cast<long>(grid.total_modes());
}

TwistResult evaluate(const ModelSpec& model, const MomentumGrid& grid, const EvalOptions& opt) {
  if (detect_trivial_twist(model))
    throw TrivialTwist("trivial twist: gamma = 0 makes the twist commute with H; z carries no phase information");
  require_compatible(model, grid);
  if (opt.twist_axis < 0 || opt.twist_axis >= grid.dim())
    throw InvalidDimension("twist axis out of range for a " + std::to_string(grid.dim()) + "-dimensional grid");

  auto sym = check_twist_symmetry(model, grid);
  if (!sym.pass)
    throw SymmetryViolation("R_y(k) = -R_y(-k) fails: residual " + std::to_string(sym.residual) + " at k = " +
                            sym.worst_k.str());

  const long n_total = twist_modes(grid, opt);
  std::vector<std::optional<ModeFactor>> slots(grid.size());
  parallel_for(grid.size(), opt.workers, [&](std::size_t i) {
    try {
      auto f = mode_factor(model_couplings(model, grid, i, opt.twist_axis), n_total);
      f.k = grid[i];
      slots[i] = f;
    } catch (const SingularMode&) {
      slots[i].reset();
    }
  });

  std::vector<ModeFactor> factors;
  std::vector<KPoint> singular;
  factors.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (slots[i])
      factors.push_back(*slots[i]);
    else
      singular.push_back(grid[i]);
  }
  if (factors.empty()) throw EvaluationError("every grid mode is singular");

  auto r = accumulate(factors, opt.threshold);
  r.singular_modes = std::move(singular);
  return r;
}

}  // namespace twistphase
