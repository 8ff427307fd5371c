#include "twistphase/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "twistphase/errors.hpp"

namespace twistphase {

namespace {

constexpr double kPi = std::numbers::pi;

Mat2 mul(const Mat2& a, const Mat2& b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return c;
}

double norm1(const Mat2& a) {
  return std::max(std::abs(a[0][0]) + std::abs(a[1][0]), std::abs(a[0][1]) + std::abs(a[1][1]));
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

Mat2 expm2(const Mat2& a) {
  const double nrm = norm1(a);
  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const double scale = std::ldexp(1.0, -squarings);
  Mat2 s{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s[i][j] = a[i][j] * scale;

  // Horner form of sum_{n <= 30} s^n / n!
  constexpr int kDegree = 30;
  Mat2 result{{{1.0, 0.0}, {0.0, 1.0}}};
  for (int n = kDegree; n >= 1; --n) {
    Mat2 t = mul(s, result);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) t[i][j] /= static_cast<double>(n);
    t[0][0] += 1.0;
    t[1][1] += 1.0;
    result = t;
  }
  for (int q = 0; q < squarings; ++q) result = mul(result, result);
  return result;
}

cplx exp_factor_oracle(const ModeCouplings& c, long n_total) {
  if (n_total < 1) throw InvalidDimension("mode count must be positive");
  const double t = -2.0 * kPi / static_cast<double>(n_total);
  const Mat2 m{{{t * c.kprime, t * c.kbig}, {-t * std::conj(c.kbig), t * std::conj(c.kprime)}}};
  return expm2(m)[0][0];
}

ModeCouplings fd_couplings(const ModelSpec& model, const KPoint& k, int axis, double h) {
  if (model.is_free_fermion())
    throw StencilError("free-fermion gauge angle is piecewise constant; finite differences are not defined");
  if (model.is_custom()) throw StencilError("custom models have no continuous Bloch field");
  if (axis < 0 || axis >= k.dim) throw InvalidDimension("twist axis out of range");
  if (!(h > 0.0)) throw StencilError("finite-difference step must be positive");
  // (R_x, R_y) this small relative to R is a singular mode up to rounding
  constexpr double kNearPolar = 1e-10;
  auto angles = [&](const KPoint& q) {
    const BlochVector r = bloch_continuous(model, q);
    if (std::hypot(r.rx, r.ry) <= kNearPolar * r.magnitude())
      throw SingularMode("(R_x, R_y) ~ 0 at k = " + q.str(), {q.k[0], q.k[1], q.k[2]}, q.dim);
    return mode_angles(r, q);
  };
  try {
    auto g0 = angles(k);
    auto gp = angles(k.shifted(axis, h));
    auto gm = angles(k.shifted(axis, -h));
    const double step = principal_angle(gp.gamma_angle - gm.gamma_angle);
    if (std::abs(step) > kPi / 2)
      throw StencilError("gauge angle jumps by " + std::to_string(step) + " across the stencil at k = " + k.str());
    const double dtheta = (gp.theta - gm.theta) / (2.0 * h);
    const double dgamma = step / (2.0 * h);
    return mode_couplings(g0.theta, g0.gamma_angle, dtheta, dgamma);
  } catch (const SingularMode& e) {
    throw StencilError(std::string("singular mode inside the stencil: ") + e.what());
  }
}

cplx ssh_determinant_z(double phi, int n_cells) {
  if (n_cells < 2 || n_cells % 2 != 0 || n_cells > kMaxDeterminantCells)
    throw InvalidDimension("determinant oracle needs an even cell count in [2, " +
                           std::to_string(kMaxDeterminantCells) + "]");
  if (!(std::abs(phi) <= 1.0)) throw InvalidModel("SSH dimerization must satisfy |phi| <= 1");

  const int sites = 2 * n_cells;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(sites, sites);
  for (int x = 0; x < n_cells; ++x) {
    const int a = 2 * x, b = 2 * x + 1, next = (2 * x + 2) % sites;
    h(a, b) = h(b, a) = -(1.0 + phi);
    h(b, next) += -(1.0 - phi);
    h(next, b) += -(1.0 - phi);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  if (eig.info() != Eigen::Success) throw EvaluationError("SSH diagonalization failed");
  const auto& energies = eig.eigenvalues();
  int occupied = 0;
  for (int i = 0; i < sites; ++i) {
    if (std::abs(energies(i)) < 1e-10)
      throw DegeneracyError("zero-energy orbital at phi = " + std::to_string(phi) + ": half filling is degenerate");
    if (energies(i) < 0.0) ++occupied;
  }
  // eigenvalues are ascending, so the occupied orbitals are the first columns
  Eigen::MatrixXcd u = eig.eigenvectors().leftCols(occupied).cast<cplx>();
  Eigen::VectorXcd twist(sites);
  for (int s = 0; s < sites; ++s) twist(s) = std::polar(1.0, 2.0 * kPi * (s / 2) / n_cells);
  Eigen::MatrixXcd overlap = u.adjoint() * twist.asDiagonal() * u;
  return overlap.partialPivLu().determinant();
}

std::string to_string(VariantPair p) {
  switch (p) {
    case VariantPair::CanonicalOracle: return "canonical-vs-oracle";
    case VariantPair::CanonicalPrinted: return "canonical-vs-printed";
    case VariantPair::PrintedOracle: return "printed-vs-oracle";
    case VariantPair::CanonicalModel: return "canonical-vs-model";
  }
  return "?";
}

bool ComparisonReport::flagged(VariantPair p) const {
  return std::any_of(verdicts.begin(), verdicts.end(), [&](const PairVerdict& v) { return v.pair == p && v.flagged; });
}

bool ComparisonReport::any_flagged() const {
  return std::any_of(verdicts.begin(), verdicts.end(), [](const PairVerdict& v) { return v.flagged; }) ||
         (determinant && determinant->flagged);
}

namespace {

ComparisonRow make_row(const ModeCouplings& c, long n_total, const KPoint& k) {
  ComparisonRow row;
  row.k = k;
  row.canonical = mode_factor(c, n_total).value;
  try {
    row.printed = mode_factor_printed(c, n_total).value;
  } catch (const DegenerateCoefficient&) {
    row.printed = cplx(nan(), nan());
  }
  row.oracle = exp_factor_oracle(c, n_total);
  return row;
}

double deviation(cplx a, cplx b) {
  double d = std::abs(a - b);
  return std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
}

void finalize(ComparisonReport& rep) {
  std::vector<VariantPair> pairs{VariantPair::CanonicalOracle, VariantPair::CanonicalPrinted,
                                 VariantPair::PrintedOracle};
  bool any_model = std::any_of(rep.rows.begin(), rep.rows.end(), [](const auto& r) { return r.model_specific; });
  if (any_model) pairs.push_back(VariantPair::CanonicalModel);
  for (auto p : pairs) {
    PairVerdict v{p};
    for (auto& row : rep.rows) {
      double d = 0.0;
      switch (p) {
        case VariantPair::CanonicalOracle: d = deviation(row.canonical, row.oracle); break;
        case VariantPair::CanonicalPrinted: d = deviation(row.canonical, row.printed); break;
        case VariantPair::PrintedOracle: d = deviation(row.printed, row.oracle); break;
        case VariantPair::CanonicalModel:
          if (!row.model_specific) continue;
          d = deviation(row.canonical, *row.model_specific);
          break;
      }
      row.max_deviation = std::max(row.max_deviation, d);
      v.max_deviation = std::max(v.max_deviation, d);
      if (d > rep.tolerance) ++v.flagged_rows;
    }
    v.flagged = v.flagged_rows > 0;
    rep.max_deviation = std::max(rep.max_deviation, v.max_deviation);
    rep.verdicts.push_back(v);
  }
}

}  // namespace

DeterminantCheck compare_determinant(double phi, int n_cells, double tolerance) {
  DeterminantCheck d;
  d.n_cells = n_cells;
  d.determinant_z = ssh_determinant_z(phi, n_cells);
  d.closed_form_z = evaluate(ModelSpec::ssh(phi), MomentumGrid({n_cells})).z;
  d.abs_deviation = std::abs(std::abs(d.determinant_z) - std::abs(d.closed_form_z));
  const double a = std::arg(d.determinant_z), b = std::arg(d.closed_form_z);
  d.phase_deviation_up_to_conjugation =
      std::min(std::abs(principal_angle(a - b)), std::abs(principal_angle(a + b)));
  d.flagged = d.abs_deviation > tolerance || d.phase_deviation_up_to_conjugation > tolerance;
  return d;
}

ComparisonReport compare_variants(const ModelSpec& model, const MomentumGrid& grid, const ComparisonOptions& opt) {
  require_compatible(model, grid);
  ComparisonReport rep;
  rep.tolerance = opt.tolerance;
  EvalOptions eo;
  eo.twist_axis = opt.twist_axis;
  eo.n_convention = opt.n_convention;
  const long n_total = twist_modes(grid, eo);

  double derived_dev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const KPoint& k = grid[i];
    ModeCouplings c;
    try {
      c = model_couplings(model, grid, i, opt.twist_axis);
    } catch (const SingularMode&) {
      ++rep.singular_modes;
      continue;
    }
    auto row = make_row(c, n_total, k);
    if (model.is_ssh()) {
      row.model_specific = ssh_mode_factor(k, model.ssh_params(), n_total);
    } else if (model.is_free_fermion()) {
      const auto& p = model.free_fermion_params();
      row.model_specific = cplx(free_fermion_mode_factor(k, p, opt.twist_axis, n_total), 0.0);
      const double alt =
          std::cos(2.0 * kPi * free_fermion_Kmu_derived(k, p, opt.twist_axis) / static_cast<double>(n_total));
      derived_dev = std::max(derived_dev, std::abs(alt - row.model_specific->real()));
    }
    rep.rows.push_back(row);
  }
  if (model.is_free_fermion()) rep.derived_coupling_deviation = derived_dev;
  finalize(rep);

  if (opt.include_determinant && model.is_ssh() && grid.size() % 2 == 0 &&
      grid.size() <= static_cast<std::size_t>(kMaxDeterminantCells)) {
    rep.determinant = compare_determinant(model.ssh_params().phi, static_cast<int>(grid.size()));
  }
  return rep;
}

ComparisonReport compare_couplings(const ModeCouplings& c, long n_total, double tolerance) {
  ComparisonReport rep;
  rep.tolerance = tolerance;
  rep.rows.push_back(make_row(c, n_total, KPoint{}));
  finalize(rep);
  return rep;
}

}  // namespace twistphase
