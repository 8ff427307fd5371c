#include "twistphase/band.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "twistphase/errors.hpp"

namespace twistphase {

namespace {

constexpr double kPi = std::numbers::pi;

std::array<double, kMaxDim> as_array(const KPoint& p) { return p.k; }

}  // namespace

std::array<double, 2> grid_sincos(long n, long L) {
  long m = ((n % L) + L) % L;
  if (m == 0) return {0.0, 1.0};
  if (2 * m == L) return {0.0, -1.0};
  if (2 * m > L) {
    auto [s, c] = grid_sincos(L - m, L);
    return {-s, c};
  }
  // 0 < m < L/2
  if (4 * m == L) return {1.0, 0.0};
  if (4 * m < L) {
    double x = 2.0 * kPi * static_cast<double>(m) / static_cast<double>(L);
    return {std::sin(x), std::cos(x)};
  }
  // pi/2 < x < pi: evaluate through y = pi - x
  double y = kPi * static_cast<double>(L - 2 * m) / static_cast<double>(L);
  return {std::sin(y), -std::cos(y)};
}

KPoint KPoint::continuous(std::span<const double> components) {
  KPoint p;
  p.dim = static_cast<int>(components.size());
  for (int a = 0; a < p.dim; ++a) {
    p.k[a] = components[a];
    p.sin_k[a] = std::sin(components[a]);
    p.cos_k[a] = std::cos(components[a]);
  }
  return p;
}

KPoint KPoint::shifted(int axis, double delta) const {
  KPoint p = *this;
  p.k[axis] += delta;
  p.sin_k[axis] = std::sin(p.k[axis]);
  p.cos_k[axis] = std::cos(p.k[axis]);
  return p;
}

std::string KPoint::str() const {
  std::string out = "(";
  char buf[32];
  for (int a = 0; a < dim; ++a) {
    std::snprintf(buf, sizeof buf, "%.17g", k[a]);
    if (a) out += ", ";
    out += buf;
  }
  return out + ")";
}

MomentumGrid::MomentumGrid(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty() || dims_.size() > static_cast<std::size_t>(kMaxDim))
    throw InvalidDimension("grid dimension must be 1, 2 or 3");
  for (int L : dims_)
    if (L < 2) throw InvalidDimension("every linear size must be >= 2, got " + std::to_string(L));

  const int D = dim();
  strides_.assign(D, 1);
  for (int a = D - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * static_cast<std::size_t>(dims_[a + 1]);
  std::size_t total = strides_[0] * static_cast<std::size_t>(dims_[0]);

  // per-axis tables, then the lexicographic product
  std::vector<std::vector<std::array<double, 3>>> axis_tables(D);
  for (int a = 0; a < D; ++a) {
    const int L = dims_[a];
    for (int n = 1; n <= L; ++n) {
      auto [s, c] = grid_sincos(n, L);
      axis_tables[a].push_back({n == L ? 2.0 * kPi : 2.0 * kPi * n / L, s, c});
    }
  }
  points_.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    KPoint& p = points_[i];
    p.dim = D;
    std::size_t rem = i;
    for (int a = 0; a < D; ++a) {
      std::size_t idx = rem / strides_[a];
      rem %= strides_[a];
      const auto& t = axis_tables[a][idx];
      p.k[a] = t[0];
      p.sin_k[a] = t[1];
      p.cos_k[a] = t[2];
    }
  }
}

std::array<int, kMaxDim> MomentumGrid::labels(std::size_t i) const {
  std::array<int, kMaxDim> n{};
  for (int a = 0; a < dim(); ++a) {
    n[a] = static_cast<int>(i / strides_[a]) + 1;
    i %= strides_[a];
  }
  return n;
}

std::size_t MomentumGrid::index_of(std::span<const int> n) const {
  if (static_cast<int>(n.size()) != dim()) throw InvalidDimension("label count does not match grid dimension");
  std::size_t i = 0;
  for (int a = 0; a < dim(); ++a) {
    if (n[a] < 1 || n[a] > dims_[a]) throw InvalidDimension("label out of range");
    i += static_cast<std::size_t>(n[a] - 1) * strides_[a];
  }
  return i;
}

std::size_t MomentumGrid::partner(std::size_t i) const {
  auto n = labels(i);
  for (int a = 0; a < dim(); ++a) n[a] = (n[a] == dims_[a]) ? dims_[a] : dims_[a] - n[a];
  return index_of(std::span<const int>(n.data(), dim()));
}

std::size_t MomentumGrid::neighbor(std::size_t i, int axis, int step) const {
  auto n = labels(i);
  const int L = dims_[axis];
  n[axis] = ((n[axis] - 1 + step) % L + L) % L + 1;
  return index_of(std::span<const int>(n.data(), dim()));
}

MomentumGrid build_grid(std::vector<int> dims) { return MomentumGrid(std::move(dims)); }

double BlochVector::magnitude() const noexcept { return std::hypot(rx, ry, rz); }

ModeGeometry mode_angles(const BlochVector& r, const KPoint& at) {
  const double R = r.magnitude();
  if (R == 0.0) throw GapClosure("gap closes (R = 0) at k = " + at.str(), as_array(at), at.dim);
  const double rho2 = r.rx * r.rx + r.ry * r.ry;
  if (rho2 == 0.0)
    throw SingularMode("(R_x, R_y) = (0, 0) at k = " + at.str(), as_array(at), at.dim);

  ModeGeometry g;
  g.theta = std::atan2(std::sqrt(rho2), r.rz);
  g.gamma_angle = principal_angle(std::atan2(r.ry, r.rx));
  g.e_minus = r.r0 - R;
  g.e_plus = r.r0 + R;

  // R - rz and R + rz without cancellation
  const double r_minus = r.rz > 0 ? rho2 / (R + r.rz) : R - r.rz;
  const double r_plus = r.rz < 0 ? rho2 / (R - r.rz) : R + r.rz;
  const cplx top(r.rx, -r.ry);
  const double np = std::sqrt(2.0 * R * r_minus);
  const double nm = std::sqrt(2.0 * R * r_plus);
  g.nu_plus = {top / np, cplx(r_minus / np, 0.0)};
  g.nu_minus = {top / nm, cplx(-r_plus / nm, 0.0)};
  return g;
}

double ModeCouplings::omega() const noexcept { return std::hypot(std::abs(kprime), std::abs(kbig)); }

ModeCouplings mode_couplings(double theta, double gamma, double dtheta, double dgamma) {
  const double s = std::sin(0.5 * theta);
  ModeCouplings c;
  c.kprime = cplx(0.0, -s * s * dgamma);
  c.kbig = 0.5 * std::polar(1.0, gamma) * cplx(dtheta, std::sin(theta) * dgamma);
  return c;
}

SymmetryReport check_twist_symmetry(std::span<const BlochVector> field, const MomentumGrid& grid) {
  if (field.size() != grid.size()) throw InvalidDimension("Bloch field does not cover the grid");
  SymmetryReport rep;
  double scale = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    scale = std::max(scale, field[i].magnitude());
    const double res = std::abs(field[i].ry + field[grid.partner(i)].ry);
    if (res > rep.residual) {
      rep.residual = res;
      rep.worst_index = i;
    }
  }
  rep.worst_k = grid[rep.worst_index];
  rep.energy_scale = scale > 0.0 ? scale : 1.0;
  rep.pass = rep.residual <= 1e-12 * rep.energy_scale;
  return rep;
}

double principal_angle(double x) {
  double r = std::remainder(x, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

}  // namespace twistphase
