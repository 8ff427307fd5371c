#pragma once

// Momentum grids, Bloch vectors and two-band geometry.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace twistphase {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 3;

/// A momentum with its trigonometric values. Grid points carry trig values
/// that are exactly odd/even under k -> -k; continuous points use std::sin/cos.
struct KPoint {
  int dim = 0;
  std::array<double, kMaxDim> k{};
  std::array<double, kMaxDim> cos_k{};
  std::array<double, kMaxDim> sin_k{};

  static KPoint continuous(std::span<const double> components);
  /// Same point with component `axis` shifted by `delta` (continuous trig).
  KPoint shifted(int axis, double delta) const;
  std::string str() const;
};

/// sin and cos of 2*pi*n/L, with exact zeros at 0 and pi and exact parity.
std::array<double, 2> grid_sincos(long n, long L);

/// Periodic grid k_a = 2*pi*n_a/L_a, n_a in 1..L_a, lexicographic in (n_1..n_D).
class MomentumGrid {
 public:
  explicit MomentumGrid(std::vector<int> dims);

  int dim() const noexcept { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const noexcept { return dims_; }
  std::size_t total_modes() const noexcept { return points_.size(); }
  std::size_t size() const noexcept { return points_.size(); }

  const KPoint& operator[](std::size_t i) const { return points_[i]; }
  std::span<const KPoint> points() const noexcept { return points_; }

  /// Integer labels n_a (1-based) of point i.
  std::array<int, kMaxDim> labels(std::size_t i) const;
  std::size_t index_of(std::span<const int> labels) const;
  /// Index of the point at -k (mod 2*pi).
  std::size_t partner(std::size_t i) const;
  /// Index of the point `step` sites away along `axis`, periodic.
  std::size_t neighbor(std::size_t i, int axis, int step) const;

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::vector<KPoint> points_;
};

MomentumGrid build_grid(std::vector<int> dims);

struct BlochVector {
  double r0 = 0.0;
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;

  double magnitude() const noexcept;
};

struct ModeGeometry {
  double theta = 0.0;        // [0, pi]
  double gamma_angle = 0.0;  // (-pi, pi]
  double e_minus = 0.0;
  double e_plus = 0.0;
  std::array<cplx, 2> nu_minus{};
  std::array<cplx, 2> nu_plus{};
};

/// Polar angles, band energies and normalized eigenvectors of R.sigma.
/// Throws GapClosure when R = 0, SingularMode when (rx, ry) = (0, 0).
ModeGeometry mode_angles(const BlochVector& r, const KPoint& at = {});

/// Generator entries of the twist in the band basis at one momentum.
struct ModeCouplings {
  cplx kprime;  // purely imaginary
  cplx kbig;

  double omega() const noexcept;
};

/// K' = -i sin^2(theta/2) dgamma,  K = e^{i gamma}/2 (dtheta + i sin(theta) dgamma).
ModeCouplings mode_couplings(double theta, double gamma, double dtheta, double dgamma);

struct SymmetryReport {
  double residual = 0.0;
  std::size_t worst_index = 0;
  KPoint worst_k;
  double energy_scale = 1.0;
  bool pass = true;
};

/// max_k |R_y(k) + R_y(-k)| over a tabulated Bloch field; passes at 1e-12 * max R.
SymmetryReport check_twist_symmetry(std::span<const BlochVector> field, const MomentumGrid& grid);

/// Principal value in (-pi, pi].
double principal_angle(double x);

}  // namespace twistphase
