#pragma once

// Closed-form two-band models: the D-dimensional paired free-fermion lattice,
// the SSH chain, and tabulated custom Bloch fields.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "twistphase/band.hpp"

namespace twistphase {

struct FreeFermionParams {
  int dim = 1;
  double lambda = 0.0;  // chemical potential
  double gamma = 1.0;   // pairing potential
};

struct SshParams {
  double phi = 0.0;  // dimerization, |phi| <= 1
};

struct CustomParams {
  std::vector<int> dims;
  std::vector<BlochVector> table;  // grid order
};

class ModelSpec {
 public:
  using Variant = std::variant<FreeFermionParams, SshParams, CustomParams>;

  static ModelSpec free_fermion(int dim, double lambda, double gamma);
  static ModelSpec ssh(double phi);
  static ModelSpec custom(std::vector<int> dims, std::vector<BlochVector> table);

  const Variant& variant() const noexcept { return v_; }
  bool is_free_fermion() const noexcept { return std::holds_alternative<FreeFermionParams>(v_); }
  bool is_ssh() const noexcept { return std::holds_alternative<SshParams>(v_); }
  bool is_custom() const noexcept { return std::holds_alternative<CustomParams>(v_); }
  const FreeFermionParams& free_fermion_params() const { return std::get<FreeFermionParams>(v_); }
  const SshParams& ssh_params() const { return std::get<SshParams>(v_); }
  const CustomParams& custom_params() const { return std::get<CustomParams>(v_); }

  /// Spatial dimension of the model's momentum space.
  int dim() const;
  std::string name() const;

 private:
  explicit ModelSpec(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Load a custom model: rows of `n_1..n_D r0 rx ry rz`, '#' comments.
ModelSpec load_custom_table(std::istream& in);
ModelSpec load_custom_table_file(const std::string& path);

// ---- free fermion ---------------------------------------------------------

struct Dispersion {
  double t_k = 0.0;      // sum cos k_a - lambda
  double delta_k = 0.0;  // gamma sum sin k_a
  double lambda_k = 0.0; // sqrt(t^2 + delta^2)
};

Dispersion free_fermion_dispersion(const KPoint& k, const FreeFermionParams& p);

/// R(k) = (0, gamma sum sin k_a, lambda - sum cos k_a).
BlochVector free_fermion_R(const KPoint& k, const FreeFermionParams& p);

/// Twist coupling along axis `mu` for the paired lattice (closed
/// form; the companion K' vanishes). Throws GapClosure when Lambda_k = 0 and
/// TrivialTwist when gamma = 0.
cplx free_fermion_Kmu(const KPoint& k, const FreeFermionParams& p, int mu);

/// |d theta / d k_mu| / 2: the coupling re-derived from the band-basis
/// generator in the R_x = 0 gauge. Differs from free_fermion_Kmu by |R_z|/R.
double free_fermion_Kmu_derived(const KPoint& k, const FreeFermionParams& p, int mu);

/// Free-fermion per-mode factor cos(2 pi |K_mu| / N).
double free_fermion_mode_factor(const KPoint& k, const FreeFermionParams& p, int mu, long n_total);

struct GapReport {
  double min_gap = 0.0;
  std::size_t index = 0;
  KPoint k;
};

GapReport free_fermion_gap(const MomentumGrid& grid, const FreeFermionParams& p);

// ---- SSH --------------------------------------------------------------------

/// R(k) = (-(1+phi) - (1-phi) cos k, -(1-phi) sin k, 0).
BlochVector ssh_R(const KPoint& k, const SshParams& p);

/// K' = -(i/2) [(1-phi)^2 + (1-phi^2) cos k] / [(1-phi)^2 sin^2 k + (1+phi+(1-phi) cos k)^2].
cplx ssh_Kprime(const KPoint& k, const SshParams& p);

/// d gamma_k / dk for the SSH Bloch vector (= 2i K').
double ssh_dgamma(const KPoint& k, const SshParams& p);

/// SSH per-mode factor in the specialized product form
///   cos(2 sqrt2 pi |K'| / N) - i Im[K'] / (sqrt2 |K'|) sin(2 sqrt2 pi |K'| / N).
cplx ssh_mode_factor(const KPoint& k, const SshParams& p, long n_total);

// ---- model-generic ---------------------------------------------------------

bool detect_trivial_twist(const ModelSpec& model);

/// Bloch vector at grid point i (custom tables are looked up, others evaluated).
BlochVector bloch_on_grid(const ModelSpec& model, const MomentumGrid& grid, std::size_t i);

/// Bloch vector at an arbitrary momentum; custom models throw InvalidModel.
BlochVector bloch_continuous(const ModelSpec& model, const KPoint& k);

std::vector<BlochVector> tabulate(const ModelSpec& model, const MomentumGrid& grid);

/// Twist couplings at grid point i for twist axis `axis` (0-based).
///  - free fermion: K' = 0, K = free_fermion_Kmu
///  - SSH: generic band-basis couplings with the analytic d gamma
///  - custom: generic couplings with central differences between grid neighbours
/// Throws SingularMode / GapClosure at excluded modes.
ModeCouplings model_couplings(const ModelSpec& model, const MomentumGrid& grid, std::size_t i, int axis);

SymmetryReport check_twist_symmetry(const ModelSpec& model, const MomentumGrid& grid);

/// min_k R(k) over the grid (Lambda_k for the free-fermion model).
GapReport min_gap(const ModelSpec& model, const MomentumGrid& grid);

/// Throws InvalidModel if the model cannot be evaluated on `grid`.
void require_compatible(const ModelSpec& model, const MomentumGrid& grid);

}  // namespace twistphase
