#pragma once

// Brute-force validators for the closed forms: numerical 2x2 exponentials,
// finite-difference couplings, a real-space Slater-determinant overlap for the
// SSH chain, and a side-by-side comparison of every per-mode variant.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "twistphase/band.hpp"
#include "twistphase/models.hpp"
#include "twistphase/twist.hpp"

namespace twistphase {

using Mat2 = std::array<std::array<cplx, 2>, 2>;

/// exp(A) by scaling and squaring with a degree-30 Taylor kernel on ||A|| <= 1/2.
Mat2 expm2(const Mat2& a);

/// (0, 0) element of exp(-(2 pi / N) M) with M = [[K', K], [-K*, K'*]].
cplx exp_factor_oracle(const ModeCouplings& c, long n_total);

/// Couplings from central differences of theta_k, gamma_k on the continuous
/// Bloch field (angle differences taken on the nearest branch). Free-fermion
/// and custom models are rejected with StencilError.
ModeCouplings fd_couplings(const ModelSpec& model, const KPoint& k, int axis, double h = 1e-6);

inline constexpr int kMaxDeterminantCells = 512;

/// <g|eta|g> for the periodic SSH chain of `n_cells` two-site cells at half
/// filling: det(U_occ^dagger T U_occ), T = diag(exp(2 pi i x / n_cells)) with
/// both sites of cell x sharing the phase. Throws DegeneracyError on a
/// zero-energy orbital.
cplx ssh_determinant_z(double phi, int n_cells);

enum class VariantPair { CanonicalOracle, CanonicalPrinted, PrintedOracle, CanonicalModel };

std::string to_string(VariantPair p);

struct ComparisonRow {
  KPoint k;
  cplx canonical;
  cplx printed;
  cplx oracle;
  std::optional<cplx> model_specific;
  double max_deviation = 0.0;
};

struct PairVerdict {
  VariantPair pair;
  double max_deviation = 0.0;
  std::size_t flagged_rows = 0;
  bool flagged = false;
};

struct DeterminantCheck {
  int n_cells = 0;
  cplx determinant_z;
  cplx closed_form_z;
  double abs_deviation = 0.0;
  /// min over {a - b, a + b} of the wrapped phase difference
  double phase_deviation_up_to_conjugation = 0.0;
  bool flagged = false;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::vector<PairVerdict> verdicts;
  double max_deviation = 0.0;
  double tolerance = 1e-9;
  std::size_t singular_modes = 0;
  /// Free fermion only: max |factor(K_mu) - factor(|d theta|/2)|, informational.
  std::optional<double> derived_coupling_deviation;
  std::optional<DeterminantCheck> determinant;

  bool flagged(VariantPair p) const;
  bool any_flagged() const;
};

struct ComparisonOptions {
  int twist_axis = 0;
  NConvention n_convention = NConvention::TotalModes;
  double tolerance = 1e-9;
  bool include_determinant = false;
};

ComparisonReport compare_variants(const ModelSpec& model, const MomentumGrid& grid,
                                  const ComparisonOptions& opt = {});

/// Single-mode comparison for bare couplings.
ComparisonReport compare_couplings(const ModeCouplings& c, long n_total, double tolerance = 1e-9);

DeterminantCheck compare_determinant(double phi, int n_cells, double tolerance = 1e-8);

}  // namespace twistphase
