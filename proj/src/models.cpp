#include "twistphase/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "twistphase/errors.hpp"

namespace twistphase {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Sums {
  double cos = 0.0;
  double sin = 0.0;
};

Sums trig_sums(const KPoint& k) {
  Sums s;
  for (int a = 0; a < k.dim; ++a) {
    s.cos += k.cos_k[a];
    s.sin += k.sin_k[a];
  }
  return s;
}

void require_axis(int axis, int dim) {
  if (axis < 0 || axis >= dim)
    throw InvalidDimension("twist axis " + std::to_string(axis + 1) + " outside 1.." + std::to_string(dim));
}

double wrap_difference(double a, double b) { return principal_angle(a - b); }

}  // namespace

ModelSpec ModelSpec::free_fermion(int dim, double lambda, double gamma) {
  if (dim < 1 || dim > 3) throw InvalidModel("free-fermion dimension must be 1, 2 or 3");
  if (!std::isfinite(lambda) || !std::isfinite(gamma)) throw InvalidModel("free-fermion parameters must be finite");
  return ModelSpec(FreeFermionParams{dim, lambda, gamma});
}

ModelSpec ModelSpec::ssh(double phi) {
  if (!(std::abs(phi) <= 1.0)) throw InvalidModel("SSH dimerization must satisfy |phi| <= 1");
  return ModelSpec(SshParams{phi});
}

ModelSpec ModelSpec::custom(std::vector<int> dims, std::vector<BlochVector> table) {
  MomentumGrid grid(dims);  // validates dims
  if (table.size() != grid.size())
    throw InvalidModel("custom table has " + std::to_string(table.size()) + " rows, grid needs " +
                       std::to_string(grid.size()));
  return ModelSpec(CustomParams{std::move(dims), std::move(table)});
}

int ModelSpec::dim() const {
  return std::visit(overloaded{[](const FreeFermionParams& p) { return p.dim; },
                               [](const SshParams&) { return 1; },
                               [](const CustomParams& p) { return static_cast<int>(p.dims.size()); }},
                    v_);
}

std::string ModelSpec::name() const {
  return std::visit(overloaded{[](const FreeFermionParams&) { return std::string("free_fermion"); },
                               [](const SshParams&) { return std::string("ssh"); },
                               [](const CustomParams&) { return std::string("custom"); }},
                    v_);
}

ModelSpec load_custom_table(std::istream& in) {
  struct Row {
    std::vector<int> n;
    BlochVector r;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t lineno = 0;
  int D = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const int ncol = static_cast<int>(tok.size());
    if (D < 0) {
      D = ncol - 4;
      if (D < 1 || D > 3) throw ParseError("custom table needs 5 to 7 columns", lineno);
    } else if (ncol != D + 4) {
      throw ParseError("inconsistent column count", lineno);
    }
    Row row;
    try {
      for (int a = 0; a < D; ++a) {
        std::size_t used = 0;
        row.n.push_back(std::stoi(tok[a], &used));
        if (used != tok[a].size()) throw std::invalid_argument(tok[a]);
      }
      double vals[4];
      for (int j = 0; j < 4; ++j) {
        std::size_t used = 0;
        vals[j] = std::stod(tok[D + j], &used);
        if (used != tok[D + j].size()) throw std::invalid_argument(tok[D + j]);
      }
      row.r = {vals[0], vals[1], vals[2], vals[3]};
    } catch (const std::logic_error&) {
      throw ParseError("malformed number in custom table", lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("custom table is empty", lineno);

  std::vector<int> dims(D, 0);
  for (const auto& row : rows)
    for (int a = 0; a < D; ++a) {
      if (row.n[a] < 1) throw InvalidModel("custom table labels are 1-based");
      dims[a] = std::max(dims[a], row.n[a]);
    }
  MomentumGrid grid(dims);
  std::vector<BlochVector> table(grid.size());
  std::vector<char> seen(grid.size(), 0);
  for (const auto& row : rows) {
    auto i = grid.index_of(row.n);
    if (seen[i]) throw InvalidModel("custom table repeats a grid point");
    seen[i] = 1;
    table[i] = row.r;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw InvalidModel("custom table does not cover the full grid");
  return ModelSpec::custom(std::move(dims), std::move(table));
}

ModelSpec load_custom_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidModel("cannot open custom table '" + path + "'");
  return load_custom_table(in);
}

Dispersion free_fermion_dispersion(const KPoint& k, const FreeFermionParams& p) {
  auto s = trig_sums(k);
  Dispersion d;
  d.t_k = s.cos - p.lambda;
  d.delta_k = p.gamma * s.sin;
  d.lambda_k = std::hypot(d.t_k, d.delta_k);
  return d;
}

BlochVector free_fermion_R(const KPoint& k, const FreeFermionParams& p) {
  auto s = trig_sums(k);
  return {0.0, 0.0, p.gamma * s.sin, p.lambda - s.cos};
}

cplx free_fermion_Kmu(const KPoint& k, const FreeFermionParams& p, int mu) {
  require_axis(mu, k.dim);
  if (p.gamma == 0.0) throw TrivialTwist("gamma = 0: the twist commutes with the Hamiltonian");
  auto s = trig_sums(k);
  const double c = p.lambda - s.cos;
  const double lam2 = p.gamma * p.gamma * s.sin * s.sin + c * c;
  if (lam2 == 0.0) throw GapClosure("gapless mode (Lambda_k = 0) at k = " + k.str(), k.k, k.dim);
  const double num = p.gamma * c * (k.cos_k[mu] * c - k.sin_k[mu] * s.sin);
  return cplx(0.0, -num / (2.0 * lam2 * std::sqrt(lam2)));
}

double free_fermion_Kmu_derived(const KPoint& k, const FreeFermionParams& p, int mu) {
  require_axis(mu, k.dim);
  auto s = trig_sums(k);
  const double c = p.lambda - s.cos;
  const double ry = p.gamma * s.sin;
  const double lam2 = ry * ry + c * c;
  if (lam2 == 0.0) throw GapClosure("gapless mode (Lambda_k = 0) at k = " + k.str(), k.k, k.dim);
  // d theta/dk_mu with theta = atan2(|R_y|, R_z), R_z' = sin k_mu, R_y' = gamma cos k_mu
  return std::abs(k.sin_k[mu] * ry - c * p.gamma * k.cos_k[mu]) / (2.0 * lam2);
}

GapReport free_fermion_gap(const MomentumGrid& grid, const FreeFermionParams& p) {
  if (grid.dim() != p.dim) throw InvalidDimension("grid dimension does not match the model");
  GapReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double g = free_fermion_dispersion(grid[i], p).lambda_k;
    if (g < rep.min_gap) {
      rep.min_gap = g;
      rep.index = i;
    }
  }
  rep.k = grid[rep.index];
  return rep;
}

BlochVector ssh_R(const KPoint& k, const SshParams& p) {
  const double a = 1.0 + p.phi, b = 1.0 - p.phi;
  return {0.0, -a - b * k.cos_k[0], -b * k.sin_k[0], 0.0};
}

double ssh_dgamma(const KPoint& k, const SshParams& p) {
  const double b = 1.0 - p.phi;
  const double num = b * b + (1.0 - p.phi * p.phi) * k.cos_k[0];
  const double x = 1.0 + p.phi + b * k.cos_k[0];
  const double den = b * b * k.sin_k[0] * k.sin_k[0] + x * x;
  if (den == 0.0) throw GapClosure("SSH gap closes at k = " + k.str(), k.k, k.dim);
  return num / den;
}

cplx ssh_Kprime(const KPoint& k, const SshParams& p) { return cplx(0.0, -0.5 * ssh_dgamma(k, p)); }

cplx ssh_mode_factor(const KPoint& k, const SshParams& p, long n_total) {
  const cplx kp = ssh_Kprime(k, p);
  const double a = std::abs(kp);
  if (a == 0.0) return cplx(1.0, 0.0);
  const double x = 2.0 * std::numbers::sqrt2 * std::numbers::pi * a / static_cast<double>(n_total);
  return std::cos(x) - cplx(0.0, kp.imag()) / (std::numbers::sqrt2 * a) * std::sin(x);
}

double free_fermion_mode_factor(const KPoint& k, const FreeFermionParams& p, int mu, long n_total) {
  return std::cos(2.0 * std::numbers::pi * std::abs(free_fermion_Kmu(k, p, mu)) / static_cast<double>(n_total));
}

bool detect_trivial_twist(const ModelSpec& model) {
  return model.is_free_fermion() && model.free_fermion_params().gamma == 0.0;
}

void require_compatible(const ModelSpec& model, const MomentumGrid& grid) {
  if (grid.dim() != model.dim())
    throw InvalidDimension("grid dimension " + std::to_string(grid.dim()) + " does not match model dimension " +
                           std::to_string(model.dim()));
  if (model.is_custom() && model.custom_params().dims != grid.dims())
    throw InvalidModel("custom table was tabulated on a different grid");
}

BlochVector bloch_on_grid(const ModelSpec& model, const MomentumGrid& grid, std::size_t i) {
  if (model.is_custom()) return model.custom_params().table.at(i);
  return bloch_continuous(model, grid[i]);
}

BlochVector bloch_continuous(const ModelSpec& model, const KPoint& k) {
  return std::visit(
      overloaded{[&](const FreeFermionParams& p) { return free_fermion_R(k, p); },
                 [&](const SshParams& p) { return ssh_R(k, p); },
                 [](const CustomParams&) -> BlochVector {
                   throw InvalidModel("custom models are only defined on their tabulation grid");
                 }},
      model.variant());
}

std::vector<BlochVector> tabulate(const ModelSpec& model, const MomentumGrid& grid) {
  require_compatible(model, grid);
  if (model.is_custom()) return model.custom_params().table;
  std::vector<BlochVector> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = bloch_continuous(model, grid[i]);
  return out;
}

ModeCouplings model_couplings(const ModelSpec& model, const MomentumGrid& grid, std::size_t i, int axis) {
  require_axis(axis, grid.dim());
  const KPoint& k = grid[i];
  return std::visit(
      overloaded{
          [&](const FreeFermionParams& p) {
            return ModeCouplings{cplx(0.0, 0.0), free_fermion_Kmu(k, p, axis)};
          },
          [&](const SshParams& p) {
            auto g = mode_angles(ssh_R(k, p), k);
            return mode_couplings(g.theta, g.gamma_angle, 0.0, ssh_dgamma(k, p));
          },
          [&](const CustomParams& p) {
            auto g = mode_angles(p.table[i], k);
            auto fwd = mode_angles(p.table[grid.neighbor(i, axis, +1)], grid[grid.neighbor(i, axis, +1)]);
            auto bwd = mode_angles(p.table[grid.neighbor(i, axis, -1)], grid[grid.neighbor(i, axis, -1)]);
            const double h2 = 2.0 * (2.0 * std::numbers::pi / grid.dims()[axis]);
            return mode_couplings(g.theta, g.gamma_angle, (fwd.theta - bwd.theta) / h2,
                                  wrap_difference(fwd.gamma_angle, bwd.gamma_angle) / h2);
          }},
      model.variant());
}

SymmetryReport check_twist_symmetry(const ModelSpec& model, const MomentumGrid& grid) {
  auto field = tabulate(model, grid);
  return check_twist_symmetry(std::span<const BlochVector>(field), grid);
}

GapReport min_gap(const ModelSpec& model, const MomentumGrid& grid) {
  require_compatible(model, grid);
  GapReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double g = bloch_on_grid(model, grid, i).magnitude();
    if (g < rep.min_gap) {
      rep.min_gap = g;
      rep.index = i;
    }
  }
  rep.k = grid[rep.index];
  return rep;
}

}  // namespace twistphase
