#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "twistphase/band.hpp"
#include "twistphase/errors.hpp"

using namespace twistphase;
using std::numbers::pi;

namespace {

// direct 2x2 product (R.sigma) v
std::array<cplx, 2> apply(const BlochVector& r, const std::array<cplx, 2>& v) {
  const cplx off(r.rx, -r.ry);
  return {r.rz * v[0] + off * v[1], std::conj(off) * v[0] - r.rz * v[1]};
}

}  // namespace

TEST_CASE("build_grid: one-dimensional points") {
  auto g = build_grid({4});
  REQUIRE(g.total_modes() == 4);
  CHECK(g[0].k[0] == doctest::Approx(pi / 2));
  CHECK(g[1].k[0] == doctest::Approx(pi));
  CHECK(g[2].k[0] == doctest::Approx(3 * pi / 2));
  CHECK(g[3].k[0] == doctest::Approx(2 * pi));
  // exact trig at the special points
  CHECK(g[0].cos_k[0] == 0.0);
  CHECK(g[1].sin_k[0] == 0.0);
  CHECK(g[1].cos_k[0] == -1.0);
  CHECK(g[3].sin_k[0] == 0.0);
  CHECK(g[3].cos_k[0] == 1.0);
}

TEST_CASE("build_grid: lexicographic 2x2") {
  auto g = build_grid({2, 2});
  REQUIRE(g.size() == 4);
  const double want[4][2] = {{pi, pi}, {pi, 2 * pi}, {2 * pi, pi}, {2 * pi, 2 * pi}};
  for (int i = 0; i < 4; ++i) {
    CHECK(g[i].k[0] == doctest::Approx(want[i][0]));
    CHECK(g[i].k[1] == doctest::Approx(want[i][1]));
  }
}

TEST_CASE("build_grid: partner closure for L = 3") {
  auto g = build_grid({3});
  CHECK(g.partner(0) == 1);  // 2pi/3 <-> 4pi/3
  CHECK(g.partner(1) == 0);
  CHECK(g.partner(2) == 2);  // 2pi is its own partner
}

TEST_CASE("build_grid: invalid dimensions") {
  CHECK_THROWS_AS(build_grid({}), InvalidDimension);
  CHECK_THROWS_AS(build_grid({1}), InvalidDimension);
  CHECK_THROWS_AS(build_grid({4, 1}), InvalidDimension);
  CHECK_THROWS_AS(build_grid({2, 2, 2, 2}), InvalidDimension);
}

TEST_CASE("build_grid: count, range, order and k <-> -k closure for many sizes") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> L(2, 256);
  for (int trial = 0; trial < 40; ++trial) {
    const int D = 1 + trial % 3;
    std::vector<int> dims;
    for (int a = 0; a < D; ++a) dims.push_back(D == 3 ? L(rng) % 24 + 2 : L(rng));
    auto g = build_grid(dims);
    std::size_t expect = 1;
    for (int v : dims) expect *= v;
    REQUIRE(g.total_modes() == expect);
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto n = g.labels(i);
      const auto p = g.partner(i);
      auto m = g.labels(p);
      for (int a = 0; a < D; ++a) {
        CHECK(g[i].k[a] > 0.0);
        CHECK(g[i].k[a] <= 2 * pi);
        CHECK((n[a] + m[a]) % dims[a] == 0);
        // trig parity is exact
        CHECK(g[p].sin_k[a] == -g[i].sin_k[a]);
        CHECK(g[p].cos_k[a] == g[i].cos_k[a]);
      }
      if (i > 0) {
        auto prev = g.labels(i - 1);
        CHECK(std::lexicographical_compare(prev.begin(), prev.begin() + D, n.begin(), n.begin() + D));
      }
    }
  }
}

TEST_CASE("grid_sincos agrees with std::sin/cos") {
  for (long L : {2L, 3L, 5L, 8L, 101L, 1000L})
    for (long n = 0; n <= L; ++n) {
      auto [s, c] = grid_sincos(n, L);
      const double x = 2 * pi * n / L;
      CHECK(std::abs(s - std::sin(x)) < 1e-14);
      CHECK(std::abs(c - std::cos(x)) < 1e-14);
    }
}

TEST_CASE("mode_angles: axis-aligned cases") {
  auto g = mode_angles({0, 1, 0, 0});
  CHECK(g.theta == doctest::Approx(pi / 2));
  CHECK(g.gamma_angle == doctest::Approx(0.0));
  CHECK(g.e_minus == doctest::Approx(-1.0));
  CHECK(g.e_plus == doctest::Approx(1.0));

  CHECK(mode_angles({0, 0, 1, 0}).gamma_angle == doctest::Approx(pi / 2));
  CHECK_THROWS_AS(mode_angles({0, 0, 0, 1}), SingularMode);
  CHECK_THROWS_AS(mode_angles({0, 0, 0, 0}), GapClosure);
}

TEST_CASE("mode_angles: quadrant-aware gauge angle") {
  CHECK(mode_angles({0, -1, 0, 0}).gamma_angle == doctest::Approx(pi));
  CHECK(mode_angles({0, -1, -1, 0}).gamma_angle == doctest::Approx(-3 * pi / 4));
}

TEST_CASE("mode_angles: singular error carries k") {
  KPoint k = KPoint::continuous(std::vector<double>{1.25});
  try {
    mode_angles({0, 0, 0, 2}, k);
    FAIL("expected SingularMode");
  } catch (const SingularMode& e) {
    CHECK(e.k()[0] == 1.25);
    CHECK(e.dim() == 1);
  }
}

TEST_CASE("mode_angles: eigen-relations, orthogonality and reconstruction (property)") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> tiny(-1e-7, 1e-7);
  for (int s = 0; s < 2000; ++s) {
    BlochVector r{u(rng), u(rng), u(rng), u(rng)};
    if (s % 10 == 0) {  // nearly polar vectors stress the R -+ R_z denominators
      r.rx = tiny(rng);
      r.ry = tiny(rng);
    }
    const double R = r.magnitude();
    auto g = mode_angles(r);
    CHECK(std::abs(std::cos(g.theta) * R - r.rz) <= 1e-12 * R);
    CHECK(std::abs(R * std::sin(g.theta) * std::cos(g.gamma_angle) - r.rx) <= 1e-12 * R);
    CHECK(std::abs(R * std::sin(g.theta) * std::sin(g.gamma_angle) - r.ry) <= 1e-12 * R);
    CHECK(g.gamma_angle > -pi);
    CHECK(g.gamma_angle <= pi);
    CHECK(std::abs((g.e_plus - g.e_minus) - 2 * R) <= 1e-12 * R);

    auto nrm = [](const std::array<cplx, 2>& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); };
    CHECK(std::abs(nrm(g.nu_plus) - 1.0) <= 1e-12);
    CHECK(std::abs(nrm(g.nu_minus) - 1.0) <= 1e-12);
    CHECK(std::abs(std::conj(g.nu_plus[0]) * g.nu_minus[0] + std::conj(g.nu_plus[1]) * g.nu_minus[1]) <= 1e-12);

    auto hp = apply(r, g.nu_plus), hm = apply(r, g.nu_minus);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(hp[i] - R * g.nu_plus[i]) <= 1e-12 * R);
      CHECK(std::abs(hm[i] + R * g.nu_minus[i]) <= 1e-12 * R);
    }
  }
}

TEST_CASE("mode_couplings: direct substitution") {
  auto c = mode_couplings(pi / 2, 0.0, 0.0, 1.0);
  CHECK(std::abs(c.kprime - cplx(0, -0.5)) < 1e-15);
  CHECK(std::abs(c.kbig - cplx(0, 0.5)) < 1e-15);
  CHECK(c.omega() == doctest::Approx(1 / std::sqrt(2.0)));

  for (double theta : {0.1, 1.0, 2.5}) {
    auto d = mode_couplings(theta, 0.0, 1.0, 0.0);
    CHECK(std::abs(d.kprime) == 0.0);
    CHECK(std::abs(d.kbig) == doctest::Approx(0.5));
  }
}

TEST_CASE("mode_couplings: K' imaginary and omega bounds (property)") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-4.0, 4.0), th(0.0, pi);
  for (int s = 0; s < 500; ++s) {
    auto c = mode_couplings(th(rng), u(rng), u(rng), u(rng));
    CHECK(c.kprime.real() == 0.0);
    CHECK(c.omega() >= std::abs(c.kprime));
    CHECK(c.omega() >= std::abs(c.kbig));
  }
}

TEST_CASE("check_twist_symmetry on tabulated fields") {
  auto g = build_grid({16});
  std::vector<BlochVector> odd(g.size()), even(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    odd[i] = {0, 1.0, std::sin(g[i].k[0]), 0.3};
    odd[i].ry = g[i].sin_k[0];
    even[i] = {0, 1.0, g[i].cos_k[0], 0.3};
  }
  CHECK(check_twist_symmetry(odd, g).pass);
  CHECK(check_twist_symmetry(odd, g).residual == 0.0);
  auto rep = check_twist_symmetry(even, g);
  CHECK_FALSE(rep.pass);
  CHECK(rep.residual == doctest::Approx(2.0));
  CHECK(std::abs(rep.worst_k.cos_k[0]) == 1.0);  // k = pi and k = 2 pi tie
}

TEST_CASE("principal_angle maps to (-pi, pi]") {
  CHECK(principal_angle(pi) == pi);
  CHECK(principal_angle(-pi) == pi);
  CHECK(principal_angle(3 * pi) == doctest::Approx(pi));
  CHECK(principal_angle(-pi / 4) == doctest::Approx(-pi / 4));
  CHECK(principal_angle(2 * pi) == doctest::Approx(0.0));
}
