#include <cmath>

#include "doctest.h"
#include "pencil/spectrum.hpp"
#include "support.hpp"

using namespace pencil;
using doctest::Approx;

TEST_CASE("bracket_windows on the trivial spec") {
  const auto wins = bracket_windows(fixtures::trivial_spec(), 3);
  REQUIRE(wins.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(wins[static_cast<size_t>(i)].center() == Approx(0.5 + i).epsilon(1e-8));
    CHECK(wins[static_cast<size_t>(i)].hi - wins[static_cast<size_t>(i)].lo ==
          Approx(0.9).epsilon(1e-6));
  }
  // pairwise disjoint
  CHECK(wins[0].hi < wins[1].lo);
  CHECK(wins[1].hi < wins[2].lo);

  CHECK(bracket_windows(fixtures::trivial_spec(), 1).size() == 1);
}

TEST_CASE("first window of the interior two-piece spec contains the first root") {
  const auto wins = bracket_windows(fixtures::two_piece_interior_spec(), 3);
  REQUIRE(!wins.empty());
  const double root0 = fixtures::twopiece_roots(1)[0];
  CHECK(wins[0].lo < root0);
  CHECK(root0 < wins[0].hi);
}

TEST_CASE("refine_root Newton paths") {
  SUBCASE("trivial cosine root") {
    const auto r = refine_root(fixtures::trivial_spec(), Complex(0.48), 1e-12);
    CHECK(r.converged);
    CHECK(std::abs(r.lambda - Complex(0.5)) < 1e-10);
    CHECK(r.residual <= 1e-12 * std::max(1.0, kPi));
  }
  SUBCASE("two-piece root from a nearby start") {
    const auto r = refine_root(fixtures::two_piece_spec(), Complex(0.8), 1e-12);
    CHECK(r.converged);
    CHECK(std::abs(r.lambda - Complex(0.77752217521449)) < 1e-8);
  }
  SUBCASE("non-convergence is flagged, not thrown") {
    const auto r = refine_root(fixtures::trivial_spec(), Complex(3.0, 20.0), 1e-12);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 50);
  }
}

TEST_CASE("compute_spectrum on the trivial spec") {
  const auto sp = compute_spectrum(fixtures::trivial_spec(), 3, 1e-11);
  REQUIRE(sp.entries.size() == 3);
  CHECK(sp.complete);
  for (int i = 0; i < 3; ++i) {
    CHECK(sp.entries[static_cast<size_t>(i)].n == i);
    CHECK(std::abs(sp.entries[static_cast<size_t>(i)].lambda - Complex(0.5 + i)) < 1e-9);
    CHECK(sp.entries[static_cast<size_t>(i)].residual < 1e-9);
  }
}

TEST_CASE("compute_spectrum matches the closed-form roots (edge placement)") {
  SpectrumOptions opts;
  opts.fwd = IntegratorSettings{1e-12, 1e-14, kPi / 8.0};
  const auto sp = compute_spectrum(fixtures::two_piece_spec(), 10, 1e-12, opts);
  const auto roots = fixtures::twopiece_roots(10);
  REQUIRE(sp.entries.size() == 10);
  for (size_t i = 0; i < 10; ++i) {
    CHECK(std::abs(sp.entries[i].lambda.imag()) < 1e-10);
    CHECK(sp.entries[i].lambda.real() == Approx(roots[i]).epsilon(1e-9));
    CHECK(std::abs(sp.entries[i].lambda.real() - roots[i]) < 1e-8);
  }
}

TEST_CASE("compute_spectrum survives drifted windows (interior placement)") {
  SpectrumOptions opts;
  opts.fwd = IntegratorSettings{1e-12, 1e-14, kPi / 8.0};
  const auto sp = compute_spectrum(fixtures::two_piece_interior_spec(), 10, 1e-12, opts);
  const auto roots = fixtures::twopiece_roots(10);
  REQUIRE(sp.entries.size() == 10);
  for (size_t i = 0; i < 10; ++i)
    CHECK(std::abs(sp.entries[i].lambda.real() - roots[i]) < 1e-8);
}

TEST_CASE("spectrum ordering and dedup invariants") {
  const auto sp = compute_spectrum(fixtures::two_piece_interior_spec(), 8, 1e-11);
  REQUIRE(sp.entries.size() == 8);
  for (size_t i = 1; i < sp.entries.size(); ++i) {
    CHECK(sp.entries[i].lambda.real() > sp.entries[i - 1].lambda.real());
    CHECK(std::abs(sp.entries[i].lambda - sp.entries[i - 1].lambda) > 1e-8);
    CHECK(sp.entries[i].n == static_cast<int>(i));
  }
}

TEST_CASE("compute_spectrum with spectral jump terms probes off-axis roots") {
  const auto spec = fixtures::generic_jump_spec();
  SpectrumOptions opts;
  opts.fwd = IntegratorSettings{1e-12, 1e-14, kPi / 8.0};
  const auto sp = compute_spectrum(spec, 8, 1e-12, opts);
  REQUIRE(sp.entries.size() == 8);
  for (const auto& e : sp.entries) {
    // every reported eigenvalue is an actual root of Delta
    CHECK(e.residual < 1e-10);
    CHECK(std::abs(char_fn(spec, e.lambda, opts.fwd)) < 1e-10);
  }
  // completeness audit over a rectangle clear of roots on its boundary
  const double hi = sp.entries.back().lambda.real() + 0.6;
  const int count = argument_principle_count(spec, Rect{0.05, hi, -1.0, 1.0}, 256, opts.fwd);
  CHECK(count == 8);
}

TEST_CASE("argument principle counts on the trivial spec") {
  const auto spec = fixtures::trivial_spec();
  CHECK(argument_principle_count(spec, Rect{0.1, 1.9, -0.5, 0.5}, 64) == 2);
  CHECK(argument_principle_count(spec, Rect{0.6, 0.9, -0.1, 0.1}, 64) == 0);
}

TEST_CASE("argument principle matches compute_spectrum for the first five roots") {
  const auto spec = fixtures::two_piece_spec();
  const auto sp = compute_spectrum(spec, 5, 1e-11);
  REQUIRE(sp.entries.size() == 5);
  const double hi = 0.5 * (sp.entries[4].lambda.real() + fixtures::twopiece_roots(6)[5]);
  CHECK(argument_principle_count(spec, Rect{0.01, hi, -0.5, 0.5}, 128) == 5);
}

TEST_CASE("gamma = 0 spectra sit on the real axis") {
  const auto spec = fixtures::two_piece_spec().with_potentials(
      Potentials::cosine({0.05, 0.02}, {0.1, 0.0, 0.3}));
  const auto sp = compute_spectrum(spec, 6, 1e-11);
  REQUIRE(sp.entries.size() == 6);
  for (const auto& e : sp.entries) CHECK(std::abs(e.lambda.imag()) <= 1e-7);
}

TEST_CASE("eigenvalues respond O(eps) to a coefficient perturbation") {
  const auto base = fixtures::two_piece_spec().with_potentials(
      Potentials::cosine({}, {0.2, 0.0, 0.1}));
  const double eps = 1e-6;
  const auto bumped = base.with_potentials(Potentials::cosine({}, {0.2, 0.0, 0.1 + eps}));
  const auto sa = compute_spectrum(base, 10, 1e-12);
  const auto sb = compute_spectrum(bumped, 10, 1e-12);
  REQUIRE(sa.entries.size() == 10);
  REQUIRE(sb.entries.size() == 10);
  for (size_t i = 0; i < 10; ++i) {
    const double move = std::abs(sa.entries[i].lambda - sb.entries[i].lambda);
    CHECK(move / eps < 10.0);
  }
}

TEST_CASE("argument principle rejects a contour through a root") {
  // the right edge passes through the root at 0.5
  CHECK_THROWS_AS(
      argument_principle_count(fixtures::trivial_spec(), Rect{0.0, 0.5, -0.4, 0.4}, 64),
      BoundaryRoot);
}

TEST_CASE("unattainable tolerance yields a flagged partial spectrum") {
  SpectrumOptions opts;
  opts.audit = false;
  const auto sp = compute_spectrum(fixtures::trivial_spec(), 3, 1e-30, opts);
  CHECK_FALSE(sp.complete);
  CHECK(!sp.notes.empty());
}
