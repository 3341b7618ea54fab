#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pencil/model.hpp"
#include "support.hpp"

using namespace pencil;

namespace {

std::string write_temp(const std::string& text) {
  static int counter = 0;
  const auto path =
      (std::filesystem::temp_directory_path() / ("pencil_model_" + std::to_string(counter++) + ".json"))
          .string();
  std::ofstream out(path);
  out << text;
  return path;
}

const char* kRelaxedFile = R"({
  "weight": {"alpha": 0.6, "beta": 0.8},
  "jumps": [{"location": 0.7, "alpha": 1.0, "gamma": 0.0},
            {"location": 2.3, "alpha": 1.0, "gamma": 0.0}],
  "potentials": {"kind": "cosine", "p": [], "q": []},
  "mode": "relaxed"
})";

}  // namespace

TEST_CASE("load_problem maps fields") {
  const auto spec = load_problem(write_temp(kRelaxedFile));
  CHECK(spec.weight().alpha == 0.6);
  CHECK(spec.weight().beta == 0.8);
  CHECK(spec.jump(0).location == 0.7);
  CHECK(spec.jump(1).beta() == 1.0);
  CHECK(spec.mode() == ValidationMode::relaxed);
}

TEST_CASE("strict validation rejects inverted weight roots") {
  const std::string bad = R"({
    "weight": {"alpha": 0.9, "beta": 0.8},
    "jumps": [{"location": 0.7, "alpha": 1.5, "gamma": 0.1},
              {"location": 2.3, "alpha": 0.8, "gamma": 0.2}],
    "potentials": {"kind": "cosine", "p": [], "q": []},
    "mode": "strict"
  })";
  CHECK_THROWS_WITH_AS(load_problem(write_temp(bad)), doctest::Contains("alpha < beta violated"),
                       ValidationError);
}

TEST_CASE("strict validation rejects a trivial jump") {
  const std::string bad = R"({
    "weight": {"alpha": 0.6, "beta": 0.8},
    "jumps": [{"location": 0.7, "alpha": 1.0, "gamma": 0.0},
              {"location": 2.3, "alpha": 0.8, "gamma": 0.2}],
    "potentials": {"kind": "cosine", "p": [], "q": []},
    "mode": "strict"
  })";
  CHECK_THROWS_WITH_AS(load_problem(write_temp(bad)), doctest::Contains("jump 1 is trivial"),
                       ValidationError);
}

TEST_CASE("malformed file raises ParseError") {
  CHECK_THROWS_AS(load_problem(write_temp("{ not json")), ParseError);
  CHECK_THROWS_AS(load_problem("/nonexistent/path.json"), ParseError);
}

TEST_CASE("jump location constraints") {
  auto make = [](double l1, double l2) {
    return ProblemSpec::validated(PiecewiseWeight{0.6, 0.8}, Potentials::cosine({}, {}),
                                  {JumpCondition{l1, 1.0, 0.0}, JumpCondition{l2, 1.0, 0.0}},
                                  ValidationMode::relaxed);
  };
  CHECK_THROWS_AS(make(2.0, 2.3), ValidationError);   // a1 beyond pi/2
  CHECK_THROWS_AS(make(0.7, 1.0), ValidationError);   // a2 before pi/2
  CHECK_THROWS_AS(make(kHalfPi, kHalfPi), ValidationError);
  CHECK_NOTHROW(make(0.0, kHalfPi));                  // edge placements are legal
}

TEST_CASE("eval_potentials basics") {
  const auto zero = fixtures::trivial_spec();
  CHECK(eval_potentials(zero, 1.0) == std::pair{0.0, 0.0});

  const auto spec = zero.with_potentials(Potentials::cosine({0.0, 0.1}, {}));
  CHECK(eval_potentials(spec, 0.0).first == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_THROWS_AS(eval_potentials(spec, -0.1), DomainError);
  CHECK_THROWS_AS(eval_potentials(spec, kPi + 0.1), DomainError);
}

TEST_CASE("grid representation reproduces its nodes exactly") {
  const int n = 21;
  const double h = kPi / (n - 1);
  std::vector<double> p(n), q(n);
  for (int i = 0; i < n; ++i) {
    p[i] = 0.1 * std::sin(i * h);
    q[i] = std::cos(2.0 * i * h);
  }
  const auto pots = Potentials::grid(p, q);
  for (int i = 0; i < n; ++i) {
    const double x = std::min(i * h, kPi);
    CHECK(pots.p(x) == p[i]);
    CHECK(pots.q(x) == q[i]);
  }
}

TEST_CASE("integrate_p closed forms and additivity") {
  const auto zero = fixtures::trivial_spec();
  CHECK(integrate_p(zero, 0.3, 2.9) == 0.0);

  const auto spec = zero.with_potentials(Potentials::cosine({0.0, 1.0}, {}));  // p = cos x
  CHECK(integrate_p(spec, 0.0, kHalfPi) == doctest::Approx(1.0).epsilon(1e-14));

  // additivity across arbitrary splits
  const double a = 0.2, b = 1.7, c = 3.0;
  CHECK(integrate_p(spec, a, b) + integrate_p(spec, b, c) ==
        doctest::Approx(integrate_p(spec, a, c)).epsilon(1e-12));
  CHECK(integrate_p(spec, b, a) == doctest::Approx(-integrate_p(spec, a, b)));
}

TEST_CASE("grid integral matches adaptive quadrature oracle") {
  const int n = 201;
  std::vector<double> p(n), q(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double x = kPi * i / (n - 1);
    p[i] = std::exp(-x) * std::sin(3.0 * x);
  }
  const auto pots = Potentials::grid(p, q);
  const double a1 = 0.7, x = 2.9;
  const double direct = pots.integrate_p(a1, x);
  const double oracle =
      fixtures::adaptive_simpson([&](double t) { return pots.p(t); }, a1, x, 1e-13);
  CHECK(direct == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("load -> serialize -> load round trip") {
  const auto spec = fixtures::truth_spec();
  const auto path = write_temp(problem_to_json(spec));
  const auto back = load_problem(path);
  CHECK(back.weight().alpha == spec.weight().alpha);
  CHECK(back.weight().beta == spec.weight().beta);
  for (int i = 0; i < 2; ++i) {
    CHECK(back.jump(i).location == spec.jump(i).location);
    CHECK(back.jump(i).alpha == spec.jump(i).alpha);
    CHECK(back.jump(i).gamma == spec.jump(i).gamma);
  }
  CHECK(back.potentials().p_data() == spec.potentials().p_data());
  CHECK(back.potentials().q_data() == spec.potentials().q_data());
  CHECK(back.mode() == spec.mode());

  // grid variant round-trips too
  std::vector<double> s(11);
  for (int i = 0; i < 11; ++i) s[static_cast<size_t>(i)] = std::sin(0.3 * i);
  const auto gspec = spec.with_potentials(Potentials::grid(s, s));
  const auto gback = load_problem(write_temp(problem_to_json(gspec)));
  CHECK(gback.potentials().p_data() == s);
}

TEST_CASE("cosine basis is even about both interval ends") {
  const std::vector<double> c = {0.3, -0.2, 0.11, 0.07};
  const auto pots = Potentials::cosine(c, c);
  auto direct = [&](double x) {
    double s = 0.0;
    for (size_t k = 0; k < c.size(); ++k) s += c[k] * std::cos(k * x);
    return s;
  };
  for (double x : {0.3, 1.1, 2.7}) {
    CHECK(pots.p(x) == doctest::Approx(direct(2.0 * kPi - x)).epsilon(1e-14));
    CHECK(pots.p(x) == doctest::Approx(direct(-x)).epsilon(1e-14));
  }
}

TEST_CASE("split potentials delegate the right half") {
  const auto right = Potentials::cosine({0.5, 0.25}, {0.0, 0.0, 1.0});
  const auto split = Potentials::split_left_cosine({0.1, -0.05}, {0.2}, right);
  CHECK(split.p(0.4) == doctest::Approx(0.1 - 0.05 * std::cos(0.8)).epsilon(1e-15));
  CHECK(split.q(0.4) == doctest::Approx(0.2).epsilon(1e-15));
  for (double x : {kHalfPi, 2.0, 3.0}) {
    CHECK(split.p(x) == right.p(x));
    CHECK(split.q(x) == right.q(x));
  }
  // piecewise-exact integral across the breakpoint
  const double direct = split.integrate_p(1.0, 2.5);
  const double oracle =
      fixtures::adaptive_simpson([&](double t) { return split.p(t); }, 1.0, 2.5, 1e-13);
  CHECK(direct == doctest::Approx(oracle).epsilon(1e-10));
}
