#include <cmath>
#include <cstdint>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "gapsched/bezier.hpp"
#include "gapsched/problems.hpp"
#include "gapsched/spectrum.hpp"

using namespace gapsched;

namespace {

// Independent evaluator: direct Bernstein-basis summation, no shared code with
// the de Casteljau recurrence under test.
double bernstein_sum_oracle(const std::vector<double>& y, double t) {
  const int d = static_cast<int>(y.size()) - 1;
  double out = 0.0;
  for (int i = 0; i <= d; ++i) {
    double coeff = 1.0;
    for (int k = 1; k <= i; ++k) coeff = coeff * (d - i + k) / k;
    out += y[static_cast<std::size_t>(i)] * coeff * std::pow(t, i) * std::pow(1.0 - t, d - i);
  }
  return out;
}

GapProfile linear_profile(double a, double b, int points) {
  // g(s) = a + b s sampled on a uniform grid
  GapProfile p;
  p.grid = uniform_grid(points);
  for (double s : p.grid) p.gaps.push_back(a + b * s);
  p.meta.n = 4;
  return p;
}

}  // namespace

TEST_CASE("binomial coefficients are exact", "[bezier]") {
  REQUIRE(binomial(3, 0) == 1.0);
  REQUIRE(binomial(3, 1) == 3.0);
  REQUIRE(binomial(3, 2) == 3.0);
  REQUIRE(binomial(3, 3) == 1.0);
  REQUIRE(binomial(7, 3) == 35.0);
  REQUIRE(binomial(7, 4) == 35.0);
  REQUIRE(binomial(5, -1) == 0.0);
  REQUIRE(binomial(5, 6) == 0.0);
}

TEST_CASE("bernstein basis is a partition of unity", "[bezier]") {
  for (int d : {3, 7}) {
    for (double t : {0.0, 0.37, 0.5, 1.0}) {
      double sum = 0.0;
      for (int i = 0; i <= d; ++i)
        sum += binomial(d, i) * std::pow(t, i) * std::pow(1.0 - t, d - i);
      REQUIRE(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("curve evaluation matches direct bernstein summation", "[bezier]") {
  BezierGapCurve curve;
  curve.degree = 7;
  curve.y = {2.0, 1.7, 1.1, 0.6, 0.45, 0.5, 0.42, 0.4};
  for (int i = 0; i <= 1000; ++i) {
    const double s = static_cast<double>(i) / 1000.0;
    REQUIRE(std::abs(eval_curve(curve, s) - bernstein_sum_oracle(curve.y, s)) < 1e-12);
  }
}

TEST_CASE("curve endpoints reproduce the first and last ordinate", "[bezier]") {
  BezierGapCurve curve;
  curve.degree = 3;
  curve.y = {1.9, 0.8, 0.6, 0.3};
  REQUIRE(eval_curve(curve, 0.0) == curve.y.front());
  REQUIRE(eval_curve(curve, 1.0) == curve.y.back());
}

TEST_CASE("curve validation and evaluation reject bad input", "[bezier]") {
  BezierGapCurve curve;
  curve.degree = 3;
  curve.y = {1.0, 1.0, 1.0};  // needs 4 ordinates
  REQUIRE_THROWS_AS(curve.validate(), std::invalid_argument);
  curve.y.push_back(1.0);
  curve.validate();
  REQUIRE_THROWS_AS(eval_curve(curve, -0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(eval_curve(curve, 1.1), std::invalid_argument);
  curve.degree = 0;
  curve.y = {1.0};
  REQUIRE_THROWS_AS(curve.validate(), std::invalid_argument);
}

TEST_CASE("fitting a constant profile recovers constant ordinates", "[bezier]") {
  GapProfile p = linear_profile(1.5, 0.0, 21);
  for (int degree : {3, 7}) {
    const BezierGapCurve curve = fit_bezier(p, degree);
    REQUIRE(curve.degree == degree);
    for (double y : curve.y) REQUIRE(std::abs(y - 1.5) < 1e-9);
    REQUIRE(curve.rms_residual < 1e-9);
  }
}

TEST_CASE("fitting linear data recovers the exact control polygon", "[bezier]") {
  // g(s) = 2.1 - 2 s: degree-3 ordinates are equally spaced along the line
  const GapProfile p = linear_profile(2.1, -2.0, 31);
  const BezierGapCurve curve = fit_bezier(p, 3);
  const std::vector<double> expect = {2.1, 2.1 - 2.0 / 3.0, 2.1 - 4.0 / 3.0, 0.1};
  for (std::size_t i = 0; i < expect.size(); ++i) {
    REQUIRE(std::abs(curve.y[i] - expect[i]) < 1e-9);
  }
  REQUIRE(curve.rms_residual < 1e-9);
}

TEST_CASE("a curve touching zero is rejected with full context", "[bezier]") {
  // g(s) = 2 (1 - s) hits zero at s = 1; the fit itself is exact but the
  // curve is unusable as a denominator
  const GapProfile p = linear_profile(2.0, -2.0, 21);
  try {
    fit_bezier(p, 3);
    FAIL("expected CurveNotPositive");
  } catch (const CurveNotPositive& e) {
    REQUIRE(e.ordinates().size() == 4);
    REQUIRE(std::abs(e.ordinates()[0] - 2.0) < 1e-9);
    REQUIRE(std::abs(e.ordinates()[1] - 4.0 / 3.0) < 1e-9);
    REQUIRE(std::abs(e.ordinates()[2] - 2.0 / 3.0) < 1e-9);
    REQUIRE(std::abs(e.ordinates()[3]) < 1e-9);
    REQUIRE(e.min_value() <= 0.0);
    REQUIRE(e.at_s() == 1.0);
  }
}

TEST_CASE("fit pins both endpoint ordinates to the profile", "[bezier]") {
  const IsingModel m = qubo_to_ising(gen_random_qubo(5, -1.0, 1.0, 404));
  const GapProfile p = gap_profile(m, uniform_grid(21));
  const BezierGapCurve curve = fit_bezier(p, 3);
  REQUIRE(curve.y.front() == p.gaps.front());
  REQUIRE(curve.y.back() == p.gaps.back());
  REQUIRE(eval_curve(curve, 0.0) == p.gaps.front());
  REQUIRE(eval_curve(curve, 1.0) == p.gaps.back());
}

TEST_CASE("an exactly determined fit interpolates the data", "[bezier]") {
  GapProfile p;
  p.grid = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  p.gaps = {2.0, 1.2, 0.8, 0.5};
  p.meta.n = 4;
  const BezierGapCurve curve = fit_bezier(p, 3);
  for (std::size_t j = 0; j < p.grid.size(); ++j) {
    REQUIRE(std::abs(eval_curve(curve, p.grid[j]) - p.gaps[j]) < 1e-10);
  }
  REQUIRE(curve.rms_residual < 1e-10);
}

TEST_CASE("higher degree never fits worse", "[bezier]") {
  // nested model spaces: a degree-7 curve can represent any degree-3 curve
  const IsingModel m = qubo_to_ising(gen_random_qubo(6, -1.0, 1.0, 808));
  const GapProfile p = gap_profile(m, uniform_grid(51));
  const BezierGapCurve lo = fit_bezier(p, 3);
  const BezierGapCurve hi = fit_bezier(p, 7);
  REQUIRE(hi.rms_residual <= lo.rms_residual + 1e-12);
}

TEST_CASE("degree seven reproduces data generated from degree three", "[bezier]") {
  BezierGapCurve gen;
  gen.degree = 3;
  gen.y = {2.0, 1.1, 0.7, 0.5};
  GapProfile p;
  p.grid = uniform_grid(41);
  for (double s : p.grid) p.gaps.push_back(eval_curve(gen, s));
  p.meta.n = 4;
  const BezierGapCurve fit = fit_bezier(p, 7);
  for (double s : p.grid) {
    REQUIRE(std::abs(eval_curve(fit, s) - eval_curve(gen, s)) < 1e-9);
  }
  REQUIRE(fit.rms_residual < 1e-9);
}

TEST_CASE("fit rejects unusable requests", "[bezier]") {
  const GapProfile p = linear_profile(2.0, -1.0, 5);
  REQUIRE_THROWS_AS(fit_bezier(p, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(fit_bezier(p, 7), std::invalid_argument);  // 5 points < 8 ordinates
  GapProfile broken = p;
  broken.gaps.pop_back();
  REQUIRE_THROWS_AS(fit_bezier(broken, 3), std::invalid_argument);
}

TEST_CASE("fit residual reports the root mean square misfit", "[bezier]") {
  // degree 1 on curved data: residual must match a hand-computed value
  GapProfile p;
  p.grid = {0.0, 0.5, 1.0};
  p.gaps = {1.0, 2.0, 1.0};
  p.meta.n = 2;
  const BezierGapCurve curve = fit_bezier(p, 1);  // endpoints pinned: the line y = 1
  REQUIRE(curve.y == std::vector<double>{1.0, 1.0});
  REQUIRE(std::abs(curve.rms_residual - std::sqrt(1.0 / 3.0)) < 1e-12);
}
