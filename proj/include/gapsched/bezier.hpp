#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gapsched/errors.hpp"
#include "gapsched/spectrum.hpp"

namespace gapsched {

// Bezier curve with parameter t identified with s; only the ordinates are
// stored (abscissae are implied by the Bernstein basis in t).
struct BezierGapCurve {
  int degree = 3;
  std::vector<double> y;  // degree + 1 control ordinates
  double rms_residual = 0.0;
  std::string source_profile_id;

  void validate() const {
    if (degree < 1) throw std::invalid_argument("BezierGapCurve: degree must be >= 1");
    if (y.size() != static_cast<std::size_t>(degree) + 1)
      throw std::invalid_argument("BezierGapCurve: need degree + 1 ordinates");
  }
};

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

// de Casteljau evaluation (numerically stable convex combinations).
inline double eval_curve(const BezierGapCurve& curve, double s) {
  curve.validate();
  if (!(s >= 0.0 && s <= 1.0))
    throw std::invalid_argument("eval_curve: s must lie in [0, 1]");
  std::vector<double> tmp = curve.y;
  for (int r = 1; r <= curve.degree; ++r)
    for (int i = 0; i + r <= curve.degree; ++i)
      tmp[static_cast<std::size_t>(i)] = (1.0 - s) * tmp[static_cast<std::size_t>(i)] +
                                         s * tmp[static_cast<std::size_t>(i) + 1];
  return tmp[0];
}

namespace detail {

inline void check_positive_on_grid(const BezierGapCurve& curve, int points = 1001) {
  double min_value = std::numeric_limits<double>::infinity();
  double at_s = 0.0;
  for (int i = 0; i < points; ++i) {
    const double s = static_cast<double>(i) / (points - 1);
    const double v = eval_curve(curve, s);
    if (v < min_value) {
      min_value = v;
      at_s = s;
    }
  }
  if (!(min_value > 0.0)) throw CurveNotPositive(curve.y, min_value, at_s);
}

}  // namespace detail

// Least-squares Bernstein fit with both endpoint ordinates pinned to the
// profile's endpoint gaps; only interior ordinates are free. The returned
// curve must be positive everywhere on a 1001-point check grid, since the gap
// later appears in a denominator.
inline BezierGapCurve fit_bezier(const GapProfile& profile, int degree) {
  profile.validate();
  if (degree < 1) throw std::invalid_argument("fit_bezier: degree must be >= 1");
  const std::size_t npts = profile.grid.size();
  if (npts < static_cast<std::size_t>(degree) + 1)
    throw std::invalid_argument("fit_bezier: need at least degree + 1 profile points");

  BezierGapCurve curve;
  curve.degree = degree;
  curve.y.assign(static_cast<std::size_t>(degree) + 1, 0.0);
  curve.y.front() = profile.gaps.front();
  curve.y.back() = profile.gaps.back();

  const int interior = degree - 1;
  if (interior > 0) {
    Eigen::MatrixXd design(static_cast<Eigen::Index>(npts), interior);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(npts));
    for (std::size_t j = 0; j < npts; ++j) {
      const double t = profile.grid[j];
      const double omt = 1.0 - t;
      // Bernstein basis values B_{i,degree}(t)
      std::vector<double> basis(static_cast<std::size_t>(degree) + 1);
      for (int i = 0; i <= degree; ++i)
        basis[static_cast<std::size_t>(i)] =
            binomial(degree, i) * std::pow(omt, degree - i) * std::pow(t, i);
      for (int i = 1; i < degree; ++i)
        design(static_cast<Eigen::Index>(j), i - 1) = basis[static_cast<std::size_t>(i)];
      rhs(static_cast<Eigen::Index>(j)) = profile.gaps[j] - basis.front() * curve.y.front() -
                                          basis.back() * curve.y.back();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < interior)
      throw std::runtime_error("fit_bezier: rank-deficient design matrix");
    Eigen::VectorXd sol = qr.solve(rhs);
    for (int i = 1; i < degree; ++i) curve.y[static_cast<std::size_t>(i)] = sol(i - 1);
  }

  double ss = 0.0;
  for (std::size_t j = 0; j < npts; ++j) {
    const double r = eval_curve(curve, profile.grid[j]) - profile.gaps[j];
    ss += r * r;
  }
  curve.rms_residual = std::sqrt(ss / static_cast<double>(npts));

  detail::check_positive_on_grid(curve);
  return curve;
}

}  // namespace gapsched
