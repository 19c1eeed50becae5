#ifndef WASSCURVE_CURVE_HPP
#define WASSCURVE_CURVE_HPP

#include <string>

#include <Eigen/Dense>

#include "wasscurve/error.hpp"

namespace wasscurve {

enum class CurveKind { linear, quadratic };

inline const char* to_string(CurveKind k) { return k == CurveKind::linear ? "linear" : "quadratic"; }

inline CurveKind parse_curve_kind(const std::string& s) {
  if (s == "linear") return CurveKind::linear;
  if (s == "quadratic") return CurveKind::quadratic;
  throw Error(ErrorCategory::schema, "unknown curve kind '" + s + "'");
}

/// Curve family in state space, affine in its parameters for fixed t:
///   linear:    phi(x0, x1; t)     = (T - t) x0 + t x1
///   quadratic: phi(x0, x1, x2; t) = x0 + t x1 + t^2 x2
/// T is the time horizon (1 once timestamps are normalized).
struct CurveClass {
  CurveKind kind = CurveKind::linear;
  double horizon = 1.0;

  static CurveClass linear(double horizon = 1.0) { return {CurveKind::linear, horizon}; }
  static CurveClass quadratic(double horizon = 1.0) { return {CurveKind::quadratic, horizon}; }

  int parameter_count() const { return kind == CurveKind::linear ? 2 : 3; }

  /// Coefficients c_a(t) with phi = sum_a c_a(t) x_a.
  Eigen::VectorXd coefficients(double t) const {
    if (kind == CurveKind::linear) return Eigen::Vector2d(horizon - t, t);
    return Eigen::Vector3d(1.0, t, t * t);
  }

  /// Per-slot factors mapping parameters of the horizon-T problem onto the
  /// normalized [0, 1] problem: (T, T) for lines, (1, T, T^2) for parabolas.
  Eigen::VectorXd normalizing_scales() const {
    if (kind == CurveKind::linear) return Eigen::Vector2d(horizon, horizon);
    return Eigen::Vector3d(1.0, horizon, horizon * horizon);
  }

  /// phi evaluated at time t; params holds one parameter per row.
  Eigen::RowVectorXd evaluate(const Eigen::MatrixXd& params, double t) const {
    require(params.rows() == parameter_count(), "CurveClass::evaluate: wrong parameter count");
    return coefficients(t).transpose() * params;
  }
};

}  // namespace wasscurve

#endif  // WASSCURVE_CURVE_HPP
