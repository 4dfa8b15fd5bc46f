// Shared error taxonomy, version tag, and small numeric helpers.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace qchaos {

inline constexpr const char* kVersion = "1.0.0";

/// Base class for all library errors. Subclasses distinguish caller mistakes
/// (rejected preconditions) from internal failures; the CLI maps the former
/// to exit code 2 and the latter to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Caller-side contract violations (bad parameters, bad input data).
struct ValidationError : Error {
  using Error::Error;
};

struct InvalidParameterError : ValidationError {
  using ValidationError::ValidationError;
};
struct InvalidGeometryError : ValidationError {
  using ValidationError::ValidationError;
};
struct RangeError : ValidationError {
  using ValidationError::ValidationError;
};
struct InvalidIncidenceError : ValidationError {
  using ValidationError::ValidationError;
};
struct AliasingError : ValidationError {
  using ValidationError::ValidationError;
};
struct BandwidthError : ValidationError {
  using ValidationError::ValidationError;
};
struct NeedsDerivativesError : ValidationError {
  using ValidationError::ValidationError;
};
struct InsufficientDataError : ValidationError {
  using ValidationError::ValidationError;
};
struct BoxTooSmallError : ValidationError {
  using ValidationError::ValidationError;
};
struct ConditioningError : ValidationError {
  using ValidationError::ValidationError;
};
struct NormalizationError : ValidationError {
  using ValidationError::ValidationError;
};
struct ResolutionError : ValidationError {
  using ValidationError::ValidationError;
};

/// Unexpected internal failures (logic bugs, unreachable states).
struct InternalError : Error {
  using Error::Error;
};

/// 2-D point / vector with the handful of operations the geometry and
/// billiard code needs.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
  friend double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
  friend double norm_sq(Vec2 a) { return dot(a, a); }
  friend double norm(Vec2 a) { return std::sqrt(norm_sq(a)); }
};

inline Vec2 normalized(Vec2 a) {
  const double n = norm(a);
  if (n == 0.0) throw InvalidParameterError("cannot normalize zero vector");
  return {a.x / n, a.y / n};
}

}  // namespace qchaos
