#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace oseenctrl {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  double& operator[](int i) { return i == 0 ? x : y; }
  double operator[](int i) const { return i == 0 ? x : y; }

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// 2x2 matrix, row-major; used for velocity gradients (m[i][j] = d_j v_i).
struct Mat2 {
  std::array<std::array<double, 2>, 2> m{{{0.0, 0.0}, {0.0, 0.0}}};

  std::array<double, 2>& operator[](int i) { return m[i]; }
  const std::array<double, 2>& operator[](int i) const { return m[i]; }

  Mat2 operator-(const Mat2& o) const {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r[i][j] = m[i][j] - o.m[i][j];
    return r;
  }
  double frobenius_squared() const {
    double s = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s += m[i][j] * m[i][j];
    return s;
  }
  /// Matrix-vector product; with the gradient convention this gives (v.grad) of the field.
  Vec2 apply(Vec2 v) const {
    return {m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y};
  }
  double trace() const { return m[0][0] + m[1][1]; }
};

using ScalarFn = std::function<double(Vec2)>;
using VectorFn = std::function<Vec2(Vec2)>;

struct InvalidDomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InvalidParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct MissingInfSupError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InvalidBoundsError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EquilibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CompatibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonConvergenceError : std::runtime_error {
  std::vector<double> residual_history;
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}
};
struct ModeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace oseenctrl
