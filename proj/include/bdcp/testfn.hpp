#pragma once

// Closed-form test functions G(t, u) = e^{kappa t} S(u1) used for pairings
// against empirical fields and in the weak formulation. They depend on the
// axial coordinate only; in d = 2 they are constant along the transverse torus.
//
// Named forms:
//   zero
//   const:c
//   sine:n[:kappa]          S = sin(n pi (u1 + 1) / 2), vanishes at u1 = +-1
//   bump:center:width[:kappa]
//                           S = exp(1 - 1 / (1 - s^2)), s = (u1 - center) / width

#include <array>
#include <string>

#include "bdcp/lattice.hpp"

namespace bdcp {

class TestFunction {
 public:
  enum class Kind { zero, constant, sine, bump };

  TestFunction() = default;

  static TestFunction zero() { return {}; }
  static TestFunction constant(double c);
  static TestFunction sine(int mode, double kappa = 0.0);
  static TestFunction bump(double center, double width, double kappa = 0.0);
  static TestFunction parse(const std::string& name);

  double value(double t, const Point& u) const { return time_factor(t) * shape(u[0]); }
  double time_derivative(double t, const Point& u) const { return kappa_ * value(t, u); }
  double grad1(double t, const Point& u) const { return time_factor(t) * shape_d1(u[0]); }
  double laplacian(double t, const Point& u) const { return time_factor(t) * shape_d2(u[0]); }

  /// Closed interval in u1 outside of which the function is zero.
  std::array<double, 2> support() const noexcept { return support_; }
  /// Vanishes (with value, not derivative) at u1 = +-1.
  bool boundary_vanishing() const noexcept;
  /// Compact support strictly inside (-1, 1).
  bool compactly_supported() const noexcept;
  bool is_zero() const noexcept { return kind_ == Kind::zero; }

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

 private:
  double time_factor(double t) const;
  double shape(double u1) const;
  double shape_d1(double u1) const;
  double shape_d2(double u1) const;

  Kind kind_ = Kind::zero;
  double a_ = 0.0;  // constant value, sine mode, or bump centre
  double b_ = 0.0;  // bump width
  double kappa_ = 0.0;
  std::array<double, 2> support_{-1.0, 1.0};
  std::string name_ = "zero";
};

/// One scalar test function per particle type.
using TestTriple = std::array<TestFunction, 3>;

/// Per particle type, one component per lattice axis (axis 1 unused in d = 1).
using VectorTestTriple = std::array<std::array<TestFunction, 2>, 3>;

/// "f1,f2,f3" with each fi a named test function.
TestTriple parse_test_triple(const std::string& text);

/// Axis-0 components from "f1,f2,f3"; transverse components are zero.
VectorTestTriple parse_axial_vector_triple(const std::string& text);

std::string describe(const TestTriple& g);

}  // namespace bdcp
