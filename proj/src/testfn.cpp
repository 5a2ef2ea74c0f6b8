#include "bdcp/testfn.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bdcp {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

}  // namespace

TestFunction TestFunction::constant(double c) {
  TestFunction f;
  f.kind_ = Kind::constant;
  f.a_ = c;
  std::ostringstream os;
  os << "const:" << c;
  f.name_ = os.str();
  return f;
}

TestFunction TestFunction::sine(int mode, double kappa) {
  if (mode < 1) throw std::invalid_argument("sine mode must be >= 1");
  TestFunction f;
  f.kind_ = Kind::sine;
  f.a_ = mode;
  f.kappa_ = kappa;
  std::ostringstream os;
  os << "sine:" << mode;
  if (kappa != 0.0) os << ':' << kappa;
  f.name_ = os.str();
  return f;
}

TestFunction TestFunction::bump(double center, double width, double kappa) {
  if (!(width > 0.0)) throw std::invalid_argument("bump width must be > 0");
  TestFunction f;
  f.kind_ = Kind::bump;
  f.a_ = center;
  f.b_ = width;
  f.kappa_ = kappa;
  f.support_ = {center - width, center + width};
  std::ostringstream os;
  os << "bump:" << center << ':' << width;
  if (kappa != 0.0) os << ':' << kappa;
  f.name_ = os.str();
  return f;
}

TestFunction TestFunction::parse(const std::string& raw) {
  const std::string name = trim(raw);
  const auto parts = split(name, ':');
  if (parts.empty() || name == "zero" || name == "0") return zero();
  const std::string& head = parts[0];
  try {
    if (head == "const" && parts.size() == 2) return constant(to_double(parts[1]));
    if (head == "sine" && (parts.size() == 2 || parts.size() == 3)) {
      const double mode = to_double(parts[1]);
      if (mode != std::floor(mode)) throw std::invalid_argument("sine mode must be an integer");
      return sine(static_cast<int>(mode), parts.size() == 3 ? to_double(parts[2]) : 0.0);
    }
    if (head == "bump" && (parts.size() == 3 || parts.size() == 4))
      return bump(to_double(parts[1]), to_double(parts[2]),
                  parts.size() == 4 ? to_double(parts[3]) : 0.0);
  } catch (const std::logic_error& e) {
    throw std::invalid_argument("test function '" + name + "': " + e.what());
  }
  throw std::invalid_argument("unknown test function '" + name + "'");
}

bool TestFunction::boundary_vanishing() const noexcept {
  switch (kind_) {
    case Kind::zero:
    case Kind::sine: return true;
    case Kind::constant: return a_ == 0.0;
    case Kind::bump: return support_[0] >= -1.0 && support_[1] <= 1.0;
  }
  return false;
}

bool TestFunction::compactly_supported() const noexcept {
  return kind_ == Kind::zero || (kind_ == Kind::bump && support_[0] > -1.0 && support_[1] < 1.0);
}

double TestFunction::time_factor(double t) const { return kappa_ == 0.0 ? 1.0 : std::exp(kappa_ * t); }

double TestFunction::shape(double u) const {
  if (u < support_[0] || u > support_[1]) return 0.0;
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::constant: return a_;
    case Kind::sine: return std::sin(a_ * std::numbers::pi * (u + 1.0) / 2.0);
    case Kind::bump: {
      const double s = (u - a_) / b_;
      const double q = 1.0 - s * s;
      return q <= 0.0 ? 0.0 : std::exp(1.0 - 1.0 / q);
    }
  }
  return 0.0;
}

double TestFunction::shape_d1(double u) const {
  if (u < support_[0] || u > support_[1]) return 0.0;
  switch (kind_) {
    case Kind::zero:
    case Kind::constant: return 0.0;
    case Kind::sine: {
      const double k = a_ * std::numbers::pi / 2.0;
      return k * std::cos(k * (u + 1.0));
    }
    case Kind::bump: {
      const double s = (u - a_) / b_;
      const double q = 1.0 - s * s;
      if (q <= 0.0) return 0.0;
      return shape(u) * (-2.0 * s / (q * q)) / b_;
    }
  }
  return 0.0;
}

double TestFunction::shape_d2(double u) const {
  if (u < support_[0] || u > support_[1]) return 0.0;
  switch (kind_) {
    case Kind::zero:
    case Kind::constant: return 0.0;
    case Kind::sine: {
      const double k = a_ * std::numbers::pi / 2.0;
      return -k * k * shape(u);
    }
    case Kind::bump: {
      const double s = (u - a_) / b_;
      const double q = 1.0 - s * s;
      if (q <= 0.0) return 0.0;
      return shape(u) * (6.0 * s * s * s * s - 2.0) / (q * q * q * q) / (b_ * b_);
    }
  }
  return 0.0;
}

TestTriple parse_test_triple(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw std::invalid_argument("test triple needs 3 comma-separated entries: '" + text + "'");
  return {TestFunction::parse(parts[0]), TestFunction::parse(parts[1]), TestFunction::parse(parts[2])};
}

VectorTestTriple parse_axial_vector_triple(const std::string& text) {
  const TestTriple g = parse_test_triple(text);
  VectorTestTriple v;
  for (int i = 0; i < 3; ++i) v[i] = {g[i], TestFunction::zero()};
  return v;
}

std::string describe(const TestTriple& g) {
  return g[0].name() + "," + g[1].name() + "," + g[2].name();
}

}  // namespace bdcp
