#pragma once

#include <charconv>
#include <cmath>
#include <compare>
#include <limits>
#include <string>
#include <system_error>

#include <boost/multiprecision/gmp.hpp>

#include "tcdpp/core/errors.hpp"

namespace tcdpp {

using Rational = boost::multiprecision::mpq_rational;

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double from_double(double x) { return x; }
  static double to_double(double x) { return x; }
  static double from_ratio(long long p, long long q) {
    return static_cast<double>(p) / static_cast<double>(q);
  }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  // Exact: every finite double is a dyadic rational.
  static Rational from_double(double x) {
    if (!std::isfinite(x)) throw PreconditionError("non-finite value in rational mode");
    return Rational(x);
  }
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
  static Rational from_ratio(long long p, long long q) { return Rational(p, q); }
};

// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double x = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("cannot parse number '" + s + "'");
  return x;
}

inline std::string format_scalar(double x) { return format_double(x); }

inline std::string format_scalar(const Rational& x) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  if (denominator(x) == 1) return numerator(x).str();
  return numerator(x).str() + "/" + denominator(x).str();
}

template <class S>
S parse_scalar(const std::string& s);

template <>
inline double parse_scalar<double>(const std::string& s) {
  return parse_double(s);
}

template <>
inline Rational parse_scalar<Rational>(const std::string& s) {
  return Rational(s);
}

// Equality used by checkers: exact for rationals, absolute tolerance for doubles.
inline bool scalar_equal(const Rational& a, const Rational& b, double = 0) { return a == b; }
inline bool scalar_equal(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// Extended reals over a scalar type.
template <class S>
class Extended {
 public:
  enum class Kind { NegInf, Finite, PosInf };

  Extended() : kind_(Kind::Finite), value_(0) {}
  Extended(S v) : kind_(Kind::Finite), value_(std::move(v)) {}  // NOLINT implicit

  static Extended pos_inf() { return Extended(Kind::PosInf); }
  static Extended neg_inf() { return Extended(Kind::NegInf); }

  Kind kind() const { return kind_; }
  bool finite() const { return kind_ == Kind::Finite; }
  bool is_pos_inf() const { return kind_ == Kind::PosInf; }
  bool is_neg_inf() const { return kind_ == Kind::NegInf; }

  const S& value() const {
    if (!finite()) throw PreconditionError("value() of an infinite extended real");
    return value_;
  }

  friend Extended operator+(const Extended& a, const Extended& b) {
    if (a.finite() && b.finite()) return Extended(a.value_ + b.value_);
    if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf()))
      throw PreconditionError("+inf - inf is undefined");
    return a.finite() ? b : a;
  }

  // Scaling by a nonnegative mass; 0 * inf = 0 as in integration.
  friend Extended scale(const S& m, const Extended& a) {
    if (m < 0) throw PreconditionError("negative mass");
    if (a.finite()) return Extended(m * a.value_);
    if (m == 0) return Extended(S(0));
    return a;
  }

  friend bool operator==(const Extended& a, const Extended& b) {
    if (a.kind_ != b.kind_) return false;
    return !a.finite() || a.value_ == b.value_;
  }

  friend bool operator<(const Extended& a, const Extended& b) {
    if (a.kind_ != b.kind_) return static_cast<int>(a.kind_) < static_cast<int>(b.kind_);
    return a.finite() && a.value_ < b.value_;
  }
  friend bool operator>(const Extended& a, const Extended& b) { return b < a; }
  friend bool operator<=(const Extended& a, const Extended& b) { return !(b < a); }
  friend bool operator>=(const Extended& a, const Extended& b) { return !(a < b); }

  Extended operator-() const {
    if (is_pos_inf()) return neg_inf();
    if (is_neg_inf()) return pos_inf();
    return Extended(S(-value_));
  }

  std::string str() const {
    if (is_pos_inf()) return "inf";
    if (is_neg_inf()) return "-inf";
    return format_scalar(value_);
  }

 private:
  explicit Extended(Kind k) : kind_(k), value_(0) {}
  Kind kind_;
  S value_;
};

// Threshold for an eps-optimal choice: v - eps, or 1/eps when v = +inf.
template <class S>
Extended<S> eps_threshold(const Extended<S>& v, const S& eps) {
  if (v.is_pos_inf()) {
    if (eps <= 0) throw PreconditionError("eps must be positive when the value is +inf");
    return Extended<S>(S(1) / eps);
  }
  if (v.is_neg_inf()) return v;
  return Extended<S>(v.value() - eps);
}

}  // namespace tcdpp
