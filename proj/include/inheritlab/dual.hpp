#pragma once

// Forward-mode dual numbers with a fixed number of seed directions.
// Nesting Dual<Dual<double,N>,N> gives exact second derivatives, and so on.

#include <array>
#include <cmath>
#include <limits>
#include <type_traits>

#include <Eigen/Core>

namespace inheritlab {

using std::abs;
using std::atan;
using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sinh;
using std::sqrt;
using std::tanh;

template <class T, int N>
struct Dual {
  using value_type = T;
  static constexpr int size = N;

  T v{};
  std::array<T, N> d{};

  Dual() = default;
  Dual(double c) : v(c) {}
  template <class U>
    requires(!std::is_same_v<U, double> && !std::is_same_v<U, Dual> &&
             std::is_constructible_v<T, const U&>)
  Dual(const U& c) : v(c) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    T inv = T(1.0) / o.v;
    T q = v * inv;
    for (int i = 0; i < N; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    v = q;
    return *this;
  }
  Dual& operator+=(double c) {
    v += c;
    return *this;
  }
  Dual& operator-=(double c) {
    v -= c;
    return *this;
  }
  Dual& operator*=(double c) {
    v *= c;
    for (auto& x : d) x *= c;
    return *this;
  }
  Dual& operator/=(double c) { return *this *= (1.0 / c); }
};

template <class T>
struct dual_depth : std::integral_constant<int, 0> {};
template <class T, int N>
struct dual_depth<Dual<T, N>> : std::integral_constant<int, 1 + dual_depth<T>::value> {};
template <class T>
inline constexpr int dual_depth_v = dual_depth<T>::value;

template <class T>
struct is_dual : std::false_type {};
template <class T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

// K-fold nested dual over N directions; K = 0 is double.
template <int N, int K>
struct nested_dual {
  using type = Dual<typename nested_dual<N, K - 1>::type, N>;
};
template <int N>
struct nested_dual<N, 0> {
  using type = double;
};
template <int N, int K>
using DualN = typename nested_dual<N, K>::type;

inline double value_of(double x) { return x; }
template <class T, int N>
double value_of(const Dual<T, N>& x) {
  return value_of(x.v);
}

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
  return r;
}
template <class T, int N>
Dual<T, N> operator+(const Dual<T, N>& a) {
  return a;
}

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) {
  return a += b;
}
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) {
  return a -= b;
}
template <class T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.v = a.v * b.v;
  for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) {
  return a /= b;
}

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, double c) {
  return a += c;
}
template <class T, int N>
Dual<T, N> operator+(double c, Dual<T, N> a) {
  return a += c;
}
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, double c) {
  return a -= c;
}
template <class T, int N>
Dual<T, N> operator-(double c, const Dual<T, N>& a) {
  Dual<T, N> r = -a;
  r.v += c;
  return r;
}
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, double c) {
  return a *= c;
}
template <class T, int N>
Dual<T, N> operator*(double c, Dual<T, N> a) {
  return a *= c;
}
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, double c) {
  return a *= (1.0 / c);
}
template <class T, int N>
Dual<T, N> operator/(double c, const Dual<T, N>& a) {
  Dual<T, N> r;
  T inv = T(1.0) / a.v;
  r.v = c * inv;
  T f = -r.v * inv;
  for (int i = 0; i < N; ++i) r.d[i] = f * a.d[i];
  return r;
}

#define INHERITLAB_DUAL_CMP(op)                                  \
  template <class T, int N>                                      \
  bool operator op(const Dual<T, N>& a, const Dual<T, N>& b) {   \
    return value_of(a) op value_of(b);                           \
  }                                                              \
  template <class T, int N>                                      \
  bool operator op(const Dual<T, N>& a, double b) {              \
    return value_of(a) op b;                                     \
  }                                                              \
  template <class T, int N>                                      \
  bool operator op(double a, const Dual<T, N>& b) {              \
    return a op value_of(b);                                     \
  }
INHERITLAB_DUAL_CMP(<)
INHERITLAB_DUAL_CMP(>)
INHERITLAB_DUAL_CMP(<=)
INHERITLAB_DUAL_CMP(>=)
INHERITLAB_DUAL_CMP(==)
INHERITLAB_DUAL_CMP(!=)
#undef INHERITLAB_DUAL_CMP

// f(x) given f(x.v) and f'(x.v)
template <class T, int N>
Dual<T, N> chain(const Dual<T, N>& x, const T& f, const T& df) {
  Dual<T, N> r;
  r.v = f;
  for (int i = 0; i < N; ++i) r.d[i] = df * x.d[i];
  return r;
}

template <class T, int N>
Dual<T, N> sin(const Dual<T, N>& x) {
  return chain(x, T(sin(x.v)), T(cos(x.v)));
}
template <class T, int N>
Dual<T, N> cos(const Dual<T, N>& x) {
  return chain(x, T(cos(x.v)), T(-sin(x.v)));
}
template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& x) {
  T e = exp(x.v);
  return chain(x, e, e);
}
template <class T, int N>
Dual<T, N> log(const Dual<T, N>& x) {
  return chain(x, T(log(x.v)), T(1.0 / x.v));
}
template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& x) {
  T s = sqrt(x.v);
  return chain(x, s, T(0.5 / s));
}
template <class T, int N>
Dual<T, N> pow(const Dual<T, N>& x, double p) {
  T f = pow(x.v, p);
  return chain(x, f, T(p * pow(x.v, p - 1.0)));
}
template <class T, int N>
Dual<T, N> sinh(const Dual<T, N>& x) {
  return chain(x, T(sinh(x.v)), T(cosh(x.v)));
}
template <class T, int N>
Dual<T, N> cosh(const Dual<T, N>& x) {
  return chain(x, T(cosh(x.v)), T(sinh(x.v)));
}
template <class T, int N>
Dual<T, N> tanh(const Dual<T, N>& x) {
  T t = tanh(x.v);
  return chain(x, t, T(1.0 - t * t));
}
template <class T, int N>
Dual<T, N> atan(const Dual<T, N>& x) {
  return chain(x, T(atan(x.v)), T(1.0 / (1.0 + x.v * x.v)));
}
template <class T, int N>
Dual<T, N> abs(const Dual<T, N>& x) {
  return value_of(x) < 0.0 ? -x : x;
}

template <class S>
S square(const S& x) {
  return x * x;
}

// Seed a point so that component i carries the unit derivative in direction i.
template <class S, int N>
Eigen::Matrix<Dual<S, N>, N, 1> seed(const Eigen::Matrix<S, N, 1>& p) {
  Eigen::Matrix<Dual<S, N>, N, 1> x;
  for (int i = 0; i < N; ++i) {
    x[i].v = p[i];
    x[i].d[i] = S(1.0);
  }
  return x;
}

template <class S, int N, int R, int C>
Eigen::Matrix<S, R, C> value_part(const Eigen::Matrix<Dual<S, N>, R, C>& m) {
  Eigen::Matrix<S, R, C> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) out(i) = m(i).v;
  return out;
}

template <class S, int N, int R, int C>
Eigen::Matrix<S, R, C> derivative_part(const Eigen::Matrix<Dual<S, N>, R, C>& m, int k) {
  Eigen::Matrix<S, R, C> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) out(i) = m(i).d[k];
  return out;
}

template <class S, int R, int C>
Eigen::Matrix<double, R, C> values_of(const Eigen::Matrix<S, R, C>& m) {
  Eigen::Matrix<double, R, C> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) out(i) = value_of(m(i));
  return out;
}

// Embed a lower-order matrix into a higher scalar type as constants.
template <class To, class From, int R, int C>
Eigen::Matrix<To, R, C> promote(const Eigen::Matrix<From, R, C>& m) {
  Eigen::Matrix<To, R, C> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) out(i) = To(m(i));
  return out;
}

}  // namespace inheritlab

namespace Eigen {

template <class T, int N>
struct NumTraits<inheritlab::Dual<T, N>> : GenericNumTraits<double> {
  using Real = inheritlab::Dual<T, N>;
  using NonInteger = Real;
  using Nested = Real;
  using Literal = Real;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 2 * (N + 1),
    MulCost = 3 * (N + 1)
  };
  static inline Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline Real highest() { return Real(std::numeric_limits<double>::max()); }
  static inline Real lowest() { return Real(std::numeric_limits<double>::lowest()); }
  static inline int digits10() { return std::numeric_limits<double>::digits10; }
};

template <class T, int N, class Op>
struct ScalarBinaryOpTraits<inheritlab::Dual<T, N>, double, Op> {
  using ReturnType = inheritlab::Dual<T, N>;
};
template <class T, int N, class Op>
struct ScalarBinaryOpTraits<double, inheritlab::Dual<T, N>, Op> {
  using ReturnType = inheritlab::Dual<T, N>;
};

}  // namespace Eigen
