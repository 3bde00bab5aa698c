#pragma once

// Type-erased closed-form fields. A field is any functor with a templated
// call operator over the scalar ladder double, D1, D2, D3 (nested duals).
// Functors that lose a derivative order (d, grad, ...) constrain their call
// operator; asking them for a too-deep scalar throws OrderExceeded.

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "inheritlab/dual.hpp"

namespace inheritlab {

constexpr int kMaxOrder = 3;

struct OrderExceeded : std::logic_error {
  OrderExceeded() : std::logic_error("field cannot be evaluated at this derivative order") {}
};

template <class S, int Dim>
using Vec = Eigen::Matrix<S, Dim, 1>;
template <class S, int Dim>
using Mat = Eigen::Matrix<S, Dim, Dim>;
template <class S>
using Vec3 = Vec<S, 3>;
template <class S>
using Mat3 = Mat<S, 3>;
template <class S>
using Vec4 = Vec<S, 4>;
template <class S>
using Mat4 = Mat<S, 4>;

template <int Dim>
struct Shapes {
  template <class S>
  using Scalar = S;
  template <class S>
  using Vector = Vec<S, Dim>;
  template <class S>
  using Matrix = Mat<S, Dim>;
};

// True when depth(S) + extra stays inside the supported ladder.
template <class S, int Extra>
concept WithinOrder = (dual_depth_v<S> + Extra <= kMaxOrder);

template <int Dim, template <class> class Out>
class AnyField {
 public:
  using T0 = DualN<Dim, 0>;
  using T1 = DualN<Dim, 1>;
  using T2 = DualN<Dim, 2>;
  using T3 = DualN<Dim, 3>;

  AnyField() = default;

  template <class F>
    requires(!std::is_same_v<std::decay_t<F>, AnyField>)
  AnyField(F f) : impl_(std::make_shared<Model<std::decay_t<F>>>(std::move(f))) {}

  template <class S>
  Out<S> operator()(const Vec<S, Dim>& p) const {
    return impl_->eval(p);
  }

  explicit operator bool() const { return static_cast<bool>(impl_); }

 private:
  struct Concept {
    virtual ~Concept() = default;
    virtual Out<T0> eval(const Vec<T0, Dim>&) const = 0;
    virtual Out<T1> eval(const Vec<T1, Dim>&) const = 0;
    virtual Out<T2> eval(const Vec<T2, Dim>&) const = 0;
    virtual Out<T3> eval(const Vec<T3, Dim>&) const = 0;
  };

  template <class F>
  struct Model final : Concept {
    F f;
    explicit Model(F fn) : f(std::move(fn)) {}
    template <class S>
    Out<S> call(const Vec<S, Dim>& p) const {
      if constexpr (requires { f(p); }) {
        return f(p);
      } else {
        throw OrderExceeded();
      }
    }
    Out<T0> eval(const Vec<T0, Dim>& p) const override { return call(p); }
    Out<T1> eval(const Vec<T1, Dim>& p) const override { return call(p); }
    Out<T2> eval(const Vec<T2, Dim>& p) const override { return call(p); }
    Out<T3> eval(const Vec<T3, Dim>& p) const override { return call(p); }
  };

  std::shared_ptr<const Concept> impl_;
};

// ---- jets across charts of different dimension ----------------------------
// recast<M>(x, shift) re-expresses a jet over N seed directions as a jet over M
// directions, direction i becoming i + shift. Directions pushed out of range
// must carry no derivative.

struct ChartMismatch : std::logic_error {
  ChartMismatch() : std::logic_error("jet depends on a direction the target chart does not have") {}
};

template <int M, class S>
struct recast_type {
  using type = double;
};
template <int M, class T, int N>
struct recast_type<M, Dual<T, N>> {
  using type = Dual<typename recast_type<M, T>::type, M>;
};
template <int M, class S>
using recast_t = typename recast_type<M, S>::type;

inline bool jet_is_zero(double x) { return x == 0.0; }
template <class T, int N>
bool jet_is_zero(const Dual<T, N>& x) {
  if (!jet_is_zero(x.v)) return false;
  for (const auto& e : x.d)
    if (!jet_is_zero(e)) return false;
  return true;
}

template <int M>
double recast(double x, int) {
  return x;
}
template <int M, class T, int N>
recast_t<M, Dual<T, N>> recast(const Dual<T, N>& x, int shift) {
  recast_t<M, Dual<T, N>> out;
  out.v = recast<M>(x.v, shift);
  for (int i = 0; i < N; ++i) {
    int j = i + shift;
    if (j >= 0 && j < M)
      out.d[j] = recast<M>(x.d[i], shift);
    else if (!jet_is_zero(x.d[i]))
      throw ChartMismatch();
  }
  return out;
}
template <int M, class S, int R, int C>
Eigen::Matrix<recast_t<M, S>, R, C> recast(const Eigen::Matrix<S, R, C>& a, int shift) {
  Eigen::Matrix<recast_t<M, S>, R, C> out;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) out(i, j) = recast<M>(a(i, j), shift);
  return out;
}

template <int Dim>
using ScalarField = AnyField<Dim, Shapes<Dim>::template Scalar>;
template <int Dim>
using CovectorField = AnyField<Dim, Shapes<Dim>::template Vector>;
template <int Dim>
using MatrixField = AnyField<Dim, Shapes<Dim>::template Matrix>;

// 1-forms and vector fields share storage; the name records intent.
template <int Dim>
using OneFormField = CovectorField<Dim>;
template <int Dim>
using VectorField = CovectorField<Dim>;
template <int Dim>
using TwoFormField = MatrixField<Dim>;

using ScalarField3 = ScalarField<3>;
using OneForm3 = OneFormField<3>;
using TwoForm3 = TwoFormField<3>;
using ScalarField4 = ScalarField<4>;
using OneForm4 = OneFormField<4>;
using TwoForm4 = TwoFormField<4>;

// Complex 1-form as a pair of real fields.
struct ComplexOneForm3 {
  OneForm3 re;
  OneForm3 im;
};

template <int Dim>
ScalarField<Dim> constant_scalar(double c) {
  return ScalarField<Dim>([c](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    return S(c);
  });
}

template <int Dim>
CovectorField<Dim> zero_covector() {
  return CovectorField<Dim>([](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    return Vec<S, Dim>::Constant(S(0.0)).eval();
  });
}

template <int Dim>
CovectorField<Dim> constant_covector(const Vec<double, Dim>& c) {
  return CovectorField<Dim>([c](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    Vec<S, Dim> out;
    for (int i = 0; i < Dim; ++i) out[i] = S(c[i]);
    return out;
  });
}

// f * w
template <int Dim>
CovectorField<Dim> scale(const ScalarField<Dim>& f, const CovectorField<Dim>& w) {
  return CovectorField<Dim>([f, w](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    S s = f(p);
    Vec<S, Dim> v = w(p);
    for (int i = 0; i < Dim; ++i) v[i] = v[i] * s;
    return v;
  });
}

template <int Dim>
CovectorField<Dim> scale(double c, const CovectorField<Dim>& w) {
  return CovectorField<Dim>([c, w](const auto& p) {
    Vec<typename std::decay_t<decltype(p)>::Scalar, Dim> v = w(p);
    for (int i = 0; i < Dim; ++i) v[i] = v[i] * c;
    return v;
  });
}

template <int Dim>
CovectorField<Dim> add(const CovectorField<Dim>& a, const CovectorField<Dim>& b) {
  return CovectorField<Dim>([a, b](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    Vec<S, Dim> u = a(p);
    Vec<S, Dim> v = b(p);
    for (int i = 0; i < Dim; ++i) u[i] = u[i] + v[i];
    return u;
  });
}

}  // namespace inheritlab
