#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfl {

/// Largest number of chart parameters a jet can differentiate against.
inline constexpr std::size_t kMaxJetDim = 8;

/// Raised when an elementary function is applied outside its domain.
class DomainError : public std::domain_error {
 public:
  DomainError(std::string op, const std::string& what)
      : std::domain_error(op + ": " + what), op_(std::move(op)) {}

  const std::string& op() const noexcept { return op_; }

 private:
  std::string op_;
};

/// Second-order forward-mode jet: a value together with its gradient and
/// dense Hessian with respect to `dim()` chart parameters.
///
/// Storage is inline (no heap) and sized for kMaxJetDim. The Hessian is kept
/// exactly symmetric: every write goes through set_hess(), which mirrors.
class Jet2 {
 public:
  Jet2() = default;

  explicit Jet2(std::size_t dim, double value = 0.0) : dim_(dim), value_(value) {
    if (dim == 0 || dim > kMaxJetDim) {
      throw std::invalid_argument("Jet2: dimension must be in [1, " +
                                  std::to_string(kMaxJetDim) + "]");
    }
  }

  static Jet2 constant(std::size_t dim, double value) { return Jet2(dim, value); }

  /// The coordinate function u^index evaluated at `value`.
  static Jet2 variable(std::size_t dim, std::size_t index, double value) {
    Jet2 j(dim, value);
    if (index >= dim) throw std::out_of_range("Jet2::variable: index out of range");
    j.grad_[index] = 1.0;
    return j;
  }

  /// Seeds one variable jet per parameter.
  static std::vector<Jet2> variables(std::span<const double> u) {
    std::vector<Jet2> vars;
    vars.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) vars.push_back(variable(u.size(), i, u[i]));
    return vars;
  }

  std::size_t dim() const noexcept { return dim_; }
  double value() const noexcept { return value_; }
  double grad(std::size_t i) const noexcept { return grad_[i]; }
  double hess(std::size_t i, std::size_t j) const noexcept { return hess_[i * kMaxJetDim + j]; }

  std::vector<double> gradient() const { return {grad_.begin(), grad_.begin() + dim_}; }

  void set_value(double v) noexcept { value_ = v; }
  void set_grad(std::size_t i, double v) noexcept { grad_[i] = v; }
  void set_hess(std::size_t i, std::size_t j, double v) noexcept {
    hess_[i * kMaxJetDim + j] = v;
    hess_[j * kMaxJetDim + i] = v;
  }

  bool is_finite() const noexcept {
    if (!std::isfinite(value_)) return false;
    for (std::size_t i = 0; i < dim_; ++i) {
      if (!std::isfinite(grad_[i])) return false;
      for (std::size_t j = 0; j < dim_; ++j)
        if (!std::isfinite(hess(i, j))) return false;
    }
    return true;
  }

  Jet2 operator-() const {
    Jet2 r(*this);
    r.value_ = -value_;
    for (std::size_t i = 0; i < dim_; ++i) {
      r.grad_[i] = -grad_[i];
      for (std::size_t j = 0; j < dim_; ++j) r.hess_[i * kMaxJetDim + j] = -hess(i, j);
    }
    return r;
  }

  Jet2& operator+=(const Jet2& o) {
    check_dim(o, "add");
    value_ += o.value_;
    for (std::size_t i = 0; i < dim_; ++i) {
      grad_[i] += o.grad_[i];
      for (std::size_t j = 0; j < dim_; ++j) hess_[i * kMaxJetDim + j] += o.hess(i, j);
    }
    return *this;
  }

  Jet2& operator-=(const Jet2& o) {
    check_dim(o, "sub");
    value_ -= o.value_;
    for (std::size_t i = 0; i < dim_; ++i) {
      grad_[i] -= o.grad_[i];
      for (std::size_t j = 0; j < dim_; ++j) hess_[i * kMaxJetDim + j] -= o.hess(i, j);
    }
    return *this;
  }

  Jet2& operator+=(double s) noexcept {
    value_ += s;
    return *this;
  }
  Jet2& operator-=(double s) noexcept {
    value_ -= s;
    return *this;
  }

  Jet2& operator*=(double s) noexcept {
    value_ *= s;
    for (std::size_t i = 0; i < dim_; ++i) {
      grad_[i] *= s;
      for (std::size_t j = 0; j < dim_; ++j) hess_[i * kMaxJetDim + j] *= s;
    }
    return *this;
  }

  Jet2& operator*=(const Jet2& o) {
    check_dim(o, "mul");
    Jet2 r(dim_, value_ * o.value_);
    for (std::size_t i = 0; i < dim_; ++i) {
      r.grad_[i] = value_ * o.grad_[i] + o.value_ * grad_[i];
      for (std::size_t j = i; j < dim_; ++j) {
        r.set_hess(i, j,
                   value_ * o.hess(i, j) + o.value_ * hess(i, j) +
                       grad_[i] * o.grad_[j] + grad_[j] * o.grad_[i]);
      }
    }
    return *this = r;
  }

  Jet2& operator/=(const Jet2& o);

  Jet2& operator/=(double s) {
    if (std::abs(s) < 1e-300) throw DomainError("div", "division by zero");
    return *this *= 1.0 / s;
  }

  void check_dim(const Jet2& o, const char* op) const {
    if (o.dim_ != dim_) throw std::invalid_argument(std::string(op) + ": jet dimension mismatch");
  }

 private:
  std::size_t dim_ = 1;
  double value_ = 0.0;
  std::array<double, kMaxJetDim> grad_{};
  std::array<double, kMaxJetDim * kMaxJetDim> hess_{};
};

/// Applies a scalar function g to a jet given g(a), g'(a), g''(a) at
/// a = arg.value(). This is the second-order chain rule every unary
/// elementary function routes through.
inline Jet2 chain(const Jet2& arg, double g0, double g1, double g2) {
  Jet2 r(arg.dim(), g0);
  const std::size_t n = arg.dim();
  for (std::size_t i = 0; i < n; ++i) {
    r.set_grad(i, g1 * arg.grad(i));
    for (std::size_t j = i; j < n; ++j)
      r.set_hess(i, j, g1 * arg.hess(i, j) + g2 * arg.grad(i) * arg.grad(j));
  }
  return r;
}

/// Binary chain rule for g(a, b) given its partials through second order.
inline Jet2 chain2(const Jet2& a, const Jet2& b, double g0, double ga, double gb,
                   double gaa, double gab, double gbb) {
  a.check_dim(b, "chain2");
  Jet2 r(a.dim(), g0);
  const std::size_t n = a.dim();
  for (std::size_t i = 0; i < n; ++i) {
    r.set_grad(i, ga * a.grad(i) + gb * b.grad(i));
    for (std::size_t j = i; j < n; ++j) {
      r.set_hess(i, j,
                 ga * a.hess(i, j) + gb * b.hess(i, j) + gaa * a.grad(i) * a.grad(j) +
                     gab * (a.grad(i) * b.grad(j) + b.grad(i) * a.grad(j)) +
                     gbb * b.grad(i) * b.grad(j));
    }
  }
  return r;
}

inline Jet2 reciprocal(const Jet2& a) {
  const double v = a.value();
  if (std::abs(v) < 1e-300) throw DomainError("div", "division by zero");
  const double inv = 1.0 / v;
  return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet2& Jet2::operator/=(const Jet2& o) {
  check_dim(o, "div");
  return *this *= reciprocal(o);
}

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator*(Jet2 a, const Jet2& b) { return a *= b; }
inline Jet2 operator/(Jet2 a, const Jet2& b) { return a /= b; }
inline Jet2 operator+(Jet2 a, double s) { return a += s; }
inline Jet2 operator+(double s, Jet2 a) { return a += s; }
inline Jet2 operator-(Jet2 a, double s) { return a -= s; }
inline Jet2 operator-(double s, const Jet2& a) { return (-a) += s; }
inline Jet2 operator*(Jet2 a, double s) { return a *= s; }
inline Jet2 operator*(double s, Jet2 a) { return a *= s; }
inline Jet2 operator/(Jet2 a, double s) { return a /= s; }
inline Jet2 operator/(double s, const Jet2& a) { return reciprocal(a) *= s; }

inline Jet2 sqrt(const Jet2& a) {
  const double v = a.value();
  if (!(v > 0.0)) throw DomainError("sqrt", "argument must be positive, got " + std::to_string(v));
  const double r = std::sqrt(v);
  return chain(a, r, 0.5 / r, -0.25 / (r * v));
}

inline Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return chain(a, s, c, -s);
}

inline Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return chain(a, c, -s, -c);
}

inline Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.value());
  return chain(a, e, e, e);
}

inline Jet2 log(const Jet2& a) {
  const double v = a.value();
  if (!(v > 0.0)) throw DomainError("log", "argument must be positive, got " + std::to_string(v));
  return chain(a, std::log(v), 1.0 / v, -1.0 / (v * v));
}

/// a^p for a real exponent. Non-integer exponents need a positive base.
inline Jet2 pow(const Jet2& a, double p) {
  const double v = a.value();
  const bool integral = p == std::floor(p);
  if (!integral && !(v > 0.0))
    throw DomainError("pow", "non-integer exponent needs a positive base");
  if (v == 0.0 && p < 2.0 && p != 0.0 && p != 1.0)
    throw DomainError("pow", "derivative undefined at zero base");
  const double g0 = std::pow(v, p);
  const double g1 = p == 0.0 ? 0.0 : p * std::pow(v, p - 1.0);
  const double g2 = (p == 0.0 || p == 1.0) ? 0.0 : p * (p - 1.0) * std::pow(v, p - 2.0);
  return chain(a, g0, g1, g2);
}

/// Two-argument arctangent atan2(y, x).
inline Jet2 atan2(const Jet2& y, const Jet2& x) {
  const double yv = y.value(), xv = x.value();
  const double r2 = xv * xv + yv * yv;
  if (r2 < 1e-300) throw DomainError("atan2", "both arguments vanish");
  const double r4 = r2 * r2;
  // Partials of atan2(y, x): d/dy = x/r², d/dx = -y/r².
  return chain2(y, x, std::atan2(yv, xv), xv / r2, -yv / r2, -2.0 * xv * yv / r4,
                (yv * yv - xv * xv) / r4, 2.0 * xv * yv / r4);
}

/// Tags for the closed set of elementary operations.
enum class JetOp { add, sub, mul, div, pow, sqrt, sin, cos, atan2, exp, log, neg, constant, var };

inline const char* to_string(JetOp op) {
  switch (op) {
    case JetOp::add: return "add";
    case JetOp::sub: return "sub";
    case JetOp::mul: return "mul";
    case JetOp::div: return "div";
    case JetOp::pow: return "pow";
    case JetOp::sqrt: return "sqrt";
    case JetOp::sin: return "sin";
    case JetOp::cos: return "cos";
    case JetOp::atan2: return "atan2";
    case JetOp::exp: return "exp";
    case JetOp::log: return "log";
    case JetOp::neg: return "neg";
    case JetOp::constant: return "const";
    case JetOp::var: return "var";
  }
  return "?";
}

/// Tag-dispatched evaluation of one elementary operation.
///
/// `scalar` is the exponent for pow, the value for const and var, and is
/// ignored otherwise. For const and var, `args` must hold one jet whose
/// dimension is used; var additionally needs `index`.
inline Jet2 jet_elementary(JetOp op, std::span<const Jet2> args, double scalar = 0.0,
                           std::size_t index = 0) {
  auto need = [&](std::size_t k) {
    if (args.size() != k)
      throw std::invalid_argument(std::string(to_string(op)) + ": expected " + std::to_string(k) +
                                  " argument(s)");
  };
  switch (op) {
    case JetOp::add: need(2); return args[0] + args[1];
    case JetOp::sub: need(2); return args[0] - args[1];
    case JetOp::mul: need(2); return args[0] * args[1];
    case JetOp::div: need(2); return args[0] / args[1];
    case JetOp::atan2: need(2); return atan2(args[0], args[1]);
    case JetOp::pow: need(1); return pow(args[0], scalar);
    case JetOp::sqrt: need(1); return sqrt(args[0]);
    case JetOp::sin: need(1); return sin(args[0]);
    case JetOp::cos: need(1); return cos(args[0]);
    case JetOp::exp: need(1); return exp(args[0]);
    case JetOp::log: need(1); return log(args[0]);
    case JetOp::neg: need(1); return -args[0];
    case JetOp::constant: need(1); return Jet2::constant(args[0].dim(), scalar);
    case JetOp::var: need(1); return Jet2::variable(args[0].dim(), index, scalar);
  }
  throw std::invalid_argument("jet_elementary: unknown op");
}

}  // namespace cfl
