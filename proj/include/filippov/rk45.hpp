#pragma once

// Dormand-Prince 5(4) embedded pair with the classic quartic dense-output
// interpolant.  Hand-rolled rather than delegated to a library: the hybrid
// integrator needs a cheap continuous extension of every accepted step for
// event localization, and the caller must be able to cap the next step
// per-state (boundary layers, stop times).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "filippov/types.hpp"

namespace filippov {

template <int N>
using VecN = Eigen::Matrix<Real, N, 1>;

struct StepControl {
  Real rel_tol = 1e-10;
  Real abs_tol = 1e-12;
  Real max_step = 0.25;
};

/// Raised when error control drives the step below the representable floor,
/// which in this codebase almost always means a tangency or a singular point.
class StepUnderflow : public std::runtime_error {
 public:
  explicit StepUnderflow(Real t)
      : std::runtime_error("adaptive step underflow near t = " + std::to_string(t)), t_(t) {}
  [[nodiscard]] Real where() const { return t_; }

 private:
  Real t_;
};

/// One accepted step together with its dense-output polynomial.
/// eval(theta) interpolates on [t0, t0+h]; eval(0) == y0 and eval(1) == y1.
template <int N>
struct DenseStep {
  Real t0 = 0;
  Real h = 0;
  VecN<N> y0 = VecN<N>::Zero();
  VecN<N> y1 = VecN<N>::Zero();
  std::array<VecN<N>, 5> rcont{};

  [[nodiscard]] Real t1() const { return t0 + h; }
  [[nodiscard]] VecN<N> eval(Real theta) const {
    const Real th1 = 1.0 - theta;
    return rcont[0] +
           theta * (rcont[1] + th1 * (rcont[2] + theta * (rcont[3] + th1 * rcont[4])));
  }
};

/// Adaptive integrator for an autonomous right-hand side F: VecN -> VecN.
/// advance(h_cap) performs one accepted step of size min(proposal, caps).
template <int N, class F>
class Dopri5 {
 public:
  using Vec = VecN<N>;

  Dopri5(F f, Real t0, Vec y0, StepControl ctrl)
      : f_(std::move(f)), ctrl_(ctrl), t_(t0), y_(std::move(y0)) {}

  [[nodiscard]] Real t() const { return t_; }
  [[nodiscard]] const Vec& y() const { return y_; }

  const DenseStep<N>& advance(Real h_cap) {
    if (!have_k1_) {
      k1_ = f_(y_);
      have_k1_ = true;
    }
    if (h_ <= 0) h_ = initial_step(h_cap);

    Real h = std::min({h_, ctrl_.max_step, h_cap});
    const Real floor_h = 1e-14 * std::max(Real(1), std::abs(t_));
    bool rejected = false;
    for (int tries = 0; tries < 500; ++tries) {
      if (!(h > floor_h)) throw StepUnderflow(t_);
      attempt(h);
      const Real err = error_norm(h);
      if (err <= 1.0) {
        finalize(h);
        Real fac = 0.9 * std::pow(std::max(err, Real(1e-30)), -0.2);
        fac = std::min(fac, rejected ? Real(1) : Real(10));
        h_ = h * std::max(fac, Real(0.2));
        return step_;
      }
      rejected = true;
      h *= std::max(Real(0.2), 0.9 * std::pow(err, -0.2));
    }
    throw StepUnderflow(t_);
  }

 private:
  void attempt(Real h) {
    const Vec& y = y_;
    k_[0] = k1_;
    k_[1] = f_(y + h * (kA21 * k_[0]));
    k_[2] = f_(y + h * (kA31 * k_[0] + kA32 * k_[1]));
    k_[3] = f_(y + h * (kA41 * k_[0] + kA42 * k_[1] + kA43 * k_[2]));
    k_[4] = f_(y + h * (kA51 * k_[0] + kA52 * k_[1] + kA53 * k_[2] + kA54 * k_[3]));
    k_[5] = f_(y + h * (kA61 * k_[0] + kA62 * k_[1] + kA63 * k_[2] + kA64 * k_[3] +
                        kA65 * k_[4]));
    ytmp_ = y + h * (kB1 * k_[0] + kB3 * k_[2] + kB4 * k_[3] + kB5 * k_[4] + kB6 * k_[5]);
    k_[6] = f_(ytmp_);
  }

  [[nodiscard]] Real error_norm(Real h) const {
    const Vec e = h * (kE1 * k_[0] + kE3 * k_[2] + kE4 * k_[3] + kE5 * k_[4] + kE6 * k_[5] +
                       kE7 * k_[6]);
    Real acc = 0;
    for (int i = 0; i < N; ++i) {
      const Real sk =
          ctrl_.abs_tol + ctrl_.rel_tol * std::max(std::abs(y_[i]), std::abs(ytmp_[i]));
      const Real q = e[i] / sk;
      acc += q * q;
    }
    return std::sqrt(acc / N);
  }

  void finalize(Real h) {
    step_.t0 = t_;
    step_.h = h;
    step_.y0 = y_;
    step_.y1 = ytmp_;
    const Vec ydiff = ytmp_ - y_;
    const Vec bspl = h * k_[0] - ydiff;
    step_.rcont[0] = y_;
    step_.rcont[1] = ydiff;
    step_.rcont[2] = bspl;
    step_.rcont[3] = ydiff - h * k_[6] - bspl;
    step_.rcont[4] = h * (kD1 * k_[0] + kD3 * k_[2] + kD4 * k_[3] + kD5 * k_[4] +
                          kD6 * k_[5] + kD7 * k_[6]);
    t_ += h;
    y_ = ytmp_;
    k1_ = k_[6];  // first-same-as-last
  }

  [[nodiscard]] Real scaled_norm(const Vec& v) const {
    Real acc = 0;
    for (int i = 0; i < N; ++i) {
      const Real sk = ctrl_.abs_tol + ctrl_.rel_tol * std::abs(y_[i]);
      const Real q = v[i] / sk;
      acc += q * q;
    }
    return std::sqrt(acc / N);
  }

  [[nodiscard]] Real initial_step(Real h_cap) {
    const Real d0 = scaled_norm(y_);
    const Real d1 = scaled_norm(k1_);
    Real h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, ctrl_.max_step, h_cap});
    const Vec f1 = f_(y_ + h0 * k1_);
    const Real d2 = scaled_norm(f1 - k1_) / h0;
    const Real dm = std::max(d1, d2);
    const Real h1 = dm > 1e-15 ? std::pow(0.01 / dm, 0.2) : std::max(Real(1e-6), h0 * 1e3);
    return std::min({100 * h0, h1, ctrl_.max_step, h_cap});
  }

  // Dormand-Prince tableau, error weights, and dense-output weights.
  static constexpr Real kA21 = 1.0 / 5.0;
  static constexpr Real kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
  static constexpr Real kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
  static constexpr Real kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                        kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
  static constexpr Real kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                        kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                        kA65 = -5103.0 / 18656.0;
  static constexpr Real kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                        kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
  static constexpr Real kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                        kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;
  static constexpr Real kD1 = -12715105075.0 / 11282082432.0,
                        kD3 = 87487479700.0 / 32700410799.0,
                        kD4 = -10690763975.0 / 1880347072.0,
                        kD5 = 701980252875.0 / 199316789632.0,
                        kD6 = -1453857185.0 / 822651844.0,
                        kD7 = 69997945.0 / 29380423.0;

  F f_;
  StepControl ctrl_;
  Real t_ = 0;
  Vec y_ = Vec::Zero();
  Vec k1_ = Vec::Zero();
  Vec ytmp_ = Vec::Zero();
  std::array<Vec, 7> k_{};
  Real h_ = 0;
  bool have_k1_ = false;
  DenseStep<N> step_;
};

}  // namespace filippov
