#ifndef DTTPLUS_BDRATE_HPP
#define DTTPLUS_BDRATE_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace dttplus {

struct RdPoint {
  double rate = 0.0;  // bits per sample
  double psnr = 0.0;  // dB
};

using RdCurve = std::vector<RdPoint>;

inline void validate_curve(const RdCurve& c) {
  if (c.size() < 4) throw std::invalid_argument("RD curve needs at least 4 points");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i].rate > 0.0) || !std::isfinite(c[i].psnr))
      throw std::invalid_argument("invalid RD point");
    if (i > 0 && c[i].rate <= c[i - 1].rate)
      throw std::invalid_argument("rates must be strictly increasing");
  }
}

namespace detail {

// Cubic least-squares fit of log-rate as a function of PSNR, centered for
// conditioning.
struct CubicFit {
  Eigen::Vector4d coeff;  // a0..a3 in (psnr - center)
  double center = 0.0;

  double integral(double lo, double hi) const {
    auto F = [&](double x) {
      const double t = x - center;
      return coeff(0) * t + coeff(1) * t * t / 2.0 + coeff(2) * t * t * t / 3.0 +
             coeff(3) * t * t * t * t / 4.0;
    };
    return F(hi) - F(lo);
  }
};

inline CubicFit fit_log_rate(const RdCurve& c) {
  CubicFit f;
  for (const auto& p : c) f.center += p.psnr;
  f.center /= double(c.size());
  Eigen::MatrixXd A(c.size(), 4);
  Eigen::VectorXd b(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double t = c[i].psnr - f.center;
    A(int(i), 0) = 1.0;
    A(int(i), 1) = t;
    A(int(i), 2) = t * t;
    A(int(i), 3) = t * t * t;
    b(int(i)) = std::log(c[i].rate);
  }
  f.coeff = A.colPivHouseholderQr().solve(b);
  return f;
}

}  // namespace detail

// Bjontegaard delta rate of curve_b against curve_a, percent. Negative means
// curve_b needs less rate at equal quality.
inline double bd_rate(const RdCurve& curve_a, const RdCurve& curve_b) {
  validate_curve(curve_a);
  validate_curve(curve_b);
  double lo = -1e300, hi = 1e300;
  for (const auto* c : {&curve_a, &curve_b}) {
    double mn = 1e300, mx = -1e300;
    for (const auto& p : *c) {
      mn = std::min(mn, p.psnr);
      mx = std::max(mx, p.psnr);
    }
    lo = std::max(lo, mn);
    hi = std::min(hi, mx);
  }
  if (hi <= lo) throw std::invalid_argument("no PSNR overlap between curves");

  detail::CubicFit fa = detail::fit_log_rate(curve_a);
  detail::CubicFit fb = detail::fit_log_rate(curve_b);
  // both fits integrate in their own centered variable over the same range
  const double avg_a = fa.integral(lo, hi) / (hi - lo);
  const double avg_b = fb.integral(lo, hi) / (hi - lo);
  return (std::exp(avg_b - avg_a) - 1.0) * 100.0;
}

}  // namespace dttplus

#endif  // DTTPLUS_BDRATE_HPP
