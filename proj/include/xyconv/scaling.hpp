#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace xyconv {

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScalingSample {
  int L = 0;
  double h_c = 0.0;
};

// h_c(L) = h_inf + amplitude * exp(-rate * L), fitted by least squares.
struct ScalingResult {
  std::vector<ScalingSample> samples;
  double h_inf = 0.0;
  double amplitude = 0.0;
  double rate = 0.0;
  double residual_rms = 0.0;
};

namespace detail {

inline double scaling_sse(const std::vector<ScalingSample>& s, double c, double a, double b) {
  double sse = 0.0;
  for (const auto& [L, y] : s) {
    const double r = c + a * std::exp(-b * L) - y;
    sse += r * r;
  }
  return sse;
}

// Given the rate, the offset and amplitude enter linearly; solve the 2x2
// normal equations for them.
inline bool scaling_linear_part(const std::vector<ScalingSample>& s, double b, double& c,
                                double& a) {
  double s11 = 0, s1e = 0, see = 0, s1y = 0, sey = 0;
  for (const auto& [L, y] : s) {
    const double e = std::exp(-b * L);
    s11 += 1.0;
    s1e += e;
    see += e * e;
    s1y += y;
    sey += e * y;
  }
  const double det = s11 * see - s1e * s1e;
  if (std::abs(det) < 1e-14 * std::max(1.0, s11 * see)) return false;
  c = (see * s1y - s1e * sey) / det;
  a = (s11 * sey - s1e * s1y) / det;
  return true;
}

// Damped Gauss-Newton refinement of (c, a, b) from one start. Deterministic:
// fixed iteration and damping schedule.
inline bool scaling_local_fit(const std::vector<ScalingSample>& s, double c, double a, double b,
                              double& out_c, double& out_a, double& out_b, double& out_sse) {
  const int n = static_cast<int>(s.size());
  Eigen::Vector3d p(c, a, b);
  double sse = scaling_sse(s, p[0], p[1], p[2]);
  double lambda = 1e-3;
  for (int it = 0; it < 200; ++it) {
    Eigen::MatrixXd J(n, 3);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      const double e = std::exp(-p[2] * s[i].L);
      r[i] = p[0] + p[1] * e - s[i].h_c;
      J(i, 0) = 1.0;
      J(i, 1) = e;
      J(i, 2) = -p[1] * s[i].L * e;
    }
    const Eigen::Matrix3d JtJ = J.transpose() * J;
    const Eigen::Vector3d g = J.transpose() * r;
    if (g.norm() < 1e-14) break;
    bool stepped = false;
    for (int damp = 0; damp < 30; ++damp) {
      Eigen::Matrix3d M = JtJ;
      for (int d = 0; d < 3; ++d) M(d, d) += lambda * std::max(JtJ(d, d), 1e-12);
      const Eigen::Vector3d step = M.ldlt().solve(-g);
      const Eigen::Vector3d q = p + step;
      const double trial = scaling_sse(s, q[0], q[1], q[2]);
      if (std::isfinite(trial) && trial <= sse) {
        const double gain = sse - trial;
        p = q;
        sse = trial;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (gain < 1e-18 * std::max(1.0, sse)) it = 200;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) break;
  }
  if (!std::isfinite(sse)) return false;
  out_c = p[0];
  out_a = p[1];
  out_b = p[2];
  out_sse = sse;
  return true;
}

}  // namespace detail

// Least-squares exponential fit over >= 4 samples with distinct L. Runs a
// deterministic grid of 20 starting rates (amplitude and offset seeded by the
// linear profile at each rate); the start with the best final residual wins.
// The fitted rate must come out positive.
inline ScalingResult scaling_fit(const std::vector<ScalingSample>& samples) {
  if (samples.size() < 4)
    throw FitError("scaling_fit: need at least 4 samples (got " +
                   std::to_string(samples.size()) + ")");
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j)
      if (samples[i].L == samples[j].L)
        throw FitError("scaling_fit: samples must have distinct L");

  const int n_starts = 20;
  bool found = false;
  double best_c = 0, best_a = 0, best_b = 0, best_sse = 0;
  for (int i = 0; i < n_starts; ++i) {
    // rates log-spaced in [0.02, 2]
    const double b0 = 0.02 * std::pow(100.0, static_cast<double>(i) / (n_starts - 1));
    double c0 = 0.0, a0 = 0.0;
    if (!detail::scaling_linear_part(samples, b0, c0, a0)) {
      c0 = samples.back().h_c;
      a0 = samples.front().h_c - samples.back().h_c;
    }
    double c, a, b, sse;
    if (!detail::scaling_local_fit(samples, c0, a0, b0, c, a, b, sse)) continue;
    if (!(b > 0.0)) continue;
    if (!found || sse < best_sse) {
      found = true;
      best_c = c;
      best_a = a;
      best_b = b;
      best_sse = sse;
    }
  }
  if (!found)
    throw FitError("scaling_fit: no start converged to a fit with positive rate");

  ScalingResult out;
  out.samples = samples;
  out.h_inf = best_c;
  out.amplitude = best_a;
  out.rate = best_b;
  out.residual_rms = std::sqrt(best_sse / samples.size());
  return out;
}

}  // namespace xyconv
