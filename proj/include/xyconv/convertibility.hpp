#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "xyconv/eigensolver.hpp"
#include "xyconv/entanglement.hpp"
#include "xyconv/model.hpp"

namespace xyconv {

inline constexpr double kCompareTol = 1e-10;     // absolute, on partial sums and entropies
inline constexpr double kDerivativeTol = 1e-8;   // finite differences below this count as zero

enum class MajorizationOrder { AMajorizesB, BMajorizesA, Equal, Incomparable };
enum class Dominance { ADominatesB, BDominatesA, Equal, Incomparable };
enum class Convertibility { Down, Up, Equal, Incomparable };
enum class Sign { Negative, Positive, Zero };

// Descending partial sums f_l = sum_{k<=l} lambda_k; non-decreasing in l with
// f_d = 1 for a normalized spectrum.
struct MajorizationProfile {
  std::vector<double> partial_sums;

  static MajorizationProfile of(const SchmidtSpectrum& s) {
    MajorizationProfile p;
    double f = 0.0;
    for (double v : s.values) p.partial_sums.push_back(f += v);
    return p;
  }
};

// Majorization partial order via the partial sums. All l = 1..d are checked;
// f_d = 1 holds trivially for normalized spectra.
inline MajorizationOrder majorization_compare(const SchmidtSpectrum& a, const SchmidtSpectrum& b,
                                              double tol = kCompareTol) {
  if (a.size() != b.size())
    throw std::invalid_argument("majorization_compare: spectra have different dimensions");
  const MajorizationProfile fa = MajorizationProfile::of(a);
  const MajorizationProfile fb = MajorizationProfile::of(b);
  bool a_ge = true, b_ge = true;
  for (int l = 0; l < a.size(); ++l) {
    a_ge = a_ge && fa.partial_sums[l] >= fb.partial_sums[l] - tol;
    b_ge = b_ge && fb.partial_sums[l] >= fa.partial_sums[l] - tol;
  }
  if (a_ge && b_ge) return MajorizationOrder::Equal;
  if (a_ge) return MajorizationOrder::AMajorizesB;
  if (b_ge) return MajorizationOrder::BMajorizesA;
  return MajorizationOrder::Incomparable;
}

// Pointwise dominance of two Renyi curves sampled on the same grid.
inline Dominance dominance_compare(const RenyiCurve& a, const RenyiCurve& b,
                                   double tol = kCompareTol) {
  if (a.entropies.size() != b.entropies.size())
    throw std::invalid_argument("dominance_compare: curves sampled on different grids");
  bool a_ge = true, b_ge = true;
  for (std::size_t i = 0; i < a.entropies.size(); ++i) {
    a_ge = a_ge && a.entropies[i] >= b.entropies[i] - tol;
    b_ge = b_ge && b.entropies[i] >= a.entropies[i] - tol;
  }
  if (a_ge && b_ge) return Dominance::Equal;
  if (a_ge) return Dominance::ADominatesB;
  if (b_ge) return Dominance::BDominatesA;
  return Dominance::Incomparable;
}

// Renyi dominance over every grid order plus the three limits. The grid must
// contain the limits: they bound the quantifier over all alpha.
inline Dominance elocc_compare(const SchmidtSpectrum& a, const SchmidtSpectrum& b,
                               const AlphaGrid& grid, double tol = kCompareTol) {
  if (a.size() != b.size())
    throw std::invalid_argument("elocc_compare: spectra have different dimensions");
  if (!grid.has_limits())
    throw std::invalid_argument("elocc_compare: alpha grid must include the 0+, 1, inf limits");
  return dominance_compare(renyi_curve(a, grid), renyi_curve(b, grid), tol);
}

// Classification of the ordered pair (h, h+delta). Down means the higher-field
// state converts to the lower-field one, following the majorization
// convention f_l(h+delta) >= f_l(h); by Schur concavity that direction is
// exactly the one where the lower-field entropies dominate, so an LOCC
// verdict always implies the matching ELOCC verdict.
struct ConvertibilityVerdict {
  Convertibility locc = Convertibility::Incomparable;
  Convertibility elocc = Convertibility::Incomparable;
  bool degenerate_flag = false;
};

inline Convertibility locc_verdict(MajorizationOrder m) {
  switch (m) {
    case MajorizationOrder::AMajorizesB: return Convertibility::Down;
    case MajorizationOrder::BMajorizesA: return Convertibility::Up;
    case MajorizationOrder::Equal: return Convertibility::Equal;
    default: return Convertibility::Incomparable;
  }
}

// `a` is the higher-field curve, `b` the lower-field one.
inline Convertibility elocc_verdict(Dominance d) {
  switch (d) {
    case Dominance::BDominatesA: return Convertibility::Down;
    case Dominance::ADominatesB: return Convertibility::Up;
    case Dominance::Equal: return Convertibility::Equal;
    default: return Convertibility::Incomparable;
  }
}

struct PairOptions {
  SolveMethod method = SolveMethod::Auto;
  DegeneracyPolicy policy = DegeneracyPolicy::Lowest;
  AlphaGrid alpha_grid = AlphaGrid::defaults();
};

struct PointState {
  GroundStateResult gs;
  SchmidtSpectrum spectrum;
  RenyiCurve curve;
};

// Ground state -> block spectrum -> Renyi curve at one parameter point.
inline PointState solve_point(const ModelParams& p, const BlockSpec& block,
                              const PairOptions& opts) {
  PointState s;
  const LowSpectrum low = low_spectrum(p, 2, opts.method);
  s.gs = select_in_degenerate_subspace(low, block, opts.policy);
  s.spectrum = schmidt_spectrum(reduced_density_matrix(s.gs.state, block));
  s.curve = renyi_curve(s.spectrum, opts.alpha_grid);
  return s;
}

inline ConvertibilityVerdict classify_states(const PointState& low, const PointState& high,
                                             double tol = kCompareTol) {
  ConvertibilityVerdict v;
  v.locc = locc_verdict(majorization_compare(high.spectrum, low.spectrum, tol));
  v.elocc = elocc_verdict(dominance_compare(high.curve, low.curve, tol));
  v.degenerate_flag = low.gs.degenerate || high.gs.degenerate;
  return v;
}

inline ConvertibilityVerdict classify_pair(const ModelParams& at_h, const ModelParams& at_h_delta,
                                           const BlockSpec& block,
                                           const PairOptions& opts = PairOptions{}) {
  at_h.validate();
  at_h_delta.validate();
  if (at_h.L != at_h_delta.L || at_h.gamma != at_h_delta.gamma)
    throw std::invalid_argument("classify_pair: endpoints must share L and gamma");
  if (!(at_h_delta.h > at_h.h))
    throw std::invalid_argument("classify_pair: second endpoint must have the larger field");
  const PointState lo = solve_point(at_h, block, opts);
  const PointState hi = solve_point(at_h_delta, block, opts);
  return classify_states(lo, hi);
}

// Sign of d S_alpha / d h by central finite difference. At the h >= 0 domain
// edge (h < delta) a forward difference is used instead.
inline Sign sign_of_dS(const ModelParams& p, const BlockSpec& block, Alpha alpha, double delta,
                       const PairOptions& opts = PairOptions{}) {
  p.validate();
  if (!(delta > 0.0)) throw std::invalid_argument("sign_of_dS: delta must be positive");
  auto entropy_at = [&](double h) {
    ModelParams q = p;
    q.h = h;
    const PointState s = solve_point(q, block, opts);
    return renyi_entropy(s.spectrum, alpha);
  };
  double diff = 0.0;
  if (p.h >= delta)
    diff = (entropy_at(p.h + delta) - entropy_at(p.h - delta)) / (2.0 * delta);
  else
    diff = (entropy_at(p.h + delta) - entropy_at(p.h)) / delta;
  if (std::abs(diff) < kDerivativeTol) return Sign::Zero;
  return diff < 0.0 ? Sign::Negative : Sign::Positive;
}

}  // namespace xyconv
