#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "xyconv/entanglement.hpp"
#include "xyconv/model.hpp"

namespace xyconv {

enum class SolveMethod { Dense, Iterative, Auto };
enum class DegeneracyPolicy { Lowest, MinEntanglement };

inline constexpr double kDegeneracyRel = 1e-8;   // gap below this (scaled) flags a degenerate pair
inline constexpr double kResidualBound = 1e-9;   // every returned eigenpair satisfies this
inline constexpr int kAutoDenseCeiling = 12;     // `auto` switches to the iterative path above this L

inline bool is_degenerate_gap(double gap, double e0) {
  return gap < kDegeneracyRel * std::max(1.0, std::abs(e0));
}

struct ConvergenceError : std::runtime_error {
  double last_residual;
  ConvergenceError(const std::string& what, double resid)
      : std::runtime_error(what + " (last residual " + std::to_string(resid) + ")"),
        last_residual(resid) {}
};

// Lowest eigenpair plus the gap to the next level.
struct GroundStateResult {
  ModelParams params;
  double energy = 0.0;
  Vector state;        // unit norm; largest-magnitude entry is positive
  double gap = 0.0;    // E1 - E0
  bool degenerate = false;
};

// k lowest eigenpairs, energies ascending, states orthonormal.
struct LowSpectrum {
  ModelParams params;
  std::vector<double> energies;
  std::vector<Vector> states;
};

// Sign convention: flip so the entry of largest magnitude is positive.
// Ties resolve to the first index in scan order.
inline void phase_fix(Vector& v) {
  Eigen::Index best = 0;
  double mag = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > mag) {
      mag = a;
      best = i;
    }
  }
  if (v[best] < 0.0) v = -v;
}

namespace detail {

// Deterministic pseudorandom unit vector. The raw generator output is mapped
// to doubles by hand so the sequence does not depend on the standard
// library's distribution implementation.
inline Vector seeded_unit_vector(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ (seed * 0xbf58476d1ce4e5b9ULL + seed + 1));
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double u = std::ldexp(static_cast<double>(rng() >> 11), -53);  // [0, 1)
    v[i] = 2.0 * u - 1.0;
  }
  v.normalize();
  return v;
}

struct LanczosOptions {
  double tol = 1e-10;      // residual threshold for locking a Ritz pair
  int max_matvecs = 5000;  // per restarted run
  int basis_cap = 110;
  int keep = 12;           // Ritz vectors carried through a thick restart
  int check_interval = 4;
};

// One restarted Lanczos run in the orthogonal complement of `locked`, locking
// up to `want` of the lowest reachable eigenpairs. Full reorthogonalization
// against both the working basis and the locked set keeps the small projected
// matrix T = Q^T H Q exact enough that the usual residual estimate
// beta * |last row of y| applies across thick restarts. When the Krylov space
// exhausts, a fresh deterministic vector is injected so the run can keep
// exploring the complement. Everything is fixed-order and single-threaded, so
// repeated calls are bit-identical.
template <class ApplyFn>
int lanczos_complement_run(const ApplyFn& apply, std::size_t dim, const Vector& start, int want,
                           double scale, const LanczosOptions& opt, std::vector<Vector>& locked,
                           std::vector<double>& values) {
  if (want <= 0) return 0;
  const Eigen::Index n = static_cast<Eigen::Index>(dim);
  const int cap = std::max(2, std::min<int>(opt.basis_cap, static_cast<int>(dim)));
  const double exhaust_tol = 1e-13 * std::max(1.0, scale);

  Matrix Q(n, cap);
  Matrix T = Matrix::Zero(cap, cap);
  int nq = 0;

  auto orth_against_locked = [&](Vector& w) {
    for (const Vector& u : locked) w -= u.dot(w) * u;
  };

  std::uint64_t inject_seed = 101 + locked.size();
  auto try_inject = [&](Vector& out) -> bool {
    for (int attempt = 0; attempt < 40; ++attempt) {
      Vector v = seeded_unit_vector(dim, inject_seed++);
      orth_against_locked(v);
      if (nq > 0) v -= Q.leftCols(nq) * (Q.leftCols(nq).transpose() * v).eval();
      const double nrm = v.norm();
      if (nrm > 1e-6) {
        out = v / nrm;
        return true;
      }
    }
    return false;
  };

  {
    Vector q0 = start;
    orth_against_locked(q0);
    double nrm = q0.norm();
    if (nrm < 1e-8) {
      if (!try_inject(q0)) return 0;  // complement is (numerically) empty
    } else {
      q0 /= nrm;
      orth_against_locked(q0);
      q0.normalize();
    }
    Q.col(0) = q0;
    nq = 1;
  }

  int locked_here = 0;
  int matvecs = 0;
  double last_resid = std::numeric_limits<double>::infinity();

  while (true) {
    if (matvecs >= opt.max_matvecs)
      throw ConvergenceError("lanczos: matvec budget exhausted before convergence", last_resid);

    const int j = nq - 1;
    Vector w = apply(Q.col(j));
    ++matvecs;
    orth_against_locked(w);
    // Two Gram-Schmidt passes; the summed coefficients are the T column.
    Vector h = Q.leftCols(nq).transpose() * w;
    w -= Q.leftCols(nq) * h;
    Vector h2 = Q.leftCols(nq).transpose() * w;
    w -= Q.leftCols(nq) * h2;
    h += h2;
    for (int i = 0; i < nq; ++i) {
      T(i, j) = h[i];
      T(j, i) = h[i];
    }
    const double beta = w.norm();

    const std::size_t complement_dim = dim - locked.size();
    const bool exhausted = beta <= exhaust_tol;
    const bool at_cap = nq >= cap || static_cast<std::size_t>(nq) >= complement_dim;
    const bool check = exhausted || at_cap || (nq % opt.check_interval == 0);

    if (!check) {
      T(j + 1, j) = beta;
      T(j, j + 1) = beta;
      Q.col(nq) = w / beta;
      ++nq;
      continue;
    }

    Eigen::SelfAdjointEigenSolver<Matrix> small(T.topLeftCorner(nq, nq));
    const Vector& theta = small.eigenvalues();
    const Matrix& Y = small.eigenvectors();

    // Lock a converged prefix of the Ritz values (locking past an unconverged
    // one would let a lower state slip through the deflation).
    int to_lock = 0;
    for (int i = 0; i < nq && locked_here + to_lock < want; ++i) {
      const double resid = exhausted ? 0.0 : beta * std::abs(Y(nq - 1, i));
      if (i == 0) last_resid = resid;
      if (resid <= opt.tol)
        ++to_lock;
      else
        break;
    }
    if (to_lock == 0 && !at_cap && !exhausted) {
      // nothing converged yet: keep growing the basis
      T(j + 1, j) = beta;
      T(j, j + 1) = beta;
      Q.col(nq) = w / beta;
      ++nq;
      continue;
    }
    for (int i = 0; i < to_lock; ++i) {
      Vector x = Q.leftCols(nq) * Y.col(i);
      orth_against_locked(x);
      orth_against_locked(x);
      const double nrm = x.norm();
      if (nrm < 1e-8) continue;  // collapsed onto the locked set; skip
      x /= nrm;
      locked.push_back(std::move(x));
      values.push_back(theta[i]);
      ++locked_here;
    }
    if (locked_here >= want) return locked_here;

    // Thick restart: carry the lowest unconverged Ritz vectors forward.
    const int first_keep = to_lock;
    const int n_keep = std::max(1, std::min({opt.keep, nq - first_keep, cap - 2}));
    Matrix Z = Q.leftCols(nq) * Y.middleCols(first_keep, n_keep);
    Q.leftCols(n_keep) = Z;
    T.setZero();
    for (int i = 0; i < n_keep; ++i) T(i, i) = theta[first_keep + i];
    nq = n_keep;

    Vector next;
    if (!exhausted) {
      next = w / beta;
    } else if (!try_inject(next)) {
      // Complement fully spanned: the kept Ritz values are exact eigenvalues
      // of the invariant subspace. Lock what is still wanted and stop.
      for (int i = 0; i < nq && locked_here < want; ++i) {
        Vector x = Q.col(i);
        orth_against_locked(x);
        const double nrm = x.norm();
        if (nrm < 1e-8) continue;
        x /= nrm;
        const double val = T(i, i);
        locked.push_back(std::move(x));
        values.push_back(val);
        ++locked_here;
      }
      return locked_here;
    }
    Q.col(nq) = next;
    ++nq;
  }
}

}  // namespace detail

inline SolveMethod resolve_method(const ModelParams& p, SolveMethod m) {
  if (m != SolveMethod::Auto) return m;
  return p.L <= kAutoDenseCeiling ? SolveMethod::Dense : SolveMethod::Iterative;
}

// k lowest eigenpairs of H(params). The dense path diagonalizes the explicit
// matrix; the iterative path runs restarted Lanczos from the all-ones vector
// and then from deterministic seeded vectors deflated against everything
// already found, so partners in other symmetry sectors (including exactly
// degenerate ones) are picked up. Results are deterministic.
inline LowSpectrum low_spectrum(const ModelParams& p, int k, SolveMethod method = SolveMethod::Auto) {
  p.validate();
  if (k < 1 || k > 8)
    throw std::invalid_argument("low_spectrum: k must satisfy 1 <= k <= 8 (got " +
                                std::to_string(k) + ")");
  if (static_cast<std::size_t>(k) > p.dim())
    throw std::invalid_argument("low_spectrum: k exceeds the Hilbert-space dimension");

  const SolveMethod m = resolve_method(p, method);
  LowSpectrum out;
  out.params = p;

  if (m == SolveMethod::Dense) {
    if (p.L > kDenseCeiling)
      throw std::invalid_argument("low_spectrum: dense method limited to L <= " +
                                  std::to_string(kDenseCeiling));
    const Matrix H = build_dense_hamiltonian(p);
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    for (int i = 0; i < k; ++i) {
      out.energies.push_back(es.eigenvalues()[i]);
      Vector v = es.eigenvectors().col(i);
      phase_fix(v);
      out.states.push_back(std::move(v));
    }
    return out;
  }

  const std::size_t dim = p.dim();
  const double scale = p.L * (2.0 + p.h) + 1.0;
  auto apply = [&p](const Vector& v) { return apply_hamiltonian(p, v); };

  std::vector<Vector> locked;
  std::vector<double> values;
  detail::LanczosOptions opt;
  const int runs = std::max(2, k);
  for (int r = 0; r < runs; ++r) {
    Vector start;
    if (r == 0)
      start = Vector::Ones(static_cast<Eigen::Index>(dim)) / std::sqrt(static_cast<double>(dim));
    else
      start = detail::seeded_unit_vector(dim, static_cast<std::uint64_t>(r));
    detail::lanczos_complement_run(apply, dim, start, k, scale, opt, locked, values);
    if (locked.size() >= dim) break;
  }
  if (static_cast<int>(locked.size()) < k)
    throw ConvergenceError("low_spectrum: iterative solver found only " +
                               std::to_string(locked.size()) + " of " + std::to_string(k) +
                               " eigenpairs",
                           std::numeric_limits<double>::quiet_NaN());

  // Refine with a Rayleigh quotient, verify the residual bound, sort, keep k.
  std::vector<std::size_t> order(locked.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> refined(locked.size());
  std::vector<double> resid(locked.size());
  for (std::size_t i = 0; i < locked.size(); ++i) {
    const Vector Hv = apply(locked[i]);
    refined[i] = locked[i].dot(Hv);
    resid[i] = (Hv - refined[i] * locked[i]).norm();
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return refined[a] < refined[b]; });
  for (int i = 0; i < k; ++i) {
    const std::size_t idx = order[static_cast<std::size_t>(i)];
    if (resid[idx] > kResidualBound)
      throw ConvergenceError("low_spectrum: eigenpair residual exceeds bound", resid[idx]);
    out.energies.push_back(refined[idx]);
    Vector v = locked[idx];
    phase_fix(v);
    out.states.push_back(std::move(v));
  }
  return out;
}

inline GroundStateResult make_ground_state(const ModelParams& p, double energy, Vector state,
                                           double gap) {
  GroundStateResult r;
  r.params = p;
  r.energy = energy;
  r.state = std::move(state);
  r.gap = gap;
  r.degenerate = is_degenerate_gap(gap, energy);
  return r;
}

// Lowest eigenpair. `auto` picks dense for L <= 12 and the matrix-free
// iterative solver above. The gap to the first excited level is always
// computed so callers can flag (near-)degenerate points.
inline GroundStateResult ground_state(const ModelParams& p, SolveMethod method = SolveMethod::Auto) {
  LowSpectrum sp = low_spectrum(p, 2, method);
  return make_ground_state(p, sp.energies[0], sp.states[0], sp.energies[1] - sp.energies[0]);
}

// Resolve a (near-)degenerate ground doublet. `lowest` returns the first
// eigenvector unchanged. `min_entanglement` scans real combinations
// cos(t) v0 + sin(t) v1 on a 720-point angle grid, then refines the best
// bracket by golden-section search, and returns the combination minimizing
// the block Renyi-2 entropy. At an exact factorization point this recovers a
// product state to machine precision.
inline GroundStateResult select_in_degenerate_subspace(const LowSpectrum& sp, const BlockSpec& block,
                                                       DegeneracyPolicy policy) {
  if (sp.states.size() < 2)
    throw std::invalid_argument("select_in_degenerate_subspace: need at least 2 states");
  const double e0 = sp.energies[0];
  const double gap = sp.energies[1] - e0;
  const bool deg = is_degenerate_gap(gap, e0);
  if (policy == DegeneracyPolicy::Lowest || !deg)
    return make_ground_state(sp.params, e0, sp.states[0], gap);

  const BlockGram gram = BlockGram::of(sp.states[0], sp.states[1], block);
  const int grid_points = 720;
  const double pi = std::acos(-1.0);
  double best_theta = 0.0;
  double best_purity = -1.0;
  for (int i = 0; i < grid_points; ++i) {
    const double t = pi * i / grid_points;
    const double pu = gram.purity(t);
    if (pu > best_purity) {
      best_purity = pu;
      best_theta = t;
    }
  }
  // Golden-section refinement of the winning bracket (maximizing purity
  // minimizes S2). Fixed iteration count keeps the result deterministic.
  {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = best_theta - pi / grid_points;
    double b = best_theta + pi / grid_points;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = gram.purity(c), fd = gram.purity(d);
    for (int it = 0; it < 80; ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = gram.purity(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = gram.purity(d);
      }
    }
    best_theta = 0.5 * (a + b);
  }

  Vector psi = std::cos(best_theta) * sp.states[0] + std::sin(best_theta) * sp.states[1];
  psi.normalize();
  phase_fix(psi);
  const double energy = psi.dot(apply_hamiltonian(sp.params, psi));
  return make_ground_state(sp.params, energy, std::move(psi), gap);
}

}  // namespace xyconv
