#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "xyconv/model.hpp"

namespace xyconv {

inline constexpr double kRankCutoff = 1e-12;   // eigenvalues above this count toward the rank
inline constexpr double kEigClampFloor = -1e-8;  // more negative than this is a numerical error

// Contiguous block of sites handed to Alice. Sites are listed in order and may
// wrap around the periodic boundary, e.g. {L-1, 0}.
struct BlockSpec {
  std::vector<int> sites;
  int L = 0;

  static BlockSpec first_sites(int L, int n) {
    BlockSpec b;
    b.L = L;
    for (int i = 0; i < n; ++i) b.sites.push_back(i);
    return b;
  }

  int size() const { return static_cast<int>(sites.size()); }
  std::size_t dim() const { return std::size_t{1} << size(); }

  void validate() const {
    if (L < 2 || L > kMaxSites)
      throw std::invalid_argument("BlockSpec: invalid chain length " + std::to_string(L));
    const int n = size();
    if (n < 1 || 2 * n > L)
      throw std::invalid_argument("BlockSpec: block size must satisfy 1 <= size <= L/2 (got " +
                                  std::to_string(n) + " of L = " + std::to_string(L) + ")");
    for (int s : sites)
      if (s < 0 || s >= L)
        throw std::invalid_argument("BlockSpec: site index " + std::to_string(s) +
                                    " outside [0, L)");
    for (int i = 0; i + 1 < n; ++i)
      if (sites[i + 1] != (sites[i] + 1) % L)
        throw std::invalid_argument("BlockSpec: sites must be contiguous mod L");
  }
};

// Reshape a pure state into a d x 2^(L-b) matrix: row index collects the block
// bits (sites[j] -> bit j), column index the remaining bits in ascending site
// order. The reduced density matrix is then M * M^T.
inline Matrix block_reshape(const Vector& state, const BlockSpec& block) {
  block.validate();
  const std::size_t n = std::size_t{1} << block.L;
  if (static_cast<std::size_t>(state.size()) != n)
    throw std::invalid_argument("block_reshape: state length does not match 2^L");

  std::vector<int> env_sites;
  std::vector<char> in_block(block.L, 0);
  for (int s : block.sites) in_block[s] = 1;
  for (int s = 0; s < block.L; ++s)
    if (!in_block[s]) env_sites.push_back(s);

  const Eigen::Index d = static_cast<Eigen::Index>(block.dim());
  const Eigen::Index m = static_cast<Eigen::Index>(n >> block.size());
  Matrix M(d, m);
  for (std::uint64_t s = 0; s < n; ++s) {
    std::uint64_t a = 0, r = 0;
    for (std::size_t j = 0; j < block.sites.size(); ++j)
      a |= ((s >> block.sites[j]) & 1) << j;
    for (std::size_t j = 0; j < env_sites.size(); ++j)
      r |= ((s >> env_sites[j]) & 1) << j;
    M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r)) =
        state[static_cast<Eigen::Index>(s)];
  }
  return M;
}

// rho_A = Tr_env |psi><psi|, computed from the reshaped state.
inline Matrix reduced_density_matrix(const Vector& state, const BlockSpec& block) {
  const double norm = state.norm();
  if (std::abs(norm - 1.0) > 1e-8)
    throw std::invalid_argument("reduced_density_matrix: state is not unit norm (|v| = " +
                                std::to_string(norm) + ")");
  const Matrix M = block_reshape(state, block);
  return M * M.transpose();
}

// Descending eigenvalues of a block reduced density matrix, clamped at the
// roundoff floor and renormalized to unit sum.
struct SchmidtSpectrum {
  std::vector<double> values;  // lambda_1 >= ... >= lambda_d >= 0, sum = 1

  int size() const { return static_cast<int>(values.size()); }
};

inline SchmidtSpectrum schmidt_spectrum(const Matrix& rho) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("schmidt_spectrum: matrix not square");
  if ((rho - rho.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("schmidt_spectrum: matrix not symmetric");
  const double tr = rho.trace();
  if (std::abs(tr - 1.0) > 1e-8)
    throw std::invalid_argument("schmidt_spectrum: trace " + std::to_string(tr) + " != 1");

  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  SchmidtSpectrum out;
  out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + rho.rows());
  std::sort(out.values.begin(), out.values.end(), std::greater<double>());
  double sum = 0.0;
  for (double& v : out.values) {
    if (v < kEigClampFloor)
      throw std::runtime_error("schmidt_spectrum: eigenvalue " + std::to_string(v) +
                               " below the numerical validity floor");
    // Anything below the rank cutoff is eigensolver noise. Small Renyi orders
    // amplify the exponent of such residue into O(1e-2) entropy shifts, so it
    // is zeroed here, not just ignored in the rank count.
    if (v < kRankCutoff) v = 0.0;
    sum += v;
  }
  for (double& v : out.values) v /= sum;
  return out;
}

// Renyi order: a positive real, or one of the alpha -> 0, 1, infinity limits.
struct Alpha {
  enum class Kind { ZeroLimit, Finite, One, Infinity };
  Kind kind = Kind::Finite;
  double value = 2.0;  // meaningful for Finite only

  static Alpha zero_limit() { return {Kind::ZeroLimit, 0.0}; }
  static Alpha finite(double a) { return {Kind::Finite, a}; }
  static Alpha one() { return {Kind::One, 1.0}; }
  static Alpha infinity() { return {Kind::Infinity, 0.0}; }

  // Sort key placing the limits at their natural positions.
  double order_key() const {
    switch (kind) {
      case Kind::ZeroLimit: return 0.0;
      case Kind::One: return 1.0;
      case Kind::Infinity: return std::numeric_limits<double>::infinity();
      default: return value;
    }
  }
};

struct AlphaGrid {
  std::vector<Alpha> points;  // ascending by order_key

  // 60 log-spaced orders in [1e-2, 1e2] plus the three limits. The limits
  // bound the quantifier "for all alpha", which makes the finite grid
  // sufficient for dominance checks.
  static AlphaGrid defaults(double lo = 1e-2, double hi = 1e2, int count = 60) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2)
      throw std::invalid_argument("AlphaGrid: need 0 < lo < hi and count >= 2");
    AlphaGrid g;
    g.points.push_back(Alpha::zero_limit());
    const double llo = std::log10(lo), lhi = std::log10(hi);
    bool one_placed = false;
    for (int k = 0; k < count; ++k) {
      const double a = std::pow(10.0, llo + (lhi - llo) * k / (count - 1));
      if (!one_placed && a >= 1.0) {
        g.points.push_back(Alpha::one());
        one_placed = true;
        if (std::abs(a - 1.0) < 1e-9) continue;  // exact hit folds into the limit entry
      }
      g.points.push_back(Alpha::finite(a));
    }
    if (!one_placed) g.points.push_back(Alpha::one());
    g.points.push_back(Alpha::infinity());
    return g;
  }

  bool has_limits() const {
    bool z = false, o = false, i = false;
    for (const Alpha& a : points) {
      z |= a.kind == Alpha::Kind::ZeroLimit;
      o |= a.kind == Alpha::Kind::One;
      i |= a.kind == Alpha::Kind::Infinity;
    }
    return z && o && i;
  }
};

// S_alpha of a Schmidt spectrum, in bits. Finite orders within 1e-9 of 1 are
// routed to the von Neumann branch. Weights at or below the rank cutoff are
// omitted in every branch; keeping them would let solver residue push S_alpha
// above S_0 at small orders.
inline double renyi_entropy(const SchmidtSpectrum& spec, Alpha alpha) {
  if (spec.values.empty()) throw std::invalid_argument("renyi_entropy: empty spectrum");
  switch (alpha.kind) {
    case Alpha::Kind::ZeroLimit: {
      int rank = 0;
      for (double v : spec.values) rank += v > kRankCutoff;
      return std::log2(static_cast<double>(std::max(rank, 1)));
    }
    case Alpha::Kind::Infinity:
      return -std::log2(spec.values.front());
    case Alpha::Kind::One:
      break;
    case Alpha::Kind::Finite: {
      if (!(alpha.value > 0.0))
        throw std::invalid_argument("renyi_entropy: order must be positive");
      if (std::abs(alpha.value - 1.0) > 1e-9) {
        double sum = 0.0;
        for (double v : spec.values)
          if (v > kRankCutoff) sum += std::pow(v, alpha.value);
        return std::log2(sum) / (1.0 - alpha.value);
      }
      break;  // fall through to von Neumann
    }
  }
  double s = 0.0;
  for (double v : spec.values)
    if (v > kRankCutoff) s -= v * std::log2(v);
  return s;
}

struct RenyiCurve {
  AlphaGrid grid;
  std::vector<double> entropies;  // aligned with grid.points

  double at_one() const {
    for (std::size_t i = 0; i < grid.points.size(); ++i)
      if (grid.points[i].kind == Alpha::Kind::One) return entropies[i];
    throw std::logic_error("RenyiCurve: grid has no alpha = 1 entry");
  }
};

inline RenyiCurve renyi_curve(const SchmidtSpectrum& spec, const AlphaGrid& grid) {
  if (grid.points.empty()) throw std::invalid_argument("renyi_curve: empty grid");
  RenyiCurve c;
  c.grid = grid;
  c.entropies.reserve(grid.points.size());
  for (const Alpha& a : grid.points) c.entropies.push_back(renyi_entropy(spec, a));
  return c;
}

// Cross Gram matrices of two reshaped orthonormal states. The reduced density
// matrix of cos(t)*v0 + sin(t)*v1 is then a closed form in t, which makes
// scanning combinations of a degenerate doublet cheap.
struct BlockGram {
  Matrix aa, ab, bb;

  static BlockGram of(const Vector& v0, const Vector& v1, const BlockSpec& block) {
    const Matrix M0 = block_reshape(v0, block);
    const Matrix M1 = block_reshape(v1, block);
    return {M0 * M0.transpose(), M0 * M1.transpose(), M1 * M1.transpose()};
  }

  Matrix rho(double theta) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return c * c * aa + c * s * (ab + ab.transpose()) + s * s * bb;
  }

  // Tr rho(theta)^2; the Renyi-2 entropy is -log2 of this.
  double purity(double theta) const {
    const Matrix r = rho(theta);
    return r.cwiseProduct(r).sum();
  }
};

}  // namespace xyconv
