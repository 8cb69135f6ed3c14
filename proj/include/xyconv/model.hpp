#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace xyconv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr int kMaxSites = 24;      // 2^24 vectors are the desk-scale memory ceiling
inline constexpr int kDenseCeiling = 14;  // largest L with an explicit 2^L x 2^L matrix

// One point in parameter space: chain length L, anisotropy gamma, transverse field h.
struct ModelParams {
  int L = 8;
  double gamma = 1.0;
  double h = 0.0;

  std::size_t dim() const { return std::size_t{1} << L; }

  void validate() const {
    if (L < 2 || L > kMaxSites)
      throw std::invalid_argument("ModelParams: L must satisfy 2 <= L <= " +
                                  std::to_string(kMaxSites) + " (got " + std::to_string(L) + ")");
    if (!(gamma >= 0.0 && gamma <= 1.0))
      throw std::invalid_argument("ModelParams: gamma must satisfy 0 <= gamma <= 1 (got " +
                                  std::to_string(gamma) + ")");
    if (!(h >= 0.0))
      throw std::invalid_argument("ModelParams: h must satisfy h >= 0 (got " +
                                  std::to_string(h) + ")");
  }
};

// Basis convention: site i maps to bit i of the basis index; bit value 1 is
// spin up (sigma_z eigenvalue +1). Bonds couple bits (i, i+1 mod L); for L=2
// both bond terms act on the same pair and are both kept.

// Off-diagonal weight of one bond term between states differing in bits (i, i+1).
// The xx and yy pieces combine to -1 on 01<->10 flips and -gamma on 00<->11 flips.
inline double bond_flip_weight(double gamma, bool bits_equal) {
  return bits_equal ? -gamma : -1.0;
}

// Field contribution on the diagonal: -h * sum_i sigma_z_i.
inline double field_diagonal(const ModelParams& p, std::uint64_t state) {
  const int up = std::popcount(state);
  return -p.h * static_cast<double>(2 * up - p.L);
}

// Matrix-free H*v in the 2^L product basis. Summation order per output
// element is fixed (diagonal first, then bonds in site order), so results
// are deterministic no matter how callers partition the index range.
inline Vector apply_hamiltonian(const ModelParams& p, const Vector& v) {
  p.validate();
  const std::size_t n = p.dim();
  if (static_cast<std::size_t>(v.size()) != n)
    throw std::invalid_argument("apply_hamiltonian: vector length " + std::to_string(v.size()) +
                                " does not match 2^L = " + std::to_string(n));
  Vector out(static_cast<Eigen::Index>(n));
  for (std::uint64_t s = 0; s < n; ++s) {
    double acc = field_diagonal(p, s) * v[static_cast<Eigen::Index>(s)];
    for (int i = 0; i < p.L; ++i) {
      const int j = (i + 1) % p.L;
      const std::uint64_t mask = (std::uint64_t{1} << i) | (std::uint64_t{1} << j);
      const bool equal = ((s >> i) & 1) == ((s >> j) & 1);
      acc += bond_flip_weight(p.gamma, equal) * v[static_cast<Eigen::Index>(s ^ mask)];
    }
    out[static_cast<Eigen::Index>(s)] = acc;
  }
  return out;
}

// Explicit 2^L x 2^L matrix of H. Real symmetric in this basis.
inline Matrix build_dense_hamiltonian(const ModelParams& p) {
  p.validate();
  if (p.L > kDenseCeiling)
    throw std::invalid_argument("build_dense_hamiltonian: L = " + std::to_string(p.L) +
                                " exceeds the dense ceiling " + std::to_string(kDenseCeiling) +
                                "; use matrix-free apply_hamiltonian instead");
  const std::size_t n = p.dim();
  Matrix H = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::uint64_t s = 0; s < n; ++s) {
    H(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) = field_diagonal(p, s);
    for (int i = 0; i < p.L; ++i) {
      const int j = (i + 1) % p.L;
      const std::uint64_t mask = (std::uint64_t{1} << i) | (std::uint64_t{1} << j);
      const bool equal = ((s >> i) & 1) == ((s >> j) & 1);
      H(static_cast<Eigen::Index>(s ^ mask), static_cast<Eigen::Index>(s)) +=
          bond_flip_weight(p.gamma, equal);
    }
  }
  return H;
}

// Hamiltonian handle: dense matrix for small chains, matrix-free apply beyond.
class Hamiltonian {
 public:
  explicit Hamiltonian(ModelParams params) : params_(params) { params_.validate(); }

  const ModelParams& params() const { return params_; }
  std::size_t dim() const { return params_.dim(); }

  Vector apply(const Vector& v) const { return apply_hamiltonian(params_, v); }
  Matrix dense() const { return build_dense_hamiltonian(params_); }

 private:
  ModelParams params_;
};

}  // namespace xyconv
