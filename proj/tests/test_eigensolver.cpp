#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"
#include "xyconv/eigensolver.hpp"

using namespace xyconv;

namespace {
const double kSqrt3Over2 = std::sqrt(3.0) / 2.0;
const double kSqrt15Over4 = std::sqrt(15.0) / 4.0;
}  // namespace

TEST_CASE("two-site Ising chain at zero field has ground energy -2") {
  const GroundStateResult gs = ground_state(ModelParams{2, 1.0, 0.0}, SolveMethod::Dense);
  CHECK(gs.energy == Catch::Approx(-2.0).margin(1e-12));
  CHECK(std::abs(gs.state.norm() - 1.0) < 1e-12);
}

TEST_CASE("deep paramagnet polarizes along the field") {
  const ModelParams p{8, 1.0, 100.0};
  const GroundStateResult gs = ground_state(p, SolveMethod::Dense);
  const Eigen::Index all_up = static_cast<Eigen::Index>(p.dim()) - 1;
  CHECK(std::abs(gs.state[all_up]) > 0.9999);
  CHECK(std::abs(gs.energy + 8.0 * 100.0) < 1.0);
}

TEST_CASE("iterative ground energy matches the dense solve") {
  const ModelParams p{10, kSqrt3Over2, 0.5};
  const GroundStateResult dense = ground_state(p, SolveMethod::Dense);
  const GroundStateResult iter = ground_state(p, SolveMethod::Iterative);
  CHECK(std::abs(dense.energy - iter.energy) < 1e-10);
}

TEST_CASE("iterative and dense solves agree across a parameter grid") {
  const double gammas[] = {0.05, 0.3, 0.55, 0.8, 1.0};
  const double fields[] = {0.2, 0.5, 0.8, 1.1, 1.4};
  for (int L : {6, 8}) {
    for (double g : gammas) {
      for (double h : fields) {
        const ModelParams p{L, g, h};
        const GroundStateResult dense = ground_state(p, SolveMethod::Dense);
        const GroundStateResult iter = ground_state(p, SolveMethod::Iterative);
        INFO("L=" << L << " gamma=" << g << " h=" << h);
        CHECK(std::abs(dense.energy - iter.energy) < 1e-10);
        CHECK(std::abs(dense.state.dot(iter.state)) > 1.0 - 1e-9);
      }
    }
  }
}

TEST_CASE("every returned eigenpair satisfies the residual bound") {
  for (const ModelParams p :
       {ModelParams{8, 1.0, 0.5}, ModelParams{10, 0.4, 1.0}, ModelParams{8, kSqrt3Over2, 0.5}}) {
    for (SolveMethod m : {SolveMethod::Dense, SolveMethod::Iterative}) {
      const LowSpectrum sp = low_spectrum(p, 3, m);
      for (std::size_t i = 0; i < sp.states.size(); ++i) {
        const Vector r = apply_hamiltonian(p, sp.states[i]) - sp.energies[i] * sp.states[i];
        INFO("method=" << (m == SolveMethod::Dense ? "dense" : "iterative") << " i=" << i);
        CHECK(r.norm() < 1e-9);
      }
    }
  }
}

TEST_CASE("low spectrum states are orthonormal and energies ascend") {
  const LowSpectrum sp = low_spectrum(ModelParams{8, 0.6, 0.4}, 4, SolveMethod::Iterative);
  for (std::size_t i = 0; i < sp.states.size(); ++i) {
    CHECK(std::abs(sp.states[i].norm() - 1.0) < 1e-10);
    for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(sp.states[i].dot(sp.states[j])) < 1e-10);
    if (i > 0) CHECK(sp.energies[i] >= sp.energies[i - 1] - 1e-12);
  }
}

TEST_CASE("factorization point carries an exactly degenerate ground doublet") {
  const LowSpectrum sp = low_spectrum(ModelParams{8, kSqrt3Over2, 0.5}, 2, SolveMethod::Dense);
  CHECK(sp.energies[1] - sp.energies[0] < 1e-8);
  const LowSpectrum it = low_spectrum(ModelParams{8, kSqrt3Over2, 0.5}, 2, SolveMethod::Iterative);
  CHECK(it.energies[1] - it.energies[0] < 1e-8);
  CHECK(std::abs(it.energies[0] - sp.energies[0]) < 1e-10);
}

TEST_CASE("deep paramagnet is gapped") {
  const LowSpectrum sp = low_spectrum(ModelParams{8, 1.0, 2.0}, 2, SolveMethod::Dense);
  CHECK(sp.energies[1] - sp.energies[0] > 0.1);
  const GroundStateResult gs = ground_state(ModelParams{8, 1.0, 2.0});
  CHECK_FALSE(gs.degenerate);
}

TEST_CASE("k lowest equal the head of the full dense spectrum") {
  const ModelParams p{4, 0.45, 0.9};
  const Matrix H = build_dense_hamiltonian(p);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  for (SolveMethod m : {SolveMethod::Dense, SolveMethod::Iterative}) {
    const LowSpectrum sp = low_spectrum(p, 3, m);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(sp.energies[i] - es.eigenvalues()[i]) < 1e-10);
  }
}

TEST_CASE("k outside 1..8 is rejected") {
  CHECK_THROWS_AS(low_spectrum(ModelParams{4, 1.0, 0.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(low_spectrum(ModelParams{4, 1.0, 0.0}, 9), std::invalid_argument);
}

TEST_CASE("two identical solves are bit-identical") {
  const ModelParams p{9, 0.7, 0.8};
  const GroundStateResult a = ground_state(p, SolveMethod::Iterative);
  const GroundStateResult b = ground_state(p, SolveMethod::Iterative);
  REQUIRE(a.state.size() == b.state.size());
  CHECK(a.energy == b.energy);
  CHECK(a.gap == b.gap);
  CHECK((a.state.array() == b.state.array()).all());
}

TEST_CASE("phase convention: the largest-magnitude entry is positive") {
  for (SolveMethod m : {SolveMethod::Dense, SolveMethod::Iterative}) {
    const GroundStateResult gs = ground_state(ModelParams{7, 0.9, 0.6}, m);
    Eigen::Index imax = 0;
    gs.state.cwiseAbs().maxCoeff(&imax);
    CHECK(gs.state[imax] > 0.0);
  }
}

TEST_CASE("degenerate-subspace selection is a no-op away from crossings") {
  const ModelParams p{8, 1.0, 2.0};
  const LowSpectrum sp = low_spectrum(p, 2, SolveMethod::Dense);
  const BlockSpec block = BlockSpec::first_sites(p.L, 2);
  const GroundStateResult picked =
      select_in_degenerate_subspace(sp, block, DegeneracyPolicy::MinEntanglement);
  CHECK(picked.energy == sp.energies[0]);
  CHECK((picked.state.array() == sp.states[0].array()).all());
  CHECK_FALSE(picked.degenerate);
}

TEST_CASE("min-entanglement policy recovers the product state on the factorization circle") {
  struct Point {
    double gamma, h;
  };
  for (const Point pt : {Point{kSqrt3Over2, 0.5}, Point{kSqrt15Over4, 0.25}}) {
    const ModelParams p{8, pt.gamma, pt.h};
    const LowSpectrum sp = low_spectrum(p, 2, SolveMethod::Dense);
    const BlockSpec block = BlockSpec::first_sites(p.L, 2);
    const GroundStateResult picked =
        select_in_degenerate_subspace(sp, block, DegeneracyPolicy::MinEntanglement);
    CHECK(picked.degenerate);
    const SchmidtSpectrum spec = schmidt_spectrum(reduced_density_matrix(picked.state, block));
    const double s2 = renyi_entropy(spec, Alpha::finite(2.0));
    INFO("gamma=" << pt.gamma << " h=" << pt.h);
    CHECK(s2 < 1e-6);
  }
}

TEST_CASE("selection requires at least two states") {
  const LowSpectrum sp = low_spectrum(ModelParams{4, 1.0, 0.3}, 1, SolveMethod::Dense);
  CHECK_THROWS_AS(
      select_in_degenerate_subspace(sp, BlockSpec::first_sites(4, 2), DegeneracyPolicy::Lowest),
      std::invalid_argument);
}
