#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "xyconv/convertibility.hpp"
#include "xyconv/eigensolver.hpp"
#include "xyconv/entanglement.hpp"
#include "xyconv/model.hpp"

namespace xyconv {

struct SweepAborted : std::runtime_error {
  std::size_t failed = 0;
  std::size_t total = 0;
  SweepAborted(std::size_t nfail, std::size_t ntotal, const std::string& first_error)
      : std::runtime_error("sweep aborted: " + std::to_string(nfail) + " of " +
                           std::to_string(ntotal) + " cells failed to converge; first error: " +
                           first_error),
        failed(nfail),
        total(ntotal) {}
};

inline int worker_count() {
  if (const char* env = std::getenv("XYCONV_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Bounded pool over an index range. Tasks must be independent; results land in
// caller-owned slots, so output order never depends on scheduling.
template <class Fn>
inline void parallel_for_index(std::size_t count, const Fn& fn) {
  const int workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

struct SweepConfig {
  int L = 8;
  std::vector<double> gamma_grid;
  double h_min = 0.0;
  double h_max = 1.5;
  double h_step = 0.005;
  double delta = 0.005;  // pair spacing; defaults to the grid step
  int block_size = 2;
  int block_start = 0;
  AlphaGrid alpha_grid = AlphaGrid::defaults();
  DegeneracyPolicy policy = DegeneracyPolicy::Lowest;
  SolveMethod method = SolveMethod::Iterative;
  double failure_budget = 0.01;  // abort when more than this fraction of cells fail

  static SweepConfig defaults() {
    SweepConfig c;
    for (int i = 0; i <= 100; ++i) c.gamma_grid.push_back(0.01 * i);
    return c;
  }

  BlockSpec block() const {
    BlockSpec b;
    b.L = L;
    for (int i = 0; i < block_size; ++i) b.sites.push_back((block_start + i) % L);
    return b;
  }

  int h_count() const {
    return static_cast<int>(std::floor((h_max - h_min) / h_step + 1e-9)) + 1;
  }
  double h_at(int i) const { return h_min + i * h_step; }

  // When delta equals the grid step, pairs are formed between consecutive grid
  // nodes, so each ground state is solved once and shared.
  bool shares_nodes() const { return delta == h_step; }
  double partner_of(int i) const { return shares_nodes() ? h_at(i + 1) : h_at(i) + delta; }

  void validate() const {
    ModelParams probe{L, gamma_grid.empty() ? 0.0 : gamma_grid.front(), h_min};
    probe.validate();
    if (gamma_grid.empty()) throw std::invalid_argument("SweepConfig: empty gamma grid");
    for (double g : gamma_grid)
      if (!(g >= 0.0 && g <= 1.0))
        throw std::invalid_argument("SweepConfig: gamma must satisfy 0 <= gamma <= 1");
    if (!(h_min >= 0.0)) throw std::invalid_argument("SweepConfig: h_min must satisfy h_min >= 0");
    if (!(h_step > 0.0)) throw std::invalid_argument("SweepConfig: h_step must be positive");
    if (!(h_max >= h_min)) throw std::invalid_argument("SweepConfig: h_max must be >= h_min");
    if (!(delta > 0.0)) throw std::invalid_argument("SweepConfig: delta must be positive");
    block().validate();
    if (!alpha_grid.has_limits())
      throw std::invalid_argument("SweepConfig: alpha grid must include the 0+, 1, inf limits");
  }

  PairOptions pair_options() const {
    PairOptions o;
    o.method = method;
    o.policy = policy;
    o.alpha_grid = alpha_grid;
    return o;
  }
};

// One classified cell of a phase diagram: the pair (h, h+delta) at fixed gamma.
struct CellRecord {
  double gamma = 0.0;
  double h = 0.0;
  Convertibility locc = Convertibility::Incomparable;
  Convertibility elocc = Convertibility::Incomparable;
  bool degenerate = false;
  double gap = 0.0;              // at the h endpoint
  double s1 = 0.0;               // von Neumann block entropy at the h endpoint
  std::vector<double> lambdas;   // Schmidt spectrum at the h endpoint
  bool failed = false;
};

struct PhaseDiagramGrid {
  SweepConfig config;
  std::vector<CellRecord> cells;  // gamma-major, h ascending within a row
  std::size_t failed_cells = 0;

  std::vector<const CellRecord*> row(double gamma) const {
    std::vector<const CellRecord*> out;
    for (const auto& c : cells)
      if (c.gamma == gamma) out.push_back(&c);
    return out;
  }
};

namespace detail {

struct NodeResult {
  double h = 0.0;
  double energy = 0.0;
  double gap = 0.0;
  bool degenerate = false;
  SchmidtSpectrum spectrum;
  RenyiCurve curve;
  bool failed = false;
  std::string error;
};

// Solve every distinct (gamma, h) node of one gamma row. Node h values are
// deduplicated by exact bit pattern, so cache hits never change results.
inline std::vector<NodeResult> solve_row_nodes(const SweepConfig& cfg, double gamma,
                                               const std::vector<double>& h_values) {
  const BlockSpec block = cfg.block();
  const PairOptions opts = cfg.pair_options();
  std::vector<NodeResult> nodes(h_values.size());
  parallel_for_index(h_values.size(), [&](std::size_t i) {
    NodeResult& node = nodes[i];
    node.h = h_values[i];
    try {
      ModelParams p{cfg.L, gamma, h_values[i]};
      const PointState s = solve_point(p, block, opts);
      node.energy = s.gs.energy;
      node.gap = s.gs.gap;
      node.degenerate = s.gs.degenerate;
      node.spectrum = s.spectrum;
      node.curve = s.curve;
    } catch (const std::exception& e) {
      node.failed = true;
      node.error = e.what();
    }
  });
  return nodes;
}

}  // namespace detail

// Full (gamma, h) sweep classifying every pair cell. Cells are emitted in
// deterministic (gamma, h) order regardless of worker scheduling. Aborts via
// SweepAborted when the per-cell failure fraction exceeds the budget.
inline PhaseDiagramGrid run_phase_diagram(const SweepConfig& cfg) {
  cfg.validate();
  PhaseDiagramGrid grid;
  grid.config = cfg;
  const int nh = cfg.h_count();
  std::string first_error;

  for (double gamma : cfg.gamma_grid) {
    // Distinct node values for this row: the grid nodes plus each cell's
    // partner (identical to the next node when delta == h_step).
    std::vector<double> h_values;
    std::map<std::uint64_t, int> index_of;
    auto intern = [&](double h) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(h));
      std::memcpy(&bits, &h, sizeof(bits));
      auto [it, inserted] = index_of.try_emplace(bits, static_cast<int>(h_values.size()));
      if (inserted) h_values.push_back(h);
      return it->second;
    };
    std::vector<std::pair<int, int>> cell_nodes;
    cell_nodes.reserve(nh);
    for (int i = 0; i < nh; ++i)
      cell_nodes.emplace_back(intern(cfg.h_at(i)), intern(cfg.partner_of(i)));

    const auto nodes = detail::solve_row_nodes(cfg, gamma, h_values);

    for (int i = 0; i < nh; ++i) {
      const auto& lo = nodes[cell_nodes[i].first];
      const auto& hi = nodes[cell_nodes[i].second];
      CellRecord cell;
      cell.gamma = gamma;
      cell.h = cfg.h_at(i);
      if (lo.failed || hi.failed) {
        cell.failed = true;
        ++grid.failed_cells;
        if (first_error.empty()) first_error = lo.failed ? lo.error : hi.error;
      } else {
        cell.locc = locc_verdict(majorization_compare(hi.spectrum, lo.spectrum));
        cell.elocc = elocc_verdict(dominance_compare(hi.curve, lo.curve));
        cell.degenerate = lo.degenerate || hi.degenerate;
        cell.gap = lo.gap;
        cell.s1 = lo.curve.at_one();
        cell.lambdas = lo.spectrum.values;
      }
      grid.cells.push_back(std::move(cell));
    }
  }

  const std::size_t total = grid.cells.size();
  if (total > 0 && static_cast<double>(grid.failed_cells) > cfg.failure_budget * total)
    throw SweepAborted(grid.failed_cells, total, first_error);
  return grid;
}

// Sign map of dS_alpha/dh over (h, alpha) for one gamma: one panel of the
// paper-style sign distribution. Interior nodes use the central difference of
// the node entropies; the edges fall back to one-sided differences.
struct SignMap {
  double gamma = 0.0;
  int L = 0;
  std::vector<double> h_values;
  AlphaGrid grid;
  std::vector<std::vector<Sign>> signs;  // [h][alpha]
  std::vector<bool> degenerate;
  std::vector<bool> failed;
};

inline SignMap run_sign_sweep(const SweepConfig& cfg, double gamma) {
  cfg.validate();
  bool in_grid = false;
  for (double g : cfg.gamma_grid) in_grid = in_grid || g == gamma;
  if (!in_grid) throw std::invalid_argument("run_sign_sweep: gamma not in the configured grid");

  const int nh = cfg.h_count();
  std::vector<double> h_values(nh);
  for (int i = 0; i < nh; ++i) h_values[i] = cfg.h_at(i);
  const auto nodes = detail::solve_row_nodes(cfg, gamma, h_values);

  SignMap map;
  map.gamma = gamma;
  map.L = cfg.L;
  map.h_values = h_values;
  map.grid = cfg.alpha_grid;
  map.signs.assign(nh, std::vector<Sign>(cfg.alpha_grid.points.size(), Sign::Zero));
  map.degenerate.assign(nh, false);
  map.failed.assign(nh, false);

  const std::size_t na = cfg.alpha_grid.points.size();
  for (int i = 0; i < nh; ++i) {
    const int left = std::max(i - 1, 0);
    const int right = std::min(i + 1, nh - 1);
    if (nodes[i].failed || nodes[left].failed || nodes[right].failed) {
      map.failed[i] = true;
      continue;
    }
    map.degenerate[i] = nodes[i].degenerate;
    const double dh = h_values[right] - h_values[left];
    for (std::size_t a = 0; a < na; ++a) {
      const double diff = (nodes[right].curve.entropies[a] - nodes[left].curve.entropies[a]) / dh;
      map.signs[i][a] =
          std::abs(diff) < kDerivativeTol ? Sign::Zero : (diff < 0 ? Sign::Negative : Sign::Positive);
    }
  }
  return map;
}

// A verdict-class change between neighboring cells of a row. Boundaries whose
// flanking cells carry the degenerate flag are level-crossing artifacts, not
// phase physics, and are excluded from scaling fits.
struct Boundary {
  double h = 0.0;  // midpoint of the flanking cell coordinates
  Convertibility left = Convertibility::Incomparable;
  Convertibility right = Convertibility::Incomparable;
  bool artifact = false;
};

enum class VerdictChannel { Locc, Elocc };

inline Convertibility cell_class(const CellRecord& c, VerdictChannel ch) {
  return ch == VerdictChannel::Locc ? c.locc : c.elocc;
}

// All class changes along a row. Clean cells are compared skipping over
// degenerate/failed ones (a change straddling a flagged run is reported at
// the midpoint of the clean flanks); changes touching flagged cells are also
// reported, marked as artifacts.
inline std::vector<Boundary> detect_boundaries(const std::vector<CellRecord>& row,
                                               VerdictChannel channel = VerdictChannel::Elocc) {
  std::vector<Boundary> out;
  // artifact boundaries: raw adjacent changes involving a flagged cell
  for (std::size_t i = 0; i + 1 < row.size(); ++i) {
    const CellRecord& a = row[i];
    const CellRecord& b = row[i + 1];
    if (a.failed || b.failed) continue;
    if (!(a.degenerate || b.degenerate)) continue;
    if (cell_class(a, channel) == cell_class(b, channel)) continue;
    out.push_back({0.5 * (a.h + b.h), cell_class(a, channel), cell_class(b, channel), true});
  }
  // clean boundaries: changes between consecutive clean cells
  const CellRecord* prev = nullptr;
  for (const CellRecord& c : row) {
    if (c.failed || c.degenerate) continue;
    if (prev && cell_class(*prev, channel) != cell_class(c, channel))
      out.push_back({0.5 * (prev->h + c.h), cell_class(*prev, channel), cell_class(c, channel),
                     false});
    prev = &c;
  }
  std::sort(out.begin(), out.end(), [](const Boundary& a, const Boundary& b) { return a.h < b.h; });
  return out;
}

namespace detail {

struct ClassRun {
  Convertibility cls;
  std::vector<const CellRecord*> cells;
};

// Runs of stable verdict class along a row, after dropping runs shorter than
// min_run (isolated level-crossing blips) and merging. Degenerate-flagged
// cells take part: in the ordered phase at larger L the parity splitting sits
// below the degeneracy threshold everywhere, so their verdicts are the only
// signal there, and the debouncing is what absorbs genuine crossing blips.
inline std::vector<ClassRun> stable_runs(const std::vector<CellRecord>& row,
                                         VerdictChannel channel, int min_run) {
  std::vector<ClassRun> runs;
  for (const CellRecord& c : row) {
    if (c.failed) continue;
    if (runs.empty() || runs.back().cls != cell_class(c, channel))
      runs.push_back({cell_class(c, channel), {}});
    runs.back().cells.push_back(&c);
  }
  std::vector<ClassRun> stable;
  for (auto& r : runs) {
    if (static_cast<int>(r.cells.size()) < min_run) continue;
    if (!stable.empty() && stable.back().cls == r.cls) {
      auto& dst = stable.back().cells;
      dst.insert(dst.end(), r.cells.begin(), r.cells.end());
    } else {
      stable.push_back(std::move(r));
    }
  }
  return stable;
}

inline double run_transition_midpoint(const ClassRun& a, const ClassRun& b) {
  return 0.5 * (a.cells.back()->h + b.cells.front()->h);
}

}  // namespace detail

// The factorization-line boundary of a row: block entropies fall to zero on
// the circle and rise beyond it, so down-convertibility holds below and fails
// above. Concretely: the exit of the last stable down-convertible run before
// the final (near-critical) one.
inline std::optional<double> first_order_boundary(const std::vector<CellRecord>& row,
                                                  VerdictChannel channel = VerdictChannel::Elocc,
                                                  int min_run = 3) {
  const auto runs = detail::stable_runs(row, channel, min_run);
  std::size_t final_down = runs.size();
  for (std::size_t i = runs.size(); i-- > 0;)
    if (runs[i].cls == Convertibility::Down) {
      final_down = i;
      break;
    }
  if (final_down == runs.size() || final_down == 0) return std::nullopt;
  for (std::size_t i = final_down; i-- > 0;)
    if (runs[i].cls == Convertibility::Down)
      return detail::run_transition_midpoint(runs[i], runs[i + 1]);
  return std::nullopt;
}

// The near-critical boundary of a row: the last transition into a stable
// down-convertible run (entropies decrease with field from there on).
inline std::optional<double> second_order_boundary(const std::vector<CellRecord>& row,
                                                   VerdictChannel channel = VerdictChannel::Elocc,
                                                   int min_run = 3) {
  const auto runs = detail::stable_runs(row, channel, min_run);
  for (std::size_t i = runs.size(); i-- > 1;)
    if (runs[i].cls == Convertibility::Down && runs[i - 1].cls != Convertibility::Down)
      return detail::run_transition_midpoint(runs[i - 1], runs[i]);
  return std::nullopt;
}

}  // namespace xyconv
