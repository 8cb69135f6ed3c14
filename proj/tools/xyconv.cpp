// Command-line front end: batch sweeps and point probes of ground-state local
// convertibility in the XY chain. Subcommands write CSV/JSON data files plus a
// manifest with the fully resolved configuration; rerunning from a manifest
// reproduces the data files byte for byte.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "xyconv/xyconv.hpp"

namespace fs = std::filesystem;
using namespace xyconv;

namespace {

// Ties CLI11 flags to string-keyed config entries so that a flat key=value
// file (or a manifest's config object) can fill in anything not given on the
// command line, and so the manifest can materialize every default.
class KeyedOptions {
 public:
  void bind_int(CLI::App& app, const std::string& key, int& field, const std::string& desc) {
    auto* opt = app.add_option("--" + key, field, desc);
    entries_.push_back({key, opt, [&field](const std::string& v) { field = std::stoi(v); },
                        [&field] { return std::to_string(field); }});
  }
  void bind_double(CLI::App& app, const std::string& key, double& field, const std::string& desc) {
    auto* opt = app.add_option("--" + key, field, desc);
    entries_.push_back({key, opt, [&field](const std::string& v) { field = std::stod(v); },
                        [&field] { return format_double(field); }});
  }
  void bind_string(CLI::App& app, const std::string& key, std::string& field,
                   const std::string& desc) {
    auto* opt = app.add_option("--" + key, field, desc);
    entries_.push_back({key, opt, [&field](const std::string& v) { field = v; },
                        [&field] { return field; }});
  }

  void apply_file(const std::map<std::string, std::string>& file) {
    for (auto& e : entries_) {
      if (e.opt->count() > 0) continue;  // command-line flags win
      const auto it = file.find(e.key);
      if (it != file.end()) e.set(it->second);
    }
    for (const auto& [k, v] : file) {
      bool known = false;
      for (const auto& e : entries_) known = known || e.key == k;
      if (!known) throw std::invalid_argument("unknown config key: " + k);
    }
  }

  std::map<std::string, std::string> resolved() const {
    std::map<std::string, std::string> out;
    for (const auto& e : entries_) out[e.key] = e.get();
    return out;
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* opt;
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
  };
  std::vector<Entry> entries_;
};

struct ConfigSources {
  std::string config_path;
  std::string manifest_path;

  void bind(CLI::App& app) {
    app.add_option("--config", config_path, "flat key=value config file");
    app.add_option("--from-manifest", manifest_path,
                   "rerun from the resolved config of a previous manifest");
  }
  void apply(KeyedOptions& keyed) const {
    if (!config_path.empty() && !manifest_path.empty())
      throw std::invalid_argument("--config and --from-manifest are mutually exclusive");
    if (!config_path.empty()) keyed.apply_file(load_flat_config(config_path));
    if (!manifest_path.empty()) keyed.apply_file(config_from_manifest(manifest_path));
  }
};

SolveMethod parse_method(const std::string& s) {
  if (s == "dense") return SolveMethod::Dense;
  if (s == "iterative") return SolveMethod::Iterative;
  if (s == "auto") return SolveMethod::Auto;
  throw std::invalid_argument("method must be one of dense|iterative|auto (got '" + s + "')");
}

DegeneracyPolicy parse_policy(const std::string& s) {
  if (s == "lowest") return DegeneracyPolicy::Lowest;
  if (s == "min-entanglement") return DegeneracyPolicy::MinEntanglement;
  throw std::invalid_argument("policy must be lowest|min-entanglement (got '" + s + "')");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  return out;
}

// Shared sweep-shaped options (scan, sign-map, scaling rows).
struct SweepFlags {
  int L = 8;
  double h_min = 0.0, h_max = 1.5, h_step = 0.005;
  double delta = -1.0;  // -1: follow the grid step
  int block_start = 0, block_size = 2;
  double alpha_min = 1e-2, alpha_max = 1e2;
  int alpha_count = 60;
  std::string method = "iterative";
  std::string policy = "lowest";

  void bind(CLI::App& app, KeyedOptions& keyed) {
    keyed.bind_int(app, "L", L, "chain length (2..24)");
    keyed.bind_double(app, "h-min", h_min, "field grid start");
    keyed.bind_double(app, "h-max", h_max, "field grid end");
    keyed.bind_double(app, "h-step", h_step, "field grid step");
    keyed.bind_double(app, "delta", delta, "pair spacing (default: the grid step)");
    keyed.bind_int(app, "block-start", block_start, "first site of Alice's block");
    keyed.bind_int(app, "block-size", block_size, "number of contiguous sites in the block");
    keyed.bind_double(app, "alpha-min", alpha_min, "smallest finite Renyi order");
    keyed.bind_double(app, "alpha-max", alpha_max, "largest finite Renyi order");
    keyed.bind_int(app, "alpha-count", alpha_count, "finite Renyi orders on the log grid");
    keyed.bind_string(app, "method", method, "eigensolver: dense|iterative|auto");
    keyed.bind_string(app, "policy", policy, "degenerate ground states: lowest|min-entanglement");
  }

  SweepConfig to_config(std::vector<double> gamma_grid) const {
    SweepConfig c;
    c.L = L;
    c.gamma_grid = std::move(gamma_grid);
    c.h_min = h_min;
    c.h_max = h_max;
    c.h_step = h_step;
    c.delta = delta > 0.0 ? delta : h_step;
    c.block_start = block_start;
    c.block_size = block_size;
    c.alpha_grid = AlphaGrid::defaults(alpha_min, alpha_max, alpha_count);
    c.method = parse_method(method);
    c.policy = parse_policy(policy);
    c.validate();
    return c;
  }
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir.empty() ? "." : dir);
  return (fs::path(dir.empty() ? "." : dir) / name).string();
}

// The field flag is spelled --h, so help must not claim the short -h.
CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& desc) {
  CLI::App* cmd = app.add_subcommand(name, desc);
  cmd->set_help_flag("--help", "print help");
  return cmd;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  if (!(hi >= lo)) throw std::invalid_argument("grid end must be >= start");
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo + i * step;
  return out;
}

int run_scan(const ConfigSources& sources, KeyedOptions& keyed, SweepFlags& flags,
             double& gamma_min, double& gamma_max, double& gamma_step, std::string& out_dir) {
  sources.apply(keyed);
  if (gamma_min > gamma_max) std::swap(gamma_min, gamma_max);
  const SweepConfig config = flags.to_config(make_grid(gamma_min, gamma_max, gamma_step));
  if (config.block_size != 2)
    throw std::invalid_argument("scan: the grid.csv schema fixes a 2-spin block");

  Timer timer;
  const PhaseDiagramGrid grid = run_phase_diagram(config);

  RunManifest manifest;
  manifest.command = "scan";
  manifest.config = keyed.resolved();
  manifest.run_id = run_identifier(manifest.command, manifest.config);
  manifest.failed_cells = grid.failed_cells;
  const std::string grid_path = out_path(out_dir, "grid.csv");
  write_grid_csv(grid_path, grid, manifest.run_id);
  manifest.outputs = {"grid.csv"};
  manifest.duration_seconds = timer.seconds();
  write_manifest(out_path(out_dir, "manifest.json"), manifest);
  std::cout << "scan: " << grid.cells.size() << " cells (" << grid.failed_cells
            << " failed) -> " << grid_path << "\n";
  return 0;
}

int run_sign_map(const ConfigSources& sources, KeyedOptions& keyed, SweepFlags& flags,
                 double& gamma, std::string& out_dir) {
  sources.apply(keyed);
  const SweepConfig config = flags.to_config({gamma});

  Timer timer;
  const SignMap map = run_sign_sweep(config, gamma);

  RunManifest manifest;
  manifest.command = "sign-map";
  manifest.config = keyed.resolved();
  manifest.run_id = run_identifier(manifest.command, manifest.config);
  std::size_t failed = 0;
  for (bool f : map.failed) failed += f;
  manifest.failed_cells = failed;
  const std::string path = out_path(out_dir, "signmap.csv");
  write_signmap_csv(path, map, manifest.run_id);
  manifest.outputs = {"signmap.csv"};
  manifest.duration_seconds = timer.seconds();
  write_manifest(out_path(out_dir, "manifest.json"), manifest);
  std::cout << "sign-map: " << map.h_values.size() << " field points -> " << path << "\n";
  return 0;
}

int run_renyi(const ConfigSources& sources, KeyedOptions& keyed, SweepFlags& flags, double& gamma,
              double& h, std::string& out_name, std::string& out_dir) {
  sources.apply(keyed);
  ModelParams p{flags.L, gamma, h};
  p.validate();
  BlockSpec block;
  block.L = flags.L;
  for (int i = 0; i < flags.block_size; ++i) block.sites.push_back((flags.block_start + i) % flags.L);
  PairOptions opts;
  opts.method = parse_method(flags.method);
  opts.policy = parse_policy(flags.policy);
  opts.alpha_grid = AlphaGrid::defaults(flags.alpha_min, flags.alpha_max, flags.alpha_count);

  Timer timer;
  const PointState state = solve_point(p, block, opts);

  RunManifest manifest;
  manifest.command = "renyi";
  manifest.config = keyed.resolved();
  manifest.run_id = run_identifier(manifest.command, manifest.config);
  const std::string path = out_path(out_dir, out_name);
  write_renyi_csv(path, state.curve, manifest.run_id);
  manifest.outputs = {out_name};
  manifest.duration_seconds = timer.seconds();
  write_manifest(out_path(out_dir, "manifest.json"), manifest);
  std::cout << "renyi: E0 = " << format_double(state.gs.energy)
            << ", S1 = " << format_double(state.curve.at_one()) << " -> " << path << "\n";
  return 0;
}

int run_majorization(const ConfigSources& sources, KeyedOptions& keyed, SweepFlags& flags,
                     double& gamma, double& h, std::string& out_dir) {
  sources.apply(keyed);
  const double delta = flags.delta > 0.0 ? flags.delta : flags.h_step;
  ModelParams lo{flags.L, gamma, h};
  ModelParams hi{flags.L, gamma, h + delta};
  lo.validate();
  hi.validate();
  BlockSpec block;
  block.L = flags.L;
  for (int i = 0; i < flags.block_size; ++i) block.sites.push_back((flags.block_start + i) % flags.L);
  PairOptions opts;
  opts.method = parse_method(flags.method);
  opts.policy = parse_policy(flags.policy);
  opts.alpha_grid = AlphaGrid::defaults(flags.alpha_min, flags.alpha_max, flags.alpha_count);

  Timer timer;
  const PointState a = solve_point(lo, block, opts);
  const PointState b = solve_point(hi, block, opts);
  const ConvertibilityVerdict verdict = classify_states(a, b);

  RunManifest manifest;
  manifest.command = "majorization";
  manifest.config = keyed.resolved();
  manifest.run_id = run_identifier(manifest.command, manifest.config);
  const std::string path = out_path(out_dir, "majorization.csv");
  write_majorization_csv(path, a.spectrum, b.spectrum, manifest.run_id);
  manifest.outputs = {"majorization.csv"};
  manifest.duration_seconds = timer.seconds();
  write_manifest(out_path(out_dir, "manifest.json"), manifest);
  std::cout << "locc: " << to_string(verdict.locc) << "\n";
  std::cout << "elocc: " << to_string(verdict.elocc) << "\n";
  std::cout << "degenerate: " << (verdict.degenerate_flag ? 1 : 0) << "\n";
  return 0;
}

int run_scaling(const ConfigSources& sources, KeyedOptions& keyed, SweepFlags& flags,
                double& gamma, std::string& L_list, std::string& kind, int& min_run,
                std::string& out_dir) {
  sources.apply(keyed);
  const std::vector<int> Ls = parse_int_list(L_list);
  if (Ls.size() < 4)
    throw std::invalid_argument("scaling: need at least 4 chain lengths (got " +
                                std::to_string(Ls.size()) + ")");
  if (kind != "first" && kind != "second")
    throw std::invalid_argument("scaling: kind must be first|second (got '" + kind + "')");

  Timer timer;
  std::vector<ScalingSample> samples;
  for (int L : Ls) {
    SweepFlags row = flags;
    row.L = L;
    const SweepConfig config = row.to_config({gamma});
    const PhaseDiagramGrid grid = run_phase_diagram(config);
    const auto cells = grid.row(gamma);
    std::vector<CellRecord> row_cells;
    row_cells.reserve(cells.size());
    for (const CellRecord* c : cells) row_cells.push_back(*c);
    const auto boundary = (kind == "first")
                              ? first_order_boundary(row_cells, VerdictChannel::Elocc, min_run)
                              : second_order_boundary(row_cells, VerdictChannel::Elocc, min_run);
    if (!boundary)
      throw FitError("scaling: no " + kind + "-order boundary detected at L = " +
                     std::to_string(L));
    samples.push_back({L, *boundary});
    std::cout << "L = " << L << ": h_c = " << format_double(*boundary) << "\n";
  }
  const ScalingResult fit = scaling_fit(samples);

  RunManifest manifest;
  manifest.command = "scaling";
  manifest.config = keyed.resolved();
  manifest.run_id = run_identifier(manifest.command, manifest.config);
  const std::string path = out_path(out_dir, "scaling.json");
  write_scaling_json(path, fit, manifest.run_id);
  manifest.outputs = {"scaling.json"};
  manifest.duration_seconds = timer.seconds();
  write_manifest(out_path(out_dir, "manifest.json"), manifest);
  std::cout << "h_c(inf) = " << format_double(fit.h_inf)
            << "  amplitude = " << format_double(fit.amplitude)
            << "  rate = " << format_double(fit.rate)
            << "  rms = " << format_double(fit.residual_rms) << " -> " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xyconv: ground-state local convertibility of the XY chain"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");
  app.footer("Set XYCONV_WORKERS to override the sweep worker count.");

  // scan
  auto* scan = add_command(app, "scan", "classify LOCC/ELOCC over a (gamma, h) grid");
  KeyedOptions scan_keys;
  SweepFlags scan_flags;
  ConfigSources scan_sources;
  double scan_gamma_min = 0.0, scan_gamma_max = 1.0, scan_gamma_step = 0.01;
  std::string scan_out_dir = ".";
  scan_flags.bind(*scan, scan_keys);
  scan_keys.bind_double(*scan, "gamma-min", scan_gamma_min, "anisotropy grid start");
  scan_keys.bind_double(*scan, "gamma-max", scan_gamma_max, "anisotropy grid end");
  scan_keys.bind_double(*scan, "gamma-step", scan_gamma_step, "anisotropy grid step");
  scan_keys.bind_string(*scan, "out-dir", scan_out_dir, "output directory");
  double scan_gamma_single = -1.0;
  scan->add_option("--gamma", scan_gamma_single, "single anisotropy row (shorthand)");
  scan_sources.bind(*scan);

  // sign-map
  auto* signmap = add_command(app, "sign-map", "sign of dS_alpha/dh over (h, alpha) at fixed gamma");
  KeyedOptions sign_keys;
  SweepFlags sign_flags;
  ConfigSources sign_sources;
  double sign_gamma = 1.0;
  std::string sign_out_dir = ".";
  sign_flags.bind(*signmap, sign_keys);
  sign_keys.bind_double(*signmap, "gamma", sign_gamma, "anisotropy");
  sign_keys.bind_string(*signmap, "out-dir", sign_out_dir, "output directory");
  sign_sources.bind(*signmap);

  // renyi
  auto* renyi = add_command(app, "renyi", "Renyi entropy curve of one ground state");
  KeyedOptions renyi_keys;
  SweepFlags renyi_flags;
  ConfigSources renyi_sources;
  renyi_flags.method = "auto";
  double renyi_gamma = 1.0, renyi_h = 0.0;
  std::string renyi_out = "renyi.csv", renyi_out_dir = ".";
  renyi_flags.bind(*renyi, renyi_keys);
  renyi_keys.bind_double(*renyi, "gamma", renyi_gamma, "anisotropy");
  renyi_keys.bind_double(*renyi, "h", renyi_h, "transverse field");
  renyi_keys.bind_string(*renyi, "out", renyi_out, "curve file name");
  renyi_keys.bind_string(*renyi, "out-dir", renyi_out_dir, "output directory");
  renyi_sources.bind(*renyi);

  // majorization
  auto* major = add_command(app, "majorization", "majorization profile of the pair (h, h+delta)");
  KeyedOptions major_keys;
  SweepFlags major_flags;
  ConfigSources major_sources;
  major_flags.method = "auto";
  double major_gamma = 1.0, major_h = 0.0;
  std::string major_out_dir = ".";
  major_flags.bind(*major, major_keys);
  major_keys.bind_double(*major, "gamma", major_gamma, "anisotropy");
  major_keys.bind_double(*major, "h", major_h, "transverse field of the lower endpoint");
  major_keys.bind_string(*major, "out-dir", major_out_dir, "output directory");
  major_sources.bind(*major);

  // scaling
  auto* scaling = add_command(app, "scaling", "finite-size extrapolation of a boundary");
  KeyedOptions scaling_keys;
  SweepFlags scaling_flags;
  ConfigSources scaling_sources;
  double scaling_gamma = std::sqrt(3.0) / 2.0;
  std::string scaling_Ls = "8,9,10,11,12,13,14,15,16";
  std::string scaling_kind = "second";
  std::string scaling_out_dir = ".";
  int scaling_min_run = 3;
  scaling_flags.bind(*scaling, scaling_keys);
  scaling_keys.bind_double(*scaling, "gamma", scaling_gamma, "anisotropy");
  scaling_keys.bind_string(*scaling, "L-list", scaling_Ls, "comma-separated chain lengths");
  scaling_keys.bind_string(*scaling, "kind", scaling_kind, "boundary kind: first|second");
  scaling_keys.bind_int(*scaling, "min-run", scaling_min_run,
                        "cells a verdict class must persist to count as a phase");
  scaling_keys.bind_string(*scaling, "out-dir", scaling_out_dir, "output directory");
  scaling_sources.bind(*scaling);

  CLI11_PARSE(app, argc, argv);

  try {
    if (scan->parsed()) {
      if (scan_gamma_single >= 0.0) {
        scan_gamma_min = scan_gamma_single;
        scan_gamma_max = scan_gamma_single;
      }
      return run_scan(scan_sources, scan_keys, scan_flags, scan_gamma_min, scan_gamma_max,
                      scan_gamma_step, scan_out_dir);
    }
    if (signmap->parsed())
      return run_sign_map(sign_sources, sign_keys, sign_flags, sign_gamma, sign_out_dir);
    if (renyi->parsed())
      return run_renyi(renyi_sources, renyi_keys, renyi_flags, renyi_gamma, renyi_h, renyi_out,
                       renyi_out_dir);
    if (major->parsed())
      return run_majorization(major_sources, major_keys, major_flags, major_gamma, major_h,
                              major_out_dir);
    if (scaling->parsed())
      return run_scaling(scaling_sources, scaling_keys, scaling_flags, scaling_gamma, scaling_Ls,
                         scaling_kind, scaling_min_run, scaling_out_dir);
  } catch (const SweepAborted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
