// bdcp: command-line front end. Exit status 0 when every in-run assertion
// holds, 1 when one fails, 2 on errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "bdcp/currents.hpp"
#include "bdcp/engine.hpp"
#include "bdcp/experiment.hpp"
#include "bdcp/measures.hpp"
#include "bdcp/pde.hpp"
#include "bdcp/spectral.hpp"
#include "bdcp/testfn.hpp"

namespace fs = std::filesystem;
using namespace bdcp;

namespace {

struct Common {
  std::string spec_path;
  std::string out;
  std::vector<std::string> overrides;
  long long seed = -1;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--spec", c.spec_path, "experiment spec (key = value)");
  cmd->add_option("--out", c.out, "output directory (default: spec 'out')");
  cmd->add_option("--seed", c.seed, "override the spec seed");
  cmd->add_option("--threads", c.threads, "worker threads (default: hardware)");
  cmd->add_option("--set", c.overrides, "key=value override, repeatable");
}

ExperimentSpec resolve(const Common& c) {
  ExperimentSpec s = c.spec_path.empty() ? ExperimentSpec{} : load_spec(c.spec_path);
  for (const auto& o : c.overrides) apply_override(s, o);
  if (c.seed >= 0) s.seed = static_cast<std::uint64_t>(c.seed);
  if (!c.out.empty()) s.out_dir = c.out;
  return s;
}

unsigned threads_of(const Common& c) {
  return c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
}

int finish(const ExperimentReport& rep, const std::string& dir) {
  write_report(rep, dir);
  int failed = 0;
  for (const auto& a : rep.assertions) {
    if (!a.passed) ++failed;
    std::cout << (a.passed ? "ok    " : "FAIL  ") << a.name << "  value=" << a.value << " threshold=" << a.threshold
              << '\n';
  }
  std::cout << rep.assertions.size() - failed << '/' << rep.assertions.size() << " assertions passed; spec_hash "
            << hex64(rep.hash) << "; output in " << dir << '\n';
  return failed ? 1 : 0;
}

int run_kind(const Common& c, std::optional<ExperimentKind> forced) {
  ExperimentSpec s = resolve(c);
  if (forced) s.kind = *forced;
  return finish(run_experiment(s, threads_of(c)), s.out_dir);
}

// One trajectory at the first grid point: final snapshot, ledger, pairings,
// optional event log, with the continuity identity audited on every event.
int run_simulate(const Common& c, bool events) {
  const ExperimentSpec s = resolve(c);
  validate(s);
  const int N = s.N_grid.front();
  const Geometry geo(s.dim, N, s.transverse_len, s.mode);
  const ModelParams params = s.model(N);
  const DensityProfile gamma = parse_profile(s.profile, params.b_hat);
  RandomStream init(s.seed, stream_key(1, N, 0));
  const Configuration start = sample_product_measure(gamma, geo, init);
  fs::create_directories(s.out_dir);
  const fs::path dir(s.out_dir);
  std::ofstream log;
  if (events) log.open(dir / "events.ndjson");
  EventLogWriter writer(log);
  Simulator sim(start, params, RandomStream(s.seed, stream_key(2, N, 0)));
  ContinuityAuditor audit(start);
  CompensatorTracker comp(start, params);
  std::ofstream pair(dir / "pairings.csv");
  pair << "# bdcp simulate spec_hash=" << hex64(spec_hash(s)) << " seed=" << s.seed << "\nt,test,pairing\n";
  pair.precision(12);
  std::vector<TestTriple> tests;
  for (const auto& t : s.test_functions) tests.push_back(parse_test_triple(t));
  for (double t : s.snapshots) {
    if (events)
      sim.advance(t, audit, comp, writer);
    else
      sim.advance(t, audit, comp);
    for (std::size_t g = 0; g < tests.size(); ++g)
      pair << t << ",g" << g << ',' << empirical_pairing(sim.configuration(), tests[g], t) << '\n';
  }
  std::ofstream snap(dir / "final.snapshot");
  write_snapshot(snap, sim.configuration());
  std::ofstream ledger(dir / "ledger.csv");
  write_ledger_csv(ledger, audit.ledger(), &comp);
  std::ofstream spec(dir / "spec.txt");
  spec << "# spec_hash=" << hex64(spec_hash(s)) << '\n' << canonical_text(s);
  const auto defect = audit.ledger().continuity_defect(start, sim.configuration());
  std::cout << sim.clock().event_count << " events, " << audit.checks() << " continuity checks, defect " << defect
            << "; output in " << s.out_dir << '\n';
  return defect == 0 ? 0 : 1;
}

int run_pde(const Common& c) {
  const ExperimentSpec s = resolve(c);
  validate(s);
  const ModelParams params = s.model();
  PdeOptions o;
  o.h = s.pde_h;
  o.mode = s.mode;
  o.snapshots = s.snapshots;
  const auto traj = solve_pde(parse_profile(s.profile, params.b_hat), params, 1, s.horizon(), o);
  fs::create_directories(s.out_dir);
  std::ofstream out(fs::path(s.out_dir) / "pde.csv");
  out << "# bdcp pde spec_hash=" << hex64(spec_hash(s)) << '\n';
  write_pde_csv(out, traj.states);
  for (const auto& w : traj.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << traj.steps << " steps, dt " << traj.dt_max << "; output in " << s.out_dir << '\n';
  return 0;
}

int run_spectral(const Common& c) {
  const ExperimentSpec s = resolve(c);
  validate(s);
  const ModelParams params = s.model();
  SpectralOptions o;
  o.modes = s.spectral_modes;
  o.tol = s.spectral_tol;
  const auto sol = duhamel_solve(parse_profile(s.profile, params.b_hat), params, s.horizon(), o);
  fs::create_directories(s.out_dir);
  std::ofstream out(fs::path(s.out_dir) / "spectral.csv");
  out << "# bdcp spectral spec_hash=" << hex64(spec_hash(s)) << '\n' << "t,u1,rho1,rho2,rho3\n";
  out.precision(12);
  const int n = static_cast<int>(std::lround(2.0 / s.pde_h));
  std::vector<double> times{0.0};
  times.insert(times.end(), s.snapshots.begin(), s.snapshots.end());
  for (double t : times)
    for (int k = 0; k <= n; ++k) {
      const double u = -1.0 + 2.0 * k / n;
      const Density r = sol.evaluate(t, u);
      out << t << ',' << u << ',' << r[0] << ',' << r[1] << ',' << r[2] << '\n';
    }
  std::cout << sol.steps_per_subinterval << " steps per subinterval, refinement change " << sol.refinement_change
            << "; output in " << s.out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bdcp: two-type contact process with reservoirs"};
  app.require_subcommand(1);
  Common c;
  bool events = false;
  auto* sim = app.add_subcommand("simulate", "single trajectory with audited currents");
  auto* pde = app.add_subcommand("pde", "finite-difference solution of the density equation");
  auto* spec = app.add_subcommand("spectral", "sine-basis Duhamel solution (d = 1)");
  auto* cmp = app.add_subcommand("compare", "finite differences against the spectral solver");
  auto* cpl = app.add_subcommand("couple", "coupled box/full process discrepancy decay");
  auto* orc = app.add_subcommand("oracle", "simulation against the exact generator");
  auto* exp = app.add_subcommand("experiment", "run the kind named in the spec");
  for (auto* s : {sim, pde, spec, cmp, cpl, orc, exp}) add_common(s, c);
  sim->add_flag("--events", events, "write events.ndjson");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    if (sim->parsed()) return run_simulate(c, events);
    if (pde->parsed()) return run_pde(c);
    if (spec->parsed()) return run_spectral(c);
    if (cmp->parsed()) return run_kind(c, ExperimentKind::pde_compare);
    if (cpl->parsed()) return run_kind(c, ExperimentKind::couple_decay);
    if (orc->parsed()) return run_kind(c, ExperimentKind::oracle_check);
    return run_kind(c, std::nullopt);
  } catch (const std::exception& e) {
    std::cerr << "bdcp: " << e.what() << '\n';
    return 2;
  }
}
