#include "bdcp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bdcp/coupling.hpp"
#include "bdcp/currents.hpp"
#include "bdcp/engine.hpp"
#include "bdcp/generator.hpp"
#include "bdcp/measures.hpp"
#include "bdcp/pde.hpp"
#include "bdcp/spectral.hpp"
#include "bdcp/testfn.hpp"

namespace bdcp {

namespace {

constexpr unsigned kSample = 1;
constexpr unsigned kDynamics = 2;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out))
    throw std::invalid_argument("spec key '" + key + "': not a number: '" + v + "'");
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw std::invalid_argument("spec key '" + key + "': not an integer: '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("spec key '" + key + "': expected on/off, got '" + v + "'");
}

Density parse_triple(const std::string& key, const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.size() != 3) throw std::invalid_argument("spec key '" + key + "': expected three numbers");
  return {parse_double(key, parts[0]), parse_double(key, parts[1]), parse_double(key, parts[2])};
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s;
}

std::string triple_text(const Density& d) { return num(d[0]) + "," + num(d[1]) + "," + num(d[2]); }

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

struct Field {
  const char* key;
  std::function<void(ExperimentSpec&, const std::string&)> set;
  std::function<std::string(const ExperimentSpec&)> get;  // empty: not echoed
};

const std::vector<Field>& fields() {
  using S = ExperimentSpec;
  static const std::vector<Field> table = {
      {"kind", [](S& s, const std::string& v) { s.kind = experiment_kind_from_string(v); },
       [](const S& s) { return to_string(s.kind); }},
      {"dim", [](S& s, const std::string& v) { s.dim = parse_int<int>("dim", v); },
       [](const S& s) { return std::to_string(s.dim); }},
      {"transverse_len", [](S& s, const std::string& v) { s.transverse_len = parse_int<int>("transverse_len", v); },
       [](const S& s) { return std::to_string(s.transverse_len); }},
      {"mode", [](S& s, const std::string& v) { s.mode = boundary_mode_from_string(v); },
       [](const S& s) { return to_string(s.mode); }},
      {"lambda1", [](S& s, const std::string& v) { s.lambda1 = parse_double("lambda1", v); },
       [](const S& s) { return num(s.lambda1); }},
      {"lambda2", [](S& s, const std::string& v) { s.lambda2 = parse_double("lambda2", v); },
       [](const S& s) { return num(s.lambda2); }},
      {"r", [](S& s, const std::string& v) { s.r = parse_double("r", v); }, [](const S& s) { return num(s.r); }},
      {"b_hat", [](S& s, const std::string& v) { s.b_left = s.b_right = parse_triple("b_hat", v); }, nullptr},
      {"b_left", [](S& s, const std::string& v) { s.b_left = parse_triple("b_left", v); },
       [](const S& s) { return triple_text(s.b_left); }},
      {"b_right", [](S& s, const std::string& v) { s.b_right = parse_triple("b_right", v); },
       [](const S& s) { return triple_text(s.b_right); }},
      {"reaction", [](S& s, const std::string& v) { s.reaction = parse_bool("reaction", v); },
       [](const S& s) { return std::string(s.reaction ? "on" : "off"); }},
      {"exchange", [](S& s, const std::string& v) { s.exchange = parse_bool("exchange", v); },
       [](const S& s) { return std::string(s.exchange ? "on" : "off"); }},
      {"boundary", [](S& s, const std::string& v) { s.boundary = parse_bool("boundary", v); },
       [](const S& s) { return std::string(s.boundary ? "on" : "off"); }},
      {"N_grid",
       [](S& s, const std::string& v) {
         s.N_grid.clear();
         for (const auto& p : split(v, ',')) s.N_grid.push_back(parse_int<int>("N_grid", p));
       },
       [](const S& s) {
         std::string out;
         for (std::size_t i = 0; i < s.N_grid.size(); ++i) out += (i ? "," : "") + std::to_string(s.N_grid[i]);
         return out;
       }},
      {"replicas", [](S& s, const std::string& v) { s.replicas = parse_int<std::size_t>("replicas", v); },
       [](const S& s) { return std::to_string(s.replicas); }},
      {"seed", [](S& s, const std::string& v) { s.seed = parse_int<std::uint64_t>("seed", v); },
       [](const S& s) { return std::to_string(s.seed); }},
      {"profile", [](S& s, const std::string& v) { s.profile = v; }, [](const S& s) { return s.profile; }},
      {"test_functions", [](S& s, const std::string& v) { s.test_functions = split(v, ';'); },
       [](const S& s) { return join(s.test_functions, ";"); }},
      {"current_test_functions", [](S& s, const std::string& v) { s.current_test_functions = split(v, ';'); },
       [](const S& s) { return join(s.current_test_functions, ";"); }},
      {"reaction_test_functions", [](S& s, const std::string& v) { s.reaction_test_functions = split(v, ';'); },
       [](const S& s) { return join(s.reaction_test_functions, ";"); }},
      {"snapshots",
       [](S& s, const std::string& v) {
         s.snapshots.clear();
         for (const auto& p : split(v, ',')) s.snapshots.push_back(parse_double("snapshots", p));
       },
       [](const S& s) { return join_doubles(s.snapshots); }},
      {"pde_h", [](S& s, const std::string& v) { s.pde_h = parse_double("pde_h", v); },
       [](const S& s) { return num(s.pde_h); }},
      {"spectral_modes", [](S& s, const std::string& v) { s.spectral_modes = parse_int<int>("spectral_modes", v); },
       [](const S& s) { return std::to_string(s.spectral_modes); }},
      {"spectral_tol", [](S& s, const std::string& v) { s.spectral_tol = parse_double("spectral_tol", v); },
       [](const S& s) { return num(s.spectral_tol); }},
      {"box_M", [](S& s, const std::string& v) { s.box_M = v == "auto" ? 0 : parse_int<int>("box_M", v); },
       [](const S& s) { return s.box_M == 0 ? std::string("auto") : std::to_string(s.box_M); }},
      {"initial_code", [](S& s, const std::string& v) { s.initial_code = parse_int<std::uint64_t>("initial_code", v); },
       [](const S& s) { return std::to_string(s.initial_code); }},
      {"tv_tol", [](S& s, const std::string& v) { s.tv_tol = parse_double("tv_tol", v); },
       [](const S& s) { return num(s.tv_tol); }},
      {"max_error", [](S& s, const std::string& v) { s.max_error = parse_double("max_error", v); },
       [](const S& s) { return num(s.max_error); }},
      {"compare_tol", [](S& s, const std::string& v) { s.compare_tol = parse_double("compare_tol", v); },
       [](const S& s) { return num(s.compare_tol); }},
      {"assert_monotone", [](S& s, const std::string& v) { s.assert_monotone = parse_bool("assert_monotone", v); },
       [](const S& s) { return std::string(s.assert_monotone ? "on" : "off"); }},
      {"out", [](S& s, const std::string& v) { s.out_dir = v; }, [](const S& s) { return s.out_dir; }},
  };
  return table;
}

const Field& field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return f;
  throw std::invalid_argument("unknown spec key '" + key + "'");
}

std::pair<std::string, std::string> split_assignment(const std::string& line) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("spec line without '=': '" + line + "'");
  return {trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

std::string header(const ExperimentReport& rep, const ExperimentSpec& spec) {
  return "# bdcp " + to_string(spec.kind) + " spec_hash=" + hex64(rep.hash) + " seed=" + std::to_string(spec.seed) +
         "\n";
}

std::vector<TestTriple> triples(const std::vector<std::string>& names) {
  std::vector<TestTriple> out;
  for (const auto& n : names) out.push_back(parse_test_triple(n));
  return out;
}

void add_monotone(ExperimentReport& rep, const std::string& what, const std::vector<int>& Ns,
                  const std::vector<double>& means) {
  for (std::size_t k = 1; k < means.size(); ++k) {
    Assertion a;
    a.name = "decreasing " + what + " N=" + std::to_string(Ns[k - 1]) + "->" + std::to_string(Ns[k]);
    a.value = means[k];
    a.threshold = means[k - 1];
    a.passed = std::isfinite(means[k]) && means[k] < means[k - 1];
    rep.assertions.push_back(a);
  }
}

void add_bound(ExperimentReport& rep, const std::string& what, double value, double bound) {
  rep.assertions.push_back({what, std::isfinite(value) && value <= bound, value, bound});
}

PdeTrajectory pde_for(const ExperimentSpec& spec, const DensityProfile& gamma, const PdeStepObserver& obs = {}) {
  PdeOptions o;
  o.h = spec.pde_h;
  o.mode = spec.mode;
  o.snapshots = spec.snapshots;
  return solve_pde(gamma, spec.model(), 1, spec.horizon(), o, obs);
}

void run_hydro(const ExperimentSpec& spec, unsigned threads, ExperimentReport& rep) {
  const ModelParams base = spec.model();
  const DensityProfile gamma = parse_profile(spec.profile, base.b_hat);
  const auto tests = triples(spec.test_functions);
  const PdeTrajectory traj = pde_for(spec, gamma);
  const std::size_t S = spec.snapshots.size(), G = tests.size();
  std::vector<std::vector<double>> pde(S, std::vector<double>(G));
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t g = 0; g < G; ++g) pde[s][g] = pde_pairing(traj.at(spec.snapshots[s]), tests[g], spec.snapshots[s]);

  std::ostringstream csv;
  csv << header(rep, spec) << "N,t,test,mean_error,stderr,mean_pairing,pde_pairing,replicas\n";
  csv << std::setprecision(10);
  std::vector<std::vector<std::vector<double>>> means(S, std::vector<std::vector<double>>(G));
  for (int N : spec.N_grid) {
    const Geometry geo(1, N, 1, spec.mode);
    const ModelParams params = spec.model(N);
    auto runs = parallel_map(spec.replicas, threads, [&](std::size_t r) {
      RandomStream init(spec.seed, stream_key(kSample, N, r));
      Simulator sim(sample_product_measure(gamma, geo, init), params, RandomStream(spec.seed, stream_key(kDynamics, N, r)));
      std::vector<double> v(S * G);
      for (std::size_t s = 0; s < S; ++s) {
        sim.advance(spec.snapshots[s]);
        for (std::size_t g = 0; g < G; ++g) v[s * G + g] = empirical_pairing(sim.configuration(), tests[g], spec.snapshots[s]);
      }
      return v;
    });
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t g = 0; g < G; ++g) {
        std::vector<double> err, val;
        for (const auto& v : runs) {
          err.push_back(std::abs(v[s * G + g] - pde[s][g]));
          val.push_back(v[s * G + g]);
        }
        const auto [m, se] = mean_stderr(err);
        means[s][g].push_back(m);
        csv << N << ',' << spec.snapshots[s] << ",g" << g << ',' << m << ',' << se << ',' << mean_stderr(val).first
            << ',' << pde[s][g] << ',' << spec.replicas << '\n';
      }
  }
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t g = 0; g < G; ++g) {
      const std::string what = "error t=" + num(spec.snapshots[s]) + " g" + std::to_string(g);
      if (spec.assert_monotone) add_monotone(rep, what, spec.N_grid, means[s][g]);
      if (spec.max_error > 0.0)
        add_bound(rep, what + " at N=" + std::to_string(spec.N_grid.back()), means[s][g].back(), spec.max_error);
    }
  rep.files[to_string(spec.kind) + ".csv"] = csv.str();
}

void run_currents(const ExperimentSpec& spec, unsigned threads, ExperimentReport& rep) {
  const ModelParams base = spec.model();
  const DensityProfile gamma = parse_profile(spec.profile, base.b_hat);
  std::vector<VectorTestTriple> gs;
  for (const auto& n : spec.current_test_functions) gs.push_back(parse_axial_vector_triple(n));
  const auto hs = triples(spec.reaction_test_functions);
  const double T = spec.horizon();

  // Time integrals of <-grad rho, G> and <F(rho), H> along the FTCS trajectory.
  std::vector<double> wi(gs.size(), 0.0), qi(hs.size(), 0.0), wprev(gs.size()), qprev(hs.size());
  double tprev = -1.0;
  pde_for(spec, gamma, [&](const PdeState& s) {
    for (std::size_t k = 0; k < gs.size(); ++k) {
      const double v = gradient_pairing(s, gs[k], T);
      if (tprev >= 0.0) wi[k] += 0.5 * (s.t - tprev) * (v + wprev[k]);
      wprev[k] = v;
    }
    for (std::size_t k = 0; k < hs.size(); ++k) {
      const double v = reaction_pairing(s, hs[k], base, T);
      if (tprev >= 0.0) qi[k] += 0.5 * (s.t - tprev) * (v + qprev[k]);
      qprev[k] = v;
    }
    tprev = s.t;
  });

  std::ostringstream csv;
  csv << header(rep, spec) << "N,T,observable,test,mean_error,stderr,mean_value,pde_value,replicas\n";
  csv << std::setprecision(10);
  const std::size_t nw = gs.size(), nq = hs.size();
  std::vector<std::vector<double>> means(nw + nq);
  for (int N : spec.N_grid) {
    const Geometry geo(1, N, 1, spec.mode);
    const ModelParams params = spec.model(N);
    auto runs = parallel_map(spec.replicas, threads, [&](std::size_t r) {
      RandomStream init(spec.seed, stream_key(kSample, N, r));
      Simulator sim(sample_product_measure(gamma, geo, init), params, RandomStream(spec.seed, stream_key(kDynamics, N, r)));
      CurrentLedger ledger(geo);
      sim.advance(T, ledger);
      std::vector<double> v;
      for (const auto& g : gs) v.push_back(current_pairing(ledger, g, T));
      for (const auto& h : hs) v.push_back(creation_pairing(ledger, h, false, T));
      return v;
    });
    for (std::size_t k = 0; k < nw + nq; ++k) {
      const double target = k < nw ? wi[k] : qi[k - nw];
      std::vector<double> err, val;
      for (const auto& v : runs) {
        err.push_back(std::abs(v[k] - target));
        val.push_back(v[k]);
      }
      const auto [m, se] = mean_stderr(err);
      means[k].push_back(m);
      csv << N << ',' << T << ',' << (k < nw ? "W" : "Q") << ','
          << (k < nw ? "g" + std::to_string(k) : "h" + std::to_string(k - nw)) << ',' << m << ',' << se << ','
          << mean_stderr(val).first << ',' << target << ',' << spec.replicas << '\n';
    }
  }
  if (spec.assert_monotone)
    for (std::size_t k = 0; k < nw + nq; ++k)
      add_monotone(rep, k < nw ? "W error g" + std::to_string(k) : "Q error h" + std::to_string(k - nw), spec.N_grid,
                   means[k]);
  rep.files[to_string(spec.kind) + ".csv"] = csv.str();
}

void run_oracle(const ExperimentSpec& spec, unsigned threads, ExperimentReport& rep) {
  const double T = spec.horizon();
  std::ostringstream csv, summary;
  csv << header(rep, spec) << "N,state,empirical,exact\n" << std::setprecision(10);
  summary << header(rep, spec) << "N,sites,t,tv,replicas\n" << std::setprecision(10);
  for (int N : spec.N_grid) {
    const Geometry geo(spec.dim, N, spec.transverse_len, spec.mode);
    const ModelParams params = spec.model(N > 0 ? N : 1);
    const std::size_t states = std::size_t{1} << (2 * geo.site_count());
    if (spec.initial_code >= states) throw std::invalid_argument("oracle-check: initial_code out of range");
    const Configuration init = Configuration::from_code(geo, spec.initial_code);
    // Batches of replicas keep the per-task result small.
    const std::size_t batch = 4096;
    const std::size_t batches = (spec.replicas + batch - 1) / batch;
    auto counts = parallel_map(batches, threads, [&](std::size_t b) {
      std::vector<double> c(states, 0.0);
      for (std::size_t r = b * batch; r < std::min(spec.replicas, (b + 1) * batch); ++r) {
        Simulator sim(init, params, RandomStream(spec.seed, stream_key(kDynamics, N, r)));
        sim.advance(T);
        c[sim.configuration().code()] += 1.0;
      }
      return c;
    });
    std::vector<double> emp(states, 0.0);
    for (const auto& c : counts)
      for (std::size_t k = 0; k < states; ++k) emp[k] += c[k];
    for (auto& v : emp) v /= double(spec.replicas);
    std::vector<double> p0(states, 0.0);
    p0[spec.initial_code] = 1.0;
    const auto exact = transient_distribution(build_generator(geo, params), p0, T);
    for (std::size_t k = 0; k < states; ++k)
      if (emp[k] > 0.0 || exact[k] > 1e-12) csv << N << ',' << k << ',' << emp[k] << ',' << exact[k] << '\n';
    const double tv = total_variation(emp, exact);
    summary << N << ',' << geo.site_count() << ',' << T << ',' << tv << ',' << spec.replicas << '\n';
    add_bound(rep, "total variation N=" + std::to_string(N), tv, spec.tv_tol);
  }
  rep.files[to_string(spec.kind) + ".csv"] = summary.str();
  rep.files["distributions.csv"] = csv.str();
}

void run_couple(const ExperimentSpec& spec, unsigned threads, ExperimentReport& rep) {
  const ModelParams base = spec.model();
  const DensityProfile gamma = parse_profile(spec.profile, base.b_hat);
  const std::size_t S = spec.snapshots.size();
  std::vector<DecayRow> rows;
  std::vector<std::vector<double>> means(S);
  for (int N : spec.N_grid) {
    const int M = spec.box_M > 0 ? spec.box_M : default_box_M(N, 2);
    const Geometry geo = decay_geometry(N, M);
    const ModelParams params = spec.model(N);
    auto runs = parallel_map(spec.replicas, threads, [&](std::size_t r) {
      RandomStream init(spec.seed, stream_key(kSample, N, r));
      const Configuration c = sample_product_measure(gamma, geo, init);
      CoupledSimulator sim(CoupledConfiguration(c, c, M), params, RandomStream(spec.seed, stream_key(kDynamics, N, r)));
      std::vector<double> v(S);
      for (std::size_t s = 0; s < S; ++s) {
        sim.advance(spec.snapshots[s]);
        v[s] = discrepancy_total(sim.pair());
      }
      return v;
    });
    for (std::size_t s = 0; s < S; ++s) {
      std::vector<double> h;
      for (const auto& v : runs) h.push_back(v[s]);
      const auto [m, se] = mean_stderr(h);
      means[s].push_back(m);
      rows.push_back({N, M, spec.snapshots[s], m, se, spec.replicas});
    }
  }
  if (spec.assert_monotone)
    for (std::size_t s = 0; s < S; ++s) add_monotone(rep, "mean h t=" + num(spec.snapshots[s]), spec.N_grid, means[s]);
  std::ostringstream csv;
  csv << header(rep, spec);
  write_decay_csv(csv, rows);
  rep.files[to_string(spec.kind) + ".csv"] = csv.str();
}

void run_compare(const ExperimentSpec& spec, ExperimentReport& rep) {
  const ModelParams base = spec.model();
  const DensityProfile gamma = parse_profile(spec.profile, base.b_hat);
  const PdeTrajectory fd = pde_for(spec, gamma);
  SpectralOptions so;
  so.modes = spec.spectral_modes;
  so.tol = spec.spectral_tol;
  const SpectralSolution sp = duhamel_solve(gamma, base, spec.horizon(), so);

  std::ostringstream csv;
  csv << header(rep, spec) << "t,observable,sup_distance\n" << std::setprecision(10);
  for (double t : spec.snapshots) {
    const PdeState& s = fd.at(t);
    double d = 0.0;
    for (int i1 = 0; i1 < s.grid.n1; ++i1) {
      const Density v = sp.evaluate(t, s.grid.node(i1)[0]);
      for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(v[i] - s.at(i1)[i]));
    }
    csv << t << ",ftcs-vs-spectral," << d << '\n';
    add_bound(rep, "ftcs vs spectral t=" + num(t), d, spec.compare_tol);
  }

  // Pure heat flow of the first Dirichlet mode.
  ModelParams heat = base;
  heat.reaction_on = false;
  heat.b_hat = BoundaryProfile::constant({0, 0, 0});
  const double amp = 0.2;
  const auto mode1 = dirichlet_mode(1);
  const DensityProfile g1 = [&](const Point& u) { return Density{amp * mode1(u[0]), 0.0, 0.0}; };
  PdeOptions ho;
  ho.h = spec.pde_h;
  ho.snapshots = spec.snapshots;
  const PdeTrajectory ht = solve_pde(g1, heat, 1, spec.horizon(), ho);
  for (double t : spec.snapshots) {
    const PdeState& s = ht.at(t);
    double d = 0.0;
    for (int i1 = 0; i1 < s.grid.n1; ++i1)
      d = std::max(d, std::abs(s.at(i1)[0] - amp * std::exp(-mode1.alpha * t) * mode1(s.grid.node(i1)[0])));
    csv << t << ",heat-mode-decay," << d << '\n';
    add_bound(rep, "heat mode decay t=" + num(t), d, spec.compare_tol);
  }
  std::ostringstream states;
  write_pde_csv(states, {fd.states.begin(), fd.states.end()});
  rep.files[to_string(spec.kind) + ".csv"] = csv.str();
  rep.files["ftcs.csv"] = states.str();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::hydro_converge: return "hydro-converge";
    case ExperimentKind::currents_lln: return "currents-lln";
    case ExperimentKind::oracle_check: return "oracle-check";
    case ExperimentKind::couple_decay: return "couple-decay";
    case ExperimentKind::pde_compare: return "pde-compare";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::hydro_converge, ExperimentKind::currents_lln, ExperimentKind::oracle_check,
                 ExperimentKind::couple_decay, ExperimentKind::pde_compare})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

double ExperimentSpec::horizon() const {
  return snapshots.empty() ? 0.0 : *std::max_element(snapshots.begin(), snapshots.end());
}

ModelParams ExperimentSpec::model(double scale_N) const {
  ModelParams p;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.r = r;
  p.b_hat = b_left == b_right ? BoundaryProfile::constant(b_left) : BoundaryProfile::sides(b_left, b_right);
  p.scale_N = scale_N;
  p.reaction_on = reaction;
  p.exchange_on = exchange;
  p.boundary_on = boundary;
  return p;
}

ExperimentSpec parse_spec(std::istream& in) {
  ExperimentSpec spec;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto [key, value] = split_assignment(line);
    if (!seen.insert(key).second)
      throw std::invalid_argument("spec line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    field(key).set(spec, value);
  }
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spec file '" + path + "'");
  return parse_spec(in);
}

void apply_override(ExperimentSpec& spec, const std::string& assignment) {
  auto [key, value] = split_assignment(assignment);
  field(key).set(spec, value);
}

void validate(const ExperimentSpec& s) {
  auto fail = [](const std::string& m) { throw std::invalid_argument("spec: " + m); };
  if (s.replicas < 1) fail("replicas must be >= 1");
  if (s.N_grid.empty()) fail("N_grid must not be empty");
  const int min_N = s.kind == ExperimentKind::oracle_check ? 0 : 1;
  for (std::size_t k = 0; k < s.N_grid.size(); ++k) {
    if (s.N_grid[k] < min_N) fail("N_grid entries must be >= " + std::to_string(min_N));
    if (k > 0 && s.N_grid[k] <= s.N_grid[k - 1]) fail("N_grid must be strictly increasing");
  }
  if (s.snapshots.empty()) fail("snapshots must not be empty");
  for (std::size_t k = 0; k < s.snapshots.size(); ++k) {
    if (!(s.snapshots[k] > 0.0)) fail("snapshot times must be > 0");
    if (k > 0 && s.snapshots[k] <= s.snapshots[k - 1]) fail("snapshots must be strictly increasing");
  }
  if (s.dim != 1 && s.dim != 2) fail("dim must be 1 or 2");
  if (s.transverse_len < 1 || (s.dim == 1 && s.transverse_len != 1)) fail("transverse_len must be 1 in d = 1");
  if (!in_simplex(s.b_left) || !in_simplex(s.b_right)) fail("b_hat outside the simplex");
  if (s.lambda1 < 0 || s.lambda2 < 0 || s.r < 0) fail("rates must be >= 0");
  if (!(s.pde_h > 0.0)) fail("pde_h must be > 0");
  if (s.box_M < 0) fail("box_M must be auto or >= 1");
  switch (s.kind) {
    case ExperimentKind::hydro_converge:
      if (s.test_functions.empty()) fail("test_functions must not be empty");
      [[fallthrough]];
    case ExperimentKind::currents_lln:
      if (s.dim != 1) fail(to_string(s.kind) + " runs in d = 1");
      if (s.kind == ExperimentKind::currents_lln &&
          s.current_test_functions.empty() && s.reaction_test_functions.empty())
        fail("currents-lln needs current or reaction test functions");
      break;
    case ExperimentKind::oracle_check:
      for (int N : s.N_grid)
        if (Geometry(s.dim, N, s.transverse_len, s.mode).site_count() > kMaxGeneratorSites)
          fail("oracle-check lattice too large for the exact generator");
      break;
    case ExperimentKind::couple_decay:
      if (s.dim != 2) fail("couple-decay uses the transverse box and needs dim = 2");
      if (s.mode != BoundaryMode::reservoirs) fail("couple-decay runs in strip mode");
      break;
    case ExperimentKind::pde_compare:
      if (s.dim != 1 || s.mode != BoundaryMode::reservoirs || !s.boundary || !s.exchange)
        fail("pde-compare needs d = 1, strip mode, boundary and exchange on");
      if (s.spectral_modes < 1) fail("spectral_modes must be >= 1");
      break;
  }
}

std::string canonical_text(const ExperimentSpec& spec) {
  std::string out;
  for (const auto& f : fields())
    if (f.get) out += std::string(f.key) + " = " + f.get(spec) + "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t spec_hash(const ExperimentSpec& spec) { return fnv1a64(canonical_text(spec)); }

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

bool ExperimentReport::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

std::pair<double, double> mean_stderr(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  double m = 0.0;
  for (double x : v) m += x;
  m /= double(v.size());
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / double(v.size() - 1) / double(v.size()))};
}

ExperimentReport run_experiment(const ExperimentSpec& spec, unsigned threads) {
  validate(spec);
  ExperimentReport rep;
  rep.kind = spec.kind;
  rep.spec_text = canonical_text(spec);
  rep.hash = fnv1a64(rep.spec_text);
  threads = std::max(1u, threads);
  switch (spec.kind) {
    case ExperimentKind::hydro_converge: run_hydro(spec, threads, rep); break;
    case ExperimentKind::currents_lln: run_currents(spec, threads, rep); break;
    case ExperimentKind::oracle_check: run_oracle(spec, threads, rep); break;
    case ExperimentKind::couple_decay: run_couple(spec, threads, rep); break;
    case ExperimentKind::pde_compare: run_compare(spec, rep); break;
  }
  std::ostringstream a;
  a << "# bdcp " << to_string(spec.kind) << " spec_hash=" << hex64(rep.hash) << " seed=" << spec.seed << '\n'
    << "assertion,passed,value,threshold\n"
    << std::setprecision(10);
  for (const auto& x : rep.assertions)
    a << '"' << x.name << "\"," << (x.passed ? 1 : 0) << ',' << x.value << ',' << x.threshold << '\n';
  rep.files["assertions.csv"] = a.str();
  rep.files["spec.txt"] = "# spec_hash=" + hex64(rep.hash) + "\n" + rep.spec_text;
  return rep;
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, body] : report.files) {
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + name + " under " + dir);
    out << body;
  }
}

}  // namespace bdcp
