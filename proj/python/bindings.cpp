#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bdcp/coupling.hpp"
#include "bdcp/currents.hpp"
#include "bdcp/engine.hpp"
#include "bdcp/experiment.hpp"
#include "bdcp/generator.hpp"
#include "bdcp/measures.hpp"
#include "bdcp/pde.hpp"
#include "bdcp/rates.hpp"
#include "bdcp/spectral.hpp"
#include "bdcp/testfn.hpp"

namespace py = pybind11;
using namespace bdcp;

namespace {

ModelParams make_params(double lambda1, double lambda2, double r, const Density& b_left,
                        std::optional<Density> b_right, double scale_N, bool reaction, bool exchange, bool boundary) {
  ModelParams p;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.r = r;
  p.b_hat = b_right && *b_right != b_left ? BoundaryProfile::sides(b_left, *b_right) : BoundaryProfile::constant(b_left);
  p.scale_N = scale_N;
  p.reaction_on = reaction;
  p.exchange_on = exchange;
  p.boundary_on = boundary;
  validate(p);
  return p;
}

py::array_t<std::uint8_t> states_array(const Configuration& c) {
  const auto s = c.states();
  return py::array_t<std::uint8_t>(static_cast<py::ssize_t>(s.size()), s.data());
}

Configuration config_from(const Geometry& g, py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> a) {
  if (static_cast<std::size_t>(a.size()) != g.site_count())
    throw std::invalid_argument("expected one state per site");
  for (py::ssize_t i = 0; i < a.size(); ++i)
    if (a.data()[i] > 3) throw std::invalid_argument("states must be in 0..3");
  return Configuration::from_states(g, std::span<const State>(a.data(), static_cast<std::size_t>(a.size())));
}

py::list moves_list(const JointMoves<>& moves) {
  py::list out;
  for (const auto& m : moves) {
    py::dict d;
    d["kind"] = to_string(m.kind);
    d["site"] = m.site;
    d["other"] = m.other;
    d["moves_left"] = m.moves_left;
    d["moves_right"] = m.moves_right;
    d["left_to"] = int(m.left_to);
    d["right_to"] = int(m.right_to);
    d["rate"] = m.rate;
    out.append(d);
  }
  return out;
}

py::dict report_dict(const ExperimentReport& rep) {
  py::dict d;
  d["kind"] = to_string(rep.kind);
  d["spec_hash"] = hex64(rep.hash);
  d["spec"] = rep.spec_text;
  d["files"] = rep.files;
  py::list a;
  for (const auto& x : rep.assertions)
    a.append(py::dict(py::arg("name") = x.name, py::arg("passed") = x.passed, py::arg("value") = x.value,
                      py::arg("threshold") = x.threshold));
  d["assertions"] = a;
  d["passed"] = rep.passed();
  return d;
}

ExperimentSpec spec_from(const std::string& text, const std::map<std::string, std::string>& overrides) {
  std::istringstream in(text);
  ExperimentSpec s = parse_spec(in);
  for (const auto& [k, v] : overrides) apply_override(s, k + "=" + v);
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-type contact process with reservoirs: simulation, currents, PDE solvers, coupling.";

  py::enum_<BoundaryMode>(m, "BoundaryMode")
      .value("reservoirs", BoundaryMode::reservoirs)
      .value("torus", BoundaryMode::torus);

  py::class_<Geometry>(m, "Geometry")
      .def(py::init<int, int, int, BoundaryMode>(), py::arg("dim"), py::arg("N"), py::arg("transverse_len") = 1,
           py::arg("mode") = BoundaryMode::reservoirs)
      .def_property_readonly("dim", &Geometry::dim)
      .def_property_readonly("N", &Geometry::half_width)
      .def_property_readonly("transverse_len", &Geometry::transverse_len)
      .def_property_readonly("sites", &Geometry::site_count)
      .def_property_readonly("bonds", [](const Geometry& g) { return g.bonds().size(); })
      .def("index", &Geometry::index, py::arg("x1"), py::arg("x2") = 0)
      .def("coords", [](const Geometry& g, SiteIndex s) { return std::make_pair(g.coords(s).x1, g.coords(s).x2); })
      .def("is_boundary", &Geometry::is_boundary)
      .def("macro", &Geometry::macro)
      .def("neighbors", [](const Geometry& g, SiteIndex s) {
        auto n = g.neighbors(s);
        return std::vector<SiteIndex>(n.begin(), n.end());
      });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init(&make_params), py::arg("lambda1") = 2.0, py::arg("lambda2") = 1.0, py::arg("r") = 0.5,
           py::arg("b_left") = Density{0.3, 0.2, 0.1}, py::arg("b_right") = std::nullopt, py::arg("scale_N") = 1.0,
           py::arg("reaction") = true, py::arg("exchange") = true, py::arg("boundary") = true)
      .def_readwrite("lambda1", &ModelParams::lambda1)
      .def_readwrite("lambda2", &ModelParams::lambda2)
      .def_readwrite("r", &ModelParams::r)
      .def_readwrite("scale_N", &ModelParams::scale_N)
      .def_readwrite("reaction_on", &ModelParams::reaction_on)
      .def_readwrite("exchange_on", &ModelParams::exchange_on)
      .def_readwrite("boundary_on", &ModelParams::boundary_on)
      .def("b_hat", [](const ModelParams& p, int side) { return p.b_hat(side); });

  m.def("philox_u64",
        [](std::uint64_t seed, std::uint64_t replica, std::size_t n) {
          RandomStream s(seed, replica);
          py::array_t<std::uint64_t> out(static_cast<py::ssize_t>(n));
          for (std::size_t i = 0; i < n; ++i) out.mutable_data()[i] = s.next_u64();
          return out;
        },
        py::arg("seed"), py::arg("replica"), py::arg("n"), "Raw Philox4x64-10 output for key (seed, replica).");

  m.def("reaction_rates",
        [](const Geometry& g, py::array_t<std::uint8_t> states, SiteIndex x, const ModelParams& p) {
          return reaction_rates(config_from(g, states), x, p);
        });
  m.def("boundary_rates",
        [](const Geometry& g, py::array_t<std::uint8_t> states, SiteIndex x, const ModelParams& p) {
          return boundary_rates(config_from(g, states), x, p);
        });

  m.def("sample_product_measure",
        [](const Geometry& g, const std::string& profile, const ModelParams& p, std::uint64_t seed,
           std::uint64_t replica) {
          RandomStream rng(seed, replica);
          return states_array(sample_product_measure(parse_profile(profile, p.b_hat), g, rng));
        },
        py::arg("geometry"), py::arg("profile"), py::arg("params"), py::arg("seed"), py::arg("replica") = 0);

  m.def("simulate",
        [](const Geometry& g, py::array_t<std::uint8_t> states, const ModelParams& p, double t_end, std::uint64_t seed,
           std::uint64_t replica) {
          const Configuration init = config_from(g, states);
          EventCounter count;
          CurrentLedger ledger(g);
          Configuration out = [&] {
            py::gil_scoped_release nogil;
            return simulate(init, p, t_end, seed, replica, count, ledger);
          }();
          py::dict d;
          d["states"] = states_array(out);
          d["events"] = count.by_kind;
          d["continuity_defect"] = ledger.continuity_defect(init, out);
          d["code"] = out.size() <= 31 ? py::int_(out.code()) : py::int_(-1);
          return d;
        },
        py::arg("geometry"), py::arg("states"), py::arg("params"), py::arg("t_end"), py::arg("seed"),
        py::arg("replica") = 0);

  m.def("transient_distribution",
        [](const Geometry& g, const ModelParams& p, std::uint64_t init_code, double t) {
          const auto gen = build_generator(g, p);
          std::vector<double> p0(gen.dimension(), 0.0);
          if (init_code >= p0.size()) throw std::invalid_argument("init_code out of range");
          p0[init_code] = 1.0;
          const auto v = transient_distribution(gen, p0, t);
          return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
        },
        py::arg("geometry"), py::arg("params"), py::arg("init_code"), py::arg("t"));

  m.def("reaction_F", &reaction_F, py::arg("rho"), py::arg("params"), py::arg("dim") = 1);

  m.def("solve_pde",
        [](const std::string& profile, const ModelParams& p, double T, double h, std::vector<double> snapshots,
           BoundaryMode mode) {
          PdeOptions o;
          o.h = h;
          o.mode = mode;
          o.snapshots = std::move(snapshots);
          const auto traj = solve_pde(parse_profile(profile, p.b_hat), p, 1, T, o);
          const auto& g = traj.states.front().grid;
          py::array_t<double> u(g.n1);
          for (int i = 0; i < g.n1; ++i) u.mutable_data()[i] = g.node(i)[0];
          py::array_t<double> rho({static_cast<py::ssize_t>(traj.states.size()), py::ssize_t(g.n1), py::ssize_t(3)});
          std::vector<double> times;
          auto r = rho.mutable_unchecked<3>();
          for (std::size_t k = 0; k < traj.states.size(); ++k) {
            times.push_back(traj.states[k].t);
            for (int i = 0; i < g.n1; ++i)
              for (int j = 0; j < 3; ++j) r(k, i, j) = traj.states[k].at(i)[j];
          }
          py::dict d;
          d["t"] = times;
          d["u"] = u;
          d["rho"] = rho;
          d["steps"] = traj.steps;
          d["warnings"] = traj.warnings;
          return d;
        },
        py::arg("profile"), py::arg("params"), py::arg("T"), py::arg("h") = 1.0 / 64,
        py::arg("snapshots") = std::vector<double>{}, py::arg("mode") = BoundaryMode::reservoirs);

  m.def("spectral_solve",
        [](const std::string& profile, const ModelParams& p, double T, std::vector<double> times,
           std::vector<double> u, int modes, double tol) {
          SpectralOptions o;
          o.modes = modes;
          o.tol = tol;
          const auto sol = duhamel_solve(parse_profile(profile, p.b_hat), p, T, o);
          py::array_t<double> rho({py::ssize_t(times.size()), py::ssize_t(u.size()), py::ssize_t(3)});
          auto r = rho.mutable_unchecked<3>();
          for (std::size_t k = 0; k < times.size(); ++k)
            for (std::size_t i = 0; i < u.size(); ++i) {
              const Density v = sol.evaluate(times[k], u[i]);
              for (int j = 0; j < 3; ++j) r(k, i, j) = v[j];
            }
          return rho;
        },
        py::arg("profile"), py::arg("params"), py::arg("T"), py::arg("times"), py::arg("u"), py::arg("modes") = 64,
        py::arg("tol") = 1e-7);

  m.def("default_box_M", &default_box_M);
  m.def("coupled_reaction_rates",
        [](const Geometry& g, py::array_t<std::uint8_t> left, py::array_t<std::uint8_t> right, int M, SiteIndex x,
           const ModelParams& p) {
          return moves_list(coupled_reaction_rates(CoupledConfiguration(config_from(g, left), config_from(g, right), M), x, p));
        });
  m.def("discrepancy_h",
        [](const Geometry& g, py::array_t<std::uint8_t> left, py::array_t<std::uint8_t> right, int M, int i) {
          return discrepancy_h(CoupledConfiguration(config_from(g, left), config_from(g, right), M), i);
        });
  m.def("simulate_coupled",
        [](const Geometry& g, py::array_t<std::uint8_t> left, py::array_t<std::uint8_t> right, int M,
           const ModelParams& p, double t_end, std::uint64_t seed, std::uint64_t replica) {
          CoupledConfiguration pair(config_from(g, left), config_from(g, right), M);
          auto out = [&] {
            py::gil_scoped_release nogil;
            return simulate_coupled(std::move(pair), p, t_end, seed, replica);
          }();
          return py::make_tuple(states_array(out.left), states_array(out.right), discrepancy_total(out));
        });

  m.def("canonical_spec",
        [](const std::string& text, const std::map<std::string, std::string>& overrides) {
          return canonical_text(spec_from(text, overrides));
        },
        py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{});
  m.def("run_experiment",
        [](const std::string& text, const std::map<std::string, std::string>& overrides, unsigned threads) {
          const ExperimentSpec s = spec_from(text, overrides);
          ExperimentReport rep;
          {
            py::gil_scoped_release nogil;
            rep = run_experiment(s, threads);
          }
          return report_dict(rep);
        },
        py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{}, py::arg("threads") = 1);
}
