#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "recall_dyn/config.hpp"
#include "recall_dyn/dynamics.hpp"
#include "recall_dyn/errors.hpp"
#include "recall_dyn/hopf.hpp"
#include "recall_dyn/learning.hpp"
#include "recall_dyn/model.hpp"
#include "recall_dyn/softmax.hpp"
#include "recall_dyn/spectral.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace recall_dyn;

namespace {

std::vector<Pattern> to_patterns(const std::vector<std::vector<int>>& raw) {
  std::vector<Pattern> out;
  for (const auto& p : raw) out.push_back(Pattern{p});
  return out;
}

py::dict state_dict(const StateVector& x) { return py::dict("s"_a = x.s, "a"_a = x.a); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Free-recall attractor network: model, spectra, Hopf coefficient, dynamics";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidStateError>(m, "InvalidStateError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<StructureError>(m, "StructureError", base.ptr());
  py::register_exception<UnsupportedRuleError>(m, "UnsupportedRuleError", base.ptr());
  py::register_exception<DegenerateSpectrumError>(m, "DegenerateSpectrumError", base.ptr());
  py::register_exception<NotAtHopfError>(m, "NotAtHopfError", base.ptr());
  py::register_exception<DegeneracyError>(m, "DegeneracyError", base.ptr());
  py::register_exception<ResonanceError>(m, "ResonanceError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<RenormalizationError>(m, "RenormalizationError", base.ptr());

  py::class_<NetworkConfig>(m, "NetworkConfig")
      .def(py::init([](int n, int mm, double alpha, double g_bar_a) {
             NetworkConfig c{n, mm, alpha, g_bar_a};
             c.validate();
             return c;
           }),
           "n"_a, "m"_a, "alpha"_a, "g_bar_a"_a)
      .def_readonly("n", &NetworkConfig::n)
      .def_readonly("m", &NetworkConfig::m)
      .def_readonly("alpha", &NetworkConfig::alpha)
      .def_readonly("g_bar_a", &NetworkConfig::g_bar_a)
      .def_property_readonly("critical_mu1", &NetworkConfig::critical_mu1)
      .def("__repr__", [](const NetworkConfig& c) {
        return "NetworkConfig(n=" + std::to_string(c.n) + ", m=" + std::to_string(c.m) +
               ", alpha=" + std::to_string(c.alpha) + ", g_bar_a=" + std::to_string(c.g_bar_a) + ")";
      });

  py::class_<WeightMatrix>(m, "WeightMatrix")
      .def(py::init<int, int, Eigen::MatrixXd>(), "n"_a, "m"_a, "entries"_a)
      .def_property_readonly("n", &WeightMatrix::n)
      .def_property_readonly("m", &WeightMatrix::m)
      .def_property_readonly("entries", &WeightMatrix::entries)
      .def("scaled", &WeightMatrix::scaled, "factor"_a);

  m.def("softmax_output", &softmax_output, "s"_a, "cfg"_a);
  m.def("lambda_matrix", &lambda_matrix, "cfg"_a);

  m.def(
      "learn_weights",
      [](const std::vector<std::vector<int>>& patterns, double mu1, const NetworkConfig& cfg,
         bool two_minicolumn) {
        LearningSpec spec{to_patterns(patterns), mu1, cfg.n, cfg.m,
                          two_minicolumn ? LearningRule::two_minicolumn : LearningRule::standard};
        return learn_weights(spec, cfg);
      },
      "patterns"_a, "mu1"_a, "cfg"_a, "two_minicolumn"_a = false);

  m.def(
      "validate_assumptions",
      [](const WeightMatrix& W) {
        const auto r = validate_assumptions(W);
        return py::dict("symmetric"_a = r.symmetric, "constant_block_rows"_a = r.constant_block_rows,
                        "symmetric_row_sums"_a = r.symmetric_row_sums, "all_pass"_a = r.all_pass());
      },
      "W"_a);

  m.def(
      "trivial_equilibrium",
      [](const WeightMatrix& W, const NetworkConfig& cfg) { return state_dict(trivial_equilibrium(W, cfg)); },
      "W"_a, "cfg"_a);

  m.def(
      "rhs",
      [](const Eigen::VectorXd& s, const Eigen::VectorXd& a, const WeightMatrix& W, const NetworkConfig& cfg) {
        return state_dict(rhs_original(StateVector(s, a), W, cfg));
      },
      "s"_a, "a"_a, "W"_a, "cfg"_a);

  m.def(
      "spectrum",
      [](const WeightMatrix& W, const NetworkConfig& cfg) {
        const auto r = lemma2_basis(W, cfg);
        return py::dict("mu"_a = r.mu, "nu"_a = r.nu, "P"_a = r.P, "p1"_a = r.p1,
                        "mu1_simple"_a = r.mu1_simple, "max_real_part"_a = r.max_real_part);
      },
      "W"_a, "cfg"_a);

  m.def("h_matrix", &h_matrix, "W"_a, "cfg"_a);

  m.def(
      "classify_regime",
      [](const WeightMatrix& W, const NetworkConfig& cfg) {
        const auto r = classify_regime(W, cfg);
        py::list conditions;
        for (const auto& c : r.conditions) conditions.append(py::make_tuple(c.name, c.pass, c.margin));
        return py::dict("regime"_a = to_string(r.regime), "conditions"_a = conditions,
                        "unique_equilibrium"_a = r.unique_equilibrium);
      },
      "W"_a, "cfg"_a);

  m.def(
      "hopf_report",
      [](const WeightMatrix& W, const NetworkConfig& cfg) {
        const auto r = hopf_report(W, cfg);
        return py::dict("lambda0_abs"_a = r.lambda0_abs, "I1"_a = r.I1, "I2"_a = r.I2, "I3"_a = r.I3,
                        "total"_a = r.total, "numeric_total"_a = r.numeric_total,
                        "agreement"_a = r.agreement, "verdict"_a = to_string(r.verdict),
                        "case"_a = r.case_used);
      },
      "W"_a, "cfg"_a);

  m.def(
      "integrate",
      [](const Eigen::VectorXd& s0, const Eigen::VectorXd& a0, const WeightMatrix& W, const NetworkConfig& cfg,
         double t_end, double dt, int record_stride) {
        const auto traj = integrate(StateVector(s0, a0), W, cfg, IntegratorSpec{dt, t_end, record_stride});
        const auto u = cfg.units();
        Eigen::MatrixXd S(traj.size(), u), A(traj.size(), u), O(traj.size(), u);
        for (std::size_t k = 0; k < traj.size(); ++k) {
          S.row(k) = traj.states[k].s.transpose();
          A.row(k) = traj.states[k].a.transpose();
          O.row(k) = traj.output(k, cfg).transpose();
        }
        return py::dict("t"_a = traj.times, "s"_a = S, "a"_a = A, "o"_a = O, "warnings"_a = traj.warnings);
      },
      "s0"_a, "a0"_a, "W"_a, "cfg"_a, "t_end"_a, "dt"_a = 0.01, "record_stride"_a = 1);

  m.def(
      "find_equilibria",
      [](const WeightMatrix& W, const NetworkConfig& cfg, int n_starts, std::uint64_t seed,
         const std::vector<std::vector<int>>& patterns) {
        py::list out;
        for (const auto& e : find_equilibria(W, cfg, n_starts, seed, to_patterns(patterns))) {
          out.append(py::dict("s"_a = e.state.s, "a"_a = e.state.a, "residual"_a = e.residual,
                              "stable"_a = e.stable, "trivial"_a = e.trivial,
                              "max_real_part"_a = e.max_real_part));
        }
        return out;
      },
      "W"_a, "cfg"_a, "n_starts"_a = 20, "seed"_a = 1, "patterns"_a = std::vector<std::vector<int>>{});

  m.def(
      "lyapunov_linear",
      [](const Eigen::MatrixXd& A, double t_total, double dt, double renorm_interval) {
        LyapunovOptions o;
        o.t_total = t_total;
        o.dt = dt;
        o.renorm_interval = renorm_interval;
        return lyapunov_spectrum_linear(A, Eigen::VectorXd::Zero(A.rows()), o).exponents;
      },
      "A"_a, "t_total"_a = 200.0, "dt"_a = 0.01, "renorm_interval"_a = 1.0);
}
