#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "renewal/error.hpp"
#include "renewal/forward.hpp"
#include "renewal/gap_inversion.hpp"
#include "renewal/series.hpp"
#include "renewal/simulator.hpp"
#include "renewal/size_inversion.hpp"

namespace py = pybind11;
using namespace renewal;

namespace {

SizeDistribution size_from(const std::string& kind, const std::vector<double>& params) {
  if (kind == "geometric" && params.size() == 1) return SizeDistribution(Geometric{params[0]});
  if (kind == "pareto" && params.size() == 1) return SizeDistribution(DiscretePareto{params[0]});
  if (kind == "pmf") return SizeDistribution(Pmf(1, params));
  throw Error(Errc::InvalidArgument, "size must be ('geometric', [c]), ('pareto', [alpha]) or ('pmf', [f_1, ...])");
}

std::vector<double> vec(const CoeffSeries& c) { return {c.coeffs().begin(), c.coeffs().end()}; }

std::vector<double> pmf_values(const Pmf& p) {
  std::vector<double> v;
  for (std::int64_t s = 0; s <= p.max_support(); ++s) v.push_back(p(s));
  return v;
}

py::dict decompound_dict(const DecompoundResult& r) {
  std::vector<double> t;
  for (std::size_t k = 0; k < r.estimate.size(); ++k) t.push_back(r.estimate.t(k));
  py::dict d;
  d["t"] = t;
  d["F_hat"] = r.estimate.values;
  d["A_hat"] = vec(r.mix);
  d["a_hat"] = vec(r.reverted);
  d["n_star"] = r.diag.n_star;
  d["tail_bound"] = r.diag.tail_bound;
  d["reversion_residual"] = r.diag.reversion_residual;
  d["monotonicity_violations"] = r.diag.monotonicity_violations;
  d["conditioning_records"] = r.diag.conditioning_records;
  d["warnings"] = r.diag.warnings;
  return d;
}

DecompoundConfig fd_config(const std::string& cond, std::int64_t i, std::size_t n_max, double trunc_tol,
                           double t_max, double step, std::size_t bootstrap_B) {
  DecompoundConfig cfg;
  cfg.cond = Conditioning::parse(cond);
  cfg.i = i;
  cfg.n_max = n_max;
  cfg.trunc_tol = trunc_tol;
  cfg.grid = Grid{t_max, step};
  cfg.bootstrap_B = bootstrap_B;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Thinned finite renewal processes: forward model, simulation and inversion.";

  py::register_exception<Error>(m, "RenewalError", PyExc_RuntimeError);

  py::class_<FlowRecord>(m, "FlowRecord")
      .def_readonly("sampled_count", &FlowRecord::sampled_count)
      .def_readonly("gaps", &FlowRecord::gaps);

  py::class_<SampledDataset>(m, "SampledDataset")
      .def_readonly("q", &SampledDataset::q)
      .def_readonly("seed", &SampledDataset::seed)
      .def_readonly("records", &SampledDataset::records)
      .def("__len__", &SampledDataset::size)
      .def("to_string", [](const SampledDataset& ds) { return dataset_to_string(ds); })
      .def_static("from_string", &dataset_from_string);

  m.def(
      "simulate",
      [](const std::string& size, const std::vector<double>& params, double gap_rate, double q, std::size_t n,
         std::uint64_t seed) {
        return simulate_dataset(ModelSpec{size_from(size, params), GapDistribution(Exponential{gap_rate}), q}, n,
                                seed);
      },
      py::arg("size"), py::arg("params"), py::arg("gap_rate") = 1.0, py::arg("q"), py::arg("n"),
      py::arg("seed"));
  m.def("read_dataset", &read_dataset, py::arg("path"));
  m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("path"));

  m.def(
      "sampled_size_pmf",
      [](const std::string& size, const std::vector<double>& params, double q, std::int64_t s_max) {
        return pmf_values(sampled_size_pmf(size_from(size, params), q, s_max));
      },
      py::arg("size"), py::arg("params"), py::arg("q"), py::arg("s_max"));
  m.def(
      "gap_mix_coeffs",
      [](const std::string& size, const std::vector<double>& params, double q, std::int64_t s,
         std::size_t m_max) {
        const SizeDistribution d = size_from(size, params);
        return vec(gap_mix_coeffs(d, sampled_size_pmf(d, q, std::max<std::int64_t>(s, 400)), q, s, m_max));
      },
      py::arg("size"), py::arg("params"), py::arg("q"), py::arg("s"), py::arg("m_max") = 64);

  m.def(
      "invert_S",
      [](const std::vector<double>& f_wq, double q, std::int64_t w_max) {
        return invert_S(Pmf(0, f_wq), q, w_max).values;
      },
      py::arg("f_wq"), py::arg("q"), py::arg("w_max"));
  m.def(
      "continuation_invert",
      [](const std::vector<double>& f_wq, double q, std::int64_t w_max) {
        return continuation_invert(Pmf(0, f_wq), q, build_path(q), w_max).values;
      },
      py::arg("f_wq"), py::arg("q"), py::arg("w_max"));
  m.def(
      "estimate_fw",
      [](const SampledDataset& ds, std::int64_t w_max, double alpha) {
        const FwEstimate e = estimate_fw(ds, w_max, alpha);
        std::vector<double> lo, hi;
        for (const Interval& ci : e.ci) {
          lo.push_back(ci.lo);
          hi.push_back(ci.hi);
        }
        py::dict d;
        d["f_hat"] = e.f_hat.values;
        d["R_hat"] = e.r_hat;
        d["var_hat"] = e.var_hat;
        d["ci_lo"] = lo;
        d["ci_hi"] = hi;
        return d;
      },
      py::arg("dataset"), py::arg("w_max") = 0, py::arg("alpha") = 0.9);
  m.def("bootstrap_sup_ci", &bootstrap_sup_ci, py::arg("dataset"), py::arg("l"), py::arg("B"), py::arg("alpha"),
        py::arg("seed"));
  m.def(
      "classify_regime",
      [](const std::string& size, const std::vector<double>& params, double q, std::int64_t w_max) {
        std::vector<std::int64_t> probe;
        for (std::int64_t w = 1; w <= w_max; ++w) probe.push_back(w);
        return std::string(to_string(classify_regime(size_from(size, params), q, probe).classification));
      },
      py::arg("size"), py::arg("params"), py::arg("q"), py::arg("w_max") = 10);

  m.def(
      "decompound",
      [](const SampledDataset& ds, const std::string& cond, std::int64_t i, std::size_t n_max, double trunc_tol,
         double t_max, double step) {
        const DecompoundConfig cfg = fd_config(cond, i, n_max, trunc_tol, t_max, step, 0);
        return decompound_dict(decompound(ds, ds.q, cfg));
      },
      py::arg("dataset"), py::arg("cond") = "s=2", py::arg("i") = 1, py::arg("n_max") = 64,
      py::arg("trunc_tol") = 1e-8, py::arg("t_max") = 5.0, py::arg("step") = 0.005);
  m.def(
      "bootstrap_band_FD",
      [](const SampledDataset& ds, const std::string& cond, std::size_t B, double alpha, std::uint64_t seed,
         double t_max, double step) {
        const BootstrapBand b =
            bootstrap_band_FD(ds, ds.q, fd_config(cond, 1, 64, 1e-8, t_max, step, B), alpha, seed);
        py::dict d;
        d["radius"] = b.radius;
        d["replicates"] = b.replicates;
        d["dropped"] = b.dropped;
        return d;
      },
      py::arg("dataset"), py::arg("cond") = "s=2", py::arg("B") = 999, py::arg("alpha") = 0.9,
      py::arg("seed") = 1, py::arg("t_max") = 5.0, py::arg("step") = 0.005);

  m.def(
      "revert", [](const std::vector<double>& a) { return vec(revert(CoeffSeries(a))); }, py::arg("coeffs"));
}
