#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "selfsim/chain.hpp"
#include "selfsim/exact_dp.hpp"
#include "selfsim/kernels.hpp"
#include "selfsim/limit_process.hpp"
#include "selfsim/measures.hpp"
#include "selfsim/stats.hpp"

namespace py = pybind11;
using namespace selfsim;

PYBIND11_MODULE(_selfsim, m) {
  m.doc() = "Non-increasing Markov chains, absorption times and their self-similar limits";

  py::register_exception<Error>(m, "SelfsimError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  m.def("bracket", &bracket, py::arg("lam"), py::arg("x"));

  py::class_<FiniteMeasure>(m, "FiniteMeasure")
      .def_static("atom", &FiniteMeasure::atom, py::arg("mass"), py::arg("x"))
      .def_static("beta_density", &FiniteMeasure::beta_density, py::arg("a"), py::arg("b"),
                  py::arg("scale") = 1.0)
      .def_static("barrier", &FiniteMeasure::barrier, py::arg("gamma"))
      .def_static("lebesgue", &FiniteMeasure::lebesgue, py::arg("scale") = 1.0)
      .def("__add__", &FiniteMeasure::operator+)
      .def("scaled", &FiniteMeasure::scaled)
      .def("total_mass", &FiniteMeasure::total_mass)
      .def_property_readonly("atom0", &FiniteMeasure::atom0)
      .def_property_readonly("atom1", &FiniteMeasure::atom1)
      .def("integrate", [](const FiniteMeasure& mu, const std::function<double(double)>& f) {
        return integrate(mu, f).value;
      });

  m.def("laplace_exponent", py::overload_cast<const FiniteMeasure&, double>(&laplace_exponent),
        py::arg("mu"), py::arg("lam"));

  py::class_<LevyMeasure>(m, "LevyMeasure")
      .def_static("from_measure", &LevyMeasure::from_measure)
      .def_static("atom", &LevyMeasure::atom, py::arg("rate"), py::arg("y0"))
      .def("density", &LevyMeasure::density)
      .def("tail", &LevyMeasure::tail);

  py::class_<LevyTriple>(m, "LevyTriple")
      .def(py::init([](double k, double d, const LevyMeasure& w) { return LevyTriple{k, d, w}; }),
           py::arg("killing"), py::arg("drift"), py::arg("levy") = LevyMeasure{})
      .def_readonly("killing", &LevyTriple::killing)
      .def_readonly("drift", &LevyTriple::drift)
      .def_readonly("levy", &LevyTriple::levy)
      .def("laplace_exponent", [](const LevyTriple& t, double l) { return laplace_exponent(t, l); });
  m.def("levy_triple", &levy_triple);

  py::class_<StepDistribution>(m, "StepDistribution")
      .def_static("finite", &StepDistribution::finite)
      .def_static("power_tail", &StepDistribution::power_tail, py::arg("gamma"))
      .def("pmf", &StepDistribution::pmf)
      .def("tail", &StepDistribution::tail);

  py::class_<Kernel, std::shared_ptr<Kernel>>(m, "Kernel")
      .def_property_readonly("id", &Kernel::id)
      .def_property_readonly("gamma", &Kernel::gamma)
      .def("scaling", &Kernel::scaling)
      .def("prob", &Kernel::prob)
      .def("row", [](const Kernel& k, std::size_t n) {
        std::vector<double> out(n + 1, 0.0);
        for (std::size_t j = 0; j <= n; ++j) out[j] = k.prob(n, j);
        return out;
      })
      .def("target_psi", &Kernel::target_psi)
      .def("absorbing", &Kernel::absorbing);

  auto unconst = [](KernelPtr k) { return std::const_pointer_cast<Kernel>(k); };
  m.def("barrier_kernel", [=](const StepDistribution& q) { return unconst(barrier_kernel(q)); });
  m.def("truncated_kernel", [=](const StepDistribution& q) { return unconst(truncated_kernel(q)); });
  m.def("ignored_jump_kernel", [=](const StepDistribution& q) { return unconst(ignored_jump_kernel(q)); });
  m.def("canonical_kernel",
        [=](const FiniteMeasure& mu, double gamma, double ell) { return unconst(canonical_kernel(mu, gamma, ell)); },
        py::arg("mu"), py::arg("gamma"), py::arg("ell") = 1.0);
  m.def("coalescent_kernel", [=](const FiniteMeasure& lam) { return unconst(coalescent_kernel(lam)); });
  m.def("composition_kernel", [=](const LevyMeasure& w) { return unconst(composition_kernel(w)); });
  m.def("collapse_absorbing",
        [=](const std::shared_ptr<Kernel>& k) { return unconst(collapse_absorbing(k)); });

  m.def("generating_function", [](const Kernel& k, std::size_t n, double l) { return generating_function(k, n, l); });

  m.def("absorption_moments", [](const Kernel& k, std::size_t n_max, std::size_t p_max) {
    return absorption_moments(k, n_max, p_max).values;
  });
  m.def("absorption_distribution", [](const Kernel& k, std::size_t n, std::size_t k_max) {
    const AbsorptionDistribution d = absorption_distribution(k, n, k_max);
    return py::make_tuple(d.pmf, d.tail);
  }, py::arg("kernel"), py::arg("n"), py::arg("k_max") = 0);
  m.def("marginal_moment", [](const Kernel& k, std::size_t n, double t, double l) {
    return marginal_moment(k, n, t, l);
  });

  m.def("sample_path", [](const Kernel& k, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    Stream rng(seed, stream);
    return sample_path(k, n, rng).states;
  }, py::arg("kernel"), py::arg("n"), py::arg("seed"), py::arg("stream") = 0);

  m.def("sample_exponential_functional",
        [](const FiniteMeasure& mu, double gamma, std::size_t count, std::uint64_t seed, double horizon) {
          const SubordinatorSampler sampler(levy_triple(mu), horizon);
          const double psi = laplace_exponent(mu, gamma);
          std::vector<double> out(count);
          for (std::size_t i = 0; i < count; ++i) {
            Stream rng(seed, i);
            out[i] = sample_limit(sampler, gamma, psi, rng).I;
          }
          return out;
        },
        py::arg("mu"), py::arg("gamma"), py::arg("count"), py::arg("seed"), py::arg("horizon") = 10.0);

  m.def("analytic_moments",
        [](const FiniteMeasure& mu, double gamma, std::size_t p_max) { return analytic_moments(mu, gamma, p_max); });

  m.def("empirical_moment", [](const std::vector<double>& xs, double p) {
    const EstimateWithError e = empirical_moment(xs, p);
    return py::make_tuple(e.value, e.se);
  }, py::arg("samples"), py::arg("p") = 1.0);
  m.def("ks_distance", [](const std::vector<double>& a, const std::vector<double>& b) { return ks_distance(a, b); });
}
