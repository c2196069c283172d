#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "certclose/cli.hpp"
#include "certclose/error.hpp"
#include "certclose/io.hpp"
#include "certclose/ntap.hpp"

namespace py = pybind11;
using namespace certclose;

// Documents go in and come out as JSON text; the package decodes them.
PYBIND11_MODULE(_core, m) {
  // Translators registered later are tried first, so the base goes first.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ModelError>(m, "ModelError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<CapExceeded>(m, "CapExceeded", base.ptr());

  m.def("run", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });

  m.def(
      "closure",
      [](const std::string& model, const std::string& kind, const std::string& form,
         std::size_t max_realisations, std::size_t max_cover) {
        auto p = io::parse_ucsp(model);
        auto c = compute_closure(p, parse_closure_kind(kind), form, {max_realisations, max_cover});
        return io::format_closure(c, io::Format::Json);
      },
      py::arg("model"), py::arg("kind") = "full", py::arg("form") = "auto",
      py::arg("max_realisations") = 1'000'000, py::arg("max_cover") = 20);

  m.def(
      "flow_bounds",
      [](const std::string& network, bool with_splitting, bool with_flow_conservation) {
        auto rep = ntap::flow_bounds(io::parse_network(network),
                                     {with_splitting, with_flow_conservation});
        return io::format_flow_report(rep, io::Format::Json);
      },
      py::arg("network"), py::arg("with_splitting") = false,
      py::arg("with_flow_conservation") = false);

  m.def(
      "data_correct",
      [](const std::string& network, double sigma2) {
        auto corr = ntap::data_correct(io::parse_network(network), sigma2);
        return io::format_correction(corr, ntap::point_bounds(corr.corrected), io::Format::Json);
      },
      py::arg("network"), py::arg("sigma2") = 10.0);

  m.def("two_sided_z", &ntap::two_sided_z, py::arg("confidence"));
}
