#include "rdro/driver.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using rdro::driver::json;

namespace {

// (exit code, report as JSON text)
std::pair<int, std::string> run(const std::string& command, const std::string& spec, std::optional<double> feas_tol,
                                std::optional<double> opt_tol, std::optional<std::uint64_t> seed,
                                std::optional<double> grid_res, const std::string& mode, const std::string& suite) {
  rdro::driver::Options o;
  o.feas_tol = feas_tol;
  o.opt_tol = opt_tol;
  o.seed = seed;
  o.grid_res = grid_res;
  o.mode = mode;
  o.suite = suite;
  json j;
  try {
    j = json::parse(spec);
  } catch (const json::parse_error& e) {
    json err = {{"command", command}, {"error", {{"kind", "SchemaError"}, {"message", std::string("/: ") + e.what()}}}};
    return {rdro::driver::kSchema, rdro::io::dump(err)};
  }
  rdro::driver::Outcome out;
  {
    py::gil_scoped_release nogil;
    out = rdro::driver::run(command, j, o);
  }
  return {out.code, rdro::io::dump(out.report)};
}

}  // namespace

PYBIND11_MODULE(_rdro, m) {
  m.doc() = "robust and distributionally robust reformulations";
  m.def("run", &run, py::arg("command"), py::arg("spec"), py::arg("feas_tol") = py::none(),
        py::arg("opt_tol") = py::none(), py::arg("seed") = py::none(), py::arg("grid_res") = py::none(),
        py::arg("mode") = "", py::arg("suite") = "");
  m.attr("SCHEMA_VERSION") = rdro::io::kSchemaVersion;
}
