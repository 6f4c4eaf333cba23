#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cli.hpp"
#include "spotindex/catalog.hpp"
#include "spotindex/errors.hpp"
#include "spotindex/index.hpp"
#include "spotindex/prices.hpp"
#include "spotindex/report_io.hpp"
#include "spotindex/simulator.hpp"
#include "spotindex/synth.hpp"

namespace py = pybind11;
using namespace spotindex;

namespace {

JobSpec job_from_json(const std::string& text) {
  std::istringstream in(text);
  return parse_job(in, "<python job>");
}

SimConfig config_from_json(const std::string& text) {
  std::istringstream in(text);
  return parse_sim_config(in, "<python config>");
}

}  // namespace

PYBIND11_MODULE(_spotindex, m) {
  m.doc() = "Spot-price index analytics and migration policy simulation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ConflictError>(m, "ConflictError", base.ptr());
  py::register_exception<InvariantError>(m, "InvariantError", base.ptr());
  py::register_exception<OutOfRangeError>(m, "OutOfRangeError", base.ptr());
  py::register_exception<GapError>(m, "GapError", base.ptr());
  py::register_exception<PolicyError>(m, "PolicyError", base.ptr());
  py::register_exception<SimulationError>(m, "SimulationError", base.ptr());

  py::class_<VmSpec>(m, "VmSpec")
      .def_readonly("id", &VmSpec::id)
      .def_readonly("instance_type", &VmSpec::instance_type)
      .def_readonly("zone", &VmSpec::zone)
      .def_readonly("region", &VmSpec::region)
      .def_property_readonly("family", [](const VmSpec& v) { return std::string(to_string(v.family)); })
      .def_readonly("cpu_capacity", &VmSpec::cpu_capacity)
      .def_readonly("mem_capacity", &VmSpec::mem_capacity)
      .def_readonly("on_demand_price", &VmSpec::on_demand_price)
      .def("__repr__", [](const VmSpec& v) { return "<VmSpec " + v.id + ">"; });

  py::class_<Catalog>(m, "Catalog")
      .def_static("load", &load_catalog_file, py::arg("path"))
      .def("__len__", &Catalog::size)
      .def("__getitem__", [](const Catalog& c, const std::string& id) { return c.at(id); })
      .def_property_readonly("ids",
                             [](const Catalog& c) {
                               std::vector<std::string> ids;
                               for (const auto& v : c) ids.push_back(v.id);
                               return ids;
                             })
      .def(
          "candidates",
          [](const Catalog& c, double min_cpu, double min_mem, const std::string& scope) {
            return filter_candidate_ids(c, ResourceRequirement{min_cpu, min_mem}, CompositionScope::parse(scope));
          },
          py::arg("min_cpu") = 0.0, py::arg("min_mem") = 0.0, py::arg("scope") = "global");

  py::class_<PriceTrace>(m, "PriceTrace")
      .def_property_readonly("vm_id", &PriceTrace::vm_id)
      .def_property_readonly("points",
                             [](const PriceTrace& t) {
                               std::vector<std::pair<Timestamp, double>> out;
                               for (const auto& p : t.points()) out.emplace_back(p.timestamp, p.price);
                               return out;
                             })
      .def("price_at", &PriceTrace::price_at, py::arg("t"))
      .def("__len__", &PriceTrace::size);

  m.def(
      "load_traces",
      [](const std::filesystem::path& path, const Catalog& catalog, bool strict) {
        IngestOptions options;
        options.strict_unknown = strict;
        return load_traces(path, catalog, options);
      },
      py::arg("path"), py::arg("catalog"), py::arg("strict") = false);

  m.def(
      "synthesize",
      [](const std::filesystem::path& spec_path, std::uint64_t seed, double scale) {
        auto specs = load_market_specs(spec_path);
        for (auto& s : specs) s.volatility_scale *= scale;
        return generate_market_suite(specs, seed);
      },
      py::arg("spec_path"), py::arg("seed") = 0, py::arg("scale") = 1.0);

  py::class_<IndexPoint>(m, "IndexPoint")
      .def_readonly("timestamp", &IndexPoint::timestamp)
      .def_readonly("value", &IndexPoint::value)
      .def_readonly("min", &IndexPoint::min)
      .def_readonly("max", &IndexPoint::max)
      .def_readonly("n_effective", &IndexPoint::n_effective);

  py::class_<IndexSeries>(m, "IndexSeries")
      .def_readonly("composition", &IndexSeries::composition)
      .def_readonly("period", &IndexSeries::period)
      .def_readonly("samples", &IndexSeries::samples)
      .def_readonly("gaps", &IndexSeries::gaps);

  m.def(
      "index_series",
      [](const TraceSet& traces, const Catalog& catalog, const std::vector<std::string>& composition,
         Timestamp start, Timestamp end, Seconds period) {
        return index_series(traces, catalog, composition, start, end, period);
      },
      py::arg("traces"), py::arg("catalog"), py::arg("composition"), py::arg("start"), py::arg("end"),
      py::arg("period") = kDefaultIndexPeriod);
  m.def(
      "on_demand_index",
      [](const Catalog& catalog, const std::vector<std::string>& composition) {
        return on_demand_index(catalog, composition);
      },
      py::arg("catalog"), py::arg("composition"));

  m.def(
      "simulate_json",
      [](const std::string& job_json, const std::string& config_json, const TraceSet& traces,
         const Catalog& catalog) {
        const auto job = job_from_json(job_json);
        const auto config = config_from_json(config_json);
        SimReport report;
        {
          py::gil_scoped_release release;
          report = run_simulation(job, config, traces, catalog);
        }
        return report_to_json(report, job, config);
      },
      py::arg("job_json"), py::arg("config_json"), py::arg("traces"), py::arg("catalog"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        std::vector<std::string> argv{"spotindex"};
        argv.insert(argv.end(), args.begin(), args.end());
        const int code = cli::run_cli(argv, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));

  m.def("version", &tool_version);
}
