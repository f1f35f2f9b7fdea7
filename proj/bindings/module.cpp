#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>

#include "hidden/binning.hpp"
#include "hidden/predict.hpp"
#include "hidden/runner.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_hidden_events, m) {
  m.doc() = "Hidden-event estimation from right-truncated observation data";

  m.def(
      "run",
      [](const std::string& command, const std::string& config_json, const std::string& out_dir) {
        const nlohmann::json config = nlohmann::json::parse(config_json);
        return hidden::run_command(command, config, out_dir).dump();
      },
      py::arg("command"), py::arg("config_json"), py::arg("out_dir") = "out",
      "Run one subcommand with a JSON config string; returns the JSON summary.");

  m.def(
      "kaplan_meier",
      [](const std::map<int, long>& delays) { return hidden::kaplan_meier(delays); },
      py::arg("delay_counts"), "Kaplan-Meier survival per delay from a delay multiset.");

  m.def(
      "propose_bins",
      [](const std::map<int, long>& delays) {
        return hidden::propose_bins(hidden::hazard_table(delays)).starts;
      },
      py::arg("delay_counts"), "Delay-bin boundaries proposed from observed delays.");

  m.def("percentage_error", &hidden::percentage_error, py::arg("predicted"), py::arg("actual"));
}
