#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>

#include "seqpred/cli.hpp"
#include "seqpred/harness.hpp"
#include "seqpred/odometer.hpp"
#include "seqpred/predictor.hpp"
#include "seqpred/processes.hpp"
#include "seqpred/quantizer.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
  m.doc() = "pattern-recurrence sequential prediction core";

  py::class_<seqpred::RecurrenceTrace>(m, "RecurrenceTrace")
      .def_readonly("taus", &seqpred::RecurrenceTrace::taus)
      .def_readonly("lambdas", &seqpred::RecurrenceTrace::lambdas)
      .def_readonly("kappa", &seqpred::RecurrenceTrace::kappa)
      .def_readonly("picked_values", &seqpred::RecurrenceTrace::picked_values);

  py::class_<seqpred::Prediction>(m, "Prediction")
      .def_readonly("value", &seqpred::Prediction::value)
      .def_readonly("fallback_used", &seqpred::Prediction::fallback_used)
      .def_readonly("trace", &seqpred::Prediction::trace);

  m.def("forward_predict", [](const std::vector<double>& history) {
    return seqpred::forward_predict(history);
  });
  m.def("backward_estimate", [](const std::vector<double>& window) {
    return seqpred::backward_estimate(window);
  });

  m.def("quantize", [](double x, int level) {
    const auto q = seqpred::quantize(x, level);
    return py::make_tuple(q.level, q.index);
  });
  m.def("dequantize", [](int level, std::int64_t index) {
    return seqpred::dequantize(seqpred::QuantizedValue{level, index});
  });
  m.def("same_cell", &seqpred::same_cell);

  m.def("sample_markov_path",
        [](const std::vector<double>& state_values,
           const std::vector<std::vector<double>>& transition, std::int64_t n,
           std::uint64_t seed) {
          return seqpred::sample_path(
                     seqpred::MarkovSpec{state_values, transition}, n, seed)
              .values;
        });
  m.def("markov_limit_reference",
        [](const std::vector<double>& state_values,
           const std::vector<std::vector<double>>& transition, double p) {
          return seqpred::limit_reference(
              seqpred::MarkovSpec{state_values, transition}, p);
        });

  m.def("validate_schedule", [](const std::vector<std::int64_t>& ls) {
    seqpred::OdometerSchedule s;
    s.ls = ls;
    std::vector<std::string> messages;
    for (const auto& v : seqpred::validate_schedule(s))
      messages.push_back(v.message);
    return messages;
  });
  m.def(
      "divergence_certificate",
      [](const std::vector<std::int64_t>& ls, int k, std::uint64_t seed,
         double slack) {
        seqpred::OdometerSchedule s;
        s.ls = ls;
        const auto c = seqpred::divergence_certificate(s, k, seed, slack);
        py::dict d;
        d["k"] = c.k;
        d["a_k"] = c.a_k;
        d["l_k"] = c.l_k;
        d["seed_used"] = c.seed_used;
        d["attempts"] = c.attempts;
        d["i0"] = c.i0;
        d["special_time"] = c.special_time;
        d["window_conditional"] = c.window_conditional;
        d["window_closed_form"] = c.window_closed_form;
        d["full_past_value"] = c.full_past_value;
        d["cesaro_value"] = c.cesaro_value;
        d["bound"] = c.bound;
        d["slack"] = c.slack;
        d["pass"] = c.pass;
        return d;
      },
      py::arg("ls"), py::arg("k"), py::arg("seed") = 1,
      py::arg("slack") = 0.1);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    const int code = seqpred::run(args);
    std::cout.flush();
    return code;
  });
}
