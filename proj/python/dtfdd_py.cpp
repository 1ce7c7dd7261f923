#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dtfdd/action_space.hpp"
#include "dtfdd/baselines.hpp"
#include "dtfdd/channel.hpp"
#include "dtfdd/config.hpp"
#include "dtfdd/federation.hpp"
#include "dtfdd/metrics.hpp"
#include "dtfdd/training.hpp"

namespace py = pybind11;
using namespace dtfdd;

namespace {

py::dict metrics_dict(const EpochMetrics& m) {
  py::dict d;
  d["epoch"] = m.epoch;
  d["sum_reward"] = m.sum_reward;
  d["qos_probability"] = m.qos_probability;
  d["drop_ratio_gue"] = m.drop_ratio_gue;
  d["drop_ratio_uav"] = m.drop_ratio_uav;
  d["subchannel_share_gue"] = m.subchannel_share_gue;
  d["subchannel_share_uav"] = m.subchannel_share_uav;
  d["dl_fraction"] = m.dl_fraction;
  return d;
}

}  // namespace

PYBIND11_MODULE(_dtfdd, m) {
  m.doc() = "Federated Wolpertinger DDPG for multi-cell D-TFDD resource allocation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.attr("NO_UE") = kNoUe;
  m.def("count_subchannel_assignments", &count_subchannel_assignments, py::arg("n"), py::arg("u"));
  m.def("action_space_size", &action_space_size, py::arg("n"), py::arg("u"), py::arg("f"));

  py::class_<FrameAction>(m, "FrameAction")
      .def(py::init<>())
      .def(py::init([](int f, std::vector<int> dl, std::vector<int> ul) {
             return FrameAction{f, std::move(dl), std::move(ul)};
           }),
           py::arg("f"), py::arg("dl"), py::arg("ul"))
      .def_readwrite("f", &FrameAction::f)
      .def_readwrite("dl", &FrameAction::dl)
      .def_readwrite("ul", &FrameAction::ul)
      .def("__eq__", [](const FrameAction& a, const FrameAction& b) { return a == b; })
      .def("__repr__", [](const FrameAction& a) {
        return "FrameAction(f=" + std::to_string(a.f) + ", dl=" + py::repr(py::cast(a.dl)).cast<std::string>() +
               ", ul=" + py::repr(py::cast(a.ul)).cast<std::string>() + ")";
      });

  py::class_<ActionSpace>(m, "ActionSpace")
      .def(py::init<std::size_t, std::size_t, std::size_t>(), py::arg("n"), py::arg("u"), py::arg("f"))
      .def("__len__", &ActionSpace::size)
      .def_property_readonly("size", &ActionSpace::size)
      .def("encode", [](const ActionSpace& s, const FrameAction& a) { return s.encode(a).value; })
      .def("decode", [](const ActionSpace& s, std::uint64_t i) { return s.decode(ActionIndex{i}); })
      .def("embed", [](const ActionSpace& s, std::uint64_t i) { return s.embed(ActionIndex{i}); })
      .def("is_valid", [](const ActionSpace& s, const FrameAction& a) { return !s.validate(a).has_value(); })
      .def("knn", [](const ActionSpace& s, const Embedding& proto, std::size_t k) {
        std::vector<std::uint64_t> out;
        for (const auto& nb : s.knn(proto, k)) out.push_back(nb.index.value);
        return out;
      }, py::arg("proto"), py::arg("k"));

  m.def("los_probability", [](double beta, double h_tx, double h_rx, double c1, double c2, double c3) {
    return los_probability(beta, h_tx, h_rx, {c1, c2, c3, 1});
  }, py::arg("beta"), py::arg("h_tx"), py::arg("h_rx"), py::arg("c1") = 0.3, py::arg("c2") = 500.0,
     py::arg("c3") = 20.0);

  m.def("metropolis_weights", [](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    BsGraph g(n);
    for (const auto& [a, b] : edges) g.add_edge(a, b);
    return metropolis_weights(g);
  }, py::arg("num_nodes"), py::arg("edges"));

  m.def("policies", [] {
    std::vector<std::string> names;
    for (PolicyKind k : all_policy_kinds()) names.emplace_back(to_string(k));
    return names;
  });

  m.def("render_config", [](const std::string& text) { return render_config(parse_config(text)); },
        py::arg("text") = "", "Parses config text (defaults fill the rest) and renders every key.");

  m.def("run", [](const std::string& config_text, const std::string& policy, std::uint64_t seed,
                  std::optional<std::size_t> epochs, std::optional<std::size_t> steps,
                  const std::function<void(py::dict)>& on_epoch) {
    ExperimentConfig cfg = parse_config(config_text);
    cfg.policy = parse_policy_kind(policy);
    cfg.seed = seed;
    if (epochs) cfg.learning.epochs = *epochs;
    if (steps) cfg.learning.steps = *steps;
    validate_config(cfg);
    TrainingHooks hooks;
    if (on_epoch) hooks.on_epoch = [&](const EpochMetrics& em) { on_epoch(metrics_dict(em)); };
    TrainingResult res;
    if (on_epoch) {
      res = run_training(cfg, hooks);
    } else {
      py::gil_scoped_release release;
      res = run_training(cfg, hooks);
    }
    py::list out;
    for (const auto& em : res.metrics) out.append(metrics_dict(em));
    return out;
  }, py::arg("config_text"), py::arg("policy") = "fwddpg", py::arg("seed") = 1,
     py::arg("epochs") = py::none(), py::arg("steps") = py::none(), py::arg("on_epoch") = nullptr,
     "Trains a policy and returns one metrics dict per epoch.");
}
