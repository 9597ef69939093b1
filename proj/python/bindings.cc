// Copyright 2026 The Proofbeam Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "proofbeam/cli.h"
#include "proofbeam/fingerprint.h"
#include "proofbeam/hints.h"
#include "proofbeam/mock_backend.h"
#include "proofbeam/planner.h"
#include "proofbeam/premises.h"
#include "proofbeam/proposer.h"
#include "proofbeam/proposer_backends.h"
#include "proofbeam/rerank.h"
#include "proofbeam/script.h"
#include "proofbeam/service.h"
#include "proofbeam/stepwise.h"

namespace py = pybind11;
using nlohmann::json;

namespace proofbeam {
namespace {

using PyProposer = std::function<std::string(const std::string&, const std::string&, double, int)>;

// Calls back into Python; the search itself runs without the GIL.
FunctionProposer::Fn wrap(PyProposer fn) {
  return [fn = std::move(fn)](const ProposerCall& c, std::size_t) {
    py::gil_scoped_acquire gil;
    return fn(c.system, c.user, c.temperature, c.n);
  };
}

SyntheticSpace space_of(const std::string& space_json) {
  return SyntheticSpace::from_json(json::parse(space_json));
}

std::string prove_json(const std::string& goal, const std::string& space_json, const std::string& config,
                       std::optional<PyProposer> proposer) {
  const SyntheticSpace space = space_of(space_json);
  MockBackend mock(space);
  Verifier verifier(mock);
  OracleProposer oracle(mock.space());
  std::optional<FunctionProposer> custom;
  if (proposer) custom.emplace(wrap(std::move(*proposer)));
  ProofResult r;
  {
    py::gil_scoped_release release;
    const SearchConfig cfg = SearchConfig::from_json(json::parse(config));
    cfg.validate();
    SearchDeps deps;
    deps.verifier = &verifier;
    deps.proposer = custom ? static_cast<ProposerBackend*>(&*custom) : &oracle;
    r = prove(goal, cfg, deps);
  }
  json out = prove_stats(r);
  out["solved"] = r.solved;
  out["script"] = r.script ? json(r.script->render()) : json(nullptr);
  out["commands"] = r.script ? json(approved_commands(*r.script)) : json::array();
  return out.dump();
}

std::string plan_json(const std::string& goal, const std::string& space_json, const std::string& config,
                      PyProposer proposer) {
  const SyntheticSpace space = space_of(space_json);
  MockBackend mock(space);
  Verifier verifier(mock);
  FunctionProposer fn(wrap(std::move(proposer)));
  PlanResult r;
  PlannerConfig cfg;
  {
    py::gil_scoped_release release;
    cfg = PlannerConfig::from_json(json::parse(config));
    cfg.validate();
    PlannerDeps deps;
    deps.verifier = &verifier;
    deps.proposer = &fn;
    r = Planner(goal, cfg, deps).run();
  }
  json out = plan_stats(r);
  out["solved"] = r.solved;
  out["script"] = r.script ? json(r.script->render()) : json(nullptr);
  out["holes_remaining"] = r.script ? find_holes(*r.script).size() : 0;
  return out.dump();
}

py::tuple cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_cli(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace
}  // namespace proofbeam

PYBIND11_MODULE(_proofbeam, m) {
  using namespace proofbeam;
  m.doc() = "Verifier-in-the-loop proof search";

  m.def("step_temperature", &step_temperature, py::arg("stagnation"));
  m.def("finish_temperature", &finish_temperature, py::arg("stagnation"));
  m.def("normalize_state", &normalize_state, py::arg("text"));
  m.def("state_fingerprint", [](const std::string& s) { return state_fingerprint(s).hex(); },
        py::arg("hint"));

  m.def("parse_script", [](const std::string& text) { return parse_script(text).lines(); },
        py::arg("text"), "Lines of a proof script.");
  m.def(
      "find_holes",
      [](const std::string& text) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const Hole& h : find_holes(parse_script(text))) out.emplace_back(h.start_line, h.end_line);
        return out;
      },
      py::arg("text"), "Line ranges [start, end) of the holes in a script.");
  m.def(
      "hole_id", [](const std::string& text, std::size_t i) {
        const ProofScript s = parse_script(text);
        return hole_id(s, find_holes(s).at(i)).hex();
      },
      py::arg("text"), py::arg("index"));

  m.def(
      "generate_space",
      [](int depth, int branching, int solutions, std::uint64_t seed) {
        return generate_space(depth, branching, solutions, seed).to_json().dump();
      },
      py::arg("depth"), py::arg("branching"), py::arg("solutions"), py::arg("seed"));

  m.def("_prove", &prove_json, py::arg("goal"), py::arg("space"), py::arg("config"),
        py::arg("proposer") = py::none());
  m.def("_plan", &plan_json, py::arg("goal"), py::arg("space"), py::arg("config"),
        py::arg("proposer"));
  m.def("_cli", &cli, py::arg("args"));

  m.def("jaccard", [](std::vector<std::string> a, std::vector<std::string> b) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return jaccard(a, b);
  });

  py::class_<PremiseIndex>(m, "PremiseIndex")
      .def(py::init<>())
      .def("add",
           [](PremiseIndex& self, const std::string& id, const std::string& text) {
             self.add({id, text, "", ""});
           },
           py::arg("id"), py::arg("text"))
      .def("finalize", &PremiseIndex::finalize)
      .def("__len__", &PremiseIndex::size)
      .def("idf", &PremiseIndex::idf, py::arg("token"))
      .def(
          "select",
          [](const PremiseIndex& self, const std::string& query, std::size_t k) {
            std::vector<std::pair<std::string, double>> out;
            for (const ScoredPremise& p : self.select(query, k)) out.emplace_back(p.id, p.select_score);
            return out;
          },
          py::arg("query"), py::arg("k"));

  m.def(
      "train_logistic",
      [](const std::vector<std::vector<double>>& xs, const std::vector<int>& ys, int epochs, double l2) {
        std::vector<Example> data;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          Example e;
          e.x = xs.at(i);
          e.y = ys.at(i);
          data.push_back(std::move(e));
        }
        TrainOptions opts;
        opts.epochs = epochs;
        opts.l2 = l2;
        const RerankModel model = train_logistic(data, opts);
        return py::make_tuple(model.weights, model.bias);
      },
      py::arg("x"), py::arg("y"), py::arg("epochs") = 300, py::arg("l2") = 1e-4,
      "Returns (weights, bias).");

  m.attr("FEATURE_DIM") = kFeatureDim;
}
