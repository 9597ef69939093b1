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

#ifndef PROOFBEAM_RERANK_H_
#define PROOFBEAM_RERANK_H_

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proofbeam/datalog.h"
#include "proofbeam/premises.h"

namespace proofbeam {

inline constexpr std::size_t kFeatureDim = 32;

// Slot layout of the feature vector.
namespace slot {
inline constexpr std::size_t kDepth = 0;
inline constexpr std::size_t kSubgoals = 1;
inline constexpr std::size_t kElapsed = 2;
inline constexpr std::size_t kCacheHit = 3;
inline constexpr std::size_t kListy = 4;
inline constexpr std::size_t kNatty = 5;
inline constexpr std::size_t kSety = 6;
inline constexpr std::size_t kQuantifier = 7;
inline constexpr std::size_t kBoolean = 8;
inline constexpr std::size_t kTactic = 9;  // 12 one-hot slots
inline constexpr std::size_t kPremiseTop = 21;
inline constexpr std::size_t kPremiseMean = 22;
inline constexpr std::size_t kPremiseOverlap = 23;
inline constexpr std::size_t kPremiseCount = 24;
}  // namespace slot

inline constexpr std::array<std::string_view, 12> kTacticVocabulary = {
    "simp", "auto",      "blast", "fastforce", "force", "metis",
    "induction", "cases", "rule",  "arith",     "intro", "elim"};

using FeatureVector = std::vector<double>;

struct FeatureContext {
  int depth = 0;
  std::optional<int> subgoals;  // unknown encodes as 0
  double elapsed_s = 0.0;
  bool cache_hit = false;
  std::string goal;
  std::string state_hint;
};

struct GoalFlags {
  bool listy = false;
  bool natty = false;
  bool sety = false;
  bool quantifier = false;
  bool boolean = false;
};

GoalFlags goal_flags(std::string_view text);

// First method token of an apply/by command: `apply (induction xs)` gives
// "induction". Empty for `done`.
std::string method_token(std::string_view command);

// Vocabulary position of the method token, if any.
std::optional<std::size_t> tactic_index(std::string_view command);

FeatureVector featurize(const FeatureContext& ctx, std::string_view candidate,
                        const PremiseStats& stats = {});

enum class ModelKind { kLogistic, kLinearQ };

std::string to_string(ModelKind kind);

struct RerankModel {
  ModelKind kind = ModelKind::kLogistic;
  std::vector<double> weights = std::vector<double>(kFeatureDim, 0.0);
  double bias = 0.0;
  std::map<std::string, std::string> meta;
  // Set when training saw a single class and fell back to the prior.
  bool degenerate = false;
  double final_loss = 0.0;
};

// w.x + b. Throws DimensionMismatch.
double raw_score(const RerankModel& model, const FeatureVector& x);
// sigmoid(w.x + b), in [0, 1] for both kinds.
double predict(const RerankModel& model, const FeatureVector& x);
double sigmoid(double z);

struct Example {
  FeatureVector x;
  int y = 0;
  double weight = 1.0;
};

struct TrainOptions {
  int epochs = 300;
  double learning_rate = 1.0;
  double l2 = 1e-4;
  bool class_balance = true;
  // Receives the loss before the first epoch and after each one.
  std::vector<double>* loss_trace = nullptr;
};

// Mean weighted log-loss plus (l2 / 2) |w|^2 at params = (w, b), with the
// per-class weights of train_logistic folded in. Fills `grad` when given.
double logistic_objective(const std::vector<Example>& data, const std::vector<double>& params,
                          const TrainOptions& opts, std::vector<double>* grad = nullptr);

// Full-batch gradient descent; a step that would raise the loss is halved
// until it does not, so the loss never increases. Single-class data yields
// the Laplace-smoothed prior with `degenerate` set.
RerankModel train_logistic(const std::vector<Example>& data, const TrainOptions& opts = {});

inline constexpr double kCompletionBonus = 10.0;
inline constexpr double kAdvantageClamp = 5.0;

struct Transition {
  FeatureVector x;
  double reward = 0.0;
  bool accepted = false;
  bool terminal = false;
  int depth = 0;
  std::optional<int> subgoals_before;
  std::optional<int> subgoals_after;  // next-state subgoal count
  std::vector<std::size_t> next;      // transitions taken from the next state
};

// One transition per step or finisher attempt, in order.
std::vector<Transition> build_rewards(const std::vector<AttemptRecord>& episode);

// exp(clamp(advantage / beta, -5, 5)).
double awr_weight(double advantage, double beta);

// Advantage r - mean r of the (depth, n_before) bucket.
std::vector<double> advantages(const std::vector<Transition>& transitions);

RerankModel train_awr(const std::vector<Transition>& transitions, double beta,
                      const TrainOptions& opts = {});

RerankModel train_fitted_q(const std::vector<Transition>& transitions, double gamma,
                           int iterations, double ridge = 1e-8);

// Throws CorruptModel or FormatVersionMismatch on load.
void save_model(const RerankModel& model, const std::string& path);
RerankModel load_model(const std::string& path);
std::string serialize_model(const RerankModel& model);
RerankModel parse_model(std::string_view text);

}  // namespace proofbeam

#endif  // PROOFBEAM_RERANK_H_
