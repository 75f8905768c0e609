#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "annorank/dataio.hpp"
#include "annorank/errors.hpp"
#include "annorank/eval.hpp"
#include "annorank/geometry.hpp"
#include "annorank/rng.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <set>
#include <string>
#include <vector>

using namespace annorank;
using test::candidate;
using test::make_image;
using test::vec;

namespace {

AnnotationResult result_for(const std::string& id, const BBox& box) {
  AnnotationResult r;
  r.image_id = id;
  r.chosen_box = box;
  r.candidate_scores = {1.0};
  return r;
}

AnnotatedImage gt_image(const std::string& id, const BBox& gt,
                        const std::string& class_label) {
  return make_image(id, {candidate(gt, vec({1, 1}))}, {gt}, class_label);
}

}  // namespace

TEST_CASE("is_correct applies a strict 0.5 threshold") {
  CHECK(is_correct({0, 0, 4, 4}, {0, 0, 4, 4}));
  CHECK_FALSE(is_correct({0, 0, 1, 1}, {5, 5, 6, 6}));
  // Intersection 1, union 2: overlap is exactly 0.5 and must not count.
  CHECK(iou({0, 0, 1, 1}, {0, 0, 2, 1}) == 0.5);
  CHECK_FALSE(is_correct({0, 0, 1, 1}, {0, 0, 2, 1}));
}

TEST_CASE("is_correct_any accepts a match with any instance") {
  const std::vector<BBox> gts{{0, 0, 4, 4}, {10, 10, 14, 14}};
  CHECK(is_correct_any({10, 10, 14, 13}, gts));
  CHECK_FALSE(is_correct_any({4, 4, 8, 8}, gts));
  CHECK_FALSE(is_correct_any({0, 0, 4, 4}, std::span<const BBox>{}));
}

TEST_CASE("evaluate counts 2 of 4 as 50 percent") {
  std::vector<AnnotatedImage> dataset;
  std::vector<AnnotationResult> results;
  for (int i = 0; i < 4; ++i) {
    const std::string id = "img" + std::to_string(i);
    dataset.push_back(gt_image(id, {0, 0, 10, 10}, "cls"));
    results.push_back(result_for(
        id, i < 2 ? BBox{0, 0, 10, 10} : BBox{100, 100, 110, 110}));
  }
  const EvalReport report = evaluate(results, dataset);
  CHECK(report.n_images == 4);
  CHECK(report.n_correct == 2);
  CHECK(report.overall_accuracy_percent == 50.0);
  REQUIRE(report.per_class.count("cls") == 1);
  CHECK(report.per_class.at("cls").accuracy_percent == 50.0);
  CHECK(report.per_class.size() == 1);  // absent classes stay absent
}

TEST_CASE("evaluate matches the scripted recount on a 10-image fixture") {
  // Expected percentages from tests/oracles/eval_reference.py.
  struct Case {
    const char* cls;
    BBox gt;
    BBox chosen;
  };
  const std::vector<Case> cases{
      {"bike", {0, 0, 10, 10}, {0, 0, 10, 10}},
      {"bike", {0, 0, 10, 10}, {5, 0, 15, 10}},
      {"bike", {0, 0, 10, 10}, {1, 1, 11, 11}},
      {"bike", {0, 0, 10, 10}, {20, 20, 30, 30}},
      {"car", {0, 0, 4, 4}, {0, 0, 4, 4}},
      {"car", {0, 0, 4, 4}, {2, 2, 6, 6}},
      {"car", {0, 0, 4, 4}, {0, 0, 4, 3}},
      {"dog", {0, 0, 2, 1}, {0, 0, 1, 1}},
      {"dog", {0, 0, 8, 8}, {0, 0, 8, 6}},
      {"dog", {0, 0, 8, 8}, {4, 4, 12, 12}},
  };
  std::vector<AnnotatedImage> dataset;
  std::vector<AnnotationResult> results;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::string id = "fix" + std::to_string(i);
    dataset.push_back(gt_image(id, cases[i].gt, cases[i].cls));
    results.push_back(result_for(id, cases[i].chosen));
  }

  const EvalReport report = evaluate(results, dataset);
  CHECK(report.n_images == 10);
  CHECK(report.n_correct == 5);
  CHECK(report.overall_accuracy_percent == doctest::Approx(50.0));
  CHECK(report.per_class.at("bike").accuracy_percent == doctest::Approx(50.0));
  CHECK(report.per_class.at("car").accuracy_percent ==
        doctest::Approx(66.66666666666667));
  CHECK(report.per_class.at("dog").accuracy_percent ==
        doctest::Approx(33.333333333333336));

  // Annotation order cannot matter.
  std::vector<AnnotationResult> shuffled = results;
  Rng rng(67);
  rng.shuffle(shuffled);
  const EvalReport again = evaluate(shuffled, dataset);
  CHECK(again.overall_accuracy_percent == report.overall_accuracy_percent);
  CHECK(again.per_class.at("dog").n_correct ==
        report.per_class.at("dog").n_correct);
}

TEST_CASE("evaluate validates its inputs") {
  std::vector<AnnotatedImage> dataset{gt_image("known", {0, 0, 4, 4}, "cls")};
  CHECK_THROWS_AS(
      evaluate({result_for("unknown", {0, 0, 4, 4})}, dataset),
      ValidationError);

  std::vector<AnnotatedImage> no_gt{
      make_image("bare", {candidate({0, 0, 4, 4}, vec({1, 1}))})};
  CHECK_THROWS_AS(evaluate({result_for("bare", {0, 0, 4, 4})}, no_gt),
                  MissingGroundTruthError);
}

TEST_CASE("method names round-trip") {
  for (const Method method :
       {Method::ranking, Method::two_rank, Method::non_ranking,
        Method::generic_detector, Method::objectness}) {
    CHECK(method_from_string(to_string(method)) == method);
  }
  CHECK_THROWS_AS(method_from_string("magic"), ValidationError);
}

TEST_CASE("split protocol is deterministic and keeps roles disjoint") {
  SynthConfig cfg;
  cfg.n_images = 24;
  cfg.candidates_per_image = 6;
  cfg.dim = 12;
  cfg.n_classes = 4;
  cfg.seed = 71;
  const SynthDataset synth = synth_generate(cfg);

  ProtocolConfig pc;
  pc.n_aux = 2;
  pc.trials = 3;
  pc.seed = 5;
  pc.method = Method::ranking;
  pc.c = 1.0;
  pc.train.max_iterations = 200;

  const ProtocolReport a = run_split_protocol(synth.images, pc);
  const ProtocolReport b = run_split_protocol(synth.images, pc);

  REQUIRE(a.trials.size() == 3);
  CHECK(a.overall_mean_percent == b.overall_mean_percent);
  CHECK(a.overall_std_percent == b.overall_std_percent);
  for (std::size_t t = 0; t < a.trials.size(); ++t) {
    CHECK(a.trials[t].split.auxiliary_classes ==
          b.trials[t].split.auxiliary_classes);
    CHECK(a.trials[t].split.target_classes == b.trials[t].split.target_classes);
    CHECK(a.trials[t].report.overall_accuracy_percent ==
          b.trials[t].report.overall_accuracy_percent);
  }

  std::set<std::string> all_classes;
  for (const AnnotatedImage& image : synth.images) {
    all_classes.insert(image.class_label);
  }
  for (const TrialReport& trial : a.trials) {
    CHECK(trial.split.auxiliary_classes.size() == 2);
    CHECK(trial.split.target_classes.size() == 2);
    std::set<std::string> seen;
    for (const std::string& cls : trial.split.auxiliary_classes) seen.insert(cls);
    for (const std::string& cls : trial.split.target_classes) {
      CHECK(seen.count(cls) == 0);
      seen.insert(cls);
    }
    CHECK(seen == all_classes);
    CHECK(trial.selected_c == 1.0);
  }
}

TEST_CASE("split protocol aggregation matches a direct recount") {
  SynthConfig cfg;
  cfg.n_images = 24;
  cfg.candidates_per_image = 6;
  cfg.dim = 12;
  cfg.n_classes = 4;
  cfg.seed = 73;
  const SynthDataset synth = synth_generate(cfg);

  ProtocolConfig pc;
  pc.n_aux = 2;
  pc.trials = 3;
  pc.seed = 9;
  pc.method = Method::objectness;  // no training: fast and deterministic

  const ProtocolReport report = run_split_protocol(synth.images, pc);
  REQUIRE(report.trials.size() == 3);

  double mean = 0.0;
  std::map<std::string, double> class_sum;
  std::map<std::string, int> class_count;
  for (const TrialReport& trial : report.trials) {
    mean += trial.report.overall_accuracy_percent;
    for (const auto& [label, stats] : trial.report.per_class) {
      class_sum[label] += stats.accuracy_percent;
      class_count[label] += 1;
    }
  }
  mean /= 3.0;
  double var = 0.0;
  for (const TrialReport& trial : report.trials) {
    const double d = trial.report.overall_accuracy_percent - mean;
    var += d * d;
  }
  var /= 3.0;

  CHECK(report.overall_mean_percent == doctest::Approx(mean).epsilon(1e-12));
  CHECK(report.overall_std_percent ==
        doctest::Approx(std::sqrt(var)).epsilon(1e-12));
  for (const auto& [label, total] : class_sum) {
    CHECK(report.per_class_mean_percent.at(label) ==
          doctest::Approx(total / class_count[label]).epsilon(1e-12));
    CHECK(report.per_class_trial_count.at(label) == class_count[label]);
  }

  // A trial's per-class stats only cover that trial's target classes.
  for (const TrialReport& trial : report.trials) {
    for (const auto& [label, stats] : trial.report.per_class) {
      const auto& targets = trial.split.target_classes;
      CHECK(std::find(targets.begin(), targets.end(), label) != targets.end());
    }
  }
}

TEST_CASE("single-trial aggregation is the trial value") {
  SynthConfig cfg;
  cfg.n_images = 16;
  cfg.candidates_per_image = 5;
  cfg.dim = 9;
  cfg.n_classes = 4;
  cfg.seed = 79;
  const SynthDataset synth = synth_generate(cfg);

  ProtocolConfig pc;
  pc.n_aux = 2;
  pc.trials = 1;
  pc.method = Method::objectness;
  const ProtocolReport report = run_split_protocol(synth.images, pc);
  REQUIRE(report.trials.size() == 1);
  CHECK(report.overall_mean_percent ==
        report.trials[0].report.overall_accuracy_percent);
  CHECK(report.overall_std_percent == 0.0);
}

TEST_CASE("every method completes a protocol run") {
  SynthConfig cfg;
  cfg.n_images = 24;
  cfg.candidates_per_image = 8;
  cfg.dim = 12;
  cfg.n_classes = 4;
  cfg.seed = 83;
  const SynthDataset synth = synth_generate(cfg);

  for (const Method method :
       {Method::ranking, Method::two_rank, Method::non_ranking,
        Method::generic_detector, Method::objectness}) {
    ProtocolConfig pc;
    pc.n_aux = 2;
    pc.trials = 2;
    pc.method = method;
    pc.train.max_iterations = 200;
    const ProtocolReport report = run_split_protocol(synth.images, pc);
    CHECK(report.trials.size() == 2);
    CHECK(report.overall_mean_percent >= 0.0);
    CHECK(report.overall_mean_percent <= 100.0);
  }
}

TEST_CASE("split protocol validates the class supply") {
  SynthConfig cfg;
  cfg.n_images = 8;
  cfg.candidates_per_image = 5;
  cfg.dim = 9;
  cfg.n_classes = 2;
  cfg.seed = 89;
  const SynthDataset synth = synth_generate(cfg);

  ProtocolConfig pc;
  pc.n_aux = 2;  // 2 classes cannot split into 2 aux + a target
  CHECK_THROWS_AS(run_split_protocol(synth.images, pc),
                  InsufficientClassesError);

  pc.n_aux = 0;
  CHECK_THROWS_AS(run_split_protocol(synth.images, pc), ValidationError);
  pc.n_aux = 1;
  pc.trials = 0;
  CHECK_THROWS_AS(run_split_protocol(synth.images, pc), ValidationError);
}

TEST_CASE("cross-validated protocol reports the selected c") {
  SynthConfig cfg;
  cfg.n_images = 24;
  cfg.candidates_per_image = 6;
  cfg.dim = 12;
  cfg.n_classes = 4;
  cfg.seed = 97;
  const SynthDataset synth = synth_generate(cfg);

  ProtocolConfig pc;
  pc.n_aux = 2;
  pc.trials = 1;
  pc.method = Method::ranking;
  pc.cross_validate_c = true;
  pc.train.c_grid = {0.5};
  pc.train.folds = 2;
  pc.train.max_iterations = 200;
  const ProtocolReport report = run_split_protocol(synth.images, pc);
  CHECK(report.trials[0].selected_c == 0.5);
}
