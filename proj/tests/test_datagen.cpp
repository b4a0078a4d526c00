#include <doctest.h>

#include <sstream>

#include "condet/datagen.hpp"
#include "condet/maxsat.hpp"
#include "golden_values.hpp"
#include "oracles.hpp"

using namespace condet;
namespace ct = condet::testing;

TEST_SUITE("datagen") {

TEST_CASE("a forced label is always sampled true") {
  const LabelSpace ls = parse_labelspace("a agent\nb action\n");
  const RequirementSet rs = parse_requirements("a\n", ls);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const BoolVector sample = sample_labelset(rs, rng);
    CHECK(sample[0]);
  }
}

TEST_CASE("sampling on the unconstrained 3-label space matches the frozen sequence") {
  const LabelSpace ls = parse_labelspace("a agent\nb action\nc location\n");
  const RequirementSet rs = parse_requirements("", ls);
  Rng rng(7);
  // Frozen from the first run (seed 7, 10 draws). The at-least-one-agent
  // clause forces label a everywhere.
  const bool expected[10][3] = {GOLDEN_SAMPLES};
  for (auto& row : expected) {
    const BoolVector sample = sample_labelset(rs, rng);
    CHECK(sample[0] == row[0]);
    CHECK(sample[1] == row[1]);
    CHECK(sample[2] == row[2]);
  }
}

TEST_CASE("1000 samples all satisfy the fixture requirements with an agent label") {
  const LabelSpace ls = load_labelspace(ct::fixture_path("labels_41.txt"));
  const RequirementSet rs = load_requirements(ct::fixture_path("requirements_243.txt"), ls);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const BoolVector sample = sample_labelset(rs, rng);
    CHECK(eval_boolean(rs, sample).satisfied);
    bool has_agent = false;
    for (int idx : ls.agent_indices()) has_agent = has_agent || sample[idx];
    CHECK(has_agent);
  }
}

TEST_CASE("zero noise and zero flips reproduce the ground truth exactly") {
  Rng rng(4);
  const RequirementSet rs = ct::random_requirements(6, 8, rng);
  GenConfig cfg;
  cfg.seed = 5;
  cfg.num_frames = 20;
  cfg.sigma = 0.0;
  cfg.flip_prob = 0.0;
  const GeneratedData data = generate(rs, cfg);
  REQUIRE(data.scored.size() == 20);
  for (std::size_t f = 0; f < data.scored.size(); ++f) {
    REQUIRE(data.scored[f].detections.size() == data.truth[f].boxes.size());
    for (std::size_t b = 0; b < data.scored[f].detections.size(); ++b) {
      for (int x = 0; x < rs.num_labels(); ++x) {
        CHECK(data.scored[f].detections[b].scores[x] ==
              (data.truth[f].boxes[b].labels[x] ? 1.0 : 0.0));
      }
    }
  }
}

TEST_CASE("ground truth always satisfies the requirements and the split is a prefix") {
  Rng rng(6);
  const RequirementSet rs = ct::random_requirements(7, 10, rng);
  GenConfig cfg;
  cfg.seed = 8;
  cfg.num_frames = 30;
  cfg.sigma = 0.3;
  cfg.flip_prob = 0.1;
  cfg.labeled_fraction = 0.4;
  const GeneratedData data = generate(rs, cfg);
  CHECK(data.num_labeled_frames == 12);
  for (const TruthFrame& frame : data.truth) {
    for (const LabeledBox& item : frame.boxes) {
      CHECK(eval_boolean(rs, item.labels).satisfied);
    }
  }
}

TEST_CASE("identical seeds give byte-identical streams") {
  Rng rng(9);
  const RequirementSet rs = ct::random_requirements(5, 6, rng);
  GenConfig cfg;
  cfg.seed = 77;
  cfg.num_frames = 15;
  cfg.sigma = 0.25;
  cfg.flip_prob = 0.05;
  auto render = [&] {
    const GeneratedData data = generate(rs, cfg);
    std::ostringstream scores, truth;
    write_detections(scores, data.scored);
    write_truth(truth, data.truth);
    return scores.str() + "\x1e" + truth.str();
  };
  CHECK(render() == render());
}

TEST_CASE("generated streams parse back losslessly") {
  Rng rng(10);
  const RequirementSet rs = ct::random_requirements(5, 6, rng);
  GenConfig cfg;
  cfg.seed = 12;
  cfg.num_frames = 10;
  cfg.sigma = 0.2;
  const GeneratedData data = generate(rs, cfg);

  std::ostringstream scores_out;
  write_detections(scores_out, data.scored);
  std::istringstream scores_in(scores_out.str());
  const auto parsed = read_detections(scores_in, rs.num_labels());
  REQUIRE(parsed.size() == data.scored.size());
  for (std::size_t f = 0; f < parsed.size(); ++f) {
    CHECK(parsed[f].frame_id == data.scored[f].frame_id);
    for (std::size_t b = 0; b < parsed[f].detections.size(); ++b) {
      CHECK((parsed[f].detections[b].scores.values().array() ==
             data.scored[f].detections[b].scores.values().array())
                .all());
      CHECK(parsed[f].detections[b].box.x1 == data.scored[f].detections[b].box.x1);
    }
  }
}

TEST_CASE("noisy fixture-scale benchmark has the frozen thresholded violation rate") {
  const LabelSpace ls = load_labelspace(ct::fixture_path("labels_41.txt"));
  const RequirementSet rs = load_requirements(ct::fixture_path("requirements_243.txt"), ls);
  GenConfig cfg;
  cfg.seed = 11;
  cfg.num_frames = 500;
  cfg.sigma = 0.2;
  cfg.flip_prob = 0.05;
  const GeneratedData data = generate(rs, cfg);
  std::int64_t violated = 0, total = 0;
  for (const DetectionFrame& frame : data.scored) {
    for (const Detection& det : frame.detections) {
      BoolVector hard(ls.size());
      for (int i = 0; i < ls.size(); ++i) hard[i] = det.scores[i] > 0.5;
      if (!eval_boolean(rs, hard).satisfied) ++violated;
      ++total;
    }
  }
  CHECK(total > 0);
  const Real rate = static_cast<Real>(violated) / static_cast<Real>(total);
  CHECK(rate > 0.0);  // the noise must actually break requirements
  // Regression value frozen from the first run of this configuration.
  CHECK(rate == doctest::Approx(GOLDEN_VIOLATION_RATE).epsilon(1e-12));
}

TEST_CASE("config validation") {
  GenConfig cfg;
  cfg.min_boxes = 3;
  cfg.max_boxes = 2;
  CHECK_THROWS_AS(validate_config(cfg), InputError);
  cfg = GenConfig{};
  cfg.labeled_fraction = 1.5;
  CHECK_THROWS_AS(validate_config(cfg), InputError);
  cfg = GenConfig{};
  cfg.flip_prob = -0.1;
  CHECK_THROWS_AS(validate_config(cfg), InputError);
}

}  // TEST_SUITE
