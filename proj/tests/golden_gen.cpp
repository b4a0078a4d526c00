// Regenerates the frozen constants embedded in the unit tests. Run after an
// intentional change to the nets, the RNG, or the sampler, and paste the
// printed snippets over the old ones.
#include <cstdio>

#include "condet/datagen.hpp"
#include "condet/labels.hpp"
#include "condet/net.hpp"
#include "condet/rng.hpp"

using namespace condet;

int main() {
  {
    Rng rng(42);
    DenseNet net = make_net(5, 8, 5, rng);
    for (int r = 0; r < net.w2.rows(); ++r) {
      for (int c = 0; c < net.w2.cols(); ++c) net.w2(r, c) = rng.uniform(-0.3, 0.3);
    }
    for (int i = 0; i < net.b2.size(); ++i) net.b2[i] = rng.uniform(-0.1, 0.1);
    Vector p(5);
    p << 0.1, 0.3, 0.5, 0.7, 0.9;
    const ScoreVector out = corrector_forward(net, ScoreVector(p));
    std::printf("GOLDEN_CORRECTOR:\n");
    for (int i = 0; i < 5; ++i) std::printf("%s%.17g", i ? ", " : "", out[i]);
    std::printf("\n\n");
  }
  {
    Rng rng(43);
    DenseNet net = make_net(6, 4, 3, rng);
    for (int r = 0; r < net.w2.rows(); ++r) {
      for (int c = 0; c < net.w2.cols(); ++c) net.w2(r, c) = rng.uniform(-0.3, 0.3);
    }
    Vector p(3), y_c(3);
    p << 0.2, 0.5, 0.8;
    y_c << 0.9, 0.1, 0.4;
    const ScoreVector out = blender_forward(net, ScoreVector(p), ScoreVector(y_c));
    std::printf("GOLDEN_BLENDER:\n");
    for (int i = 0; i < 3; ++i) std::printf("%s%.17g", i ? ", " : "", out[i]);
    std::printf("\n\n");
  }
  {
    const LabelSpace ls = parse_labelspace("a agent\nb action\nc location\n");
    const RequirementSet rs = parse_requirements("", ls);
    Rng rng(7);
    std::printf("GOLDEN_SAMPLES (10 draws, unconstrained 3-label space, seed 7):\n");
    for (int draw = 0; draw < 10; ++draw) {
      const BoolVector sample = sample_labelset(rs, rng);
      std::printf("{%d, %d, %d},\n", int(sample[0]), int(sample[1]), int(sample[2]));
    }
    std::printf("\n");
  }
  {
    const LabelSpace ls = load_labelspace(std::string(CONDET_FIXTURES_DIR) + "/labels_41.txt");
    const RequirementSet rs =
        load_requirements(std::string(CONDET_FIXTURES_DIR) + "/requirements_243.txt", ls);
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
    std::printf("GOLDEN_VIOLATION_RATE (seed 11, 500 frames, sigma 0.2, flip 0.05):\n");
    std::printf("violated %lld of %lld -> %.17g\n", (long long)violated, (long long)total,
                double(violated) / double(total));
  }
  return 0;
}
