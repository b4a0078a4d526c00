#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "condet/fuzzy.hpp"
#include "condet/labels.hpp"
#include "condet/net.hpp"
#include "condet/types.hpp"

namespace condet {

struct TrainConfig {
  int epochs = 100;
  Real learning_rate = 0.05;
  int hidden = 64;
  int stage1_batch = 64;
  int stage2_batch = 64;
  Real lambda = 10.0;  // weight of the constrained term in the stage-2 loss
  std::uint64_t seed = 1;
};

void validate_config(const TrainConfig& cfg);

struct LabeledSample {
  ScoreVector scores;
  BoolVector labels;
};

struct SemiSupervisedSet {
  std::vector<LabeledSample> labeled;
  std::vector<ScoreVector> unlabeled;
};

struct TraceEntry {
  int epoch = 0;
  int stage = 1;  // 1 or 2
  int batch = 0;
  Real loss = 0.0;
};

// Batch-mean losses with full parameter gradients, shared by the training
// loops and the finite-difference tests.
struct Stage1Eval {
  Real loss = 0.0;
  NetGrads grads;
};
Stage1Eval stage1_eval(const DenseNet& corrector, std::span<const ScoreVector> batch,
                       const RequirementSet& rs);

struct Stage2Eval {
  Real loss = 0.0;
  NetGrads corrector_grads;
  NetGrads blender_grads;
};
// The stage-2 loss is stage2_loss applied to y_c = corrector(p) and
// y_b = blender(p, y_c); the blender's dependency on y_c backpropagates into
// the corrector so the parameter gradients match finite differences of the
// composite forward pass.
Stage2Eval stage2_eval(const DenseNet& corrector, const DenseNet& blender,
                       std::span<const LabeledSample> batch, const RequirementSet& rs,
                       Real lambda);

/// cfg.epochs epochs of minibatch gradient descent on the unsupervised
/// constrained loss of corrector outputs. Minibatches are consecutive slices
/// in data order, so runs are deterministic.
std::vector<TraceEntry> train_stage1(DenseNet& corrector, std::span<const ScoreVector> unlabeled,
                                     const RequirementSet& rs, const TrainConfig& cfg);

/// cfg.epochs epochs of minibatch gradient descent on the supervised stage-2
/// loss, updating both nets.
std::vector<TraceEntry> train_stage2(DenseNet& corrector, DenseNet& blender,
                                     std::span<const LabeledSample> labeled,
                                     const RequirementSet& rs, const TrainConfig& cfg);

struct TrainResult {
  DenseNet corrector;
  DenseNet blender;
  std::vector<TraceEntry> trace;
};

/// Initializes both nets from cfg.seed, then per epoch runs one stage-1 pass
/// over the unlabeled pool followed by one stage-2 pass over the labeled
/// pool, in that order.
TrainResult train_semisupervised(const SemiSupervisedSet& data, const RequirementSet& rs,
                                 const TrainConfig& cfg);

}  // namespace condet
