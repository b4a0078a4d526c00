#include "condet/training.hpp"

#include <algorithm>

namespace condet {
namespace {

void check_nonempty(std::size_t size, const char* what) {
  if (size == 0) throw InputError(std::string(what) + " set is empty");
}

template <typename Sample, typename Step>
std::vector<TraceEntry> run_epochs(std::span<const Sample> data, int epochs, int batch_size,
                                   int stage, const Step& step) {
  std::vector<TraceEntry> trace;
  const int n = static_cast<int>(data.size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    int batch_index = 0;
    for (int start = 0; start < n; start += batch_size, ++batch_index) {
      const int count = std::min(batch_size, n - start);
      const Real loss = step(data.subspan(start, count));
      trace.push_back(TraceEntry{epoch, stage, batch_index, loss});
    }
  }
  return trace;
}

}  // namespace

void validate_config(const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw InputError("epochs must be >= 0");
  if (cfg.learning_rate <= 0) throw InputError("learning rate must be positive");
  if (cfg.hidden <= 0) throw InputError("hidden size must be positive");
  if (cfg.stage1_batch <= 0 || cfg.stage2_batch <= 0) {
    throw InputError("batch sizes must be positive");
  }
  if (cfg.lambda < 0) throw InputError("lambda must be >= 0");
}

Stage1Eval stage1_eval(const DenseNet& corrector, std::span<const ScoreVector> batch,
                       const RequirementSet& rs) {
  check_nonempty(batch.size(), "stage-1 batch");
  Stage1Eval eval;
  eval.grads = zero_grads(corrector);
  const Real scale = 1.0 / static_cast<Real>(batch.size());
  for (const ScoreVector& scores : batch) {
    const ForwardPass pass = corrector_run(corrector, scores);
    const LossReport report = stage1_loss(rs, ScoreVector(pass.output));
    eval.loss += scale * report.value;
    accumulate(eval.grads, corrector_backward(corrector, pass, report.gradient), scale);
  }
  return eval;
}

Stage2Eval stage2_eval(const DenseNet& corrector, const DenseNet& blender,
                       std::span<const LabeledSample> batch, const RequirementSet& rs,
                       Real lambda) {
  check_nonempty(batch.size(), "stage-2 batch");
  Stage2Eval eval;
  eval.corrector_grads = zero_grads(corrector);
  eval.blender_grads = zero_grads(blender);
  const Real scale = 1.0 / static_cast<Real>(batch.size());
  for (const LabeledSample& sample : batch) {
    const ForwardPass c_pass = corrector_run(corrector, sample.scores);
    const ScoreVector y_c(c_pass.output);
    const ForwardPass b_pass = blender_run(blender, sample.scores, y_c);
    const Stage2Loss loss =
        stage2_loss(rs, y_c, ScoreVector(b_pass.output), sample.labels, lambda);
    eval.loss += scale * loss.value;

    // The blender's corrector-score input carries gradient back into the
    // corrector, so parameter gradients match finite differences of the
    // composed pass.
    const BlenderGrads b_grads = blender_backward(blender, b_pass, loss.grad_b);
    accumulate(eval.blender_grads, b_grads.net, scale);
    const Vector d_y_c = loss.grad_c + b_grads.d_corrector_scores;
    accumulate(eval.corrector_grads, corrector_backward(corrector, c_pass, d_y_c), scale);
  }
  return eval;
}

std::vector<TraceEntry> train_stage1(DenseNet& corrector, std::span<const ScoreVector> unlabeled,
                                     const RequirementSet& rs, const TrainConfig& cfg) {
  validate_config(cfg);
  check_nonempty(unlabeled.size(), "unlabeled");
  return run_epochs(unlabeled, cfg.epochs, cfg.stage1_batch, 1,
                    [&](std::span<const ScoreVector> batch) {
                      const Stage1Eval eval = stage1_eval(corrector, batch, rs);
                      sgd_step(corrector, eval.grads, cfg.learning_rate);
                      return eval.loss;
                    });
}

std::vector<TraceEntry> train_stage2(DenseNet& corrector, DenseNet& blender,
                                     std::span<const LabeledSample> labeled,
                                     const RequirementSet& rs, const TrainConfig& cfg) {
  validate_config(cfg);
  check_nonempty(labeled.size(), "labeled");
  return run_epochs(labeled, cfg.epochs, cfg.stage2_batch, 2,
                    [&](std::span<const LabeledSample> batch) {
                      const Stage2Eval eval = stage2_eval(corrector, blender, batch, rs, cfg.lambda);
                      sgd_step(corrector, eval.corrector_grads, cfg.learning_rate);
                      sgd_step(blender, eval.blender_grads, cfg.learning_rate);
                      return eval.loss;
                    });
}

TrainResult train_semisupervised(const SemiSupervisedSet& data, const RequirementSet& rs,
                                 const TrainConfig& cfg) {
  validate_config(cfg);
  check_nonempty(data.labeled.size(), "labeled");

  const int n = rs.num_labels();
  Rng rng(cfg.seed);
  TrainResult result{make_net(n, cfg.hidden, n, rng), make_net(2 * n, cfg.hidden, n, rng), {}};

  // Each epoch runs the full unsupervised pass before the supervised pass.
  // An empty unlabeled pool skips stage 1, leaving plain supervised training.
  TrainConfig one_epoch = cfg;
  one_epoch.epochs = 1;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (!data.unlabeled.empty()) {
      for (auto& entry : train_stage1(result.corrector, data.unlabeled, rs, one_epoch)) {
        entry.epoch = epoch;
        result.trace.push_back(entry);
      }
    }
    for (auto& entry :
         train_stage2(result.corrector, result.blender, data.labeled, rs, one_epoch)) {
      entry.epoch = epoch;
      result.trace.push_back(entry);
    }
  }
  return result;
}

}  // namespace condet
