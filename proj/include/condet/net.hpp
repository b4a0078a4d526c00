#pragma once

#include <iosfwd>
#include <utility>

#include "condet/fuzzy.hpp"
#include "condet/rng.hpp"
#include "condet/types.hpp"

namespace condet {

inline constexpr Real kLogitClamp = 1e-6;

Real logistic(Real z);
Vector logistic(const Vector& z);
/// log(p / (1-p)) with p clamped to [kLogitClamp, 1 - kLogitClamp].
Vector clamped_logit(const Vector& p);

// One-hidden-layer dense net: in -> hidden (rectifier) -> out (linear). The
// corrector and blender wrap it with a residual logit connection and a
// logistic output, so their scores stay in (0, 1).
struct DenseNet {
  Matrix w1;  // hidden x in
  Vector b1;  // hidden
  Matrix w2;  // out x hidden
  Vector b2;  // out

  int in_size() const { return static_cast<int>(w1.cols()); }
  int hidden_size() const { return static_cast<int>(w1.rows()); }
  int out_size() const { return static_cast<int>(w2.rows()); }
};

/// First layer uniform in [-1/sqrt(in), 1/sqrt(in)]; final layer zero, which
/// makes the corrector and blender start as the identity on detector scores.
DenseNet make_net(int in, int hidden, int out, Rng& rng);

struct NetGrads {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

NetGrads zero_grads(const DenseNet& net);
void accumulate(NetGrads& acc, const NetGrads& g, Real scale = 1.0);
void sgd_step(DenseNet& net, const NetGrads& g, Real learning_rate);

// Cached activations of one forward pass, kept for the backward pass.
struct ForwardPass {
  Vector input;       // net input (N for corrector, 2N for blender)
  Vector pre_hidden;  // w1 * input + b1
  Vector hidden;      // rectified
  Vector output;      // logistic(residual_logits + w2 * hidden + b2)
};

// Corrector: scores -> corrected scores, residual over the input logits.
ForwardPass corrector_run(const DenseNet& net, const ScoreVector& detector_scores);
ScoreVector corrector_forward(const DenseNet& net, const ScoreVector& detector_scores);
/// Parameter gradients for a loss with gradient d_output at the pass output.
NetGrads corrector_backward(const DenseNet& net, const ForwardPass& pass, const Vector& d_output);

// Blender: [detector scores; corrector scores] -> blended scores, residual
// over the detector-score logits.
ForwardPass blender_run(const DenseNet& net, const ScoreVector& detector_scores,
                        const ScoreVector& corrector_scores);
ScoreVector blender_forward(const DenseNet& net, const ScoreVector& detector_scores,
                            const ScoreVector& corrector_scores);
struct BlenderGrads {
  NetGrads net;
  Vector d_corrector_scores;  // gradient reaching the corrector-score input half
};
BlenderGrads blender_backward(const DenseNet& net, const ForwardPass& pass,
                              const Vector& d_output);

// Checkpoints hold the corrector and blender together. Byte layout (all
// integers and floats little-endian): magic "CDNT", u32 version, u32 net
// count, then per net u32 in / u32 hidden / u32 out followed by row-major
// f64 arrays w1, b1, w2, b2.
void save_checkpoint(std::ostream& out, const DenseNet& corrector, const DenseNet& blender);
std::pair<DenseNet, DenseNet> load_checkpoint(std::istream& in);
void save_checkpoint_file(const std::string& path, const DenseNet& corrector,
                          const DenseNet& blender);
std::pair<DenseNet, DenseNet> load_checkpoint_file(const std::string& path);

}  // namespace condet
