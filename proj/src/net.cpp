#include "condet/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace condet {

Real logistic(Real z) { return 1.0 / (1.0 + std::exp(-z)); }

Vector logistic(const Vector& z) {
  return z.unaryExpr([](Real v) { return logistic(v); });
}

Vector clamped_logit(const Vector& p) {
  return p.unaryExpr([](Real v) {
    const Real c = std::clamp(v, kLogitClamp, 1.0 - kLogitClamp);
    return std::log(c / (1.0 - c));
  });
}

DenseNet make_net(int in, int hidden, int out, Rng& rng) {
  if (in <= 0 || hidden <= 0 || out <= 0) throw InputError("net sizes must be positive");
  DenseNet net;
  const Real bound = 1.0 / std::sqrt(static_cast<Real>(in));
  net.w1 = Matrix::Zero(hidden, in);
  for (int r = 0; r < hidden; ++r) {
    for (int c = 0; c < in; ++c) net.w1(r, c) = rng.uniform(-bound, bound);
  }
  net.b1 = Vector::Zero(hidden);
  net.w2 = Matrix::Zero(out, hidden);
  net.b2 = Vector::Zero(out);
  return net;
}

NetGrads zero_grads(const DenseNet& net) {
  return NetGrads{Matrix::Zero(net.w1.rows(), net.w1.cols()), Vector::Zero(net.b1.size()),
                  Matrix::Zero(net.w2.rows(), net.w2.cols()), Vector::Zero(net.b2.size())};
}

void accumulate(NetGrads& acc, const NetGrads& g, Real scale) {
  acc.w1 += scale * g.w1;
  acc.b1 += scale * g.b1;
  acc.w2 += scale * g.w2;
  acc.b2 += scale * g.b2;
}

void sgd_step(DenseNet& net, const NetGrads& g, Real learning_rate) {
  net.w1 -= learning_rate * g.w1;
  net.b1 -= learning_rate * g.b1;
  net.w2 -= learning_rate * g.w2;
  net.b2 -= learning_rate * g.b2;
}

namespace {

// Shared core: logistic(residual_logits + w2 * relu(w1 * x + b1) + b2).
ForwardPass run_net(const DenseNet& net, Vector input, const Vector& residual_scores) {
  ForwardPass pass;
  pass.pre_hidden = net.w1 * input + net.b1;
  pass.hidden = pass.pre_hidden.cwiseMax(0.0);
  pass.output = logistic(clamped_logit(residual_scores) + net.w2 * pass.hidden + net.b2);
  pass.input = std::move(input);
  return pass;
}

// Parameter gradients plus the gradient at the net input (residual path
// excluded; the residual feeds from data scores, not from trained inputs).
NetGrads backprop(const DenseNet& net, const ForwardPass& pass, const Vector& d_output,
                  Vector* d_input) {
  NetGrads grads;
  const Vector d_logits = d_output.array() * pass.output.array() * (1.0 - pass.output.array());
  grads.w2 = d_logits * pass.hidden.transpose();
  grads.b2 = d_logits;
  Vector d_hidden = net.w2.transpose() * d_logits;
  for (int i = 0; i < d_hidden.size(); ++i) {
    if (pass.pre_hidden[i] <= 0.0) d_hidden[i] = 0.0;
  }
  grads.w1 = d_hidden * pass.input.transpose();
  grads.b1 = d_hidden;
  if (d_input) *d_input = net.w1.transpose() * d_hidden;
  return grads;
}

void require_size(int got, int want, const char* what) {
  if (got != want) {
    throw InputError(std::string(what) + ": expected length " + std::to_string(want) +
                     ", got " + std::to_string(got));
  }
}

}  // namespace

ForwardPass corrector_run(const DenseNet& net, const ScoreVector& detector_scores) {
  require_size(detector_scores.size(), net.in_size(), "corrector input");
  require_size(net.out_size(), net.in_size(), "corrector output");
  return run_net(net, detector_scores.values(), detector_scores.values());
}

ScoreVector corrector_forward(const DenseNet& net, const ScoreVector& detector_scores) {
  return ScoreVector(corrector_run(net, detector_scores).output);
}

NetGrads corrector_backward(const DenseNet& net, const ForwardPass& pass,
                            const Vector& d_output) {
  return backprop(net, pass, d_output, nullptr);
}

ForwardPass blender_run(const DenseNet& net, const ScoreVector& detector_scores,
                        const ScoreVector& corrector_scores) {
  const int n = net.out_size();
  require_size(detector_scores.size(), n, "blender detector input");
  require_size(corrector_scores.size(), n, "blender corrector input");
  require_size(net.in_size(), 2 * n, "blender input layer");
  Vector input(2 * n);
  input << detector_scores.values(), corrector_scores.values();
  return run_net(net, std::move(input), detector_scores.values());
}

ScoreVector blender_forward(const DenseNet& net, const ScoreVector& detector_scores,
                            const ScoreVector& corrector_scores) {
  return ScoreVector(blender_run(net, detector_scores, corrector_scores).output);
}

BlenderGrads blender_backward(const DenseNet& net, const ForwardPass& pass,
                              const Vector& d_output) {
  BlenderGrads out;
  Vector d_input;
  out.net = backprop(net, pass, d_output, &d_input);
  const int n = net.out_size();
  out.d_corrector_scores = d_input.segment(n, n);
  return out;
}

namespace {

constexpr char kMagic[4] = {'C', 'D', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) throw InputError("truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_f64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw InputError("truncated checkpoint");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

Matrix get_matrix(std::istream& in, int rows, int cols) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = get_f64(in);
  }
  return m;
}

void put_net(std::ostream& out, const DenseNet& net) {
  put_u32(out, static_cast<std::uint32_t>(net.in_size()));
  put_u32(out, static_cast<std::uint32_t>(net.hidden_size()));
  put_u32(out, static_cast<std::uint32_t>(net.out_size()));
  put_matrix(out, net.w1);
  put_matrix(out, net.b1);
  put_matrix(out, net.w2);
  put_matrix(out, net.b2);
}

DenseNet get_net(std::istream& in) {
  const int in_size = static_cast<int>(get_u32(in));
  const int hidden = static_cast<int>(get_u32(in));
  const int out_size = static_cast<int>(get_u32(in));
  if (in_size <= 0 || hidden <= 0 || out_size <= 0) throw InputError("corrupt checkpoint sizes");
  DenseNet net;
  net.w1 = get_matrix(in, hidden, in_size);
  net.b1 = get_matrix(in, hidden, 1);
  net.w2 = get_matrix(in, out_size, hidden);
  net.b2 = get_matrix(in, out_size, 1);
  if (!net.w1.allFinite() || !net.b1.allFinite() || !net.w2.allFinite() ||
      !net.b2.allFinite()) {
    throw InputError("checkpoint contains non-finite parameters");
  }
  return net;
}

}  // namespace

void save_checkpoint(std::ostream& out, const DenseNet& corrector, const DenseNet& blender) {
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, 2);
  put_net(out, corrector);
  put_net(out, blender);
  if (!out) throw InputError("checkpoint write failed");
}

std::pair<DenseNet, DenseNet> load_checkpoint(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw InputError("not a checkpoint file");
  if (get_u32(in) != kVersion) throw InputError("unsupported checkpoint version");
  if (get_u32(in) != 2) throw InputError("checkpoint must hold corrector and blender");
  DenseNet corrector = get_net(in);
  DenseNet blender = get_net(in);
  return {std::move(corrector), std::move(blender)};
}

void save_checkpoint_file(const std::string& path, const DenseNet& corrector,
                          const DenseNet& blender) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  save_checkpoint(out, corrector, blender);
}

std::pair<DenseNet, DenseNet> load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace condet
