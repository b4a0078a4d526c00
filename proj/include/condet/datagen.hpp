#pragma once

#include <cstdint>
#include <vector>

#include "condet/detections.hpp"
#include "condet/labels.hpp"
#include "condet/rng.hpp"
#include "condet/types.hpp"

namespace condet {

struct GenConfig {
  std::uint64_t seed = 1;
  int num_frames = 100;
  int min_boxes = 1;
  int max_boxes = 4;
  Real sigma = 0.1;            // clipped Gaussian noise on scores
  Real flip_prob = 0.0;        // per-label probability of score inversion
  Real labeled_fraction = 0.5; // leading fraction of frames marked labeled
};

void validate_config(const GenConfig& cfg);

/// Samples a requirement-satisfying label set with at least one agent label:
/// a uniform boolean draw is repaired by MaxSAT decoding with random
/// per-label preference weights, against the requirement clauses plus an
/// at-least-one-agent clause.
BoolVector sample_labelset(const RequirementSet& rs, Rng& rng);

struct GeneratedData {
  std::vector<DetectionFrame> scored;  // noisy detector-like scores
  std::vector<TruthFrame> truth;       // requirement-satisfying labels
  int num_labeled_frames = 0;          // leading frames of both streams
};

/// Deterministic synthetic benchmark: per frame, random boxes on a 1920x1080
/// canvas, ground-truth labels via sample_labelset, and scores equal to the
/// labels perturbed by clipped Gaussian noise and random flips.
GeneratedData generate(const RequirementSet& rs, const GenConfig& cfg);

}  // namespace condet
