#pragma once

#include <string>

#include "silhouette.hpp"

namespace gait {

/// Procedural walking-figure dataset: per-identity body proportions and leg
/// swing, per-view horizontal foreshortening, per-sequence phase.
struct ToyConfig {
  int n_ids = 8;
  int n_views = 4;
  int n_seqs = 4;
  int n_frames = 16;
  uint64_t seed = 0;
};

/// Raw (un-normalized) frame on a 96x80 canvas.
Image render_toy_frame(const ToyConfig& cfg, int id, int view, int seq, int t);

/// Rendered and preprocessed sequence, all in memory.
SilhouetteSequence make_toy_sequence(const ToyConfig& cfg, int id, int view, int seq);

/// Split tag for a toy sequence: the last seq index is Probe, the one before
/// is Gallery, the rest are Training.
std::string toy_split(const ToyConfig& cfg, int seq);

/// Writes raw PGM frames plus a manifest CSV under out_dir.
void write_toy_dataset(const ToyConfig& cfg, const std::string& out_dir,
                       const std::string& manifest_path);

}  // namespace gait
