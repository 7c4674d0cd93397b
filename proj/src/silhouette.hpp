#pragma once

#include <string>
#include <vector>

#include "tensor.hpp"

namespace gait {

/// Grayscale image with intensities in [0,1], row-major.
struct Image {
  int rows = 0;
  int cols = 0;
  std::vector<double> pixels;

  double& at(int r, int c) { return pixels[static_cast<size_t>(r * cols + c)]; }
  double at(int r, int c) const { return pixels[static_cast<size_t>(r * cols + c)]; }
};

/// Normalized 64x64 binary silhouette (background 0, body 1).
struct SilhouetteFrame {
  int rows = 64;
  int cols = 64;
  std::vector<double> pixels;  // values in {0,1}
  int src_rows = 0;
  int src_cols = 0;

  double& at(int r, int c) { return pixels[static_cast<size_t>(r * cols + c)]; }
  double at(int r, int c) const { return pixels[static_cast<size_t>(r * cols + c)]; }
};

struct SilhouetteSequence {
  std::vector<SilhouetteFrame> frames;
  int subject_id = 0;
  int view = 0;  // degrees
  std::string condition;
  int seq_index = 0;
};

enum class OcclusionKind { SmallHorizontal, LargeHorizontal, LargeVertical };

/// Background-colored masking band. Horizontal kinds mask rows [lo,hi),
/// vertical kinds mask columns [lo,hi).
struct OcclusionSpec {
  OcclusionKind kind;
  int index;  // k within the kind (1-based)
  int lo;
  int hi;

  bool horizontal() const { return kind != OcclusionKind::LargeVertical; }
  std::string name() const;
};

struct ManifestEntry {
  std::string path;
  int subject = 0;
  int view = 0;
  std::string condition;
  int seq_index = 0;
  std::string split;  // Training | Gallery | Probe
};

Image load_image(const std::string& path);          // PNG or PGM, single channel
void save_frame_pgm(const SilhouetteFrame& f, const std::string& path);

/// Tight vertical crop, centroid-column centering, square padding,
/// bilinear resize to out_size, binarize at 0.5.
SilhouetteFrame preprocess_frame(const Image& raw, int out_size = 64);

SilhouetteFrame apply_occlusion(const SilhouetteFrame& f, const OcclusionSpec& spec);
void apply_occlusion_inplace(SilhouetteSequence& seq, const OcclusionSpec& spec);

/// small_horizontal 1..4, large_horizontal 1..2, large_vertical 1..2.
std::vector<OcclusionSpec> enumerate_occlusion_specs();

std::vector<ManifestEntry> load_manifest(const std::string& csv_path);
void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& csv_path);

/// Frames are read from the entry's directory in numeric filename order and
/// preprocessed. `root` is prepended to relative entry paths.
SilhouetteSequence load_sequence(const ManifestEntry& entry, const std::string& root,
                                 bool preprocess = true);

std::string join_path(const std::string& root, const std::string& rel);

}  // namespace gait
