#include "toyset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

namespace fs = std::filesystem;

namespace gait {

namespace {

constexpr int kCanvasRows = 96;
constexpr int kCanvasCols = 80;
constexpr double kPi = 3.14159265358979323846;

struct BodyShape {
  double torso_w;
  double torso_len;
  double head_r;
  double leg_len;
  double swing_amp;
  int swing_freq;  // gait cycles per sequence
  double hip_off;
  bool arms;
  double arm_len;
};

BodyShape identity_shape(const ToyConfig& cfg, int id) {
  std::mt19937_64 rng(cfg.seed * 7919 + static_cast<uint64_t>(id) + 1);
  auto u = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  // gross proportions vary little between identities; the discriminative
  // signal sits in localized features (head size, leg swing, arms)
  BodyShape b;
  b.torso_w = u(13.0, 16.0);
  b.torso_len = u(30.0, 33.0);
  b.head_r = u(3.0, 8.0);
  b.leg_len = u(26.0, 29.0);
  b.swing_amp = u(3.0, 14.0);
  b.swing_freq = (rng() % 2 == 0) ? 1 : 2;
  b.hip_off = u(2.0, 6.0);
  b.arms = rng() % 2 == 0;
  b.arm_len = u(12.0, 24.0);
  return b;
}

void fill_rect(Image& img, double r0, double r1, double c0, double c1) {
  int ir0 = std::max(0, static_cast<int>(std::floor(r0)));
  int ir1 = std::min(img.rows - 1, static_cast<int>(std::ceil(r1)));
  int ic0 = std::max(0, static_cast<int>(std::floor(c0)));
  int ic1 = std::min(img.cols - 1, static_cast<int>(std::ceil(c1)));
  for (int r = ir0; r <= ir1; ++r)
    for (int c = ic0; c <= ic1; ++c) img.at(r, c) = 1.0;
}

void fill_ellipse(Image& img, double cy, double cx, double ry, double rx) {
  int r0 = std::max(0, static_cast<int>(cy - ry - 1));
  int r1 = std::min(img.rows - 1, static_cast<int>(cy + ry + 1));
  for (int r = r0; r <= r1; ++r)
    for (int c = 0; c < img.cols; ++c) {
      double dy = (r - cy) / ry, dx = (c - cx) / rx;
      if (dy * dy + dx * dx <= 1.0) img.at(r, c) = 1.0;
    }
}

// thick segment from (r0,c0) to (r1,c1), rasterized per row
void fill_limb(Image& img, double r0, double c0, double r1, double c1, double w) {
  int steps = static_cast<int>(std::ceil(std::abs(r1 - r0))) + 1;
  for (int i = 0; i <= steps; ++i) {
    double a = static_cast<double>(i) / steps;
    double r = r0 + a * (r1 - r0);
    double c = c0 + a * (c1 - c0);
    fill_rect(img, r, r + 1.0, c - w / 2.0, c + w / 2.0);
  }
}

}  // namespace

Image render_toy_frame(const ToyConfig& cfg, int id, int view, int seq, int t) {
  BodyShape b = identity_shape(cfg, id);
  // per-view horizontal foreshortening
  double vs = 0.55 + 0.45 * static_cast<double>(view) /
                         std::max(1, cfg.n_views - 1);
  std::mt19937_64 srng(cfg.seed * 104729 + static_cast<uint64_t>(id) * 977 +
                       static_cast<uint64_t>(view) * 131 + static_cast<uint64_t>(seq) + 1);
  double phase = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(srng);

  Image img;
  img.rows = kCanvasRows;
  img.cols = kCanvasCols;
  img.pixels.assign(static_cast<size_t>(kCanvasRows) * kCanvasCols, 0.0);

  double cx = kCanvasCols / 2.0;
  double head_cy = 10.0 + b.head_r;
  double torso_top = head_cy + b.head_r;
  double torso_bot = torso_top + b.torso_len;
  double swing = std::sin(2.0 * kPi * b.swing_freq * t / cfg.n_frames + phase);

  fill_ellipse(img, head_cy, cx, b.head_r, b.head_r * vs);
  fill_rect(img, torso_top, torso_bot, cx - b.torso_w * vs / 2.0,
            cx + b.torso_w * vs / 2.0);

  double hip = b.hip_off * vs;
  double amp = b.swing_amp * vs;
  fill_limb(img, torso_bot, cx - hip, torso_bot + b.leg_len, cx - hip + amp * swing,
            3.5);
  fill_limb(img, torso_bot, cx + hip, torso_bot + b.leg_len, cx + hip - amp * swing,
            3.5);
  if (b.arms) {
    double sh = torso_top + 2.0;
    fill_limb(img, sh, cx - b.torso_w * vs / 2.0, sh + b.arm_len,
              cx - b.torso_w * vs / 2.0 - 0.6 * amp * swing, 2.5);
    fill_limb(img, sh, cx + b.torso_w * vs / 2.0, sh + b.arm_len,
              cx + b.torso_w * vs / 2.0 + 0.6 * amp * swing, 2.5);
  }
  return img;
}

SilhouetteSequence make_toy_sequence(const ToyConfig& cfg, int id, int view, int seq) {
  SilhouetteSequence s;
  s.subject_id = id;
  s.view = view * 30;
  s.condition = "NM";
  s.seq_index = seq;
  for (int t = 0; t < cfg.n_frames; ++t)
    s.frames.push_back(preprocess_frame(render_toy_frame(cfg, id, view, seq, t)));
  return s;
}

std::string toy_split(const ToyConfig& cfg, int seq) {
  if (seq == cfg.n_seqs - 1) return "Probe";
  if (seq == cfg.n_seqs - 2) return "Gallery";
  return "Training";
}

void write_toy_dataset(const ToyConfig& cfg, const std::string& out_dir,
                       const std::string& manifest_path) {
  fs::create_directories(out_dir);
  std::vector<ManifestEntry> entries;
  for (int id = 0; id < cfg.n_ids; ++id)
    for (int v = 0; v < cfg.n_views; ++v)
      for (int q = 0; q < cfg.n_seqs; ++q) {
        char dir[64];
        std::snprintf(dir, sizeof(dir), "s%03d_v%03d_q%02d", id, v * 30, q);
        fs::create_directories(fs::path(out_dir) / dir);
        for (int t = 0; t < cfg.n_frames; ++t) {
          Image img = render_toy_frame(cfg, id, v, q, t);
          char name[16];
          std::snprintf(name, sizeof(name), "%03d.pgm", t);
          std::ofstream out(fs::path(out_dir) / dir / name, std::ios::binary);
          out << "P5\n" << img.cols << " " << img.rows << "\n255\n";
          for (double p : img.pixels) out.put(p >= 0.5 ? char(255) : char(0));
        }
        ManifestEntry e;
        e.path = dir;
        e.subject = id;
        e.view = v * 30;
        e.condition = "NM";
        e.seq_index = q;
        e.split = toy_split(cfg, q);
        entries.push_back(std::move(e));
      }
  save_manifest(entries, manifest_path);
}

}  // namespace gait
