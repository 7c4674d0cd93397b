#include "silhouette.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace fs = std::filesystem;

namespace gait {

std::string OcclusionSpec::name() const {
  switch (kind) {
    case OcclusionKind::SmallHorizontal:
      return "small_horizontal_" + std::to_string(index);
    case OcclusionKind::LargeHorizontal:
      return "large_horizontal_" + std::to_string(index);
    case OcclusionKind::LargeVertical:
      return "large_vertical_" + std::to_string(index);
  }
  return "?";
}

std::string join_path(const std::string& root, const std::string& rel) {
  if (root.empty() || fs::path(rel).is_absolute()) return rel;
  return (fs::path(root) / rel).string();
}

Image load_image(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (m.empty()) throw DataError("cannot read image: " + path);
  if (m.rows < 8 || m.cols < 8)
    throw DataError("image too small (min 8x8): " + path);
  Image img;
  img.rows = m.rows;
  img.cols = m.cols;
  img.pixels.resize(static_cast<size_t>(m.rows) * m.cols);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c)
      img.at(r, c) = m.at<uint8_t>(r, c) / 255.0;
  return img;
}

void save_frame_pgm(const SilhouetteFrame& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write: " + path);
  out << "P5\n" << f.cols << " " << f.rows << "\n255\n";
  for (double v : f.pixels) out.put(v >= 0.5 ? char(255) : char(0));
}

SilhouetteFrame preprocess_frame(const Image& raw, int out_size) {
  int top = -1, bot = -1;
  double mass = 0.0, cx_acc = 0.0;
  for (int r = 0; r < raw.rows; ++r)
    for (int c = 0; c < raw.cols; ++c) {
      double v = raw.at(r, c);
      if (v > 0.0) {
        if (top < 0) top = r;
        bot = r;
        mass += v;
        cx_acc += v * c;
      }
    }
  if (top < 0) throw EmptySilhouette("frame is all background");

  int side = bot - top + 1;
  double cx = cx_acc / mass;
  int col0 = static_cast<int>(std::lround(cx)) - side / 2;

  cv::Mat canvas(side, side, CV_64F, cv::Scalar(0.0));
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      int sc = col0 + c;
      if (sc >= 0 && sc < raw.cols) canvas.at<double>(r, c) = raw.at(top + r, sc);
    }

  cv::Mat resized;
  cv::resize(canvas, resized, cv::Size(out_size, out_size), 0, 0, cv::INTER_LINEAR);

  SilhouetteFrame f;
  f.rows = out_size;
  f.cols = out_size;
  f.src_rows = raw.rows;
  f.src_cols = raw.cols;
  f.pixels.resize(static_cast<size_t>(out_size) * out_size);
  for (int r = 0; r < out_size; ++r)
    for (int c = 0; c < out_size; ++c)
      f.at(r, c) = resized.at<double>(r, c) >= 0.5 ? 1.0 : 0.0;
  return f;
}

SilhouetteFrame apply_occlusion(const SilhouetteFrame& f, const OcclusionSpec& spec) {
  SilhouetteFrame out = f;
  for (int r = 0; r < f.rows; ++r)
    for (int c = 0; c < f.cols; ++c) {
      int pos = spec.horizontal() ? r : c;
      if (pos >= spec.lo && pos < spec.hi) out.at(r, c) = 0.0;
    }
  return out;
}

void apply_occlusion_inplace(SilhouetteSequence& seq, const OcclusionSpec& spec) {
  for (auto& f : seq.frames) f = apply_occlusion(f, spec);
}

std::vector<OcclusionSpec> enumerate_occlusion_specs() {
  std::vector<OcclusionSpec> specs;
  for (int k = 1; k <= 4; ++k)
    specs.push_back({OcclusionKind::SmallHorizontal, k, 16 * (k - 1), 16 * k});
  for (int k = 1; k <= 2; ++k)
    specs.push_back({OcclusionKind::LargeHorizontal, k, 32 * (k - 1), 32 * k});
  for (int k = 1; k <= 2; ++k)
    specs.push_back({OcclusionKind::LargeVertical, k, 32 * (k - 1), 32 * k});
  return specs;
}

static std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

static int parse_int(const std::string& s, int row, const char* what) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("manifest row " + std::to_string(row) + ": bad " + what +
                    " value '" + s + "'");
  }
}

static const char* kManifestHeader = "path,subject,view,condition,seq_index,split";

std::vector<ManifestEntry> load_manifest(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot open manifest: " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("manifest is empty: " + csv_path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader)
    throw DataError("manifest header must be '" + std::string(kManifestHeader) +
                    "', got '" + line + "'");
  std::vector<ManifestEntry> entries;
  std::set<std::tuple<int, int, std::string, int>> keys;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 6)
      throw DataError("manifest row " + std::to_string(row) + ": expected 6 fields, got " +
                      std::to_string(fields.size()));
    ManifestEntry e;
    e.path = fields[0];
    e.subject = parse_int(fields[1], row, "subject");
    e.view = parse_int(fields[2], row, "view");
    e.condition = fields[3];
    e.seq_index = parse_int(fields[4], row, "seq_index");
    e.split = fields[5];
    if (e.split != "Training" && e.split != "Gallery" && e.split != "Probe")
      throw DataError("manifest row " + std::to_string(row) + ": split must be "
                      "Training|Gallery|Probe, got '" + e.split + "'");
    auto key = std::make_tuple(e.subject, e.view, e.condition, e.seq_index);
    if (!keys.insert(key).second)
      throw DataError("manifest row " + std::to_string(row) + ": duplicate key (" +
                      fields[1] + "," + fields[2] + "," + e.condition + "," + fields[4] + ")");
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw DataError("manifest has no entries: " + csv_path);
  return entries;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw DataError("cannot write manifest: " + csv_path);
  out << kManifestHeader << "\n";
  for (const auto& e : entries)
    out << e.path << "," << e.subject << "," << e.view << "," << e.condition << ","
        << e.seq_index << "," << e.split << "\n";
}

SilhouetteSequence load_sequence(const ManifestEntry& entry, const std::string& root,
                                 bool preprocess) {
  std::string dir = join_path(root, entry.path);
  if (!fs::is_directory(dir))
    throw MissingFrames("sequence directory not found: " + dir);

  // numeric filename order; ties broken lexicographically
  std::vector<std::pair<long long, std::string>> files;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (!de.is_regular_file()) continue;
    std::string ext = de.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext != ".png" && ext != ".pgm") continue;
    std::string stem = de.path().stem().string();
    long long num = std::numeric_limits<long long>::max();
    size_t d0 = stem.find_first_of("0123456789");
    if (d0 != std::string::npos) num = std::stoll(stem.substr(d0));
    files.emplace_back(num, de.path().string());
  }
  if (files.empty()) throw MissingFrames("no frames in: " + dir);
  std::sort(files.begin(), files.end());

  SilhouetteSequence seq;
  seq.subject_id = entry.subject;
  seq.view = entry.view;
  seq.condition = entry.condition;
  seq.seq_index = entry.seq_index;
  for (size_t i = 0; i < files.size(); ++i) {
    Image img = load_image(files[i].second);
    try {
      if (preprocess) {
        seq.frames.push_back(preprocess_frame(img));
      } else {
        if (img.rows != 64 || img.cols != 64)
          throw DataError("expected 64x64 frame: " + files[i].second);
        SilhouetteFrame f;
        f.src_rows = img.rows;
        f.src_cols = img.cols;
        f.pixels.resize(64 * 64);
        for (int p = 0; p < 64 * 64; ++p)
          f.pixels[static_cast<size_t>(p)] = img.pixels[static_cast<size_t>(p)] >= 0.5 ? 1.0 : 0.0;
        seq.frames.push_back(std::move(f));
      }
    } catch (const EmptySilhouette&) {
      throw EmptySilhouette("empty silhouette at frame " + std::to_string(i) +
                            " of " + dir);
    }
  }
  return seq;
}

}  // namespace gait
