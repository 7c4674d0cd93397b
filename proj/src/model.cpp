#include "model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace gait {

void NetDims::validate() const {
  if (input_hw < 8 || input_hw % 4 != 0)
    throw ShapeMismatch("input_hw must be a multiple of 4, >= 8");
  if (map_hw() % bins != 0)
    throw InvalidBinCount("bin count " + std::to_string(bins) +
                          " does not divide map side " + std::to_string(map_hw()));
  if (conv1_ch <= 0 || conv34_ch <= 0 || conv56_ch <= 0 || fc_out <= 0 || gru_hidden <= 0)
    throw ShapeMismatch("layer widths must be positive");
}

Tensor& ModelParams::at(const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw CheckpointError("missing tensor: " + name);
  return it->second;
}

const Tensor& ModelParams::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw CheckpointError("missing tensor: " + name);
  return it->second;
}

static Tensor uniform_fanin(std::vector<int> shape, int fan_in, std::mt19937_64& rng) {
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (double& v : t.data) v = dist(rng);
  return t;
}

ModelParams init_params(const NetDims& dims, uint64_t seed) {
  dims.validate();
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.dims = dims;

  auto conv = [&](const std::string& name, int kh, int kw, int cin, int cout) {
    p.tensors[name + ".weight"] = uniform_fanin({kh, kw, cin, cout}, kh * kw * cin, rng);
    p.tensors[name + ".bias"] = Tensor({cout});
  };
  conv("encoder.conv1", 5, 5, 1, dims.conv1_ch);
  conv("encoder.conv2", 3, 3, dims.conv1_ch, dims.conv1_ch);
  conv("encoder.conv3", 3, 3, dims.conv1_ch, dims.conv34_ch);
  conv("encoder.conv4", 3, 3, dims.conv34_ch, dims.conv34_ch);
  conv("encoder.conv5", 3, 3, dims.conv34_ch, dims.conv56_ch);
  conv("encoder.conv6", 3, 3, dims.conv56_ch, dims.conv56_ch);

  auto fc = [&](const std::string& name, int m, int n) {
    p.tensors[name + ".weight"] = uniform_fanin({m, n}, n, rng);
    p.tensors[name + ".bias"] = Tensor({m});
  };
  fc("head.fc", dims.fc_out, dims.bin_flat());

  if (dims.use_bgru) {
    int h = dims.gru_hidden;
    int in = dims.fc_out + h;
    for (const char* dir : {"fwd", "bwd"})
      for (const char* gate : {"update", "reset", "candidate"})
        fc("head.gru_" + std::string(dir) + "." + gate, h, in);
  }
  if (dims.use_attention) {
    int w = dims.recurrent_width();
    fc("head.attention", w, w);
  }
  if (dims.num_classes > 0) fc("classifier", dims.num_classes, dims.embedding_len());
  return p;
}

ModelParams attach_head(const ModelParams& stage1, const NetDims& head_dims,
                        int num_classes, uint64_t seed) {
  NetDims d = head_dims;
  d.input_hw = stage1.dims.input_hw;
  d.conv1_ch = stage1.dims.conv1_ch;
  d.conv34_ch = stage1.dims.conv34_ch;
  d.conv56_ch = stage1.dims.conv56_ch;
  d.num_classes = num_classes;
  ModelParams out = init_params(d, seed);
  for (const auto& [name, t] : stage1.tensors) {
    auto it = out.tensors.find(name);
    if (it != out.tensors.end() && same_shape(it->second, t)) it->second = t;
  }
  return out;
}

static const char kMagic[8] = {'G', 'A', 'I', 'T', 'C', 'K', 'P', '1'};

template <typename T>
static void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
static void read_raw(std::ifstream& in, T& v, const std::string& what) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw CheckpointError("truncated checkpoint while reading " + what);
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);
  out.write(kMagic, 8);
  const NetDims& d = params.dims;
  int32_t meta[10] = {d.input_hw, d.conv1_ch, d.conv34_ch, d.conv56_ch,
                      d.fc_out,   d.gru_hidden, d.bins,    d.num_classes,
                      d.use_bgru ? 1 : 0, d.use_attention ? 1 : 0};
  out.write(reinterpret_cast<const char*>(meta), sizeof(meta));
  write_raw(out, static_cast<uint32_t>(params.tensors.size()));
  for (const auto& [name, t] : params.tensors) {
    write_raw(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_raw(out, static_cast<uint32_t>(t.shape.size()));
    for (int dim : t.shape) write_raw(out, static_cast<int32_t>(dim));
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
  if (!out) throw CheckpointError("write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw CheckpointError("bad checkpoint magic: " + path);
  int32_t meta[10];
  in.read(reinterpret_cast<char*>(meta), sizeof(meta));
  if (!in) throw CheckpointError("truncated checkpoint header: " + path);
  ModelParams p;
  p.dims.input_hw = meta[0];
  p.dims.conv1_ch = meta[1];
  p.dims.conv34_ch = meta[2];
  p.dims.conv56_ch = meta[3];
  p.dims.fc_out = meta[4];
  p.dims.gru_hidden = meta[5];
  p.dims.bins = meta[6];
  p.dims.num_classes = meta[7];
  p.dims.use_bgru = meta[8] != 0;
  p.dims.use_attention = meta[9] != 0;

  uint32_t count = 0;
  read_raw(in, count, "tensor count");
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = 0;
    read_raw(in, name_len, "tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw CheckpointError("truncated checkpoint while reading tensor name");
    uint32_t ndim = 0;
    read_raw(in, ndim, name + " rank");
    std::vector<int> shape(ndim);
    for (auto& dim : shape) {
      int32_t v = 0;
      read_raw(in, v, name + " shape");
      dim = v;
    }
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!in) throw CheckpointError("truncated checkpoint while reading tensor " + name);
    p.tensors[name] = std::move(t);
  }
  return p;
}

}  // namespace gait
