#pragma once

#include <map>
#include <string>

#include "tensor.hpp"

namespace gait {

/// Layer widths for the full network. Defaults are the production sizes;
/// tests and the toy pipeline shrink them.
struct NetDims {
  int input_hw = 64;
  int conv1_ch = 64;   // Conv1/Conv2, 5x5 then 3x3
  int conv34_ch = 128;
  int conv56_ch = 256;
  int fc_out = 256;
  int gru_hidden = 128;
  int bins = 16;
  int num_classes = 0;  // 0 until stage 2 attaches a classifier
  bool use_bgru = true;
  bool use_attention = true;

  int map_hw() const { return input_hw / 4; }  // spatial side after two pools
  int bin_rows() const { return map_hw() / bins; }
  int bin_flat() const { return bin_rows() * map_hw() * conv56_ch; }
  int recurrent_width() const { return use_bgru ? 2 * gru_hidden : fc_out; }
  int embedding_len() const { return bins * recurrent_width(); }

  void validate() const;
};

/// Named trainable tensors for both subnetworks.
struct ModelParams {
  NetDims dims;
  std::map<std::string, Tensor> tensors;

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const { return tensors.count(name) > 0; }
};

/// Fan-in-scaled uniform weights (|w| <= sqrt(6/fan_in)), zero biases.
/// Deterministic per seed.
ModelParams init_params(const NetDims& dims, uint64_t seed);

/// Stage-2 parameter set derived from a stage-1 model: encoder tensors are
/// copied, the FC is reused when its shape still fits the head configuration
/// (otherwise freshly initialized, as in bin-count ablations), and GRU /
/// attention / classifier weights are initialized from the seed.
ModelParams attach_head(const ModelParams& stage1, const NetDims& head_dims,
                        int num_classes, uint64_t seed);

void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace gait
