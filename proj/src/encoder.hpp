#pragma once

#include <map>

#include "model.hpp"
#include "silhouette.hpp"
#include "tape.hpp"

namespace gait {

/// Model tensors bound onto a tape as leaves for one forward/backward pass.
struct TapeParams {
  std::map<std::string, Var> vars;

  Var at(const std::string& name) const {
    auto it = vars.find(name);
    if (it == vars.end()) throw CheckpointError("unbound tensor: " + name);
    return it->second;
  }
};

TapeParams bind_params(Tape& t, const ModelParams& params);

Var frame_input(Tape& t, const SilhouetteFrame& f);  // [H,W,1]

/// Conv1..Conv6 with ReLU after each convolution and 2x2 max pooling after
/// Conv2 and Conv4. Output is [H/4, W/4, conv56_ch].
Var encode_frame(Tape& t, Var frame, const TapeParams& p, const NetDims& d);

/// Elementwise mean over per-frame feature maps (the GCEM).
Var temporal_pool(Tape& t, const std::vector<Var>& frame_features);

Var encode_sequence(Tape& t, const SilhouetteSequence& seq, const TapeParams& p,
                    const NetDims& d);

/// Inference-only convenience: GCEM of a sequence on a private tape.
Tensor encode_sequence_value(const SilhouetteSequence& seq, const ModelParams& params);

}  // namespace gait
