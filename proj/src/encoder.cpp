#include "encoder.hpp"

namespace gait {

TapeParams bind_params(Tape& t, const ModelParams& params) {
  TapeParams tp;
  for (const auto& [name, tensor] : params.tensors) tp.vars[name] = t.input(tensor);
  return tp;
}

Var frame_input(Tape& t, const SilhouetteFrame& f) {
  Tensor x({f.rows, f.cols, 1});
  x.data = f.pixels;
  return t.input(std::move(x));
}

Var encode_frame(Tape& t, Var frame, const TapeParams& p, const NetDims& d) {
  const Tensor& v = t.value(frame);
  if (v.ndim() != 3 || v.dim(0) != d.input_hw || v.dim(1) != d.input_hw || v.dim(2) != 1)
    throw ShapeMismatch("encode_frame: expected [" + std::to_string(d.input_hw) + "," +
                        std::to_string(d.input_hw) + ",1], got " + shape_str(v.shape));
  auto conv = [&](Var x, const std::string& layer, int pad) {
    return t.relu(t.conv2d(x, p.at("encoder." + layer + ".weight"),
                           p.at("encoder." + layer + ".bias"), pad));
  };
  Var x = conv(frame, "conv1", 2);
  x = conv(x, "conv2", 1);
  x = t.maxpool2(x);
  x = conv(x, "conv3", 1);
  x = conv(x, "conv4", 1);
  x = t.maxpool2(x);
  x = conv(x, "conv5", 1);
  x = conv(x, "conv6", 1);
  return x;
}

Var temporal_pool(Tape& t, const std::vector<Var>& frame_features) {
  if (frame_features.empty()) throw EmptySequence("temporal_pool: no frames");
  return t.mean_stack(frame_features);
}

Var encode_sequence(Tape& t, const SilhouetteSequence& seq, const TapeParams& p,
                    const NetDims& d) {
  if (seq.frames.empty()) throw EmptySequence("encode_sequence: sequence has no frames");
  std::vector<Var> feats;
  feats.reserve(seq.frames.size());
  for (const auto& f : seq.frames)
    feats.push_back(encode_frame(t, frame_input(t, f), p, d));
  return temporal_pool(t, feats);
}

Tensor encode_sequence_value(const SilhouetteSequence& seq, const ModelParams& params) {
  Tape t;
  TapeParams tp = bind_params(t, params);
  Var gcem = encode_sequence(t, seq, tp, params.dims);
  return t.value(gcem);
}

}  // namespace gait
