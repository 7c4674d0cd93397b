#pragma once

#include <random>

#include "encoder.hpp"

namespace gait {

/// Top-to-bottom horizontal bins of a [S,S,C] GCEM. Bin count must divide S.
std::vector<Var> split_gcem(Tape& t, Var gcem, int bins);

/// ReLU(W * flatten(bin) + b); the same FC weights are shared by every bin.
Var reduce_bin(Tape& t, Var bin, Var w, Var b);

/// One GRU step: gates on [x; h_prev], candidate on [x; r o h_prev],
/// h = (1-z) o h_prev + z o h~.
Var gru_cell(Tape& t, Var x, Var h_prev, Var wz, Var bz, Var wr, Var br, Var wc,
             Var bc);

/// Forward and backward GRU passes over the bin sequence; per-bin outputs are
/// the concatenation [h_fwd_b ; h_bwd_b].
std::vector<Var> bgru(Tape& t, const std::vector<Var>& pf, const TapeParams& p,
                      const NetDims& d);

struct AttentionOut {
  Var af;
  Var weights;  // [B], softmax outputs
};

/// Per-bin score sum(tanh(W H_b + b)), softmax across bins, concatenation of
/// the weighted features.
AttentionOut attention(Tape& t, const std::vector<Var>& h, const TapeParams& p);

struct HeadOut {
  Var af;
  std::vector<double> attention_weights;
};

/// split -> shared FC -> BGRU -> (dropout when training) -> attention.
/// Honors d.use_bgru / d.use_attention ablation switches.
HeadOut forward_head(Tape& t, Var gcem, const TapeParams& p, const NetDims& d,
                     bool training = false, double dropout_rate = 0.1,
                     std::mt19937_64* rng = nullptr);

/// Inference-only embedding of a GCEM tensor.
Tensor embed_gcem(const Tensor& gcem, const ModelParams& params,
                  std::vector<double>* attention_weights = nullptr);

/// Concatenated partial features of a GCEM (subnetwork A output).
Tensor partial_features(const Tensor& gcem, const ModelParams& params);

}  // namespace gait
