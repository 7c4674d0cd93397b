#pragma once

#include <utility>
#include <vector>

#include "tape.hpp"

namespace gait {

/// Hinge triplet loss, (1/2M) * max(M + d_ap - d_an, 0).
double triplet_loss(double d_ap, double d_an, double margin);

struct MiningReport {
  int easy = 0;
  int semi_hard = 0;
  int hard = 0;
  int averaged = 0;  // positive-loss triplets the batch loss averaged over
  int total() const { return easy + semi_hard + hard; }
};

/// Batch-All mining: all ordered (anchor, positive, negative) triplets with
/// L2 distances; the loss averages positive-loss triplets only.
std::pair<double, MiningReport> batch_all_mining(
    const std::vector<std::vector<double>>& embeddings,
    const std::vector<int>& labels, double margin);

/// -cos(pred, target). Target is expected to be one-hot.
double cosine_proximity_loss(const std::vector<double>& pred,
                             const std::vector<double>& target);

struct AdamState {
  Tensor m;
  Tensor v;
  long t = 0;
};

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Differentiable batch-all loss over embedding nodes on a tape.
Var batch_all_loss(Tape& t, const std::vector<Var>& embeddings,
                   const std::vector<int>& labels, double margin,
                   MiningReport* report = nullptr);

/// Differentiable -cos(pred, target) with a constant target.
Var cosine_loss(Tape& t, Var pred, const Tensor& target);

}  // namespace gait
