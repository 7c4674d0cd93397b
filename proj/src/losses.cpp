#include "losses.hpp"

#include <cmath>
#include <map>

namespace gait {

double triplet_loss(double d_ap, double d_an, double margin) {
  return std::max(margin + d_ap - d_an, 0.0) / (2.0 * margin);
}

static double l2(const std::vector<double>& a, const std::vector<double>& b) {
  double ss = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    ss += d * d;
  }
  return std::sqrt(ss);
}

std::pair<double, MiningReport> batch_all_mining(
    const std::vector<std::vector<double>>& embeddings,
    const std::vector<int>& labels, double margin) {
  size_t n = embeddings.size();
  if (n != labels.size()) throw ShapeMismatch("batch_all_mining: label count mismatch");
  MiningReport rep;
  double loss_sum = 0.0;
  bool any_valid = false;
  for (size_t a = 0; a < n; ++a)
    for (size_t p = 0; p < n; ++p) {
      if (a == p || labels[a] != labels[p]) continue;
      double d_ap = l2(embeddings[a], embeddings[p]);
      for (size_t neg = 0; neg < n; ++neg) {
        if (labels[neg] == labels[a]) continue;
        any_valid = true;
        double d_an = l2(embeddings[a], embeddings[neg]);
        double l = triplet_loss(d_ap, d_an, margin);
        if (l <= 0.0) {
          ++rep.easy;
        } else {
          if (d_ap < d_an)
            ++rep.semi_hard;
          else
            ++rep.hard;
          loss_sum += l;
        }
      }
    }
  if (!any_valid) throw DegenerateBatch("no valid triplet in batch");
  rep.averaged = rep.semi_hard + rep.hard;
  double loss = rep.averaged > 0 ? loss_sum / rep.averaged : 0.0;
  return {loss, rep};
}

double cosine_proximity_loss(const std::vector<double>& pred,
                             const std::vector<double>& target) {
  if (pred.size() != target.size())
    throw ShapeMismatch("cosine_proximity_loss: size mismatch");
  double dot = 0.0, np = 0.0, nt = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    dot += pred[i] * target[i];
    np += pred[i] * pred[i];
    nt += target[i] * target[i];
  }
  if (np == 0.0) throw ZeroVector("cosine_proximity_loss: zero prediction vector");
  if (nt == 0.0) throw ZeroVector("cosine_proximity_loss: zero target vector");
  return -dot / (std::sqrt(np) * std::sqrt(nt));
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  if (!same_shape(param, grad)) throw ShapeMismatch("adam_step: grad shape mismatch");
  if (state.t == 0) {
    state.m = Tensor(param.shape, 0.0);
    state.v = Tensor(param.shape, 0.0);
  }
  ++state.t;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (int i = 0; i < param.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
    double mhat = state.m[i] / bc1;
    double vhat = state.v[i] / bc2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

Var batch_all_loss(Tape& t, const std::vector<Var>& embeddings,
                   const std::vector<int>& labels, double margin,
                   MiningReport* report) {
  size_t n = embeddings.size();
  if (n != labels.size()) throw ShapeMismatch("batch_all_loss: label count mismatch");

  // pairwise distances, built on demand; epsilon keeps sqrt differentiable
  std::map<std::pair<size_t, size_t>, Var> dist;
  auto d = [&](size_t i, size_t j) {
    auto key = std::minmax(i, j);
    auto it = dist.find(key);
    if (it != dist.end()) return it->second;
    Var diff = t.sub(embeddings[i], embeddings[j]);
    Var v = t.sqrt_(t.add_scalar(t.dot(diff, diff), 1e-12));
    dist.emplace(key, v);
    return v;
  };

  MiningReport rep;
  std::vector<Var> positive_hinges;
  bool any_valid = false;
  for (size_t a = 0; a < n; ++a)
    for (size_t p = 0; p < n; ++p) {
      if (a == p || labels[a] != labels[p]) continue;
      for (size_t neg = 0; neg < n; ++neg) {
        if (labels[neg] == labels[a]) continue;
        any_valid = true;
        Var d_ap = d(a, p);
        Var d_an = d(a, neg);
        double gap = margin + t.value(d_ap)[0] - t.value(d_an)[0];
        if (gap <= 0.0) {
          ++rep.easy;
          continue;
        }
        if (t.value(d_ap)[0] < t.value(d_an)[0])
          ++rep.semi_hard;
        else
          ++rep.hard;
        positive_hinges.push_back(t.relu(t.add_scalar(t.sub(d_ap, d_an), margin)));
      }
    }
  if (!any_valid) throw DegenerateBatch("no valid triplet in batch");
  rep.averaged = static_cast<int>(positive_hinges.size());
  if (report) *report = rep;
  if (positive_hinges.empty()) return t.constant(Tensor::scalar(0.0));
  Var total = positive_hinges[0];
  if (positive_hinges.size() > 1) {
    std::vector<Var> scalars = positive_hinges;
    total = t.sum(t.concat(scalars));
  }
  return t.scale(total, 1.0 / (2.0 * margin * rep.averaged));
}

Var cosine_loss(Tape& t, Var pred, const Tensor& target) {
  double np2 = 0.0;
  for (double v : t.value(pred).data) np2 += v * v;
  if (np2 == 0.0) throw ZeroVector("cosine_loss: zero prediction vector");
  double nt = 0.0;
  for (double v : target.data) nt += v * v;
  nt = std::sqrt(nt);
  if (nt == 0.0) throw ZeroVector("cosine_loss: zero target vector");

  Var tgt = t.constant(target);
  Var dot_pt = t.dot(pred, tgt);
  Var norm_p = t.sqrt_(t.dot(pred, pred));
  Var inv_denom = t.recip(t.scale(norm_p, nt));
  return t.scale(t.mul(dot_pt, inv_denom), -1.0);
}

}  // namespace gait
