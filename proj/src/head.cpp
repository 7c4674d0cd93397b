#include "head.hpp"

namespace gait {

std::vector<Var> split_gcem(Tape& t, Var gcem, int bins) {
  const Tensor& v = t.value(gcem);
  if (v.ndim() != 3) throw ShapeMismatch("split_gcem: expected [S,S,C]");
  int rows = v.dim(0);
  if (bins <= 0 || rows % bins != 0)
    throw InvalidBinCount("bin count " + std::to_string(bins) +
                          " does not divide " + std::to_string(rows) + " rows");
  int per = rows / bins;
  std::vector<Var> out;
  out.reserve(static_cast<size_t>(bins));
  for (int b = 0; b < bins; ++b) out.push_back(t.slice0(gcem, b * per, (b + 1) * per));
  return out;
}

Var reduce_bin(Tape& t, Var bin, Var w, Var b) {
  Var flat = t.reshape(bin, {t.value(bin).size()});
  return t.relu(t.linear(w, flat, b));
}

Var gru_cell(Tape& t, Var x, Var h_prev, Var wz, Var bz, Var wr, Var br, Var wc,
             Var bc) {
  Var xh = t.concat({x, h_prev});
  Var z = t.sigmoid(t.linear(wz, xh, bz));
  Var r = t.sigmoid(t.linear(wr, xh, br));
  Var xrh = t.concat({x, t.mul(r, h_prev)});
  Var cand = t.tanh_(t.linear(wc, xrh, bc));
  Var ones = t.constant(Tensor(t.value(z).shape, 1.0));
  return t.add(t.mul(t.sub(ones, z), h_prev), t.mul(z, cand));
}

static std::vector<Var> gru_direction(Tape& t, const std::vector<Var>& pf,
                                      const TapeParams& p, const NetDims& d,
                                      const std::string& dir, bool reverse) {
  Var wz = p.at("head.gru_" + dir + ".update.weight");
  Var bz = p.at("head.gru_" + dir + ".update.bias");
  Var wr = p.at("head.gru_" + dir + ".reset.weight");
  Var br = p.at("head.gru_" + dir + ".reset.bias");
  Var wc = p.at("head.gru_" + dir + ".candidate.weight");
  Var bc = p.at("head.gru_" + dir + ".candidate.bias");
  int n = static_cast<int>(pf.size());
  std::vector<Var> out(static_cast<size_t>(n));
  Var h = t.constant(Tensor({d.gru_hidden}, 0.0));
  for (int i = 0; i < n; ++i) {
    int b = reverse ? n - 1 - i : i;
    h = gru_cell(t, pf[static_cast<size_t>(b)], h, wz, bz, wr, br, wc, bc);
    out[static_cast<size_t>(b)] = h;
  }
  return out;
}

std::vector<Var> bgru(Tape& t, const std::vector<Var>& pf, const TapeParams& p,
                      const NetDims& d) {
  if (pf.empty()) throw EmptySequence("bgru: no bins");
  auto fwd = gru_direction(t, pf, p, d, "fwd", false);
  auto bwd = gru_direction(t, pf, p, d, "bwd", true);
  std::vector<Var> out;
  out.reserve(pf.size());
  for (size_t b = 0; b < pf.size(); ++b) out.push_back(t.concat({fwd[b], bwd[b]}));
  return out;
}

AttentionOut attention(Tape& t, const std::vector<Var>& h, const TapeParams& p) {
  if (h.empty()) throw EmptySequence("attention: no inputs");
  Var w = p.at("head.attention.weight");
  Var b = p.at("head.attention.bias");
  std::vector<Var> scores;
  scores.reserve(h.size());
  for (Var hb : h) scores.push_back(t.sum(t.tanh_(t.linear(w, hb, b))));
  Var weights = t.softmax(t.concat(scores));
  std::vector<Var> weighted;
  weighted.reserve(h.size());
  for (size_t bi = 0; bi < h.size(); ++bi)
    weighted.push_back(t.bmul(h[bi], t.pick(weights, static_cast<int>(bi))));
  return {t.concat(weighted), weights};
}

HeadOut forward_head(Tape& t, Var gcem, const TapeParams& p, const NetDims& d,
                     bool training, double dropout_rate, std::mt19937_64* rng) {
  auto bins = split_gcem(t, gcem, d.bins);
  Var fw = p.at("head.fc.weight");
  Var fb = p.at("head.fc.bias");
  std::vector<Var> h;
  h.reserve(bins.size());
  for (Var bin : bins) h.push_back(reduce_bin(t, bin, fw, fb));

  if (d.use_bgru) h = bgru(t, h, p, d);

  if (training && dropout_rate > 0.0) {
    if (!rng) throw Error(ErrorCode::Internal, "forward_head: training needs an rng");
    std::bernoulli_distribution keep(1.0 - dropout_rate);
    double scale = 1.0 / (1.0 - dropout_rate);
    for (Var& hb : h) {
      Tensor mask(t.value(hb).shape);
      for (double& m : mask.data) m = keep(*rng) ? scale : 0.0;
      hb = t.mul_const(hb, mask);
    }
  }

  HeadOut out;
  if (d.use_attention) {
    AttentionOut att = attention(t, h, p);
    out.af = att.af;
    out.attention_weights = t.value(att.weights).data;
  } else {
    // uniform importance: every bin keeps weight 1/B
    double inv = 1.0 / static_cast<double>(h.size());
    std::vector<Var> weighted;
    weighted.reserve(h.size());
    for (Var hb : h) weighted.push_back(t.scale(hb, inv));
    out.af = t.concat(weighted);
    out.attention_weights.assign(h.size(), inv);
  }
  return out;
}

Tensor embed_gcem(const Tensor& gcem, const ModelParams& params,
                  std::vector<double>* attention_weights) {
  Tape t;
  TapeParams tp = bind_params(t, params);
  HeadOut out = forward_head(t, t.input(gcem), tp, params.dims, false);
  if (attention_weights) *attention_weights = out.attention_weights;
  return t.value(out.af);
}

Tensor partial_features(const Tensor& gcem, const ModelParams& params) {
  Tape t;
  TapeParams tp = bind_params(t, params);
  auto bins = split_gcem(t, t.input(gcem), params.dims.bins);
  std::vector<Var> pf;
  pf.reserve(bins.size());
  for (Var bin : bins)
    pf.push_back(reduce_bin(t, bin, tp.at("head.fc.weight"), tp.at("head.fc.bias")));
  return t.value(t.concat(pf));
}

}  // namespace gait
