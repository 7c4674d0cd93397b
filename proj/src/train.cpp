#include "train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include <json.hpp>

namespace gait {

std::vector<ManifestEntry> Dataset::split(const std::string& tag) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == tag) out.push_back(e);
  return out;
}

Dataset open_dataset(const std::string& manifest_csv) {
  Dataset ds;
  ds.entries = load_manifest(manifest_csv);
  ds.root = std::filesystem::path(manifest_csv).parent_path().string();
  return ds;
}

namespace {

// in-memory sequence cache keyed by manifest entry identity
struct SequenceCache {
  const Dataset& ds;
  std::map<std::tuple<int, int, std::string, int>, SilhouetteSequence> cache;

  const SilhouetteSequence& get(const ManifestEntry& e) {
    auto key = std::make_tuple(e.subject, e.view, e.condition, e.seq_index);
    auto it = cache.find(key);
    if (it == cache.end())
      it = cache.emplace(key, load_sequence(e, ds.root)).first;
    return it->second;
  }
};

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

void adam_update(ModelParams& params, const Tape& tape, const TapeParams& tp,
                 std::map<std::string, AdamState>& opt, double lr,
                 const std::function<bool(const std::string&)>& trainable) {
  for (auto& [name, tensor] : params.tensors) {
    if (!trainable(name)) continue;
    adam_step(tensor, tape.grad(tp.at(name)), opt[name], lr);
  }
}

}  // namespace

std::vector<StepLog> train_stage1(const Dataset& train, ModelParams& params,
                                  const TrainConfig& cfg, const StepCallback& on_step) {
  auto entries = train.split("Training");
  std::map<int, std::vector<const ManifestEntry*>> by_id;
  for (const auto& e : entries) by_id[e.subject].push_back(&e);
  int multi = 0;
  for (auto& [id, v] : by_id)
    if (v.size() >= 2) ++multi;
  if (by_id.size() < 2 || multi < 1)
    throw DegenerateBatch("stage 1 needs >= 2 identities with one having >= 2 sequences");

  std::mt19937_64 rng(cfg.seed);
  SequenceCache seqs{train, {}};
  std::map<std::string, AdamState> opt;
  auto trainable = [](const std::string& n) {
    return starts_with(n, "encoder.") || starts_with(n, "head.fc.");
  };

  std::vector<int> ids;
  for (auto& [id, v] : by_id) ids.push_back(id);

  std::vector<StepLog> log;
  for (int step = 0; step < cfg.steps; ++step) {
    // P identities x S sequences, sampled without replacement where possible
    std::shuffle(ids.begin(), ids.end(), rng);
    int p = std::min<int>(cfg.batch_ids, static_cast<int>(ids.size()));
    std::vector<const ManifestEntry*> batch;
    std::vector<int> labels;
    for (int i = 0; i < p; ++i) {
      auto pool = by_id[ids[static_cast<size_t>(i)]];
      std::shuffle(pool.begin(), pool.end(), rng);
      int s = std::min<int>(cfg.seqs_per_id, static_cast<int>(pool.size()));
      for (int j = 0; j < s; ++j) {
        batch.push_back(pool[static_cast<size_t>(j)]);
        labels.push_back(ids[static_cast<size_t>(i)]);
      }
    }

    Tape tape;
    TapeParams tp = bind_params(tape, params);
    Var fw = tp.at("head.fc.weight");
    Var fb = tp.at("head.fc.bias");
    std::vector<Var> embeddings;
    for (const ManifestEntry* e : batch) {
      Var gcem = encode_sequence(tape, seqs.get(*e), tp, params.dims);
      auto bins = split_gcem(tape, gcem, params.dims.bins);
      std::vector<Var> pf;
      pf.reserve(bins.size());
      for (Var bin : bins) pf.push_back(reduce_bin(tape, bin, fw, fb));
      embeddings.push_back(tape.concat(pf));
    }

    StepLog sl;
    sl.step = step;
    Var loss = batch_all_loss(tape, embeddings, labels, cfg.margin, &sl.mining);
    sl.loss = tape.value(loss)[0];
    if (cfg.lr > 0.0 && sl.mining.averaged > 0) {
      tape.backward(loss);
      adam_update(params, tape, tp, opt, cfg.lr, trainable);
    }
    if (on_step) on_step(sl);
    log.push_back(sl);
  }
  return log;
}

GcemCache build_gcem_cache(const Dataset& ds, const std::vector<ManifestEntry>& entries,
                           const ModelParams& params) {
  GcemCache cache;
  cache.meta = entries;
  cache.gcem.reserve(entries.size());
  for (const auto& e : entries)
    cache.gcem.push_back(encode_sequence_value(load_sequence(e, ds.root), params));
  return cache;
}

std::vector<StepLog> train_stage2(const GcemCache& train, ModelParams& params,
                                  const TrainConfig& cfg, bool train_fc,
                                  const StepCallback& on_step) {
  if (train.meta.empty()) throw DegenerateBatch("stage 2: empty training set");

  // class index per subject, in sorted subject order
  std::set<int> subjects;
  for (const auto& e : train.meta) subjects.insert(e.subject);
  std::map<int, int> cls;
  for (int s : subjects) cls.emplace(s, static_cast<int>(cls.size()));
  int num_classes = static_cast<int>(cls.size());

  if (params.dims.num_classes != num_classes || !params.has("classifier.weight"))
    throw Error(ErrorCode::Prerequisite,
                "stage 2: params lack a classifier for " + std::to_string(num_classes) +
                    " classes; derive them with attach_head first");

  std::mt19937_64 rng(cfg.seed);
  std::map<std::string, AdamState> opt;
  auto trainable = [train_fc](const std::string& n) {
    if (starts_with(n, "encoder.")) return false;
    if (starts_with(n, "head.fc.")) return train_fc;
    return true;  // gru, attention, classifier
  };

  std::vector<size_t> order(train.meta.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  size_t cursor = order.size();  // force shuffle on first step

  std::vector<StepLog> log;
  for (int step = 0; step < cfg.steps; ++step) {
    Tape tape;
    TapeParams tp = bind_params(tape, params);
    int correct = 0;
    std::vector<Var> losses;
    int bs = std::min<int>(cfg.batch_size, static_cast<int>(train.meta.size()));
    for (int i = 0; i < bs; ++i) {
      if (cursor >= order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      size_t idx = order[cursor++];
      HeadOut head = forward_head(tape, tape.constant(train.gcem[idx]), tp,
                                  params.dims, true, cfg.dropout, &rng);
      Var logits = tape.linear(tp.at("classifier.weight"), head.af,
                               tp.at("classifier.bias"));
      Var pred = tape.softmax(logits);
      int label = cls.at(train.meta[idx].subject);
      Tensor onehot({num_classes});
      onehot[label] = 1.0;
      losses.push_back(cosine_loss(tape, pred, onehot));
      const Tensor& lv = tape.value(logits);
      int argmax = static_cast<int>(std::max_element(lv.data.begin(), lv.data.end()) -
                                    lv.data.begin());
      if (argmax == label) ++correct;
    }
    Var loss = tape.scale(tape.sum(tape.concat(losses)), 1.0 / bs);

    StepLog sl;
    sl.step = step;
    sl.loss = tape.value(loss)[0];
    sl.accuracy = static_cast<double>(correct) / bs;
    if (cfg.lr > 0.0) {
      tape.backward(loss);
      adam_update(params, tape, tp, opt, cfg.lr, trainable);
    }
    if (on_step) on_step(sl);
    log.push_back(sl);
  }
  return log;
}

Tensor embed_sequence(const SilhouetteSequence& seq, const ModelParams& params,
                      std::vector<double>* attention_weights) {
  return embed_gcem(encode_sequence_value(seq, params), params, attention_weights);
}

EmbeddingSet embed_entries(const Dataset& ds, const std::vector<ManifestEntry>& entries,
                           const ModelParams& params) {
  EmbeddingSet out;
  out.meta = entries;
  for (const auto& e : entries)
    out.af.push_back(embed_sequence(load_sequence(e, ds.root), params).data);
  return out;
}

EmbeddingSet embed_cache(const GcemCache& cache, const ModelParams& params) {
  EmbeddingSet out;
  out.meta = cache.meta;
  for (const auto& g : cache.gcem) out.af.push_back(embed_gcem(g, params).data);
  return out;
}

SplitAssignment apply_protocol(const std::vector<ManifestEntry>& entries,
                               const ProtocolSpec& spec) {
  SplitAssignment out;
  if (spec.name == "custom") {
    for (const auto& e : entries) {
      if (e.split == "Training")
        out.train.push_back(e);
      else if (e.split == "Gallery")
        out.gallery.push_back(e);
      else
        out.probe.push_back(e);
    }
    return out;
  }
  std::string probe_cond;
  if (spec.name == "casia-b-nm")
    probe_cond = "NM";
  else if (spec.name == "casia-b-bg")
    probe_cond = "BG";
  else if (spec.name == "casia-b-cl")
    probe_cond = "CL";
  else
    throw Error(ErrorCode::Protocol, "unknown protocol: " + spec.name);

  std::set<int> subjects;
  for (const auto& e : entries) subjects.insert(e.subject);
  std::set<int> train_subjects;
  for (int s : subjects) {
    if (static_cast<int>(train_subjects.size()) >= 74) break;
    train_subjects.insert(s);
  }

  // gallery: first four NM sequences by seq_index, per subject and view
  std::map<std::pair<int, int>, std::vector<int>> nm_indices;
  for (const auto& e : entries)
    if (!train_subjects.count(e.subject) && e.condition == "NM")
      nm_indices[{e.subject, e.view}].push_back(e.seq_index);
  for (auto& [k, v] : nm_indices) std::sort(v.begin(), v.end());

  for (const auto& e : entries) {
    if (train_subjects.count(e.subject)) {
      out.train.push_back(e);
      continue;
    }
    bool in_gallery = false;
    if (e.condition == "NM") {
      const auto& idx = nm_indices[{e.subject, e.view}];
      auto pos = std::find(idx.begin(), idx.end(), e.seq_index) - idx.begin();
      in_gallery = pos < 4;
    }
    if (in_gallery)
      out.gallery.push_back(e);
    else if (e.condition == probe_cond)
      out.probe.push_back(e);
  }
  return out;
}

EvalReport evaluate_cross_view(const EmbeddingSet& gallery, const EmbeddingSet& probes,
                               const ProtocolSpec& spec) {
  if (gallery.af.empty()) throw EmptyGalleryView("gallery is empty");
  if (probes.af.empty()) throw Error(ErrorCode::Protocol, "probe set is empty");

  std::set<int> pv_set, gv_set;
  for (const auto& e : probes.meta) pv_set.insert(e.view);
  for (const auto& e : gallery.meta) gv_set.insert(e.view);

  EvalReport rep;
  rep.protocol = spec;
  rep.probe_views.assign(pv_set.begin(), pv_set.end());
  rep.gallery_views.assign(gv_set.begin(), gv_set.end());
  rep.gallery_count = static_cast<int>(gallery.af.size());
  rep.probe_count = static_cast<int>(probes.af.size());

  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  std::vector<double> gnorm(gallery.af.size()), pnorm(probes.af.size());
  for (size_t i = 0; i < gallery.af.size(); ++i) gnorm[i] = norm(gallery.af[i]);
  for (size_t i = 0; i < probes.af.size(); ++i) pnorm[i] = norm(probes.af[i]);

  std::map<int, std::vector<size_t>> gallery_by_view;
  for (size_t i = 0; i < gallery.meta.size(); ++i)
    gallery_by_view[gallery.meta[i].view].push_back(i);
  std::map<int, std::vector<size_t>> probes_by_view;
  for (size_t i = 0; i < probes.meta.size(); ++i)
    probes_by_view[probes.meta[i].view].push_back(i);

  rep.rank1.assign(rep.probe_views.size(),
                   std::vector<double>(rep.gallery_views.size(), -1.0));

  for (size_t pi = 0; pi < rep.probe_views.size(); ++pi) {
    int pv = rep.probe_views[pi];
    for (size_t gi = 0; gi < rep.gallery_views.size(); ++gi) {
      int gv = rep.gallery_views[gi];
      if (spec.exclude_identical_views && pv == gv) continue;
      const auto& gidx = gallery_by_view[gv];
      if (gidx.empty())
        throw EmptyGalleryView("no gallery samples at view " + std::to_string(gv));
      int correct = 0, total = 0;
      for (size_t p : probes_by_view[pv]) {
        double best = -2.0;
        size_t best_g = gidx[0];
        for (size_t g : gidx) {
          double dot = 0.0;
          const auto& a = probes.af[p];
          const auto& b = gallery.af[g];
          for (size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
          double sim = dot / std::max(1e-300, pnorm[p] * gnorm[g]);
          if (sim > best) {
            best = sim;
            best_g = g;
          }
        }
        if (gallery.meta[best_g].subject == probes.meta[p].subject) ++correct;
        ++total;
      }
      rep.rank1[pi][gi] = total > 0 ? static_cast<double>(correct) / total : 0.0;
    }
  }

  rep.per_probe_view_mean.resize(rep.probe_views.size());
  for (size_t pi = 0; pi < rep.probe_views.size(); ++pi) {
    double sum = 0.0;
    int n = 0;
    for (double v : rep.rank1[pi])
      if (v >= 0.0) {
        sum += v;
        ++n;
      }
    if (n == 0)
      throw EmptyGalleryView("no usable gallery view for probe view " +
                             std::to_string(rep.probe_views[pi]));
    rep.per_probe_view_mean[pi] = sum / n;
  }
  double sum = 0.0;
  for (double v : rep.per_probe_view_mean) sum += v;
  rep.mean = sum / static_cast<double>(rep.per_probe_view_mean.size());
  double var = 0.0;
  for (double v : rep.per_probe_view_mean) var += (v - rep.mean) * (v - rep.mean);
  rep.sd = std::sqrt(var / static_cast<double>(rep.per_probe_view_mean.size()));
  return rep;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["protocol"] = {{"name", protocol.name},
                   {"exclude_identical_views", protocol.exclude_identical_views}};
  j["probe_views"] = probe_views;
  j["gallery_views"] = gallery_views;
  nlohmann::json matrix = nlohmann::json::array();
  for (const auto& row : rank1) {
    nlohmann::json r = nlohmann::json::array();
    for (double v : row) {
      if (v < 0.0)
        r.push_back(nullptr);
      else
        r.push_back(v);
    }
    matrix.push_back(r);
  }
  j["rank1"] = matrix;
  j["per_probe_view_mean"] = per_probe_view_mean;
  j["mean"] = mean;
  j["sd"] = sd;
  j["sd_kind"] = "population";
  j["counts"] = {{"gallery", gallery_count}, {"probe", probe_count}};
  return j.dump(2);
}

OcclusionExperiment occlusion_experiment(const Dataset& ds,
                                         const std::vector<ManifestEntry>& gallery,
                                         const std::vector<ManifestEntry>& probe,
                                         const ModelParams& params,
                                         const ProtocolSpec& spec,
                                         const std::vector<OcclusionSpec>& specs) {
  std::vector<SilhouetteSequence> gseqs, pseqs;
  gseqs.reserve(gallery.size());
  pseqs.reserve(probe.size());
  for (const auto& e : gallery) gseqs.push_back(load_sequence(e, ds.root));
  for (const auto& e : probe) pseqs.push_back(load_sequence(e, ds.root));

  auto embed_all = [&](const std::vector<SilhouetteSequence>& seqs,
                       const std::vector<ManifestEntry>& meta,
                       const OcclusionSpec* occ) {
    EmbeddingSet out;
    out.meta = meta;
    for (const auto& s : seqs) {
      if (occ) {
        SilhouetteSequence masked = s;
        apply_occlusion_inplace(masked, *occ);
        out.af.push_back(embed_sequence(masked, params).data);
      } else {
        out.af.push_back(embed_sequence(s, params).data);
      }
    }
    return out;
  };

  OcclusionExperiment exp;
  exp.clean = evaluate_cross_view(embed_all(gseqs, gallery, nullptr),
                                  embed_all(pseqs, probe, nullptr), spec);
  for (const auto& occ : specs) {
    OcclusionResult res;
    res.spec = occ;
    res.report = evaluate_cross_view(embed_all(gseqs, gallery, &occ),
                                     embed_all(pseqs, probe, &occ), spec);
    res.degradation = exp.clean.mean - res.report.mean;
    exp.occluded.push_back(std::move(res));
  }
  return exp;
}

}  // namespace gait
