#include <gaitrec/gaitrec.h>

#include <cstring>
#include <filesystem>
#include <set>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "toyset.hpp"
#include "train.hpp"

namespace fs = std::filesystem;
using namespace gait;

struct gr_dataset {
  Dataset ds;
};

struct gr_model {
  ModelParams params;
};

namespace {

thread_local std::string tl_error;

gr_status fail(gr_status code, const std::string& msg) {
  tl_error = msg;
  return code;
}

gr_status from_exception() {
  try {
    throw;
  } catch (const Error& e) {
    tl_error = e.what();
    return static_cast<gr_status>(e.code());
  } catch (const std::exception& e) {
    tl_error = e.what();
    return GR_ERR_INTERNAL;
  }
}

NetDims dims_from(const gr_train_config& cfg) {
  NetDims d;
  d.conv1_ch = cfg.conv1_ch;
  d.conv34_ch = cfg.conv34_ch;
  d.conv56_ch = cfg.conv56_ch;
  d.fc_out = cfg.fc_out;
  d.gru_hidden = cfg.gru_hidden;
  d.bins = cfg.bins;
  d.use_bgru = cfg.no_bgru == 0;
  d.use_attention = cfg.no_attention == 0;
  return d;
}

TrainConfig train_from(const gr_train_config& cfg) {
  TrainConfig t;
  t.steps = cfg.steps;
  t.batch_ids = cfg.batch_ids;
  t.seqs_per_id = cfg.seqs_per_id;
  t.batch_size = cfg.batch_size;
  t.lr = cfg.lr;
  t.margin = cfg.margin;
  t.dropout = cfg.dropout;
  t.seed = cfg.seed;
  return t;
}

std::vector<OcclusionSpec> parse_occlusions(const std::string& arg) {
  auto all = enumerate_occlusion_specs();
  if (arg == "all") return all;
  std::vector<OcclusionSpec> out;
  std::stringstream ss(arg);
  std::string name;
  while (std::getline(ss, name, ',')) {
    bool found = false;
    for (const auto& s : all)
      if (s.name() == name) {
        out.push_back(s);
        found = true;
      }
    if (!found) throw Error(ErrorCode::Protocol, "unknown occlusion spec: " + name);
  }
  return out;
}

}  // namespace

extern "C" {

const char* gr_last_error(void) { return tl_error.c_str(); }

gr_status gr_dataset_open(const char* manifest_csv, gr_dataset** out) {
  if (!manifest_csv || !out) return fail(GR_ERR_INTERNAL, "null argument");
  try {
    auto* ds = new gr_dataset{open_dataset(manifest_csv)};
    *out = ds;
    return GR_OK;
  } catch (...) {
    return from_exception();
  }
}

void gr_dataset_close(gr_dataset* ds) { delete ds; }

gr_status gr_dataset_counts(const gr_dataset* ds, int* sequences, int* subjects,
                            int* views) {
  if (!ds) return fail(GR_ERR_INTERNAL, "null dataset");
  std::set<int> subj, vw;
  for (const auto& e : ds->ds.entries) {
    subj.insert(e.subject);
    vw.insert(e.view);
  }
  if (sequences) *sequences = static_cast<int>(ds->ds.entries.size());
  if (subjects) *subjects = static_cast<int>(subj.size());
  if (views) *views = static_cast<int>(vw.size());
  return GR_OK;
}

gr_status gr_preprocess(const char* manifest_csv, const char* out_dir) {
  if (!manifest_csv || !out_dir) return fail(GR_ERR_INTERNAL, "null argument");
  try {
    Dataset ds = open_dataset(manifest_csv);
    fs::create_directories(out_dir);
    std::vector<ManifestEntry> rebased;
    for (const auto& e : ds.entries) {
      SilhouetteSequence seq = load_sequence(e, ds.root);
      char dir[96];
      std::snprintf(dir, sizeof(dir), "s%04d_v%03d_%s_q%02d", e.subject, e.view,
                    e.condition.c_str(), e.seq_index);
      fs::create_directories(fs::path(out_dir) / dir);
      for (size_t t = 0; t < seq.frames.size(); ++t) {
        char name[16];
        std::snprintf(name, sizeof(name), "%04zu.pgm", t);
        save_frame_pgm(seq.frames[t], (fs::path(out_dir) / dir / name).string());
      }
      ManifestEntry r = e;
      r.path = dir;
      rebased.push_back(std::move(r));
    }
    save_manifest(rebased, (fs::path(out_dir) / "manifest.csv").string());
    return GR_OK;
  } catch (...) {
    return from_exception();
  }
}

void gr_train_config_defaults(gr_train_config* cfg) {
  if (!cfg) return;
  std::memset(cfg, 0, sizeof(*cfg));
  cfg->seed = 0;
  cfg->steps = 100;
  cfg->batch_ids = 8;
  cfg->seqs_per_id = 2;
  cfg->batch_size = 32;
  cfg->lr = 0.0001;
  cfg->margin = 0.2;
  cfg->dropout = 0.1;
  cfg->conv1_ch = 64;
  cfg->conv34_ch = 128;
  cfg->conv56_ch = 256;
  cfg->fc_out = 256;
  cfg->gru_hidden = 128;
  cfg->bins = 16;
}

gr_status gr_train_stage1(const gr_dataset* ds, const gr_train_config* cfg,
                          const char* out_checkpoint, const char* log_csv) {
  if (!ds || !cfg || !out_checkpoint) return fail(GR_ERR_INTERNAL, "null argument");
  try {
    ModelParams params = init_params(dims_from(*cfg), cfg->seed);
    std::ofstream log;
    if (log_csv) {
      log.open(log_csv);
      if (!log) throw DataError(std::string("cannot write log: ") + log_csv);
      log << "step,loss,easy,semi_hard,hard\n";
    }
    train_stage1(ds->ds, params, train_from(*cfg), [&](const StepLog& sl) {
      if (log.is_open())
        log << sl.step << "," << sl.loss << "," << sl.mining.easy << ","
            << sl.mining.semi_hard << "," << sl.mining.hard << "\n";
    });
    save_checkpoint(params, out_checkpoint);
    return GR_OK;
  } catch (...) {
    return from_exception();
  }
}

gr_status gr_train_stage2(const gr_dataset* ds, const gr_train_config* cfg,
                          const char* stage1_checkpoint, const char* out_checkpoint,
                          const char* log_csv) {
  if (!ds || !cfg || !stage1_checkpoint || !out_checkpoint)
    return fail(GR_ERR_INTERNAL, "null argument");
  if (!fs::exists(stage1_checkpoint))
    return fail(GR_ERR_PREREQ,
                std::string("stage-1 checkpoint not found: ") + stage1_checkpoint);
  try {
    ModelParams stage1 = load_checkpoint(stage1_checkpoint);
    auto training = ds->ds.split("Training");
    if (training.empty()) throw DegenerateBatch("no Training entries in manifest");
    std::set<int> subjects;
    for (const auto& e : training) subjects.insert(e.subject);

    NetDims head = dims_from(*cfg);
    ModelParams params =
        attach_head(stage1, head, static_cast<int>(subjects.size()), cfg->seed + 1);
    bool train_fc = params.dims.bins != stage1.dims.bins ||
                    params.dims.fc_out != stage1.dims.fc_out;

    GcemCache cache = build_gcem_cache(ds->ds, training, params);
    std::ofstream log;
    if (log_csv) {
      log.open(log_csv);
      if (!log) throw DataError(std::string("cannot write log: ") + log_csv);
      log << "step,loss,accuracy\n";
    }
    train_stage2(cache, params, train_from(*cfg), train_fc, [&](const StepLog& sl) {
      if (log.is_open())
        log << sl.step << "," << sl.loss << "," << sl.accuracy << "\n";
    });
    save_checkpoint(params, out_checkpoint);
    return GR_OK;
  } catch (...) {
    return from_exception();
  }
}

gr_status gr_model_open(const char* checkpoint, gr_model** out) {
  if (!checkpoint || !out) return fail(GR_ERR_INTERNAL, "null argument");
  try {
    *out = new gr_model{load_checkpoint(checkpoint)};
    return GR_OK;
  } catch (...) {
    return from_exception();
  }
}

void gr_model_close(gr_model* m) { delete m; }

gr_status gr_model_embedding_len(const gr_model* m, int* out_len) {
  if (!m || !out_len) return fail(GR_ERR_INTERNAL, "null argument");
  *out_len = m->params.dims.embedding_len();
  return GR_OK;
}

gr_status gr_embed(const gr_model* m, const gr_dataset* ds, const char* out_csv,
                   const char* attention_csv) {
  if (!m || !ds || !out_csv) return fail(GR_ERR_INTERNAL, "null argument");
  try {
    std::ofstream out(out_csv);
    if (!out) throw DataError(std::string("cannot write: ") + out_csv);
    std::ofstream att;
    if (attention_csv) {
      att.open(attention_csv);
      if (!att) throw DataError(std::string("cannot write: ") + attention_csv);
    }
    int len = m->params.dims.embedding_len();
    out << "subject,view,condition,seq_index";
    for (int i = 0; i < len; ++i) out << ",af_" << i;
    out << "\n";
    if (att.is_open()) {
      att << "subject,view,condition,seq_index";
      for (int b = 0; b < m->params.dims.bins; ++b) att << ",a_" << b;
      att << "\n";
    }
    out.precision(17);
    att.precision(17);
    for (const auto& e : ds->ds.entries) {
      std::vector<double> weights;
      Tensor af;
      try {
        af = embed_sequence(load_sequence(e, ds->ds.root), m->params, &weights);
      } catch (const ShapeMismatch& ex) {
        throw CheckpointError(std::string("checkpoint incompatible with input: ") +
                              ex.what());
      }
      out << e.subject << "," << e.view << "," << e.condition << "," << e.seq_index;
      for (double v : af.data) out << "," << v;
      out << "\n";
      if (att.is_open()) {
        att << e.subject << "," << e.view << "," << e.condition << "," << e.seq_index;
        for (double v : weights) att << "," << v;
        att << "\n";
      }
    }
    return GR_OK;
  } catch (...) {
    return from_exception();
  }
}

gr_status gr_evaluate(const gr_model* m, const gr_dataset* ds, const char* protocol,
                      int exclude_identical_views, const char* occlusions,
                      const char* out_json) {
  if (!m || !ds || !protocol || !out_json) return fail(GR_ERR_INTERNAL, "null argument");
  try {
    ProtocolSpec spec;
    spec.name = protocol;
    spec.exclude_identical_views = exclude_identical_views != 0;
    SplitAssignment split = apply_protocol(ds->ds.entries, spec);
    if (split.gallery.empty()) throw EmptyGalleryView("protocol yields empty gallery");
    if (split.probe.empty())
      throw Error(ErrorCode::Protocol, "protocol yields empty probe set");

    std::string occ_arg = occlusions ? occlusions : "none";
    nlohmann::json j;
    if (occ_arg == "none" || occ_arg.empty()) {
      EvalReport rep =
          evaluate_cross_view(embed_entries(ds->ds, split.gallery, m->params),
                              embed_entries(ds->ds, split.probe, m->params), spec);
      j = nlohmann::json::parse(rep.to_json());
    } else {
      auto specs = parse_occlusions(occ_arg);
      OcclusionExperiment exp = occlusion_experiment(
          ds->ds, split.gallery, split.probe, m->params, spec, specs);
      j["clean"] = nlohmann::json::parse(exp.clean.to_json());
      nlohmann::json occ = nlohmann::json::array();
      nlohmann::json degr = nlohmann::json::array();
      for (const auto& r : exp.occluded) {
        occ.push_back({{"spec", r.spec.name()},
                       {"report", nlohmann::json::parse(r.report.to_json())}});
        degr.push_back({{"spec", r.spec.name()},
                        {"occluded_mean", r.report.mean},
                        {"degradation", r.degradation}});
      }
      j["occluded"] = occ;
      j["degradation"] = degr;
    }
    std::ofstream out(out_json);
    if (!out) throw DataError(std::string("cannot write: ") + out_json);
    out << j.dump(2) << "\n";
    return GR_OK;
  } catch (...) {
    return from_exception();
  }
}

gr_status gr_synth_dataset(const char* out_dir, const char* manifest_csv, int n_ids,
                           int n_views, int n_seqs, int n_frames, uint64_t seed) {
  if (!out_dir || !manifest_csv) return fail(GR_ERR_INTERNAL, "null argument");
  try {
    ToyConfig cfg;
    cfg.n_ids = n_ids;
    cfg.n_views = n_views;
    cfg.n_seqs = n_seqs;
    cfg.n_frames = n_frames;
    cfg.seed = seed;
    write_toy_dataset(cfg, out_dir, manifest_csv);
    return GR_OK;
  } catch (...) {
    return from_exception();
  }
}

}  // extern "C"
