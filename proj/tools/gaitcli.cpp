// gaitcli: command-line front end over the gaitrec C API.
//
// Exit codes: 0 success, 1 internal error, 2 data error, 3 missing
// prerequisite, 4 protocol error, 5 checkpoint error.
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <gaitrec/gaitrec.h>

namespace {

// keys accepted in a config file; flags override file values
const std::set<std::string> kConfigKeys = {
    "seed",       "steps",      "batch_ids",  "seqs_per_id", "batch_size",
    "lr",         "margin",     "dropout",    "conv1_ch",    "conv34_ch",
    "conv56_ch",  "fc_out",     "gru_hidden", "bins",        "no_bgru",
    "no_attention", "global_rep", "protocol", "exclude_identical_views",
    "manifest",   "checkpoint", "stage1_checkpoint", "out",  "log",
    "occlusions"};

int fail(gr_status st) {
  std::fprintf(stderr, "error: %s\n", gr_last_error());
  return static_cast<int>(st);
}

int fail_data(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return GR_ERR_DATA;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// key = value lines with optional [section] headers and # comments
bool load_config_file(const std::string& path, std::map<std::string, std::string>& kv,
                      std::string& err) {
  std::ifstream in(path);
  if (!in) {
    err = "cannot open config file: " + path;
    return false;
  }
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[' && s.back() == ']') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos) {
      err = path + ":" + std::to_string(row) + ": expected key = value";
      return false;
    }
    std::string key = trim(s.substr(0, eq));
    if (!kConfigKeys.count(key)) {
      err = path + ":" + std::to_string(row) + ": unknown key '" + key + "'";
      return false;
    }
    kv[key] = trim(s.substr(eq + 1));
  }
  return true;
}

struct Options {
  gr_train_config train{};
  std::string manifest, checkpoint, stage1_checkpoint, out, log;
  std::string protocol = "custom";
  std::string occlusions = "none";
  bool exclude_identical_views = true;
  bool no_bgru = false, no_attention = false, global_rep = false;
};

bool apply_config(const std::map<std::string, std::string>& kv, Options& o,
                  std::string& err) {
  try {
    for (const auto& [k, v] : kv) {
      if (k == "seed") o.train.seed = std::stoull(v);
      else if (k == "steps") o.train.steps = std::stoi(v);
      else if (k == "batch_ids") o.train.batch_ids = std::stoi(v);
      else if (k == "seqs_per_id") o.train.seqs_per_id = std::stoi(v);
      else if (k == "batch_size") o.train.batch_size = std::stoi(v);
      else if (k == "lr") o.train.lr = std::stod(v);
      else if (k == "margin") o.train.margin = std::stod(v);
      else if (k == "dropout") o.train.dropout = std::stod(v);
      else if (k == "conv1_ch") o.train.conv1_ch = std::stoi(v);
      else if (k == "conv34_ch") o.train.conv34_ch = std::stoi(v);
      else if (k == "conv56_ch") o.train.conv56_ch = std::stoi(v);
      else if (k == "fc_out") o.train.fc_out = std::stoi(v);
      else if (k == "gru_hidden") o.train.gru_hidden = std::stoi(v);
      else if (k == "bins") o.train.bins = std::stoi(v);
      else if (k == "no_bgru") o.no_bgru = std::stoi(v) != 0;
      else if (k == "no_attention") o.no_attention = std::stoi(v) != 0;
      else if (k == "global_rep") o.global_rep = std::stoi(v) != 0;
      else if (k == "protocol") o.protocol = v;
      else if (k == "exclude_identical_views") o.exclude_identical_views = std::stoi(v) != 0;
      else if (k == "manifest") o.manifest = v;
      else if (k == "checkpoint") o.checkpoint = v;
      else if (k == "stage1_checkpoint") o.stage1_checkpoint = v;
      else if (k == "out") o.out = v;
      else if (k == "log") o.log = v;
      else if (k == "occlusions") o.occlusions = v;
    }
  } catch (const std::exception&) {
    err = "config: non-numeric value for numeric key";
    return false;
  }
  return true;
}

struct DatasetGuard {
  gr_dataset* ds = nullptr;
  ~DatasetGuard() { gr_dataset_close(ds); }
};
struct ModelGuard {
  gr_model* m = nullptr;
  ~ModelGuard() { gr_model_close(m); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"view-invariant gait recognition pipeline"};
  app.require_subcommand(1);

  Options o;
  gr_train_config_defaults(&o.train);
  std::string config_path;

  // ---- preprocess ----
  auto* pre = app.add_subcommand("preprocess", "normalize silhouettes to 64x64");
  std::string pre_manifest, pre_out;
  pre->add_option("--manifest", pre_manifest, "input manifest CSV")->required();
  pre->add_option("--out", pre_out, "output directory")->required();

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a procedural toy dataset");
  std::string sy_out, sy_manifest;
  int sy_ids = 8, sy_views = 4, sy_seqs = 4, sy_frames = 16;
  uint64_t sy_seed = 0;
  synth->add_option("--out", sy_out, "output directory")->required();
  synth->add_option("--manifest", sy_manifest, "manifest CSV to write")->required();
  synth->add_option("--ids", sy_ids, "number of identities");
  synth->add_option("--views", sy_views, "number of views");
  synth->add_option("--seqs", sy_seqs, "sequences per identity and view");
  synth->add_option("--frames", sy_frames, "frames per sequence");
  synth->add_option("--seed", sy_seed, "generator seed");

  // ---- train ----
  auto* train = app.add_subcommand("train", "train stage 1 or stage 2");
  int stage = 1;
  train->add_option("--stage", stage, "training stage, 1 or 2")
      ->check(CLI::IsMember({1, 2}));
  train->add_option("--config", config_path, "config file (key = value)");
  train->add_option("--manifest", o.manifest, "manifest CSV");
  train->add_option("--out", o.out, "output checkpoint");
  train->add_option("--log", o.log, "training log CSV");
  train->add_option("--resume", o.stage1_checkpoint,
                    "stage-1 checkpoint (required for stage 2)");
  train->add_option("--seed", o.train.seed, "rng seed");
  train->add_option("--steps", o.train.steps, "optimizer steps");
  train->add_option("--batch-ids", o.train.batch_ids, "identities per batch (stage 1)");
  train->add_option("--seqs-per-id", o.train.seqs_per_id,
                    "sequences per identity (stage 1)");
  train->add_option("--batch-size", o.train.batch_size, "batch size (stage 2)");
  train->add_option("--lr", o.train.lr, "learning rate");
  train->add_option("--margin", o.train.margin, "triplet margin");
  train->add_option("--dropout", o.train.dropout, "dropout rate (stage 2)");
  train->add_option("--conv1-ch", o.train.conv1_ch, "channels, conv blocks 1-2");
  train->add_option("--conv34-ch", o.train.conv34_ch, "channels, conv blocks 3-4");
  train->add_option("--conv56-ch", o.train.conv56_ch, "channels, conv blocks 5-6");
  train->add_option("--fc-out", o.train.fc_out, "per-bin FC output width");
  train->add_option("--gru-hidden", o.train.gru_hidden, "GRU hidden width");
  train->add_option("--bins", o.train.bins, "horizontal bin count");
  train->add_flag("--no-bgru", o.no_bgru, "drop the recurrent layer");
  train->add_flag("--no-attention", o.no_attention, "uniform bin weighting");
  train->add_flag("--global-rep", o.global_rep, "single global bin (bins = 1)");

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "cross-view rank-1 evaluation");
  eval->add_option("--config", config_path, "config file (key = value)");
  eval->add_option("--checkpoint", o.checkpoint, "model checkpoint");
  eval->add_option("--manifest", o.manifest, "manifest CSV");
  eval->add_option("--protocol", o.protocol,
                   "custom | casia-b-nm | casia-b-bg | casia-b-cl");
  eval->add_option("--occlusions", o.occlusions,
                   "none | all | comma-separated spec names");
  eval->add_flag("!--include-identical-views", o.exclude_identical_views,
                 "score identical probe/gallery views too");
  eval->add_option("--out", o.out, "report JSON path");

  // ---- embed ----
  auto* embed = app.add_subcommand("embed", "write per-sequence embeddings");
  std::string attention_csv;
  embed->add_option("--config", config_path, "config file (key = value)");
  embed->add_option("--checkpoint", o.checkpoint, "model checkpoint");
  embed->add_option("--manifest", o.manifest, "manifest CSV");
  embed->add_option("--out", o.out, "embedding CSV path");
  embed->add_option("--attention-out", attention_csv, "attention-weight CSV path");

  CLI11_PARSE(app, argc, argv);

  // file values first, then re-parse so explicit flags win
  if (!config_path.empty()) {
    std::map<std::string, std::string> kv;
    std::string err;
    if (!load_config_file(config_path, kv, err)) return fail_data(err);
    if (!apply_config(kv, o, err)) return fail_data(err);
    app.clear();
    CLI11_PARSE(app, argc, argv);
  }
  o.train.no_bgru = o.no_bgru ? 1 : 0;
  o.train.no_attention = o.no_attention ? 1 : 0;
  if (o.global_rep) o.train.bins = 1;

  if (pre->parsed()) {
    gr_status st = gr_preprocess(pre_manifest.c_str(), pre_out.c_str());
    if (st != GR_OK) return fail(st);
    DatasetGuard g;
    std::string rebased = pre_out + "/manifest.csv";
    if (gr_dataset_open(rebased.c_str(), &g.ds) == GR_OK) {
      int seqs = 0, subjects = 0, views = 0;
      gr_dataset_counts(g.ds, &seqs, &subjects, &views);
      std::printf("preprocessed %d sequences (%d subjects, %d views) -> %s\n", seqs,
                  subjects, views, pre_out.c_str());
    }
    return 0;
  }

  if (synth->parsed()) {
    gr_status st = gr_synth_dataset(sy_out.c_str(), sy_manifest.c_str(), sy_ids,
                                    sy_views, sy_seqs, sy_frames, sy_seed);
    if (st != GR_OK) return fail(st);
    std::printf("wrote %d sequences -> %s\n", sy_ids * sy_views * sy_seqs,
                sy_out.c_str());
    return 0;
  }

  if (train->parsed()) {
    if (o.manifest.empty() || o.out.empty())
      return fail_data("train: --manifest and --out are required (flag or config)");
    DatasetGuard g;
    gr_status st = gr_dataset_open(o.manifest.c_str(), &g.ds);
    if (st != GR_OK) return fail(st);
    const char* log = o.log.empty() ? nullptr : o.log.c_str();
    if (stage == 1) {
      st = gr_train_stage1(g.ds, &o.train, o.out.c_str(), log);
    } else {
      if (o.stage1_checkpoint.empty()) {
        std::fprintf(stderr, "error: stage 2 requires --resume <stage-1 checkpoint>\n");
        return GR_ERR_PREREQ;
      }
      st = gr_train_stage2(g.ds, &o.train, o.stage1_checkpoint.c_str(), o.out.c_str(),
                           log);
    }
    if (st != GR_OK) return fail(st);
    std::printf("stage %d done -> %s\n", stage, o.out.c_str());
    return 0;
  }

  if (eval->parsed()) {
    if (o.checkpoint.empty() || o.manifest.empty() || o.out.empty())
      return fail_data("eval: --checkpoint, --manifest and --out are required");
    ModelGuard m;
    gr_status st = gr_model_open(o.checkpoint.c_str(), &m.m);
    if (st != GR_OK) return fail(st);
    DatasetGuard g;
    st = gr_dataset_open(o.manifest.c_str(), &g.ds);
    if (st != GR_OK) return fail(st);
    st = gr_evaluate(m.m, g.ds, o.protocol.c_str(),
                     o.exclude_identical_views ? 1 : 0, o.occlusions.c_str(),
                     o.out.c_str());
    if (st != GR_OK) return fail(st);
    std::printf("report -> %s\n", o.out.c_str());
    return 0;
  }

  if (embed->parsed()) {
    if (o.checkpoint.empty() || o.manifest.empty() || o.out.empty())
      return fail_data("embed: --checkpoint, --manifest and --out are required");
    ModelGuard m;
    gr_status st = gr_model_open(o.checkpoint.c_str(), &m.m);
    if (st != GR_OK) return fail(st);
    DatasetGuard g;
    st = gr_dataset_open(o.manifest.c_str(), &g.ds);
    if (st != GR_OK) return fail(st);
    st = gr_embed(m.m, g.ds, o.out.c_str(),
                  attention_csv.empty() ? nullptr : attention_csv.c_str());
    if (st != GR_OK) return fail(st);
    std::printf("embeddings -> %s\n", o.out.c_str());
    return 0;
  }
  return 0;
}
