#pragma once

#include <functional>
#include <optional>
#include <random>

#include "head.hpp"
#include "losses.hpp"

namespace gait {

struct Dataset {
  std::string root;  // prepended to relative manifest paths
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> split(const std::string& tag) const;
};

Dataset open_dataset(const std::string& manifest_csv);

struct TrainConfig {
  int stage = 1;
  int steps = 100;
  // stage-1 batches: P identities x S sequences
  int batch_ids = 8;
  int seqs_per_id = 2;
  // stage-2 batch
  int batch_size = 32;
  double lr = 0.0001;
  double margin = 0.2;
  double dropout = 0.1;
  uint64_t seed = 0;
};

struct StepLog {
  int step = 0;
  double loss = 0.0;
  MiningReport mining;   // stage 1
  double accuracy = 0.0; // stage 2
};

using StepCallback = std::function<void(const StepLog&)>;

/// Stage 1: triplet loss with batch-all mining on concatenated partial
/// features; updates encoder + FC parameters with Adam.
std::vector<StepLog> train_stage1(const Dataset& train, ModelParams& params,
                                  const TrainConfig& cfg,
                                  const StepCallback& on_step = {});

/// Per-sequence GCEMs for a set of manifest entries (frozen encoder).
struct GcemCache {
  std::vector<Tensor> gcem;
  std::vector<ManifestEntry> meta;
};

GcemCache build_gcem_cache(const Dataset& ds, const std::vector<ManifestEntry>& entries,
                           const ModelParams& params);

/// Stage 2: cosine-proximity classification on the head; encoder and, unless
/// train_fc is set (ablations with a different bin count), the FC stay frozen.
std::vector<StepLog> train_stage2(const GcemCache& train, ModelParams& params,
                                  const TrainConfig& cfg, bool train_fc = false,
                                  const StepCallback& on_step = {});

/// Full-pipeline embedding of one sequence (dropout off).
Tensor embed_sequence(const SilhouetteSequence& seq, const ModelParams& params,
                      std::vector<double>* attention_weights = nullptr);

struct EmbeddingSet {
  std::vector<std::vector<double>> af;
  std::vector<ManifestEntry> meta;
};

EmbeddingSet embed_entries(const Dataset& ds, const std::vector<ManifestEntry>& entries,
                           const ModelParams& params);
EmbeddingSet embed_cache(const GcemCache& cache, const ModelParams& params);

struct ProtocolSpec {
  // "casia-b-nm" | "casia-b-bg" | "casia-b-cl" | "custom"
  std::string name = "custom";
  bool exclude_identical_views = true;
};

struct SplitAssignment {
  std::vector<ManifestEntry> train;
  std::vector<ManifestEntry> gallery;
  std::vector<ManifestEntry> probe;
};

/// CASIA-B protocols derive the partition from subject/condition/seq_index
/// (74 train subjects, gallery = first 4 NM, probe per condition); "custom"
/// uses the manifest split tags.
SplitAssignment apply_protocol(const std::vector<ManifestEntry>& entries,
                               const ProtocolSpec& spec);

struct EvalReport {
  ProtocolSpec protocol;
  std::vector<int> probe_views;
  std::vector<int> gallery_views;
  std::vector<std::vector<double>> rank1;  // [probe view][gallery view]
  std::vector<double> per_probe_view_mean;
  double mean = 0.0;
  double sd = 0.0;  // population SD across per-probe-view means
  int gallery_count = 0;
  int probe_count = 0;

  std::string to_json() const;
};

/// Rank-1 nearest-gallery matching by cosine similarity, aggregated per
/// (probe view, gallery view) pair.
EvalReport evaluate_cross_view(const EmbeddingSet& gallery, const EmbeddingSet& probes,
                               const ProtocolSpec& spec);

struct OcclusionResult {
  OcclusionSpec spec;
  EvalReport report;
  double degradation = 0.0;  // clean mean - occluded mean
};

struct OcclusionExperiment {
  EvalReport clean;
  std::vector<OcclusionResult> occluded;
};

/// Occlude every frame of both gallery and probe sequences per spec,
/// re-embed, and evaluate.
OcclusionExperiment occlusion_experiment(const Dataset& ds,
                                         const std::vector<ManifestEntry>& gallery,
                                         const std::vector<ManifestEntry>& probe,
                                         const ModelParams& params,
                                         const ProtocolSpec& spec,
                                         const std::vector<OcclusionSpec>& specs);

}  // namespace gait
