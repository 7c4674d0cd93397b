/* gaitrec: view-invariant gait recognition pipeline.
 *
 * C API over the C++ core. All functions return a gr_status; on failure
 * gr_last_error() describes the problem for the calling thread. Handles are
 * opaque and must be released with the matching close function.
 */
#ifndef GAITREC_H
#define GAITREC_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef int gr_status;

#define GR_OK 0
#define GR_ERR_INTERNAL 1
#define GR_ERR_DATA 2
#define GR_ERR_PREREQ 3
#define GR_ERR_PROTOCOL 4
#define GR_ERR_CHECKPOINT 5

/* Message for the last failing call on this thread. */
const char* gr_last_error(void);

typedef struct gr_dataset gr_dataset;
typedef struct gr_model gr_model;

/* Manifest CSV with header path,subject,view,condition,seq_index,split.
 * Relative sequence paths resolve against the manifest's directory. */
gr_status gr_dataset_open(const char* manifest_csv, gr_dataset** out);
void gr_dataset_close(gr_dataset* ds);
gr_status gr_dataset_counts(const gr_dataset* ds, int* sequences, int* subjects,
                            int* views);

/* Normalizes every frame of every sequence to 64x64 silhouettes under
 * out_dir and writes a rebased manifest copy next to them. */
gr_status gr_preprocess(const char* manifest_csv, const char* out_dir);

typedef struct gr_train_config {
  uint64_t seed;
  int steps;
  int batch_ids;   /* stage 1: identities per batch */
  int seqs_per_id; /* stage 1: sequences per identity */
  int batch_size;  /* stage 2 */
  double lr;
  double margin;
  double dropout;
  /* network widths */
  int conv1_ch;
  int conv34_ch;
  int conv56_ch;
  int fc_out;
  int gru_hidden;
  int bins;
  /* stage-2 ablation switches */
  int no_bgru;
  int no_attention;
} gr_train_config;

/* Production defaults: widths 64/128/256, FC 256, hidden 128, 16 bins,
 * lr 1e-4, margin 0.2, dropout 0.1. */
void gr_train_config_defaults(gr_train_config* cfg);

/* Stage 1: triplet loss with batch-all mining over the Training split.
 * log_csv (optional, may be NULL) gets step,loss,easy,semi_hard,hard. */
gr_status gr_train_stage1(const gr_dataset* ds, const gr_train_config* cfg,
                          const char* out_checkpoint, const char* log_csv);

/* Stage 2: cosine-proximity classification head on frozen stage-1 features.
 * log_csv (optional) gets step,loss,accuracy. */
gr_status gr_train_stage2(const gr_dataset* ds, const gr_train_config* cfg,
                          const char* stage1_checkpoint, const char* out_checkpoint,
                          const char* log_csv);

gr_status gr_model_open(const char* checkpoint, gr_model** out);
void gr_model_close(gr_model* m);
gr_status gr_model_embedding_len(const gr_model* m, int* out_len);

/* Embeds every dataset sequence. out_csv rows are
 * subject,view,condition,seq_index,af_0..af_{n-1}. attention_csv (optional)
 * gets the per-bin attention weights per sequence. */
gr_status gr_embed(const gr_model* m, const gr_dataset* ds, const char* out_csv,
                   const char* attention_csv);

/* protocol: custom | casia-b-nm | casia-b-bg | casia-b-cl.
 * occlusions: "none", "all", or comma-separated spec names
 * (small_horizontal_1..4, large_horizontal_1..2, large_vertical_1..2).
 * Writes the evaluation report JSON; with occlusions, the JSON carries the
 * clean report, one report per spec, and a degradation table. */
gr_status gr_evaluate(const gr_model* m, const gr_dataset* ds, const char* protocol,
                      int exclude_identical_views, const char* occlusions,
                      const char* out_json);

/* Procedural walking-figure dataset for smoke tests and demos. */
gr_status gr_synth_dataset(const char* out_dir, const char* manifest_csv, int n_ids,
                           int n_views, int n_seqs, int n_frames, uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif /* GAITREC_H */
