#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "praim/config.hpp"
#include "praim/dataset.hpp"
#include "praim/ingest.hpp"
#include "praim/manifest.hpp"
#include "praim/report.hpp"

namespace praim {

/// Command bodies behind the CLI. Every function is deterministic given the
/// config (all randomness flows from cfg.train.seed through per-stage
/// streams) and records what it read and wrote in the manifest.

struct IngestSummary {
  std::size_t sessions = 0;
  std::size_t duplicates_dropped = 0;
  std::vector<StationFilterEntry> stations;  // every station, retained or not
  std::size_t retained = 0;
};

// Sessions -> per-station series CSVs (retained stations only) plus
// filter_report.json, stations.csv and, when a PoI source exists, pois.csv.
IngestSummary run_ingest(const Config& cfg, const std::string& sessions_path,
                         const std::string& pois_path,
                         const std::string& out_dir, RunManifest& manifest);

/// The deterministic sample universe shared by embed, corpus and train:
/// curated windows in station/anchor order, masks from the config's mask
/// stream, the train/test split, and the station table order.
struct PreparedSamples {
  std::vector<RawWindow> windows;  // aligned with samples
  std::vector<WindowSample> samples;
  SplitIndices split;
  std::vector<std::string> stations;
};

PreparedSamples prepare_samples(const Config& cfg,
                                const std::vector<DailyDemandSeries>& series);

// stations.csv + pois.csv (or the configured PoI source) from a series dir.
std::map<std::string, StationContext> load_station_contexts(
    const Config& cfg, const std::string& series_dir);

struct EmbedSummary {
  std::size_t prompts = 0;    // curated windows, i.e. cache keys wanted
  std::size_t embedded = 0;   // keys actually sent to the provider
  std::size_t cache_size = 0;
};

// Populates the embedding cache for every curated window's prompt; cached
// keys are skipped, so reruns are free.
EmbedSummary run_embed(const Config& cfg, const std::string& series_dir,
                       const std::string& cache_path, RunManifest& manifest);

struct CorpusSummary {
  std::size_t entries = 0;
};

// Retrieval corpus from the training split's cached embeddings.
CorpusSummary run_corpus(const Config& cfg, const std::string& series_dir,
                         const std::string& cache_path,
                         const std::string& corpus_path,
                         RunManifest& manifest);

struct TrainSummary {
  std::size_t train_samples = 0;
  std::size_t epochs_run = 0;
  int best_epoch = 0;
  double best_metric = 0.0;
  bool train_loss_fallback = false;
};

TrainSummary run_train(const Config& cfg, const std::string& series_dir,
                       const std::string& cache_path,
                       const std::string& corpus_path,
                       const std::string& checkpoint_path,
                       const std::string& log_path, RunManifest& manifest);

struct ImputeSummary {
  std::size_t stations = 0;
  std::size_t imputed_days = 0;
  std::size_t unreachable_days = 0;
  std::vector<std::string> skipped;  // stations absent from the checkpoint
};

// series_path may be one series CSV or a directory of them. Directory mode
// skips (and reports) stations the checkpoint does not know; single-file
// mode treats that as an error.
ImputeSummary run_impute(const Config& cfg,
                         const std::string& checkpoint_path,
                         const std::string& corpus_path,
                         const std::string& series_path,
                         const std::string& out_dir, RunManifest& manifest);

// pred/truth may each be a file or a directory. Writes report.json, the
// tables/ CSVs and, when plots is set, the plots/ SVGs under out_dir.
EvaluationReport run_evaluate(const Config& cfg, const std::string& pred_path,
                              const std::string& truth_path,
                              const std::string& out_dir, bool plots,
                              RunManifest& manifest);

}  // namespace praim
