#include "praim/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <utility>

#include "json.hpp"
#include "praim/checkpoint.hpp"
#include "praim/common.hpp"
#include "praim/corpus.hpp"
#include "praim/embedder.hpp"
#include "praim/embedding_cache.hpp"
#include "praim/imputer.hpp"
#include "praim/masks.hpp"
#include "praim/prompt.hpp"
#include "praim/rng.hpp"
#include "praim/trainer.hpp"

namespace praim {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_stations_csv(const std::map<std::string, StationLocation>& locs,
                        const std::string& path) {
  std::string text = "station_id,lat,lon\n";
  for (const auto& [sid, loc] : locs) {
    text += sid + ',' + format_double(loc.lat) + ',' +
            format_double(loc.lon) + '\n';
  }
  write_text_file(path, text);
}

std::map<std::string, StationLocation> read_stations_csv(
    const std::string& path) {
  std::map<std::string, StationLocation> out;
  const std::string text = read_text_file(path);
  std::size_t begin = 0;
  std::size_t line_no = 0;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (trim(line) != "station_id,lat,lon") {
        throw SchemaError("unexpected header in " + path);
      }
      continue;
    }
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
      throw ParseError("expected station_id,lat,lon", line_no);
    }
    StationLocation loc;
    loc.lat = parse_double(line.substr(c1 + 1, c2 - c1 - 1), line_no);
    loc.lon = parse_double(line.substr(c2 + 1), line_no);
    out[std::string(line.substr(0, c1))] = loc;
  }
  return out;
}

std::string prompt_template_for(const Config& cfg) {
  return cfg.embed.template_path.empty()
             ? default_prompt_template()
             : read_text_file(cfg.embed.template_path);
}

StationContext context_for(
    const std::map<std::string, StationContext>& contexts,
    const std::string& station_id) {
  const auto it = contexts.find(station_id);
  if (it != contexts.end()) return it->second;
  StationContext ctx;
  ctx.station_id = station_id;
  return ctx;
}

Eigen::VectorXd to_vector(const std::vector<float>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = static_cast<double>(v[i]);
  }
  return out;
}

Eigen::MatrixXd neighbor_matrix(const RetrievalCorpus& corpus,
                                const RetrievalResult& hits) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(hits.hits.size()),
                      corpus.dim());
  for (std::size_t r = 0; r < hits.hits.size(); ++r) {
    const std::vector<float>& v = corpus.vector(hits.hits[r].index);
    for (int c = 0; c < corpus.dim(); ++c) {
      out(static_cast<Eigen::Index>(r), c) =
          static_cast<double>(v[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

// Masks for one pass over the curated windows. The rate cycles by global
// window position so embed, corpus and train agree on every sample.
std::vector<WindowSample> draw_samples(
    const Config& cfg, const std::vector<RawWindow>& windows,
    const std::vector<DailyDemandSeries>& series, std::uint64_t mask_seed) {
  if (cfg.mask.kind != "dm") {
    return assemble_training_samples(windows, cfg.mask.rates, mask_seed);
  }
  const MissingnessProfile profile = fit_missingness_profile(series);
  SplitRng rng(mask_seed);
  std::vector<WindowSample> samples;
  samples.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const RawWindow& w = windows[i];
    if (!w.curated) {
      throw ValidationError("window for " + w.station_id +
                            " has real gaps and cannot be a training sample");
    }
    const double f = cfg.mask.rates[i % cfg.mask.rates.size()];
    const Date start = add_days(w.anchor_date,
                                -(static_cast<std::int64_t>(w.demand_raw.size()) - 1));
    const DmMaskResult dm = gen_mask_dm(profile,
                                        static_cast<int>(w.demand_raw.size()),
                                        start, f, rng, cfg.mask.dm_max_retries);
    samples.push_back(make_window_sample(w, dm.mask));
  }
  return samples;
}

struct LoadedSeries {
  std::vector<DailyDemandSeries> series;
  bool from_dir = false;
};

LoadedSeries load_series_path(const std::string& path) {
  LoadedSeries out;
  if (fs::is_directory(path)) {
    out.series = load_series_dir(path);
    out.from_dir = true;
  } else {
    out.series.push_back(read_series_csv(path));
  }
  return out;
}

}  // namespace

IngestSummary run_ingest(const Config& cfg, const std::string& sessions_path,
                         const std::string& pois_path,
                         const std::string& out_dir, RunManifest& manifest) {
  const SessionParseResult parsed =
      parse_sessions(read_text_file(sessions_path));

  std::map<std::string, std::vector<ChargingSession>> by_station;
  std::map<std::string, StationLocation> locations;
  for (const ChargingSession& s : parsed.sessions) {
    by_station[s.station_id].push_back(s);
    locations.emplace(s.station_id, StationLocation{s.lat, s.lon});
  }

  std::vector<DailyDemandSeries> series;
  for (const auto& [sid, sessions] : by_station) {
    Date lo = sessions.front().start_time.utc_date();
    Date hi = lo;
    for (const ChargingSession& s : sessions) {
      const Date d = s.start_time.utc_date();
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    series.push_back(aggregate_daily(sessions, sid, lo, hi));
  }

  IngestSummary summary;
  summary.sessions = parsed.sessions.size();
  summary.duplicates_dropped = parsed.duplicates_dropped;
  summary.stations = filter_entries(series, cfg.data.tau);

  fs::create_directories(out_dir);
  std::map<std::string, StationLocation> retained_locations;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!summary.stations[i].retained) continue;
    ++summary.retained;
    write_series_csv(series[i], join(out_dir, series[i].station_id + ".csv"));
    retained_locations[series[i].station_id] =
        locations.at(series[i].station_id);
  }
  write_stations_csv(retained_locations, join(out_dir, "stations.csv"));

  PoiConfig poi_cfg = cfg.poi;
  if (!pois_path.empty()) poi_cfg.csv = pois_path;
  if (!poi_cfg.csv.empty() || !poi_cfg.endpoint.empty()) {
    const auto contexts = load_pois(poi_cfg, retained_locations);
    std::map<std::string, std::vector<Poi>> pois;
    for (const auto& [sid, ctx] : contexts) {
      if (!ctx.pois.empty()) pois[sid] = ctx.pois;
    }
    write_text_file(join(out_dir, "pois.csv"), pois_to_csv(pois));
  }

  nlohmann::json report;
  report["tau"] = cfg.data.tau;
  report["duplicates_dropped"] = summary.duplicates_dropped;
  nlohmann::json stations = nlohmann::json::array();
  for (const StationFilterEntry& e : summary.stations) {
    stations.push_back({{"station_id", e.station_id},
                        {"missing_rate", e.missing_rate},
                        {"retained", e.retained}});
  }
  report["stations"] = stations;
  write_text_file(join(out_dir, "filter_report.json"), report.dump(2) + "\n");

  manifest.config_json = cfg.to_json();
  manifest.seed = cfg.train.seed;
  manifest.record_input(sessions_path);
  if (!pois_path.empty()) manifest.record_input(pois_path);
  manifest.record_artifact("series_dir", out_dir);
  manifest.record_artifact("filter_report",
                           join(out_dir, "filter_report.json"));
  return summary;
}

PreparedSamples prepare_samples(const Config& cfg,
                                const std::vector<DailyDemandSeries>& series) {
  std::vector<const DailyDemandSeries*> ordered;
  ordered.reserve(series.size());
  for (const DailyDemandSeries& s : series) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const DailyDemandSeries* a, const DailyDemandSeries* b) {
              return a->station_id < b->station_id;
            });

  PreparedSamples out;
  for (const DailyDemandSeries* s : ordered) {
    for (RawWindow& w : extract_windows(*s, cfg.data.window)) {
      if (w.curated) out.windows.push_back(std::move(w));
    }
  }
  if (out.windows.empty()) {
    throw ValidationError("no curated windows: series too short or too gappy");
  }
  out.samples = draw_samples(cfg, out.windows, series,
                             derive_seed(cfg.train.seed, "mask"));
  out.split = split_dataset(out.samples, cfg.train.split,
                            derive_seed(cfg.train.seed, "split"));
  out.stations = station_index(out.samples);
  return out;
}

std::map<std::string, StationContext> load_station_contexts(
    const Config& cfg, const std::string& series_dir) {
  std::map<std::string, StationLocation> locations;
  const std::string stations_path = join(series_dir, "stations.csv");
  if (fs::exists(stations_path)) {
    locations = read_stations_csv(stations_path);
  }
  PoiConfig poi_cfg = cfg.poi;
  if (poi_cfg.csv.empty()) {
    const std::string default_pois = join(series_dir, "pois.csv");
    if (fs::exists(default_pois)) poi_cfg.csv = default_pois;
  }
  // Remote lookups happen at ingest; later stages read the local artifacts.
  poi_cfg.endpoint.clear();
  return load_pois(poi_cfg, locations);
}

EmbedSummary run_embed(const Config& cfg, const std::string& series_dir,
                       const std::string& cache_path, RunManifest& manifest) {
  const std::vector<DailyDemandSeries> series = load_series_dir(series_dir);
  const PreparedSamples prepared = prepare_samples(cfg, series);
  const auto contexts = load_station_contexts(cfg, series_dir);
  const std::string template_text = prompt_template_for(cfg);

  EmbeddingCache cache(cache_path, cfg.embed.dim);
  EmbedSummary summary;
  summary.prompts = prepared.samples.size();

  std::vector<std::string> pending_keys;
  std::vector<std::string> pending_prompts;
  for (const WindowSample& sample : prepared.samples) {
    const std::string key =
        make_embedding_key(sample.station_id, sample.anchor_date);
    if (cache.contains(key)) continue;
    pending_keys.push_back(key);
    pending_prompts.push_back(build_prompt(
        prompt_inputs_from(sample, context_for(contexts, sample.station_id)),
        template_text));
  }
  if (!pending_keys.empty()) {
    const auto embedder =
        make_embedder(cfg.embed, derive_seed(cfg.train.seed, "emb"));
    const auto vectors = embedder->embed_batch(pending_prompts);
    for (std::size_t i = 0; i < pending_keys.size(); ++i) {
      cache.put(pending_keys[i], vectors[i]);
    }
    cache.flush();
  } else if (!fs::exists(cache_path)) {
    cache.flush();  // materialize an empty cache so the artifact exists
  }
  summary.embedded = pending_keys.size();
  summary.cache_size = cache.size();

  manifest.config_json = cfg.to_json();
  manifest.seed = cfg.train.seed;
  manifest.record_artifact("embedding_cache", cache_path);
  return summary;
}

CorpusSummary run_corpus(const Config& cfg, const std::string& series_dir,
                         const std::string& cache_path,
                         const std::string& corpus_path,
                         RunManifest& manifest) {
  const std::vector<DailyDemandSeries> series = load_series_dir(series_dir);
  const PreparedSamples prepared = prepare_samples(cfg, series);
  const EmbeddingCache cache = EmbeddingCache::load(cache_path);
  if (cache.dim() != cfg.embed.dim) {
    throw ValidationError("cache width " + std::to_string(cache.dim()) +
                          " does not match embed.dim " +
                          std::to_string(cfg.embed.dim));
  }

  std::vector<std::pair<std::string, std::vector<float>>> entries;
  entries.reserve(prepared.split.train.size());
  for (const std::size_t idx : prepared.split.train) {
    const WindowSample& sample = prepared.samples[idx];
    const std::string key =
        make_embedding_key(sample.station_id, sample.anchor_date);
    const std::vector<float>* vec = cache.get(key);
    if (vec == nullptr) {
      throw ValidationError("embedding cache has no entry for " + key +
                            "; run embed first");
    }
    entries.emplace_back(key, *vec);
  }
  RetrievalCorpus corpus = RetrievalCorpus::build(entries, "train");
  if (cfg.rag.index == "ivf") {
    corpus.build_ivf_index(cfg.rag.ivf_nlist, cfg.rag.ivf_nprobe,
                           derive_seed(cfg.train.seed, "ivf"));
  }
  corpus.save(corpus_path);

  manifest.config_json = cfg.to_json();
  manifest.seed = cfg.train.seed;
  manifest.record_artifact("corpus", corpus_path);
  return CorpusSummary{corpus.size()};
}

TrainSummary run_train(const Config& cfg, const std::string& series_dir,
                       const std::string& cache_path,
                       const std::string& corpus_path,
                       const std::string& checkpoint_path,
                       const std::string& log_path, RunManifest& manifest) {
  const std::vector<DailyDemandSeries> series = load_series_dir(series_dir);
  const PreparedSamples prepared = prepare_samples(cfg, series);
  const EmbeddingCache cache = EmbeddingCache::load(cache_path);
  RetrievalCorpus corpus = RetrievalCorpus::load_file(corpus_path);
  if (cache.dim() != cfg.embed.dim || corpus.dim() != cfg.embed.dim) {
    throw ValidationError("cache/corpus width does not match embed.dim");
  }
  if (cfg.rag.index == "ivf") {
    corpus.build_ivf_index(cfg.rag.ivf_nlist, cfg.rag.ivf_nprobe,
                           derive_seed(cfg.train.seed, "ivf"));
  }

  std::map<std::string, int> station_row;
  for (std::size_t i = 0; i < prepared.stations.size(); ++i) {
    station_row[prepared.stations[i]] = static_cast<int>(i);
  }

  const auto item_for = [&corpus, &station_row,
                         &cfg](const WindowSample& sample,
                               const std::vector<float>& embedding) {
    const std::string key =
        make_embedding_key(sample.station_id, sample.anchor_date);
    const RetrievalResult hits =
        corpus.retrieve(embedding, cfg.rag.k, cfg.rag.exclude_self, key);
    if (hits.hits.empty()) {
      throw ValidationError("no retrieval candidates for " + key +
                            "; corpus too small");
    }
    TrainItem item;
    item.sample = sample;
    item.station_index = station_row.at(sample.station_id);
    item.query = to_vector(embedding);
    item.neighbors = neighbor_matrix(corpus, hits);
    return item;
  };

  std::vector<TrainItem> items;
  items.reserve(prepared.split.train.size());
  for (const std::size_t idx : prepared.split.train) {
    const WindowSample& sample = prepared.samples[idx];
    const std::string key =
        make_embedding_key(sample.station_id, sample.anchor_date);
    const std::vector<float>* vec = cache.get(key);
    if (vec == nullptr) {
      throw ValidationError("embedding cache has no entry for " + key +
                            "; run embed first");
    }
    items.push_back(item_for(sample, *vec));
  }

  ModelDims dims;
  dims.d_emb = cfg.embed.dim;
  dims.d_lat = cfg.model.d_lat;
  dims.d_stat = cfg.model.d_stat;
  dims.d_cal = cfg.model.d_cal;
  dims.d_film = cfg.model.d_film;
  dims.layers = cfg.model.layers;
  dims.heads = cfg.model.heads;
  dims.window = cfg.data.window;
  dims.n_stations = static_cast<int>(prepared.stations.size());

  TrainOptions opts;
  opts.theta = cfg.train.theta;
  opts.lr = cfg.train.lr;
  opts.weight_decay = cfg.train.weight_decay;
  opts.batch = cfg.train.batch;
  opts.epochs = cfg.train.epochs;
  opts.patience = cfg.train.patience;
  opts.seed = cfg.train.seed;

  std::function<std::vector<TrainItem>(int)> redraw;
  std::unique_ptr<Embedder> redraw_embedder;
  std::map<std::string, StationContext> redraw_contexts;
  std::string redraw_template;
  if (cfg.mask.redraw_per_epoch) {
    redraw_embedder =
        make_embedder(cfg.embed, derive_seed(cfg.train.seed, "emb"));
    redraw_contexts = load_station_contexts(cfg, series_dir);
    redraw_template = prompt_template_for(cfg);
    // Fresh masks (and therefore fresh prompts and queries) every epoch; the
    // corpus itself stays as built.
    redraw = [&cfg, &series, &prepared, &item_for, &redraw_contexts,
              &redraw_template, &redraw_embedder](int epoch) {
      const std::uint64_t seed =
          derive_seed(cfg.train.seed, "mask") + static_cast<std::uint64_t>(epoch);
      const std::vector<WindowSample> drawn =
          draw_samples(cfg, prepared.windows, series, seed);
      std::vector<std::string> prompts;
      prompts.reserve(prepared.split.train.size());
      for (const std::size_t idx : prepared.split.train) {
        prompts.push_back(build_prompt(
            prompt_inputs_from(drawn[idx], context_for(redraw_contexts,
                                                       drawn[idx].station_id)),
            redraw_template));
      }
      const auto vectors = redraw_embedder->embed_batch(prompts);
      std::vector<TrainItem> fresh;
      fresh.reserve(prepared.split.train.size());
      for (std::size_t i = 0; i < prepared.split.train.size(); ++i) {
        fresh.push_back(
            item_for(drawn[prepared.split.train[i]], vectors[i]));
      }
      return fresh;
    };
  }

  const TrainResult result = train_model(std::move(items), dims, opts, redraw);
  save_checkpoint(checkpoint_path, result.params, prepared.stations,
                  cfg.to_json());
  write_text_file(log_path, epoch_stats_jsonl(result.log));

  manifest.config_json = cfg.to_json();
  manifest.seed = cfg.train.seed;
  manifest.record_artifact("checkpoint", checkpoint_path);
  manifest.record_artifact("train_log", log_path);

  TrainSummary summary;
  summary.train_samples = prepared.split.train.size();
  summary.epochs_run = result.log.size();
  summary.best_epoch = result.best_epoch;
  summary.best_metric = result.best_metric;
  summary.train_loss_fallback = result.train_loss_fallback;
  return summary;
}

ImputeSummary run_impute(const Config& cfg,
                         const std::string& checkpoint_path,
                         const std::string& corpus_path,
                         const std::string& series_path,
                         const std::string& out_dir, RunManifest& manifest) {
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  RetrievalCorpus corpus = RetrievalCorpus::load_file(corpus_path);
  if (cfg.rag.index == "ivf") {
    corpus.build_ivf_index(cfg.rag.ivf_nlist, cfg.rag.ivf_nprobe,
                           derive_seed(cfg.train.seed, "ivf"));
  }
  const auto embedder =
      make_embedder(cfg.embed, derive_seed(cfg.train.seed, "emb"));

  const LoadedSeries loaded = load_series_path(series_path);
  const std::string context_dir =
      loaded.from_dir ? series_path
                      : fs::path(series_path).parent_path().string();
  const auto contexts = load_station_contexts(cfg, context_dir);

  ImputeSettings settings;
  settings.k = cfg.rag.k;
  settings.exclude_self = cfg.rag.exclude_self;
  if (!cfg.embed.template_path.empty()) {
    settings.prompt_template = read_text_file(cfg.embed.template_path);
  }

  fs::create_directories(out_dir);
  ImputeSummary summary;
  for (const DailyDemandSeries& s : loaded.series) {
    const bool known = std::binary_search(checkpoint.station_ids.begin(),
                                          checkpoint.station_ids.end(),
                                          s.station_id);
    if (!known) {
      if (!loaded.from_dir) {
        throw ValidationError("station " + s.station_id +
                              " is not in the checkpoint's station table");
      }
      summary.skipped.push_back(s.station_id);
      continue;
    }
    const ImputationResult result =
        impute_series(s, checkpoint, corpus, *embedder,
                      context_for(contexts, s.station_id), settings);
    write_imputation_csv(result, join(out_dir, s.station_id + ".csv"));
    ++summary.stations;
    for (const ImputedDay& day : result.days) {
      if (day.was_imputed) ++summary.imputed_days;
    }
    summary.unreachable_days += result.unreachable.size();
  }

  manifest.config_json = cfg.to_json();
  manifest.seed = cfg.train.seed;
  manifest.record_artifact("imputed_dir", out_dir);
  return summary;
}

EvaluationReport run_evaluate(const Config& cfg, const std::string& pred_path,
                              const std::string& truth_path,
                              const std::string& out_dir, bool plots,
                              RunManifest& manifest) {
  std::vector<ImputationResult> predictions;
  if (fs::is_directory(pred_path)) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(pred_path)) {
      if (entry.path().extension() == ".csv") {
        files.push_back(entry.path().string());
      }
    }
    std::sort(files.begin(), files.end());
    for (const std::string& f : files) {
      predictions.push_back(read_imputation_csv(f));
    }
  } else {
    predictions.push_back(read_imputation_csv(pred_path));
  }
  if (predictions.empty()) {
    throw ValidationError("no prediction files under " + pred_path);
  }

  std::vector<DailyDemandSeries> truths;
  if (fs::is_directory(truth_path)) {
    truths = load_series_dir(truth_path);
  } else {
    truths.push_back(read_series_csv(truth_path));
  }

  const EvaluationReport report =
      evaluate_imputations(predictions, truths, cfg.to_json());

  fs::create_directories(out_dir);
  const std::string report_path = join(out_dir, "report.json");
  write_text_file(report_path, report_to_json(report));
  write_report_tables(report, join(out_dir, "tables"));
  if (plots) write_report_plots(report, join(out_dir, "plots"));

  manifest.config_json = cfg.to_json();
  manifest.seed = cfg.train.seed;
  manifest.record_artifact("evaluation_report", report_path);
  return report;
}

}  // namespace praim
