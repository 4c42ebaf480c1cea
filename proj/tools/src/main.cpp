// praim: EV charging demand ingestion, imputation and evaluation.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "praim/checkpoint.hpp"
#include "praim/common.hpp"
#include "praim/config.hpp"
#include "praim/dates.hpp"
#include "praim/ingest.hpp"
#include "praim/manifest.hpp"
#include "praim/masks.hpp"
#include "praim/pipeline.hpp"
#include "praim/report.hpp"
#include "praim/rng.hpp"
#include "praim/version.hpp"

#include "json.hpp"

namespace {

praim::Config load_config(const std::string& path,
                          const std::vector<std::string>& overrides) {
  praim::Config cfg =
      path.empty() ? praim::Config{} : praim::Config::load(path);
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw praim::ValidationError("--set expects key=value, got '" + kv +
                                   "'");
    }
    cfg.set(praim::trim(kv.substr(0, eq)), praim::trim(kv.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string manifest_path = "praim_manifest.json";

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Config file (TOML subset)");
    cmd->add_option("--set", overrides,
                    "Override one config key, e.g. --set train.seed=7");
    cmd->add_option("--manifest", manifest_path,
                    "Run manifest to create or update");
  }
};

void save_manifest(praim::RunManifest& manifest, const std::string& path) {
  manifest.tool_version = praim::kVersion;
  manifest.save(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EV charging demand imputation toolkit"};
  app.set_version_flag("--version", praim::kVersion);
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand(
      "ingest", "Sessions CSV to per-station daily series");
  CommonArgs ingest_common;
  ingest_common.attach(ingest);
  std::string sessions_path;
  std::string pois_path;
  std::string ingest_out;
  double threshold = -1.0;
  ingest->add_option("--sessions", sessions_path, "Charging sessions CSV")
      ->required();
  ingest->add_option("--pois", pois_path, "Points-of-interest CSV");
  ingest->add_option("--out", ingest_out, "Output directory")->required();
  ingest->add_option("--threshold", threshold,
                     "Max missing rate a station may have (overrides config)");

  // embed
  auto* embed = app.add_subcommand(
      "embed", "Render window prompts and fill the embedding cache");
  CommonArgs embed_common;
  embed_common.attach(embed);
  std::string embed_series;
  std::string embed_cache;
  embed->add_option("--series", embed_series, "Series directory")->required();
  embed->add_option("--cache", embed_cache, "Embedding cache file")
      ->required();

  // corpus
  auto* corpus = app.add_subcommand(
      "corpus", "Build the retrieval corpus from cached training embeddings");
  CommonArgs corpus_common;
  corpus_common.attach(corpus);
  std::string corpus_series;
  std::string corpus_cache;
  std::string corpus_out;
  corpus->add_option("--series", corpus_series, "Series directory")
      ->required();
  corpus->add_option("--cache", corpus_cache, "Embedding cache file")
      ->required();
  corpus->add_option("--out", corpus_out, "Corpus file")->required();

  // train
  auto* train = app.add_subcommand("train", "Train the imputation model");
  CommonArgs train_common;
  train_common.attach(train);
  std::string train_series;
  std::string train_cache;
  std::string train_corpus;
  std::string train_out;
  std::string train_log;
  train->add_option("--series", train_series, "Series directory")->required();
  train->add_option("--cache", train_cache, "Embedding cache file")
      ->required();
  train->add_option("--corpus", train_corpus, "Retrieval corpus file")
      ->required();
  train->add_option("--out", train_out, "Checkpoint file")->required();
  train->add_option("--log", train_log,
                    "Epoch log (JSONL; default <checkpoint>.log.jsonl)");

  // impute
  auto* impute = app.add_subcommand("impute", "Fill real gaps in series");
  CommonArgs impute_common;
  impute_common.attach(impute);
  std::string impute_ckpt;
  std::string impute_corpus;
  std::string impute_series;
  std::string impute_out;
  impute->add_option("--checkpoint", impute_ckpt, "Model checkpoint")
      ->required();
  impute->add_option("--corpus", impute_corpus, "Retrieval corpus file")
      ->required();
  impute->add_option("--series", impute_series,
                     "Series CSV or directory of them")
      ->required();
  impute->add_option("--out", impute_out, "Output directory")->required();

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "Score predictions against ground truth");
  evaluate->alias("eval");
  CommonArgs eval_common;
  eval_common.attach(evaluate);
  std::string eval_pred;
  std::string eval_truth;
  std::string eval_out;
  bool eval_plots = false;
  evaluate->add_option("--pred", eval_pred, "Imputation CSV or directory")
      ->required();
  evaluate->add_option("--truth", eval_truth, "Truth series CSV or directory")
      ->required();
  evaluate->add_option("--out", eval_out, "Report directory")->required();
  evaluate->add_flag("--plots", eval_plots, "Also emit SVG charts");

  // maskgen
  auto* maskgen = app.add_subcommand("maskgen", "Draw a synthetic mask");
  CommonArgs mask_common;
  mask_common.attach(maskgen);
  std::string mask_kind = "LS";
  int mask_length = 7;
  std::uint64_t mask_seed = 42;
  double mask_lambda = 0.5;
  double mask_fraction = 0.2;
  std::string mask_series;
  std::string mask_start = "2024-01-01";
  std::string mask_out;
  maskgen->add_option("--kind", mask_kind, "LS (random) or DM (profiled)");
  maskgen->add_option("--L,--length", mask_length, "Mask length in days");
  maskgen->add_option("--seed", mask_seed, "Seed");
  maskgen->add_option("--lambda,--rate", mask_lambda, "LS masking ratio");
  maskgen->add_option("--fraction", mask_fraction, "DM target fraction");
  maskgen->add_option("--series", mask_series,
                      "Series directory the DM profile is fitted from");
  maskgen->add_option("--start-date", mask_start,
                      "Calendar date of the mask's first day (DM)");
  maskgen->add_option("--out", mask_out, "Optional JSON artifact");

  // prob
  auto* prob = app.add_subcommand(
      "prob", "Usable-sample probability under i.i.d. missingness");
  double prob_delta = 0.0;
  int prob_t = 14;
  int prob_h = 7;
  int prob_c = 0;
  prob->add_option("--delta", prob_delta, "Per-day missing probability")
      ->required();
  prob->add_option("--T", prob_t, "Lookback days")->required();
  prob->add_option("--H", prob_h, "Horizon days")->required();
  prob->add_option("--C", prob_c, "Neighbor series count")->required();

  // report
  auto* report = app.add_subcommand(
      "report", "Render tables and charts from an evaluation report");
  std::string report_eval;
  std::string report_out;
  report->add_option("--eval", report_eval, "report.json from evaluate")
      ->required();
  report->add_option("--out", report_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(ingest)) {
      praim::Config cfg =
          load_config(ingest_common.config_path, ingest_common.overrides);
      if (threshold >= 0.0) {
        cfg.data.tau = threshold;
        cfg.validate();
      }
      praim::RunManifest manifest =
          praim::RunManifest::load_or_new(ingest_common.manifest_path);
      const praim::IngestSummary summary =
          praim::run_ingest(cfg, sessions_path, pois_path, ingest_out,
                            manifest);
      save_manifest(manifest, ingest_common.manifest_path);
      std::printf("sessions: %zu (duplicates dropped: %zu)\n",
                  summary.sessions, summary.duplicates_dropped);
      std::printf("stations retained: %zu of %zu\n", summary.retained,
                  summary.stations.size());
      for (const praim::StationFilterEntry& e : summary.stations) {
        if (!e.retained) {
          std::printf("dropped %s (missing rate %.4f)\n",
                      e.station_id.c_str(), e.missing_rate);
        }
      }
    } else if (app.got_subcommand(embed)) {
      const praim::Config cfg =
          load_config(embed_common.config_path, embed_common.overrides);
      praim::RunManifest manifest =
          praim::RunManifest::load_or_new(embed_common.manifest_path);
      const praim::EmbedSummary summary =
          praim::run_embed(cfg, embed_series, embed_cache, manifest);
      save_manifest(manifest, embed_common.manifest_path);
      std::printf("prompts: %zu, newly embedded: %zu, cache size: %zu\n",
                  summary.prompts, summary.embedded, summary.cache_size);
    } else if (app.got_subcommand(corpus)) {
      const praim::Config cfg =
          load_config(corpus_common.config_path, corpus_common.overrides);
      praim::RunManifest manifest =
          praim::RunManifest::load_or_new(corpus_common.manifest_path);
      const praim::CorpusSummary summary = praim::run_corpus(
          cfg, corpus_series, corpus_cache, corpus_out, manifest);
      save_manifest(manifest, corpus_common.manifest_path);
      std::printf("corpus entries: %zu\n", summary.entries);
    } else if (app.got_subcommand(train)) {
      const praim::Config cfg =
          load_config(train_common.config_path, train_common.overrides);
      if (train_log.empty()) train_log = train_out + ".log.jsonl";
      praim::RunManifest manifest =
          praim::RunManifest::load_or_new(train_common.manifest_path);
      const praim::TrainSummary summary =
          praim::run_train(cfg, train_series, train_cache, train_corpus,
                           train_out, train_log, manifest);
      save_manifest(manifest, train_common.manifest_path);
      std::printf("trained on %zu samples, %zu epochs\n",
                  summary.train_samples, summary.epochs_run);
      std::printf("best epoch %d, %s loss %.6f\n", summary.best_epoch,
                  summary.train_loss_fallback ? "train" : "validation",
                  summary.best_metric);
    } else if (app.got_subcommand(impute)) {
      const praim::Config cfg =
          load_config(impute_common.config_path, impute_common.overrides);
      praim::RunManifest manifest =
          praim::RunManifest::load_or_new(impute_common.manifest_path);
      const praim::ImputeSummary summary = praim::run_impute(
          cfg, impute_ckpt, impute_corpus, impute_series, impute_out,
          manifest);
      save_manifest(manifest, impute_common.manifest_path);
      std::printf("stations: %zu, imputed days: %zu, unreachable: %zu\n",
                  summary.stations, summary.imputed_days,
                  summary.unreachable_days);
      for (const std::string& sid : summary.skipped) {
        std::printf("skipped %s (not in checkpoint)\n", sid.c_str());
      }
    } else if (app.got_subcommand(evaluate)) {
      const praim::Config cfg =
          load_config(eval_common.config_path, eval_common.overrides);
      praim::RunManifest manifest =
          praim::RunManifest::load_or_new(eval_common.manifest_path);
      const praim::EvaluationReport rep = praim::run_evaluate(
          cfg, eval_pred, eval_truth, eval_out, eval_plots, manifest);
      save_manifest(manifest, eval_common.manifest_path);
      std::printf("stations evaluated: %zu\n", rep.stations.size());
      if (rep.pooled.mae_kwh) {
        std::printf("pooled MAE: %.6f kWh over %zu days\n",
                    *rep.pooled.mae_kwh, rep.pooled.n_scored);
      }
      if (rep.pooled.prob) {
        std::printf("pooled NLL: %.6f, CRPS: %.6f (normalized)\n",
                    rep.pooled.prob->nll, rep.pooled.prob->crps);
      }
    } else if (app.got_subcommand(maskgen)) {
      const praim::Config cfg =
          load_config(mask_common.config_path, mask_common.overrides);
      std::string kind = mask_kind;
      for (char& c : kind) c = static_cast<char>(std::tolower(c));
      praim::SplitRng rng(praim::derive_seed(mask_seed, "mask"));
      std::vector<std::uint8_t> mask;
      bool shortfall = false;
      if (kind == "ls") {
        mask = praim::gen_mask_random(mask_length, mask_lambda, rng);
      } else if (kind == "dm") {
        if (mask_series.empty()) {
          throw praim::ValidationError(
              "DM masks need --series to fit the missingness profile");
        }
        const praim::MissingnessProfile profile =
            praim::fit_missingness_profile(
                praim::load_series_dir(mask_series));
        const praim::DmMaskResult result = praim::gen_mask_dm(
            profile, mask_length, praim::parse_date(mask_start),
            mask_fraction, rng, cfg.mask.dm_max_retries);
        mask = result.mask;
        shortfall = result.shortfall;
      } else {
        throw praim::ValidationError("unknown mask kind '" + mask_kind +
                                     "' (expected LS or DM)");
      }
      std::string line;
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (i > 0) line += ',';
        line += mask[i] ? '1' : '0';
      }
      std::printf("%s\n", line.c_str());
      if (shortfall) {
        std::fprintf(stderr,
                     "warning: placement stalled short of the target\n");
      }
      if (!mask_out.empty()) {
        nlohmann::json j;
        j["kind"] = kind;
        j["length"] = mask_length;
        j["seed"] = mask_seed;
        if (kind == "ls") j["lambda"] = mask_lambda;
        if (kind == "dm") {
          j["fraction"] = mask_fraction;
          j["start_date"] = mask_start;
          j["shortfall"] = shortfall;
        }
        j["mask"] = mask;
        praim::write_text_file(mask_out, j.dump(2) + "\n");
        praim::RunManifest manifest =
            praim::RunManifest::load_or_new(mask_common.manifest_path);
        manifest.config_json = cfg.to_json();
        manifest.seed = cfg.train.seed;
        manifest.record_artifact("mask", mask_out);
        save_manifest(manifest, mask_common.manifest_path);
      }
    } else if (app.got_subcommand(prob)) {
      const double p = praim::usable_sample_probability(prob_delta, prob_t,
                                                        prob_h, prob_c);
      std::printf("%.5f\n", p);
    } else if (app.got_subcommand(report)) {
      const praim::EvaluationReport rep =
          praim::report_from_json(praim::read_text_file(report_eval));
      praim::write_report_tables(
          rep, (std::filesystem::path(report_out) / "tables").string());
      praim::write_report_plots(
          rep, (std::filesystem::path(report_out) / "plots").string());
      std::printf("tables and plots written under %s\n", report_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
