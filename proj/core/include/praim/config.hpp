#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace praim {

struct DataConfig {
  std::string sessions;
  std::string series_dir;
  double tau = 0.35;  // max missing-rate a station may have and stay in scope
  int window = 7;     // window length in days
};

struct MaskConfig {
  std::string kind = "ls";  // ls | dm
  double rate = 0.5;        // λ for the single-rate generator
  std::vector<double> rates = {0.1, 0.2, 0.3, 0.4, 0.5,
                               0.6, 0.7, 0.8, 0.9};  // training sweep
  int dm_max_retries = 1000;  // placement attempts per block
  bool redraw_per_epoch = false;
};

struct EmbedConfig {
  std::string provider = "stub";  // stub | remote
  std::string endpoint;
  std::string model = "praim-embed";
  int dim = 4096;
  int max_inflight = 4;
  std::string api_key_env;
  int retries = 3;
  int backoff_ms = 100;
  std::string template_path;  // empty = built-in prompt template
};

struct RagConfig {
  int k = 20;
  std::string metric = "cosine";
  std::string index = "exact";  // exact | ivf
  bool exclude_self = true;
  int ivf_nlist = 64;
  int ivf_nprobe = 8;
};

struct ModelConfig {
  int d_lat = 256;
  int d_stat = 32;
  int d_cal = 32;
  int d_film = 256;
  int layers = 4;
  int heads = 8;
};

struct TrainConfig {
  double theta = 0.1;  // KL weight
  double lr = 1e-4;
  double weight_decay = 1e-5;
  int batch = 64;
  double split = 0.8;
  int epochs = 100;
  int patience = 10;
  std::uint64_t seed = 42;
};

struct PoiConfig {
  double radius_km = 2.0;
  std::string endpoint;
  std::string csv;
};

struct BaselineConfig {
  std::string kind = "interp";  // mean | zero | locf | interp | knn
  int knn_k = 5;
};

// Every hyperparameter in the toolkit lives here; artifacts echo the whole
// struct so runs are reconstructible from their outputs.
struct Config {
  DataConfig data;
  MaskConfig mask;
  EmbedConfig embed;
  RagConfig rag;
  ModelConfig model;
  TrainConfig train;
  PoiConfig poi;
  BaselineConfig baseline;

  // Assigns one key from its TOML literal (or bare CLI token). Unknown keys
  // throw ValidationError.
  void set(std::string_view dotted_key, std::string_view value);

  // Range and enum checks; throws ValidationError on the first violation.
  void validate() const;

  // Deterministic JSON echo: sorted keys, shortest round-trip numerals.
  std::string to_json() const;

  static Config from_text(std::string_view text);
  static Config load(const std::string& path);
};

}  // namespace praim
