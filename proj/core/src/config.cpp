#include "praim/config.hpp"

#include <charconv>

#include "json.hpp"
#include "praim/common.hpp"

namespace praim {
namespace {

using nlohmann::json;

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return std::string(v.substr(1, v.size() - 2));
  }
  // Bare tokens are accepted so CLI overrides need no shell quoting.
  return std::string(v);
}

bool as_bool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ValidationError("config key '" + std::string(key) +
                        "' expects true or false, got '" + std::string(v) +
                        "'");
}

double as_double(std::string_view key, std::string_view v) {
  try {
    return parse_double(v);
  } catch (const ParseError&) {
    throw ValidationError("config key '" + std::string(key) +
                          "' expects a number, got '" + std::string(v) + "'");
  }
}

int as_int(std::string_view key, std::string_view v) {
  try {
    const auto n = parse_int(v);
    return static_cast<int>(n);
  } catch (const ParseError&) {
    throw ValidationError("config key '" + std::string(key) +
                          "' expects an integer, got '" + std::string(v) +
                          "'");
  }
}

std::uint64_t as_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const char* b = v.data();
  const char* e = v.data() + v.size();
  const auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e) {
    throw ValidationError("config key '" + std::string(key) +
                          "' expects an unsigned integer, got '" +
                          std::string(v) + "'");
  }
  return out;
}

std::vector<double> as_double_list(std::string_view key, std::string_view v) {
  std::string_view body = trim(v);
  if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
    throw ValidationError("config key '" + std::string(key) +
                          "' expects an array like [0.1, 0.2]");
  }
  body = body.substr(1, body.size() - 2);
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    std::size_t comma = body.find(',', pos);
    if (comma == std::string_view::npos) comma = body.size();
    const std::string_view item = trim(body.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(as_double(key, item));
    if (comma == body.size()) break;
    pos = comma + 1;
  }
  return out;
}

void require(bool cond, const std::string& message) {
  if (!cond) throw ValidationError(message);
}

}  // namespace

void Config::set(std::string_view dotted_key, std::string_view value) {
  const std::string key(trim(dotted_key));
  const std::string_view v = trim(value);

  if (key == "data.sessions") data.sessions = unquote(v);
  else if (key == "data.series_dir") data.series_dir = unquote(v);
  else if (key == "data.tau") data.tau = as_double(key, v);
  else if (key == "data.window") data.window = as_int(key, v);

  else if (key == "mask.kind") mask.kind = unquote(v);
  else if (key == "mask.rate") mask.rate = as_double(key, v);
  else if (key == "mask.rates") mask.rates = as_double_list(key, v);
  else if (key == "mask.dm_max_retries") mask.dm_max_retries = as_int(key, v);
  else if (key == "mask.redraw_per_epoch") mask.redraw_per_epoch = as_bool(key, v);

  else if (key == "embed.provider") embed.provider = unquote(v);
  else if (key == "embed.endpoint") embed.endpoint = unquote(v);
  else if (key == "embed.model") embed.model = unquote(v);
  else if (key == "embed.dim") embed.dim = as_int(key, v);
  else if (key == "embed.max_inflight") embed.max_inflight = as_int(key, v);
  else if (key == "embed.api_key_env") embed.api_key_env = unquote(v);
  else if (key == "embed.retries") embed.retries = as_int(key, v);
  else if (key == "embed.backoff_ms") embed.backoff_ms = as_int(key, v);
  else if (key == "embed.template_path") embed.template_path = unquote(v);

  else if (key == "rag.k") rag.k = as_int(key, v);
  else if (key == "rag.metric") rag.metric = unquote(v);
  else if (key == "rag.index") rag.index = unquote(v);
  else if (key == "rag.exclude_self") rag.exclude_self = as_bool(key, v);
  else if (key == "rag.ivf_nlist") rag.ivf_nlist = as_int(key, v);
  else if (key == "rag.ivf_nprobe") rag.ivf_nprobe = as_int(key, v);

  else if (key == "model.d_lat") model.d_lat = as_int(key, v);
  else if (key == "model.d_stat") model.d_stat = as_int(key, v);
  else if (key == "model.d_cal") model.d_cal = as_int(key, v);
  else if (key == "model.d_film") model.d_film = as_int(key, v);
  else if (key == "model.layers") model.layers = as_int(key, v);
  else if (key == "model.heads") model.heads = as_int(key, v);

  else if (key == "train.theta") train.theta = as_double(key, v);
  else if (key == "train.lr") train.lr = as_double(key, v);
  else if (key == "train.weight_decay") train.weight_decay = as_double(key, v);
  else if (key == "train.batch") train.batch = as_int(key, v);
  else if (key == "train.split") train.split = as_double(key, v);
  else if (key == "train.epochs") train.epochs = as_int(key, v);
  else if (key == "train.patience") train.patience = as_int(key, v);
  else if (key == "train.seed") train.seed = as_u64(key, v);

  else if (key == "poi.radius_km") poi.radius_km = as_double(key, v);
  else if (key == "poi.endpoint") poi.endpoint = unquote(v);
  else if (key == "poi.csv") poi.csv = unquote(v);

  else if (key == "baseline.kind") baseline.kind = unquote(v);
  else if (key == "baseline.knn_k") baseline.knn_k = as_int(key, v);

  else throw ValidationError("unknown config key '" + key + "'");
}

void Config::validate() const {
  require(data.tau >= 0.0 && data.tau <= 1.0, "data.tau must be in [0, 1]");
  require(data.window >= 2, "data.window must be at least 2");

  require(mask.kind == "ls" || mask.kind == "dm",
          "mask.kind must be 'ls' or 'dm'");
  require(mask.rate > 0.0 && mask.rate < 1.0, "mask.rate must be in (0, 1)");
  require(!mask.rates.empty(), "mask.rates must not be empty");
  for (double r : mask.rates) {
    require(r > 0.0 && r < 1.0, "mask.rates entries must be in (0, 1)");
  }
  require(mask.dm_max_retries >= 1, "mask.dm_max_retries must be positive");

  require(embed.provider == "stub" || embed.provider == "remote",
          "embed.provider must be 'stub' or 'remote'");
  require(embed.dim >= 1, "embed.dim must be positive");
  require(embed.max_inflight >= 1, "embed.max_inflight must be positive");
  require(embed.retries >= 0, "embed.retries must be non-negative");
  require(embed.backoff_ms >= 0, "embed.backoff_ms must be non-negative");
  if (embed.provider == "remote") {
    require(!embed.endpoint.empty(),
            "embed.endpoint is required for the remote provider");
  }

  require(rag.k >= 1, "rag.k must be positive");
  require(rag.metric == "cosine", "rag.metric must be 'cosine'");
  require(rag.index == "exact" || rag.index == "ivf",
          "rag.index must be 'exact' or 'ivf'");
  require(rag.ivf_nlist >= 1 && rag.ivf_nprobe >= 1,
          "rag.ivf_nlist and rag.ivf_nprobe must be positive");

  require(model.d_lat >= 1 && model.d_stat >= 1 && model.d_cal >= 1,
          "model widths must be positive");
  require(model.d_film >= 1, "model.d_film must be positive");
  require(model.layers >= 1, "model.layers must be positive");
  require(model.heads >= 1, "model.heads must be positive");
  require(model.d_film % model.heads == 0,
          "model.heads must divide model.d_film");

  require(train.theta >= 0.0, "train.theta must be non-negative");
  require(train.lr > 0.0, "train.lr must be positive");
  require(train.weight_decay >= 0.0, "train.weight_decay must be non-negative");
  require(train.batch >= 1, "train.batch must be positive");
  require(train.split > 0.0 && train.split < 1.0,
          "train.split must be in (0, 1)");
  require(train.epochs >= 1, "train.epochs must be positive");
  require(train.patience >= 1, "train.patience must be positive");

  require(poi.radius_km > 0.0, "poi.radius_km must be positive");

  require(baseline.kind == "mean" || baseline.kind == "zero" ||
              baseline.kind == "locf" || baseline.kind == "interp" ||
              baseline.kind == "knn",
          "baseline.kind must be one of mean, zero, locf, interp, knn");
  require(baseline.knn_k >= 1, "baseline.knn_k must be positive");
}

std::string Config::to_json() const {
  json j;
  j["data"]["sessions"] = data.sessions;
  j["data"]["series_dir"] = data.series_dir;
  j["data"]["tau"] = data.tau;
  j["data"]["window"] = data.window;

  j["mask"]["kind"] = mask.kind;
  j["mask"]["rate"] = mask.rate;
  j["mask"]["rates"] = mask.rates;
  j["mask"]["dm_max_retries"] = mask.dm_max_retries;
  j["mask"]["redraw_per_epoch"] = mask.redraw_per_epoch;

  j["embed"]["provider"] = embed.provider;
  j["embed"]["endpoint"] = embed.endpoint;
  j["embed"]["model"] = embed.model;
  j["embed"]["dim"] = embed.dim;
  j["embed"]["max_inflight"] = embed.max_inflight;
  j["embed"]["api_key_env"] = embed.api_key_env;
  j["embed"]["retries"] = embed.retries;
  j["embed"]["backoff_ms"] = embed.backoff_ms;
  j["embed"]["template_path"] = embed.template_path;

  j["rag"]["k"] = rag.k;
  j["rag"]["metric"] = rag.metric;
  j["rag"]["index"] = rag.index;
  j["rag"]["exclude_self"] = rag.exclude_self;
  j["rag"]["ivf_nlist"] = rag.ivf_nlist;
  j["rag"]["ivf_nprobe"] = rag.ivf_nprobe;

  j["model"]["d_lat"] = model.d_lat;
  j["model"]["d_stat"] = model.d_stat;
  j["model"]["d_cal"] = model.d_cal;
  j["model"]["d_film"] = model.d_film;
  j["model"]["layers"] = model.layers;
  j["model"]["heads"] = model.heads;

  j["train"]["theta"] = train.theta;
  j["train"]["lr"] = train.lr;
  j["train"]["weight_decay"] = train.weight_decay;
  j["train"]["batch"] = train.batch;
  j["train"]["split"] = train.split;
  j["train"]["epochs"] = train.epochs;
  j["train"]["patience"] = train.patience;
  j["train"]["seed"] = train.seed;

  j["poi"]["radius_km"] = poi.radius_km;
  j["poi"]["endpoint"] = poi.endpoint;
  j["poi"]["csv"] = poi.csv;

  j["baseline"]["kind"] = baseline.kind;
  j["baseline"]["knn_k"] = baseline.knn_k;

  return j.dump(2);
}

Config Config::from_text(std::string_view text) {
  Config cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;

    // Strip comments, respecting quoted strings.
    bool in_quote = false;
    std::size_t cut = raw.size();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') in_quote = !in_quote;
      if (raw[i] == '#' && !in_quote) {
        cut = i;
        break;
      }
    }
    const std::string_view stripped = trim(raw.substr(0, cut));
    if (stripped.empty()) {
      if (pos > text.size()) break;
      continue;
    }

    if (stripped.front() == '[') {
      if (stripped.back() != ']' || stripped.size() < 3) {
        throw ParseError("malformed section header '" + std::string(stripped) +
                             "'",
                         line_no);
      }
      section = std::string(trim(stripped.substr(1, stripped.size() - 2)));
      continue;
    }

    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("expected 'key = value', got '" + std::string(stripped) +
                           "'",
                       line_no);
    }
    const std::string_view key = trim(stripped.substr(0, eq));
    const std::string_view value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError("expected 'key = value', got '" + std::string(stripped) +
                           "'",
                       line_no);
    }
    if (section.empty()) {
      throw ParseError("key '" + std::string(key) +
                           "' appears before any [section]",
                       line_no);
    }
    cfg.set(section + "." + std::string(key), value);
    if (pos > text.size()) break;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  return from_text(read_text_file(path));
}

}  // namespace praim
