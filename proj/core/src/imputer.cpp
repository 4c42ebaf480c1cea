#include "praim/imputer.hpp"

#include <algorithm>
#include <map>
#include <string_view>

#include "praim/common.hpp"
#include "praim/features.hpp"
#include "praim/prompt.hpp"

namespace praim {

DailyDemandSeries ImputationResult::to_series() const {
  DailyDemandSeries out;
  out.station_id = station_id;
  if (days.empty()) return out;
  out.start_date = days.front().date;
  out.end_date = days.back().date;
  for (const ImputedDay& d : days) {
    out.demand.push_back(d.value);
    out.missing.push_back(0);
  }
  for (const Date& d : unreachable) {
    const auto idx = static_cast<std::size_t>(days_between(out.start_date, d));
    out.demand[idx] = 0.0;
    out.missing[idx] = 1;
  }
  return out;
}

ImputationResult impute_series(const DailyDemandSeries& series,
                               const Checkpoint& checkpoint,
                               const RetrievalCorpus& corpus,
                               Embedder& embedder,
                               const StationContext& context,
                               const ImputeSettings& settings) {
  const ModelDims& dims = checkpoint.params.dims;
  if (corpus.dim() != dims.d_emb) {
    throw ValidationError("corpus width " + std::to_string(corpus.dim()) +
                          " does not match model embedding width " +
                          std::to_string(dims.d_emb));
  }
  if (embedder.dim() != dims.d_emb) {
    throw ValidationError("embedder width does not match the model");
  }
  const auto station_it =
      std::lower_bound(checkpoint.station_ids.begin(),
                       checkpoint.station_ids.end(), series.station_id);
  if (station_it == checkpoint.station_ids.end() ||
      *station_it != series.station_id) {
    throw ValidationError("station " + series.station_id +
                          " is not in the checkpoint's station table");
  }
  const auto station_row = static_cast<int>(
      std::distance(checkpoint.station_ids.begin(), station_it));

  const auto L = static_cast<std::size_t>(dims.window);
  const std::size_t n = series.size();

  ImputationResult result;
  result.station_id = series.station_id;
  result.days.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.days[i].date = series.date_at(i);
    result.days[i].value = series.missing[i] ? 0.0 : series.demand[i];
  }

  // Choose each gap day's window, then group gap days by window anchor so
  // every distinct window runs a single forward pass.
  std::map<std::size_t, std::vector<std::size_t>> anchor_targets;
  for (std::size_t t = 0; t < n; ++t) {
    if (!series.missing[t]) continue;
    if (n < L) {
      result.unreachable.push_back(series.date_at(t));
      continue;
    }
    const std::size_t a_lo = std::max(t, L - 1);
    const std::size_t a_hi = std::min(t + L - 1, n - 1);
    std::size_t best_anchor = 0;
    int best_observed = 0;
    for (std::size_t a = a_lo; a <= a_hi; ++a) {
      int observed = 0;
      for (std::size_t p = a + 1 - L; p <= a; ++p) {
        if (!series.missing[p]) ++observed;
      }
      if (observed > best_observed) {
        best_observed = observed;
        best_anchor = a;
      }
    }
    if (best_observed == 0) {
      result.unreachable.push_back(series.date_at(t));
      continue;
    }
    anchor_targets[best_anchor].push_back(t);
  }
  if (anchor_targets.empty()) return result;

  const std::string template_text = settings.prompt_template.empty()
                                        ? default_prompt_template()
                                        : settings.prompt_template;

  struct PendingWindow {
    std::size_t anchor;
    WindowSample sample;
  };
  std::vector<PendingWindow> pending;
  std::vector<std::string> prompts;
  for (const auto& [anchor, targets] : anchor_targets) {
    RawWindow window;
    window.station_id = series.station_id;
    window.anchor = anchor;
    window.anchor_date = series.date_at(anchor);
    const std::size_t begin = anchor + 1 - L;
    window.demand_raw.assign(series.demand.begin() +
                                 static_cast<std::ptrdiff_t>(begin),
                             series.demand.begin() +
                                 static_cast<std::ptrdiff_t>(anchor + 1));
    window.real_missing.assign(series.missing.begin() +
                                   static_cast<std::ptrdiff_t>(begin),
                               series.missing.begin() +
                                   static_cast<std::ptrdiff_t>(anchor + 1));
    PendingWindow pw;
    pw.anchor = anchor;
    pw.sample = make_window_sample(window, window.real_missing);
    prompts.push_back(
        build_prompt(prompt_inputs_from(pw.sample, context), template_text));
    pending.push_back(std::move(pw));
  }
  const auto embeddings = embedder.embed_batch(prompts);

  for (std::size_t wi = 0; wi < pending.size(); ++wi) {
    const PendingWindow& pw = pending[wi];
    const WindowSample& sample = pw.sample;

    const std::string key =
        make_embedding_key(series.station_id, sample.anchor_date);
    const RetrievalResult hits = corpus.retrieve(
        embeddings[wi], settings.k, settings.exclude_self, key);

    ModelInput input;
    input.query_embedding = Eigen::VectorXd(dims.d_emb);
    for (int c = 0; c < dims.d_emb; ++c) {
      input.query_embedding(c) =
          static_cast<double>(embeddings[wi][static_cast<std::size_t>(c)]);
    }
    input.neighbor_embeddings = Eigen::MatrixXd(
        static_cast<Eigen::Index>(hits.hits.size()), dims.d_emb);
    for (std::size_t r = 0; r < hits.hits.size(); ++r) {
      const auto& v = corpus.vector(hits.hits[r].index);
      for (int c = 0; c < dims.d_emb; ++c) {
        input.neighbor_embeddings(static_cast<Eigen::Index>(r), c) =
            static_cast<double>(v[static_cast<std::size_t>(c)]);
      }
    }
    input.station_index = station_row;
    for (int c = 0; c < 6; ++c) {
      input.calendar(c) = sample.calendar_encoded[static_cast<std::size_t>(c)];
    }
    input.demand_masked_norm = Eigen::Map<const Eigen::VectorXd>(
        sample.demand_masked_norm.data(),
        static_cast<Eigen::Index>(sample.demand_masked_norm.size()));
    input.mask = sample.mask;

    const GaussianSequence out = forward(checkpoint.params, input,
                                         LatentMode::kDeterministic, nullptr);
    const double scale = std::max(sample.norm_std, kNormEpsilon);
    const std::size_t begin = pw.anchor + 1 - L;
    for (const std::size_t t : anchor_targets.at(pw.anchor)) {
      const auto p = static_cast<Eigen::Index>(t - begin);
      double value = out.mean(p) * scale + sample.norm_mean;
      ImputedDay& day = result.days[t];
      day.was_imputed = true;
      day.variance = out.variance(p) * scale * scale;
      day.mu_norm = out.mean(p);
      day.var_norm = out.variance(p);
      day.norm_mean = sample.norm_mean;
      day.norm_std = sample.norm_std;
      if (value < 0.0) {
        value = 0.0;
        day.clamped = true;
      }
      day.value = value;
    }
  }
  return result;
}

namespace {

constexpr const char* kImputationHeader =
    "station_id,date,value_kwh,variance_kwh2,missing,was_imputed,clamped,"
    "mu_norm,var_norm,norm_mean,norm_std";

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(begin));
      return out;
    }
    out.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
}

}  // namespace

void write_imputation_csv(const ImputationResult& result,
                          const std::string& path) {
  std::string text = kImputationHeader;
  text += '\n';
  std::vector<std::uint8_t> missing(result.days.size(), 0);
  if (!result.days.empty()) {
    for (const Date& d : result.unreachable) {
      missing[static_cast<std::size_t>(
          days_between(result.days.front().date, d))] = 1;
    }
  }
  for (std::size_t i = 0; i < result.days.size(); ++i) {
    const ImputedDay& day = result.days[i];
    text += result.station_id;
    text += ',';
    text += to_string(day.date);
    text += ',';
    text += format_double(day.value);
    text += ',';
    text += format_double(day.variance);
    text += ',';
    text += missing[i] ? '1' : '0';
    text += ',';
    text += day.was_imputed ? '1' : '0';
    text += ',';
    text += day.clamped ? '1' : '0';
    text += ',';
    text += format_double(day.mu_norm);
    text += ',';
    text += format_double(day.var_norm);
    text += ',';
    text += format_double(day.norm_mean);
    text += ',';
    text += format_double(day.norm_std);
    text += '\n';
  }
  write_text_file(path, text);
}

ImputationResult read_imputation_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  ImputationResult result;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (trim(line) != kImputationHeader) {
        throw SchemaError("unexpected imputation header in " + path);
      }
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 11) {
      throw ParseError("expected 11 fields", line_no);
    }
    if (result.station_id.empty()) {
      result.station_id = std::string(fields[0]);
    } else if (result.station_id != fields[0]) {
      throw ValidationError("multiple stations in imputation file " + path);
    }
    ImputedDay day;
    day.date = parse_date(fields[1], line_no);
    day.value = parse_double(fields[2], line_no);
    day.variance = parse_double(fields[3], line_no);
    const bool missing = parse_int(fields[4], line_no) != 0;
    day.was_imputed = parse_int(fields[5], line_no) != 0;
    day.clamped = parse_int(fields[6], line_no) != 0;
    day.mu_norm = parse_double(fields[7], line_no);
    day.var_norm = parse_double(fields[8], line_no);
    day.norm_mean = parse_double(fields[9], line_no);
    day.norm_std = parse_double(fields[10], line_no);
    if (missing) result.unreachable.push_back(day.date);
    result.days.push_back(day);
  }
  if (result.days.empty()) {
    throw ValidationError("imputation file " + path + " has no rows");
  }
  return result;
}

}  // namespace praim
