#include "synthetic.hpp"

#include <cmath>
#include <filesystem>

#include "praim/rng.hpp"

namespace testkit {

praim::DailyDemandSeries sine_series(const std::string& station_id,
                                     double offset, double amplitude,
                                     double noise_sigma,
                                     const praim::Date& start, int n_days,
                                     std::uint64_t seed) {
  praim::SplitRng rng(seed);
  praim::DailyDemandSeries s;
  s.station_id = station_id;
  s.start_date = start;
  s.end_date = praim::add_days(start, n_days - 1);
  s.demand.reserve(static_cast<std::size_t>(n_days));
  s.missing.assign(static_cast<std::size_t>(n_days), 0);
  constexpr double kTwoPi = 6.283185307179586;
  for (int i = 0; i < n_days; ++i) {
    const int dow = praim::day_of_week(praim::add_days(start, i));
    const double base =
        offset + amplitude * std::sin(kTwoPi * static_cast<double>(dow) / 7.0);
    s.demand.push_back(std::max(0.0, base + noise_sigma * rng.next_gaussian()));
  }
  return s;
}

std::vector<praim::DailyDemandSeries> sine_fleet(int n_days,
                                                 double noise_sigma,
                                                 std::uint64_t seed) {
  const praim::Date start{2023, 1, 2};  // a Monday
  std::vector<praim::DailyDemandSeries> fleet;
  const double offsets[] = {25.0, 35.0, 45.0, 55.0};
  for (int i = 0; i < 4; ++i) {
    fleet.push_back(sine_series("S" + std::to_string(i + 1), offsets[i], 10.0,
                                noise_sigma, start, n_days, seed + 100 * i));
  }
  return fleet;
}

praim::MissingnessProfile blocky_profile() {
  praim::MissingnessProfile p;
  p.gap_length_pmf = {{2, 0.5}, {3, 0.3}, {4, 0.2}};
  p.dow_weights = {0.35, 0.30, 0.10, 0.10, 0.05, 0.05, 0.05};
  p.seasonal_weights.fill(1.0 / 12.0);
  p.spacing_pmf = {{8, 0.4}, {10, 0.4}, {14, 0.2}};
  return p;
}

praim::DailyDemandSeries with_gaps(const praim::DailyDemandSeries& complete,
                                   double fraction, std::uint64_t seed) {
  praim::SplitRng rng(seed);
  const praim::DmMaskResult drawn = praim::gen_mask_dm(
      blocky_profile(), static_cast<int>(complete.size()),
      complete.start_date, fraction, rng);
  praim::DailyDemandSeries gappy = complete;
  for (std::size_t i = 0; i < gappy.size(); ++i) {
    if (drawn.mask[i]) {
      gappy.missing[i] = 1;
      gappy.demand[i] = 0.0;
    }
  }
  return gappy;
}

praim::Config small_config(int epochs) {
  praim::Config cfg;
  cfg.data.window = 7;
  // floor(rate * 7) walks through every masked-count level 1..6.
  cfg.mask.rates = {0.15, 0.3, 0.45, 0.6, 0.75, 0.9};
  cfg.embed.provider = "stub";
  cfg.embed.dim = 256;
  cfg.rag.k = 20;
  cfg.model.d_lat = 32;
  cfg.model.d_stat = 16;
  cfg.model.d_cal = 16;
  cfg.model.d_film = 64;
  cfg.model.layers = 2;
  cfg.model.heads = 4;
  cfg.train.lr = 1e-3;
  cfg.train.batch = 64;
  cfg.train.epochs = epochs;
  cfg.train.patience = 8;
  cfg.train.seed = 42;
  cfg.validate();
  return cfg;
}

void write_series_dir(const std::vector<praim::DailyDemandSeries>& fleet,
                      const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const praim::DailyDemandSeries& s : fleet) {
    praim::write_series_csv(
        s, (std::filesystem::path(dir) / (s.station_id + ".csv")).string());
  }
}

}  // namespace testkit
