// Copyright 2026 The sundrop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Per-site power availability traces: CSV ingestion, synthetic solar and
// wind generators, and step-hold queries.
//
// A trace is a uniform-step series of samples. Each sample holds the power
// a site could draw during [start + i*step, start + (i+1)*step), the
// settlement price and the grid carbon intensity for that interval. A sample
// counts as opportunity power when it is flagged curtailed or its price is
// non-positive.

#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sundrop/detail/numfmt.hpp"
#include "sundrop/error.hpp"

namespace sundrop {

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kDefaultStepSeconds = 300.0;

struct PowerSample {
  double available_mw = 0.0;
  double price_usd_per_mwh = 0.0;
  double carbon_gco2_per_kwh = 0.0;
  bool curtailed = false;

  bool is_opportunity() const noexcept { return curtailed || price_usd_per_mwh <= 0.0; }

  // Intensity actually charged to energy drawn from this sample.
  double effective_carbon_gco2_per_kwh() const noexcept {
    return is_opportunity() ? 0.0 : carbon_gco2_per_kwh;
  }

  friend bool operator==(const PowerSample&, const PowerSample&) = default;
};

// Half-open time interval [begin, end) in epoch seconds.
struct Interval {
  double begin = 0.0;
  double end = 0.0;

  double length() const noexcept { return end - begin; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

class PowerTrace {
 public:
  PowerTrace(std::string site_id, double start_epoch, double step,
             std::vector<PowerSample> samples)
      : site_id_(std::move(site_id)),
        start_(start_epoch),
        step_(step),
        samples_(std::move(samples)) {
    if (!(step_ > 0.0) || !std::isfinite(step_))
      throw std::invalid_argument("trace step must be positive");
    if (!std::isfinite(start_)) throw std::invalid_argument("trace start must be finite");
    if (samples_.empty()) throw std::invalid_argument("trace must hold at least one sample");
    for (const auto& s : samples_) {
      if (!std::isfinite(s.available_mw) || s.available_mw < 0.0)
        throw NegativePower("available_mw must be finite and non-negative");
      if (!std::isfinite(s.carbon_gco2_per_kwh) || s.carbon_gco2_per_kwh < 0.0)
        throw std::invalid_argument("carbon intensity must be finite and non-negative");
      if (!std::isfinite(s.price_usd_per_mwh))
        throw std::invalid_argument("price must be finite");
    }
  }

  const std::string& site_id() const noexcept { return site_id_; }
  double start() const noexcept { return start_; }
  double step() const noexcept { return step_; }
  double duration() const noexcept { return step_ * static_cast<double>(samples_.size()); }
  double end() const noexcept { return start_ + duration(); }
  std::size_t size() const noexcept { return samples_.size(); }
  std::span<const PowerSample> samples() const noexcept { return samples_; }
  const PowerSample& operator[](std::size_t i) const { return samples_.at(i); }

  double time_of(std::size_t i) const noexcept {
    return start_ + step_ * static_cast<double>(i);
  }

  bool contains(double t) const noexcept { return t >= start_ && t < end(); }

  std::size_t index_at(double t) const {
    if (!contains(t)) {
      std::ostringstream msg;
      msg << "t=" << t << " outside trace [" << start_ << ", " << end() << ")";
      throw OutOfRange(msg.str());
    }
    auto idx = static_cast<std::size_t>(std::floor((t - start_) / step_));
    return idx < samples_.size() ? idx : samples_.size() - 1;
  }

  const PowerSample& sample_at(double t) const { return samples_[index_at(t)]; }

  bool aligned_with(const PowerTrace& other) const noexcept {
    return start_ == other.start_ && step_ == other.step_ && size() == other.size();
  }

  friend bool operator==(const PowerTrace&, const PowerTrace&) = default;

 private:
  std::string site_id_;
  double start_;
  double step_;
  std::vector<PowerSample> samples_;
};

// Step-hold lookup.
inline double power_at(const PowerTrace& trace, double t) {
  return trace.sample_at(t).available_mw;
}

inline bool is_available(const PowerSample& s, double min_mw) noexcept {
  return s.is_opportunity() && s.available_mw >= min_mw;
}

// Fraction of steps whose sample is opportunity power of at least min_mw.
inline double coverage(const PowerTrace& trace, double min_mw) {
  std::size_t hits = 0;
  for (const auto& s : trace.samples()) hits += is_available(s, min_mw) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(trace.size());
}

inline std::vector<Interval> opportunity_windows(const PowerTrace& trace, double min_mw) {
  if (min_mw < 0.0) throw std::invalid_argument("min_mw must be non-negative");
  std::vector<Interval> out;
  const auto samples = trace.samples();
  std::size_t i = 0;
  while (i < samples.size()) {
    if (!is_available(samples[i], min_mw)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < samples.size() && is_available(samples[j], min_mw)) ++j;
    out.push_back({trace.time_of(i), trace.time_of(j)});
    i = j;
  }
  return out;
}

inline double union_coverage(std::span<const PowerTrace> traces, double min_mw) {
  if (traces.empty()) return 0.0;
  for (const auto& tr : traces) {
    if (!tr.aligned_with(traces.front()))
      throw MisalignedTraces("trace '" + tr.site_id() + "' does not share start/step/length with '" +
                             traces.front().site_id() + "'");
  }
  const std::size_t n = traces.front().size();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& tr : traces) {
      if (is_available(tr.samples()[i], min_mw)) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kTraceCsvHeader =
    "timestamp_epoch_s,site_id,available_mw,price_usd_per_mwh,carbon_gco2_per_kwh,curtailed";

// Parses the trace CSV format. A single-row trace has no observable step and
// takes `single_row_step`.
inline PowerTrace parse_trace_csv(std::istream& in, double single_row_step = kDefaultStepSeconds) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) -> MalformedRow {
    return MalformedRow("line " + std::to_string(line_no) + ": " + why);
  };

  if (!std::getline(in, line)) throw MalformedRow("missing header");
  ++line_no;
  if (detail::trim(line) != kTraceCsvHeader) throw fail("unexpected header");

  std::string site_id;
  std::vector<double> stamps;
  std::vector<PowerSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split(line, ',');
    if (fields.size() != 6) throw fail("expected 6 fields, got " + std::to_string(fields.size()));

    auto ts = detail::parse_double(fields[0]);
    auto mw = detail::parse_double(fields[2]);
    auto price = detail::parse_double(fields[3]);
    auto carbon = detail::parse_double(fields[4]);
    auto flag = detail::trim(fields[5]);
    if (!ts || !std::isfinite(*ts)) throw fail("bad timestamp");
    if (!mw || !std::isfinite(*mw)) throw fail("bad available_mw");
    if (!price || !std::isfinite(*price)) throw fail("bad price");
    if (!carbon || !std::isfinite(*carbon) || *carbon < 0.0) throw fail("bad carbon intensity");
    if (flag != "0" && flag != "1") throw fail("curtailed must be 0 or 1");
    if (*mw < 0.0)
      throw NegativePower("line " + std::to_string(line_no) + ": available_mw < 0");

    auto site = std::string(detail::trim(fields[1]));
    if (site.empty()) throw fail("empty site_id");
    if (samples.empty()) {
      site_id = site;
    } else if (site != site_id) {
      throw fail("site_id '" + site + "' differs from '" + site_id + "'");
    }

    stamps.push_back(*ts);
    samples.push_back({*mw, *price, *carbon, flag == "1"});
  }
  if (samples.empty()) throw MalformedRow("no data rows");

  double step = single_row_step;
  if (stamps.size() >= 2) {
    step = stamps[1] - stamps[0];
    if (!(step > 0.0)) throw NonUniformStep("timestamps must increase");
    for (std::size_t i = 2; i < stamps.size(); ++i) {
      // Compare against the ideal grid so rounding does not accumulate.
      const double expected = stamps[0] + step * static_cast<double>(i);
      if (std::abs(stamps[i] - expected) > 1e-6 * std::max(1.0, step))
        throw NonUniformStep("row " + std::to_string(i + 2) + " breaks the " +
                             detail::format_double(step) + " s step");
    }
  }
  return PowerTrace(site_id, stamps[0], step, std::move(samples));
}

inline PowerTrace parse_trace_csv(const std::string& text,
                                  double single_row_step = kDefaultStepSeconds) {
  std::istringstream in(text);
  return parse_trace_csv(in, single_row_step);
}

inline void write_trace_csv(std::ostream& out, const PowerTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& s = trace[i];
    out << detail::format_double(trace.time_of(i)) << ',' << trace.site_id() << ','
        << detail::format_double(s.available_mw) << ','
        << detail::format_double(s.price_usd_per_mwh) << ','
        << detail::format_double(s.carbon_gco2_per_kwh) << ',' << (s.curtailed ? 1 : 0)
        << '\n';
  }
}

inline std::string to_csv(const PowerTrace& trace) {
  std::ostringstream out;
  write_trace_csv(out, trace);
  return out.str();
}

// ---------------------------------------------------------------------------
// Synthetic generators

// Price and grid intensity stamped on synthetic samples. Opportunity samples
// carry `opportunity_price`; the rest carry `grid_price`.
struct SynthMarket {
  double grid_price_usd_per_mwh = 35.0;
  double opportunity_price_usd_per_mwh = 0.0;
  double grid_carbon_gco2_per_kwh = 400.0;
};

struct SolarParams {
  std::string site_id = "solar";
  double peak_mw = 100.0;
  double sunrise_s = 21600.0;
  double sunset_s = 64800.0;
  double step_s = kDefaultStepSeconds;
  int days = 1;
  double start_epoch = 0.0;
  SynthMarket market{};
};

// Half-sine arch between sunrise and sunset, zero at night. Every daylight
// sample (time-of-day in [sunrise, sunset)) is flagged curtailed.
inline PowerTrace synth_solar(const SolarParams& p) {
  if (!(p.sunrise_s >= 0.0 && p.sunrise_s < p.sunset_s && p.sunset_s <= kSecondsPerDay))
    throw InvalidWindow("need 0 <= sunrise < sunset <= 86400");
  if (!(p.peak_mw > 0.0)) throw std::invalid_argument("peak_mw must be positive");
  if (!(p.step_s > 0.0)) throw std::invalid_argument("step must be positive");
  if (p.days < 1) throw std::invalid_argument("days must be >= 1");

  const auto count = static_cast<std::size_t>(std::llround(p.days * kSecondsPerDay / p.step_s));
  if (count == 0) throw std::invalid_argument("step longer than the requested span");
  std::vector<PowerSample> samples;
  samples.reserve(count);
  const double daylight = p.sunset_s - p.sunrise_s;
  for (std::size_t i = 0; i < count; ++i) {
    const double tod = std::fmod(p.step_s * static_cast<double>(i), kSecondsPerDay);
    PowerSample s;
    s.carbon_gco2_per_kwh = p.market.grid_carbon_gco2_per_kwh;
    if (tod >= p.sunrise_s && tod < p.sunset_s) {
      s.available_mw = p.peak_mw * std::sin(std::numbers::pi * (tod - p.sunrise_s) / daylight);
      if (s.available_mw < 0.0) s.available_mw = 0.0;
      s.curtailed = true;
      s.price_usd_per_mwh = p.market.opportunity_price_usd_per_mwh;
    } else {
      s.price_usd_per_mwh = p.market.grid_price_usd_per_mwh;
    }
    samples.push_back(s);
  }
  return PowerTrace(p.site_id, p.start_epoch, p.step_s, std::move(samples));
}

inline PowerTrace synth_solar(double peak_mw, double sunrise_s, double sunset_s, double step_s,
                              int days) {
  SolarParams p;
  p.peak_mw = peak_mw;
  p.sunrise_s = sunrise_s;
  p.sunset_s = sunset_s;
  p.step_s = step_s;
  p.days = days;
  return synth_solar(p);
}

struct WindParams {
  std::string site_id = "wind";
  double mean_mw = 50.0;
  double volatility = 10.0;
  // Fraction of the deviation from the mean removed each step, in [0, 1].
  double reversion = 0.1;
  std::uint64_t seed = 0;
  double step_s = kDefaultStepSeconds;
  int days = 1;
  double start_epoch = 0.0;
  SynthMarket market{};
};

// Clipped AR(1): x[k+1] = mean + (1 - reversion) * (x[k] - mean) + volatility * N(0,1),
// starting at the mean. Samples at or above the mean are the surplus and are
// flagged curtailed.
inline PowerTrace synth_wind(const WindParams& p) {
  if (!(p.mean_mw >= 0.0)) throw std::invalid_argument("mean_mw must be non-negative");
  if (!(p.volatility >= 0.0)) throw std::invalid_argument("volatility must be non-negative");
  if (!(p.reversion >= 0.0 && p.reversion <= 1.0))
    throw std::invalid_argument("reversion must lie in [0, 1]");
  if (!(p.step_s > 0.0)) throw std::invalid_argument("step must be positive");
  if (p.days < 1) throw std::invalid_argument("days must be >= 1");

  const auto count = static_cast<std::size_t>(std::llround(p.days * kSecondsPerDay / p.step_s));
  if (count == 0) throw std::invalid_argument("step longer than the requested span");
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double keep = 1.0 - p.reversion;

  std::vector<PowerSample> samples;
  samples.reserve(count);
  double x = p.mean_mw;
  for (std::size_t i = 0; i < count; ++i) {
    PowerSample s;
    s.available_mw = x > 0.0 ? x : 0.0;
    s.curtailed = x >= p.mean_mw;
    s.price_usd_per_mwh = s.curtailed ? p.market.opportunity_price_usd_per_mwh
                                      : p.market.grid_price_usd_per_mwh;
    s.carbon_gco2_per_kwh = p.market.grid_carbon_gco2_per_kwh;
    samples.push_back(s);
    x = p.mean_mw + keep * (x - p.mean_mw) + p.volatility * noise(rng);
  }
  return PowerTrace(p.site_id, p.start_epoch, p.step_s, std::move(samples));
}

inline PowerTrace synth_wind(double mean_mw, double volatility, double reversion,
                             std::uint64_t seed, double step_s, int days) {
  WindParams p;
  p.mean_mw = mean_mw;
  p.volatility = volatility;
  p.reversion = reversion;
  p.seed = seed;
  p.step_s = step_s;
  p.days = days;
  return synth_wind(p);
}

}  // namespace sundrop
