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

// Baseline availability forecasts. A forecast is aligned to the trace grid:
// entry i covers [issued_at + i*step, issued_at + (i+1)*step), where
// issued_at is the start of the step containing the query time.
//
// Besides power, each entry carries the opportunity flag, the effective
// carbon intensity and the price, predicted by the same estimator.

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sundrop/error.hpp"
#include "sundrop/trace.hpp"

namespace sundrop {

enum class ForecastMethod { persistence, diurnal, oracle };

inline std::string_view to_string(ForecastMethod m) {
  switch (m) {
    case ForecastMethod::persistence: return "persistence";
    case ForecastMethod::diurnal: return "diurnal";
    case ForecastMethod::oracle: return "oracle";
  }
  return "?";
}

inline std::optional<ForecastMethod> parse_forecast_method(std::string_view s) {
  if (s == "persistence") return ForecastMethod::persistence;
  if (s == "diurnal") return ForecastMethod::diurnal;
  if (s == "oracle") return ForecastMethod::oracle;
  return std::nullopt;
}

struct Forecast {
  std::string site_id;
  double issued_at_s = 0.0;
  double step_s = kDefaultStepSeconds;
  ForecastMethod method = ForecastMethod::persistence;
  std::vector<double> predicted_mw;
  std::vector<bool> predicted_opportunity;
  std::vector<double> predicted_carbon;  // effective gCO2/kWh
  std::vector<double> predicted_price;

  std::size_t steps() const noexcept { return predicted_mw.size(); }
  double horizon_s() const noexcept { return step_s * static_cast<double>(steps()); }
  double time_of(std::size_t i) const noexcept {
    return issued_at_s + step_s * static_cast<double>(i);
  }

  void push(const PowerSample& s) {
    predicted_mw.push_back(s.available_mw);
    predicted_opportunity.push_back(s.is_opportunity());
    predicted_carbon.push_back(s.effective_carbon_gco2_per_kwh());
    predicted_price.push_back(s.price_usd_per_mwh);
  }
};

namespace detail {
inline Forecast forecast_shell(const PowerTrace& trace, std::size_t idx, ForecastMethod m) {
  Forecast f;
  f.site_id = trace.site_id();
  f.issued_at_s = trace.time_of(idx);
  f.step_s = trace.step();
  f.method = m;
  return f;
}
}  // namespace detail

inline Forecast persistence_forecast(const PowerTrace& trace, double t, std::size_t horizon_steps) {
  const std::size_t idx = trace.index_at(t);
  Forecast f = detail::forecast_shell(trace, idx, ForecastMethod::persistence);
  for (std::size_t i = 0; i < horizon_steps; ++i) f.push(trace[idx]);
  return f;
}

inline Forecast oracle_forecast(const PowerTrace& trace, double t, std::size_t horizon_steps) {
  const std::size_t idx = trace.index_at(t);
  if (idx + horizon_steps > trace.size())
    throw OutOfRange("oracle horizon runs past the end of trace '" + trace.site_id() + "'");
  Forecast f = detail::forecast_shell(trace, idx, ForecastMethod::oracle);
  for (std::size_t i = 0; i < horizon_steps; ++i) f.push(trace[idx + i]);
  return f;
}

// Mean over all earlier days at the same time of day. Only samples at or
// before the issue step are used.
inline Forecast diurnal_forecast(const PowerTrace& trace, double t, std::size_t horizon_steps) {
  const double per_day = kSecondsPerDay / trace.step();
  const auto spd = static_cast<std::size_t>(std::llround(per_day));
  if (spd == 0 || std::abs(per_day - static_cast<double>(spd)) > 1e-9)
    throw std::invalid_argument("diurnal forecast needs a step that divides one day");
  const std::size_t idx = trace.index_at(t);
  if (idx < spd)
    throw InsufficientHistory("diurnal forecast needs one full day of history at '" +
                              trace.site_id() + "'");

  Forecast f = detail::forecast_shell(trace, idx, ForecastMethod::diurnal);
  for (std::size_t i = 0; i < horizon_steps; ++i) {
    const std::size_t target = idx + i;
    double mw = 0.0, carbon = 0.0, price = 0.0;
    std::size_t n = 0, opp = 0;
    for (std::size_t back = spd; back <= target; back += spd) {
      const std::size_t j = target - back;
      if (j > idx) continue;
      const auto& s = trace[j];
      mw += s.available_mw;
      carbon += s.effective_carbon_gco2_per_kwh();
      price += s.price_usd_per_mwh;
      opp += s.is_opportunity() ? 1 : 0;
      ++n;
    }
    const double dn = static_cast<double>(n);
    f.predicted_mw.push_back(mw / dn);
    f.predicted_opportunity.push_back(2 * opp > n);
    f.predicted_carbon.push_back(carbon / dn);
    f.predicted_price.push_back(price / dn);
  }
  return f;
}

inline Forecast make_forecast(ForecastMethod m, const PowerTrace& trace, double t,
                              std::size_t horizon_steps) {
  switch (m) {
    case ForecastMethod::persistence: return persistence_forecast(trace, t, horizon_steps);
    case ForecastMethod::diurnal: return diurnal_forecast(trace, t, horizon_steps);
    case ForecastMethod::oracle: return oracle_forecast(trace, t, horizon_steps);
  }
  throw std::logic_error("unknown forecast method");
}

struct ForecastError {
  double mae_mw = 0.0;
  double rmse_mw = 0.0;
};

inline ForecastError forecast_error(const Forecast& forecast, const PowerTrace& trace) {
  if (forecast.step_s != trace.step())
    throw MisalignedTraces("forecast step differs from trace step");
  if (forecast.steps() == 0) return {};
  if (!trace.contains(forecast.issued_at_s))
    throw MisalignedTraces("forecast issued outside the trace");
  const std::size_t idx = trace.index_at(forecast.issued_at_s);
  if (trace.time_of(idx) != forecast.issued_at_s)
    throw MisalignedTraces("forecast is not aligned to the trace grid");
  if (idx + forecast.steps() > trace.size())
    throw MisalignedTraces("forecast horizon runs past the trace");

  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < forecast.steps(); ++i) {
    const double e = forecast.predicted_mw[i] - trace[idx + i].available_mw;
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const double n = static_cast<double>(forecast.steps());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

}  // namespace sundrop
