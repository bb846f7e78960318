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

// Back-of-envelope economics of opportunity power: storage sizing, growth,
// transmission and datacenter coverage. All functions are pure.

#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sundrop::econ {

// Money held as whole cents so that reproduced figures do not drift with
// floating-point summation order.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money from_cents(std::int64_t cents) { return Money(cents); }
  static Money from_dollars(long double dollars) {
    return Money(static_cast<std::int64_t>(std::llround(dollars * 100.0L)));
  }

  constexpr std::int64_t cents() const noexcept { return cents_; }
  constexpr double dollars() const noexcept { return static_cast<double>(cents_) / 100.0; }

  friend constexpr Money operator+(Money a, Money b) { return Money(a.cents_ + b.cents_); }
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_ = 0;
};

struct EconConstants {
  double battery_usd_per_kwh = 209.0;
  double tx_usd_per_mw_mile_low = 2500.0;
  double tx_usd_per_mw_mile_high = 16000.0;
  double dc_annual_twh = 70.0;
  double hours_per_year = 8760.0;

  // Annual opportunity energy assumed for the two grids, TWh/year.
  double caiso_opportunity_twh = 1.5;
  double miso_opportunity_twh = 6.0;
  // Combined two-grid opportunity energy band, TWh/year.
  double combined_opportunity_twh_low = 7.0;
  double combined_opportunity_twh_high = 20.0;
  double caiso_cagr = 0.40;
  int projection_years = 8;  // 2017 -> 2025

  // Quoted cost of 50 h of grid storage per wind site. Kept for reference
  // only; no derivation is reproduced.
  double miso_50h_storage_usd_low = 50e6;
  double miso_50h_storage_usd_high = 400e6;

  void validate() const {
    if (!(battery_usd_per_kwh > 0 && tx_usd_per_mw_mile_low > 0 && tx_usd_per_mw_mile_high > 0 &&
          dc_annual_twh > 0 && hours_per_year > 0))
      throw std::invalid_argument("economic constants must be positive");
    if (tx_usd_per_mw_mile_low > tx_usd_per_mw_mile_high)
      throw std::invalid_argument("transmission cost band is inverted");
  }
};

inline void require_non_negative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be >= 0");
}

// Cost of storing one average hour of the annual opportunity energy:
// (TWh/year * 1e9 kWh/TWh / hours_per_year) * $/kWh.
inline Money one_hour_storage_cost(double annual_opportunity_twh, double usd_per_kwh,
                                   double hours_per_year = 8760.0) {
  require_non_negative(annual_opportunity_twh, "annual opportunity energy");
  require_non_negative(usd_per_kwh, "storage cost");
  if (!(hours_per_year > 0)) throw std::invalid_argument("hours_per_year must be positive");
  const long double kwh_per_hour =
      static_cast<long double>(annual_opportunity_twh) * 1e9L / hours_per_year;
  return Money::from_dollars(kwh_per_hour * usd_per_kwh);
}

inline double growth_projection(double base_twh, double cagr, double years) {
  require_non_negative(base_twh, "base energy");
  if (!(cagr > -1.0)) throw std::invalid_argument("cagr must exceed -1");
  return base_twh * std::pow(1.0 + cagr, years);
}

inline Money transmission_cost(double mw, double miles, double usd_per_mw_mile) {
  require_non_negative(mw, "mw");
  require_non_negative(miles, "miles");
  require_non_negative(usd_per_mw_mile, "usd_per_mw_mile");
  return Money::from_dollars(static_cast<long double>(mw) * miles * usd_per_mw_mile);
}

inline double dc_coverage_fraction(double opportunity_twh, double dc_annual_twh) {
  require_non_negative(opportunity_twh, "opportunity energy");
  if (!(dc_annual_twh > 0.0)) throw std::invalid_argument("dc_annual_twh must be positive");
  return opportunity_twh / dc_annual_twh;
}

}  // namespace sundrop::econ
