#pragma once

#include <cstdint>
#include <string>

#include "xva/market.hpp"
#include "xva/payoffs.hpp"

namespace xva {

enum class CleanPriceMethod { automatic, regression };

struct Numerics {
    int steps = 50;
    std::size_t paths = 100000;
    std::uint64_t seed = 20240601;
    int basis_degree = 3;
    int bundles = 0;  // 0: automatic
    CleanPriceMethod clean_price = CleanPriceMethod::automatic;
    double nil_floor = 1e-4;       // relative to notional
    double sign_fraction = 1e-3;   // census tolerance
    double census_band = 1e-8;     // relative to notional; |arg| inside counts as neither sign
    void validate() const;
};

struct RunConfig {
    MarketModel market;
    Contract contract;
    Numerics numerics;

    TimeGrid grid() const { return TimeGrid::uniform(contract.maturity, numerics.steps); }
};

// strict: unknown keys, wrong types and out-of-range values raise ConfigError
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace xva
