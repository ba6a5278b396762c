#pragma once

#include <optional>
#include <string>

#include "xva/binary.hpp"
#include "xva/config.hpp"
#include "xva/xva.hpp"

namespace xva {

struct PriceResult {
    Estimate clean;   // p^N_0
    Estimate y0;      // reduced adjustment at 0
    Estimate price;   // p^N_0 + Y0
    std::string method;
    std::optional<Estimate> linear_price;
    std::optional<double> closed_form;
    std::string linear_note;
    Verdict verdict;
    double wrong_sign_fraction = 0.0;
    XvaReport report;
    IdentityResult identity;
    bool identity_ok = true;
    double notional = 1.0;
};

// Everything below writes CSVs into out_dir (created on demand) and returns the headline numbers.
PriceResult run_price(const RunConfig& cfg, const std::string& out_dir);
Verdict run_verify(const RunConfig& cfg, const std::string& out_dir);
TableResult run_table(const RunConfig& cfg, const std::string& out_dir);
void run_paths(const RunConfig& cfg, const std::string& out_dir);

// closed-form replacement call value when the configuration fits it
std::optional<double> closed_form_price(const RunConfig& cfg);

}  // namespace xva
