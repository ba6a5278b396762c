#pragma once

#include <string>
#include <vector>

#include "xva/bsde.hpp"

namespace xva {

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

struct XvaReport {
    Estimate fca_delta, fba_delta, dva, cva, opportunity_cost, total_xva;
    Estimate fca, fba;  // before netting the legacy book
    Estimate fva, fva_delta;
    Estimate terminal;  // survival-weighted terminal part of Y0 (zero for the adjustment BSDE)
    Closeout convention = Closeout::clean;
    std::string verdict;
    std::vector<double> total_paths;  // per-path FCA^D - FBA^D - DVA + CVA + terminal
};

XvaReport decompose(const BsdeSolution& sol, const GeneratorSpec& spec, const PathEnsemble& ens);

struct IdentityResult {
    double residual = 0.0;
    double se = 0.0;
};

// throws IdentityError when |residual| > 3 combined SE
IdentityResult identity_check(const XvaReport& report, const Estimate& Y0);

}  // namespace xva
