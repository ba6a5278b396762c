#include "xva/closeout.hpp"

#include <algorithm>

namespace xva {

double closeout_amount(const CloseoutSpec& spec, double p_tilde, double Y, double B, double /*B_eps*/) {
    // replacement: V_- - B^eps = B Y + p^N
    return spec.convention == Closeout::clean ? B * p_tilde : B * (Y + p_tilde);
}

Exposures theta_exposures(const CloseoutSpec& spec, double Y, double p_tilde, double eE) {
    const double aH = spec.LH * spec.Lm, aC = spec.LC * spec.Lm;
    const double pos_e = std::max(eE, 0.0), neg_e = std::max(-eE, 0.0);
    Exposures out{};
    if (spec.convention == Closeout::clean) {
        const double x = p_tilde + eE;
        out.H = aH * std::max(x, 0.0);
        out.C = aC * std::max(-x, 0.0);
    } else {
        const double x = Y + p_tilde + eE;
        out.H = -Y + aH * std::max(x, 0.0);
        out.C = Y + aC * std::max(-x, 0.0);
    }
    out.dH = out.H - aH * pos_e;
    out.dC = out.C - aC * neg_e;
    return out;
}

double margin(const CloseoutSpec& spec, double e_N) { return (1.0 - spec.Lm) * e_N; }

}  // namespace xva
