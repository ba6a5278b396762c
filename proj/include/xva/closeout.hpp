#pragma once

#include "xva/payoffs.hpp"

namespace xva {

struct CloseoutSpec {
    Closeout convention = Closeout::clean;
    double Lm = 1.0;
    double LH = 0.0;
    double LC = 0.0;
    double eE = 0.0;  // endowed exposure, discounted; a constant

    static CloseoutSpec from(const Contract& c, double eE = 0.0) { return {c.closeout, c.Lm, c.LH, c.LC, eE}; }
};

// e^N at one state
double closeout_amount(const CloseoutSpec& spec, double p_tilde, double Y, double B, double B_eps);

struct Exposures {
    double H;   // Theta~^H
    double C;   // Theta~^C
    double dH;  // incremental forms
    double dC;
};

Exposures theta_exposures(const CloseoutSpec& spec, double Y, double p_tilde, double e_tilde_E);
inline Exposures theta_exposures(const CloseoutSpec& spec, double Y, double p_tilde) {
    return theta_exposures(spec, Y, p_tilde, spec.eE);
}

double margin(const CloseoutSpec& spec, double e_N);

// c = B^{-1} m^N in discounted units
inline double discounted_margin(const CloseoutSpec& spec, double Y, double p_tilde) {
    const double e = spec.convention == Closeout::clean ? p_tilde : Y + p_tilde;
    return (1.0 - spec.Lm) * e;
}

}  // namespace xva
