#include "xva/closedform.hpp"

#include <cmath>

#include "xva/binary.hpp"
#include "xva/bsde.hpp"
#include "xva/errors.hpp"
#include "xva/payoffs.hpp"

namespace xva {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double bs_price(double S, double K, double tau, double sigma, double rate, bool call) {
    const double df = std::exp(-rate * tau);
    if (tau <= 0.0 || sigma <= 0.0) {
        const double fwd = S - K * df;
        return call ? std::max(fwd, 0.0) : std::max(-fwd, 0.0);
    }
    if (K <= 0.0) return call ? S : 0.0;
    const double sv = sigma * std::sqrt(tau);
    const double d1 = (std::log(S / K) + (rate + 0.5 * sigma * sigma) * tau) / sv;
    const double d2 = d1 - sv;
    return call ? S * norm_cdf(d1) - K * df * norm_cdf(d2) : K * df * norm_cdf(-d2) - S * norm_cdf(-d1);
}

double bs_delta(double S, double K, double tau, double sigma, double rate, bool call) {
    if (tau <= 0.0 || sigma <= 0.0) {
        const double fwd = S - K * std::exp(-rate * tau);
        return call ? (fwd > 0.0 ? 1.0 : 0.0) : (fwd < 0.0 ? -1.0 : 0.0);
    }
    if (K <= 0.0) return call ? 1.0 : 0.0;
    const double d1 = (std::log(S / K) + (rate + 0.5 * sigma * sigma) * tau) / (sigma * std::sqrt(tau));
    return call ? norm_cdf(d1) : norm_cdf(d1) - 1.0;
}

double bs_cb(const ClosedFormInputs& in) {
    if (!(in.T_minus_t > 0.0)) throw ArgumentError("bs_cb: time to maturity must be positive");
    if (!(in.sigma > 0.0)) throw ArgumentError("bs_cb: volatility must be positive");
    return bs_price(in.S, in.K, in.T_minus_t, in.sigma, in.R_b(), true);
}

double call_price_replacement(const ClosedFormInputs& in) {
    if (in.epsilon > 0.0)
        throw RegimeError("call_price_replacement: needs a nonpositive legacy book, use the semilinear solver");
    if (in.Lm < 0.0 || in.Lm > 1.0 || in.LH < 0.0 || in.LH > 1.0 || in.hH < 0.0 || in.s_b < 0.0)
        throw RegimeError("call_price_replacement: parameters outside the borrowing regime");
    const double tau = in.T_minus_t;
    return std::exp((in.s_b * (1.0 - in.Lm) - in.hH * in.LH * in.Lm) * tau) * bs_cb(in);
}

double vasicek_B(const ShortRateModel& m, double tau) { return (1.0 - std::exp(-m.kappa * tau)) / m.kappa; }

double vasicek_zcb(const ShortRateModel& m, double t, double U, double r_t) {
    if (m.kind != RateKind::vasicek) throw ConfigError("vasicek_zcb: rate model is not vasicek");
    if (U < t) throw ArgumentError("vasicek_zcb: bond already matured");
    const double tau = U - t;
    const double B = vasicek_B(m, tau);
    const double s2 = m.sigma_r * m.sigma_r;
    const double lnA = (m.theta - s2 / (2.0 * m.kappa * m.kappa)) * (B - tau) - s2 * B * B / (4.0 * m.kappa);
    return std::exp(lnA - B * r_t);
}

BondOptionValue vasicek_zbc(const ShortRateModel& m, double t, double T, double U, double K, double r_t) {
    if (!(U > T)) throw ArgumentError("vasicek_zbc: bond must outlive the option");
    const double PU = vasicek_zcb(m, t, U, r_t);
    const double PT = vasicek_zcb(m, t, T, r_t);
    const double BU = vasicek_B(m, U - t), BT = vasicek_B(m, T - t);
    const double sp = m.sigma_r * std::sqrt((1.0 - std::exp(-2.0 * m.kappa * (T - t))) / (2.0 * m.kappa)) *
                      vasicek_B(m, U - T);
    if (!(sp > 0.0)) {
        const bool itm = PU > K * PT;
        return {itm ? PU - K * PT : 0.0, itm ? -BU * PU + K * BT * PT : 0.0};
    }
    const double h = std::log(PU / (K * PT)) / sp + 0.5 * sp;
    const double nh = norm_cdf(h), nh2 = norm_cdf(h - sp);
    return {PU * nh - K * PT * nh2, -BU * PU * nh + K * BT * PT * nh2};
}

McEstimate forward_linear_price(const Contract& c, const MarketModel& m, const Verdict& v, const TimeGrid& grid,
                                std::size_t n_paths, std::uint64_t seed) {
    if (c.kind != ContractKind::forward_combo)
        throw ArgumentError("forward_linear_price: only forward combinations");
    if (c.closeout != Closeout::clean) throw ArgumentError("forward_linear_price: clean close-out only");
    if (v.mode != VerdictMode::analytic || v.outcome == Outcome::undetermined)
        throw AuthorizationError("forward_linear_price: no analytic verdict authorizes the linear path");
    auto prob = make_problem(m, c, grid, n_paths, seed, 3);
    auto spec = make_generator(prob, v.outcome == Outcome::fca_zero ? GenMode::linear_ell : GenMode::linear_b);
    auto sol = solve_linear(spec, prob.ens);
    return {sol.Y0 + prob.clean.p0(), sol.Y0_se};
}

}  // namespace xva
