#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "xva/bsde.hpp"
#include "xva/market.hpp"
#include "xva/payoffs.hpp"

namespace fx {

using namespace xva;

inline MarketModel stock_market(double s0 = 100.0, double vol = 0.2, double r = 0.02) {
    MarketModel m;
    m.rate.r0 = r;
    m.assets.s0 = {s0};
    m.assets.vol = {{vol}};
    m.intensity.hH = PiecewiseConstant::constant(0.02);
    m.intensity.hC = PiecewiseConstant::constant(0.03);
    m.spreads.s_ell = PiecewiseConstant::constant(0.005);
    m.spreads.s_b = PiecewiseConstant::constant(0.01);
    m.repo.names = {"H", "C"};
    return m;
}

inline MarketModel quiet(MarketModel m) {
    m.intensity.hH = m.intensity.hC = PiecewiseConstant::constant(0.0);
    m.spreads.s_ell = m.spreads.s_b = PiecewiseConstant::constant(0.0);
    return m;
}

inline MarketModel vasicek_market(double r0 = 0.02, double kappa = 0.5, double theta = 0.03, double sigma = 0.01) {
    MarketModel m;
    m.rate.kind = RateKind::vasicek;
    m.rate.r0 = r0;
    m.rate.kappa = kappa;
    m.rate.theta = theta;
    m.rate.sigma_r = sigma;
    m.intensity.hH = PiecewiseConstant::constant(0.02);
    m.intensity.hC = PiecewiseConstant::constant(0.03);
    m.spreads.s_ell = PiecewiseConstant::constant(0.005);
    m.spreads.s_b = PiecewiseConstant::constant(0.01);
    return m;
}

inline Contract call(double K = 100.0, Side side = Side::hedger_pays, Closeout co = Closeout::replacement) {
    Contract c;
    c.kind = ContractKind::call;
    c.side = side;
    c.strike = K;
    c.maturity = 1.0;
    c.closeout = co;
    c.Lm = 0.4;
    c.LH = 0.6;
    c.LC = 0.6;
    return c;
}

inline Contract forward(double w, double K, Side side = Side::hedger_receives) {
    Contract c;
    c.kind = ContractKind::forward_combo;
    c.side = side;
    c.weights = {w};
    c.strikes = {K};
    c.maturity = 1.0;
    c.closeout = Closeout::clean;
    c.Lm = 1.0;
    c.LH = 0.6;
    c.LC = 0.6;
    return c;
}

struct Stats {
    double mean = 0.0;
    double se = 0.0;
    double var = 0.0;
};

inline Stats stats(const std::vector<double>& v) {
    Stats s;
    const double n = static_cast<double>(v.size());
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    for (double x : v) s.var += (x - s.mean) * (x - s.mean);
    s.var /= n - 1.0;
    s.se = std::sqrt(s.var / n);
    return s;
}

// composite Simpson on [a, b]
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace fx
