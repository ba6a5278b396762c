#include "xva/market.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rng.hpp"
#include "xva/errors.hpp"

namespace xva {

double PiecewiseConstant::operator()(double t) const {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
    return values[static_cast<std::size_t>(it - breaks.begin())];
}

double PiecewiseConstant::integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    double acc = 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double hi = i < breaks.size() ? breaks[i] : std::numeric_limits<double>::infinity();
        double x0 = std::max(lo, a), x1 = std::min(hi, b);
        if (x1 > x0) acc += values[i] * (x1 - x0);
        if (hi >= b) break;
        lo = hi;
    }
    // times before 0 use the first value
    if (a < 0.0) acc += values.front() * (std::min(b, 0.0) - a);
    return acc;
}

double PiecewiseConstant::min_value() const { return *std::min_element(values.begin(), values.end()); }
double PiecewiseConstant::max_value() const { return *std::max_element(values.begin(), values.end()); }

void PiecewiseConstant::validate(const std::string& name) const {
    if (values.size() != breaks.size() + 1)
        throw ConfigError(name + ": need one more value than breakpoints");
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        if (!(breaks[i] > 0.0) || (i > 0 && !(breaks[i] > breaks[i - 1])))
            throw ConfigError(name + ": breakpoints must be positive and strictly increasing");
    }
    for (double v : values)
        if (!std::isfinite(v)) throw ConfigError(name + ": non-finite value");
}

double ShortRateModel::mean(double t) const {
    if (kind == RateKind::constant) return r0;
    double e = std::exp(-kappa * t);
    return r0 * e + theta * (1.0 - e);
}

void ShortRateModel::validate() const {
    if (!std::isfinite(r0)) throw ConfigError("rate: r0 must be finite");
    if (kind == RateKind::vasicek) {
        if (!(kappa > 0.0)) throw ConfigError("rate: vasicek needs kappa > 0");
        if (!(sigma_r >= 0.0)) throw ConfigError("rate: vasicek needs sigma >= 0");
        if (!std::isfinite(theta)) throw ConfigError("rate: theta must be finite");
    }
}

double AssetModel::vol_norm(std::size_t i) const {
    double s = 0.0;
    for (double v : vol[i]) s += v * v;
    return std::sqrt(s);
}

void AssetModel::validate() const {
    const std::size_t n = s0.size();
    for (double s : s0)
        if (!(s > 0.0)) throw ConfigError("assets: initial prices must be positive");
    if (vol.size() != n) throw ConfigError("assets: need one volatility row per asset");
    for (const auto& row : vol) {
        if (row.size() != n) throw ConfigError("assets: volatility matrix must be square");
        for (double v : row)
            if (!std::isfinite(v)) throw ConfigError("assets: non-finite volatility");
    }
    if (!sigma_H.empty() && sigma_H.size() != n) throw ConfigError("assets: sigma_H has wrong length");
    if (!sigma_C.empty() && sigma_C.size() != n) throw ConfigError("assets: sigma_C has wrong length");
}

void IntensityCurve::validate() const {
    hH.validate("intensity.hH");
    hC.validate("intensity.hC");
    if (hH.min_value() < 0.0 || hC.min_value() < 0.0) throw ConfigError("intensity: must be nonnegative");
}

void FundingSpreads::validate() const {
    s_ell.validate("spreads.s_ell");
    s_b.validate("spreads.s_b");
    if (s_ell.min_value() < 0.0 || s_b.min_value() < 0.0) throw ConfigError("spreads: must be nonnegative");
}

bool RepoSet::all(std::size_t n_assets) const {
    if (!contains("H") || !contains("C")) return false;
    for (std::size_t i = 1; i <= n_assets; ++i)
        if (!contains(std::to_string(i))) return false;
    return true;
}

void MarketModel::validate() const {
    rate.validate();
    assets.validate();
    intensity.validate();
    spreads.validate();
    if (!std::isfinite(legacy.epsilon)) throw ConfigError("legacy: epsilon must be finite");
    if (bond_market() && assets.n() > 0)
        throw ConfigError("market: a vasicek market trades the zero-coupon bond only, drop the stock block");
    const std::size_t n_trad = bond_market() ? 1 : assets.n();
    for (const auto& name : repo.names) {
        if (name == "H" || name == "C") continue;
        bool ok = false;
        for (std::size_t i = 1; i <= n_trad; ++i) ok = ok || name == std::to_string(i);
        if (!ok) throw ConfigError("repo: unknown instrument '" + name + "'");
    }
}

TimeGrid TimeGrid::uniform(double T, int steps) {
    if (!(T > 0.0)) throw ConfigError("grid: maturity must be positive");
    if (steps < 1) throw ConfigError("grid: need at least one step");
    TimeGrid g;
    g.t.resize(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) g.t[static_cast<std::size_t>(k)] = T * k / steps;
    g.t.back() = T;
    return g;
}

void TimeGrid::validate() const {
    if (t.size() < 2) throw ConfigError("grid: need at least two nodes");
    if (t.front() != 0.0) throw ConfigError("grid: must start at 0");
    for (std::size_t k = 1; k < t.size(); ++k)
        if (!(t[k] > t[k - 1])) throw ConfigError("grid: times must be strictly increasing");
}

PathEnsemble simulate_paths(const MarketModel& market, const TimeGrid& grid, std::size_t n_paths,
                            std::uint64_t seed, const DriftSchedule* drift) {
    grid.validate();
    market.validate();
    if (n_paths < 1) throw ConfigError("simulate_paths: need at least one path");

    const std::size_t M = grid.steps(), N = n_paths;
    const std::size_t n = market.bond_market() ? 0 : market.assets.n();
    const std::size_t d = market.dim();
    if (drift && (drift->size() != M || std::any_of(drift->begin(), drift->end(),
                                                    [d](const auto& v) { return v.size() != d; })))
        throw ConfigError("simulate_paths: drift schedule has wrong shape");

    PathEnsemble e;
    e.grid = grid;
    e.n_paths = N;
    e.n_assets = n;
    e.dim = d;
    e.seed = seed;
    e.dW.assign(M * d * N, 0.0);
    e.S.assign((M + 1) * n * N, 0.0);
    e.r.assign((M + 1) * N, market.rate.r0);
    e.B_inv.assign((M + 1) * N, 1.0);

    const auto& rm = market.rate;
    const bool vas = rm.kind == RateKind::vasicek;
    std::vector<double> half_var(n);
    for (std::size_t i = 0; i < n; ++i) half_var[i] = 0.5 * std::pow(market.assets.vol_norm(i), 2);

    std::vector<double> logS(n), z(d);
    for (std::size_t p = 0; p < N; ++p) {
        auto gen = detail::path_stream(seed, p, detail::kBrownian);
        std::normal_distribution<double> nd;
        for (std::size_t i = 0; i < n; ++i) {
            logS[i] = std::log(market.assets.s0[i]);
            e.S[i * N + p] = market.assets.s0[i];
        }
        double r = rm.r0, int_r = 0.0;
        for (std::size_t k = 0; k < M; ++k) {
            const double dt = grid.dt(k), sq = std::sqrt(dt);
            for (std::size_t j = 0; j < d; ++j) z[j] = nd(gen);
            for (std::size_t j = 0; j < d; ++j) {
                double mu = drift ? (*drift)[k][j] : 0.0;
                e.dW[(k * d + j) * N + p] = sq * z[j] + mu * dt;
            }
            double step_r;
            if (vas) {
                // (dW, int e^{-kappa(t-u)} dW_u) over the step are jointly Gaussian
                const double z2 = nd(gen);
                const double ek = std::exp(-rm.kappa * dt);
                const double c = (1.0 - ek) / rm.kappa;
                const double v = (1.0 - ek * ek) / (2.0 * rm.kappa);
                const double mu = drift ? (*drift)[k][0] : 0.0;
                const double X = c * mu + (c / dt) * sq * z[0] + std::sqrt(std::max(v - c * c / dt, 0.0)) * z2;
                const double r_new = r * ek + rm.theta * (1.0 - ek) + rm.sigma_r * X;
                step_r = 0.5 * (r + r_new) * dt;
                r = r_new;
            } else {
                step_r = rm.r0 * dt;
            }
            int_r += step_r;
            for (std::size_t i = 0; i < n; ++i) {
                double diff = 0.0;
                for (std::size_t j = 0; j < d; ++j) diff += market.assets.vol[i][j] * e.dW[(k * d + j) * N + p];
                logS[i] += step_r - half_var[i] * dt + diff;
                e.S[((k + 1) * n + i) * N + p] = std::exp(logS[i]);
            }
            e.r[(k + 1) * N + p] = r;
            e.B_inv[(k + 1) * N + p] = vas ? std::exp(-int_r) : std::exp(-rm.r0 * grid.t[k + 1]);
        }
    }
    return e;
}

double survival(const PiecewiseConstant& h, double t) {
    if (t < 0.0) throw ArgumentError("survival: negative time");
    return std::exp(-h.integral(0.0, t));
}

std::pair<double, double> survival(const IntensityCurve& curve, double t) {
    return {survival(curve.hH, t), survival(curve.hC, t)};
}

double survival_total(const IntensityCurve& curve, double t) {
    auto [gh, gc] = survival(curve, t);
    return gh * gc;
}

double legacy_value(const LegacyPortfolio& lp, const FundingSpreads& spreads, double int_r, double t) {
    return lp.epsilon * std::exp(int_r + lp.spread_integral(spreads, 0.0, t));
}

double legacy_discounted(const LegacyPortfolio& lp, const FundingSpreads& spreads, double t) {
    return lp.epsilon * std::exp(lp.spread_integral(spreads, 0.0, t));
}

std::vector<double> legacy_value(const LegacyPortfolio& lp, const FundingSpreads& spreads,
                                 const PathEnsemble& ens, std::size_t k) {
    if (k > ens.grid.steps()) throw ArgumentError("legacy_value: node outside the grid");
    const double disc = legacy_discounted(lp, spreads, ens.grid.t[k]);
    std::vector<double> out(ens.n_paths);
    for (std::size_t p = 0; p < ens.n_paths; ++p) out[p] = disc / ens.binv(k, p);
    return out;
}

double hazard_inverse(const PiecewiseConstant& h, double level) {
    double cum = 0.0, lo = 0.0;
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        const double hi = i < h.breaks.size() ? h.breaks[i] : kNever;
        const double v = h.values[i];
        if (v > 0.0) {
            const double need = (level - cum) / v;
            if (lo + need <= hi) return lo + need;
        }
        if (hi == kNever) break;
        cum += v * (hi - lo);
        lo = hi;
    }
    return kNever;
}

DefaultTimes sample_default_times(const IntensityCurve& curve, std::size_t n_paths, std::uint64_t seed) {
    curve.validate();
    DefaultTimes out;
    out.tau_H.resize(n_paths);
    out.tau_C.resize(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        auto gen = detail::path_stream(seed, p, detail::kDefaults);
        std::exponential_distribution<double> ex(1.0);
        const double eH = ex(gen), eC = ex(gen);
        out.tau_H[p] = hazard_inverse(curve.hH, eH);
        out.tau_C[p] = hazard_inverse(curve.hC, eC);
    }
    return out;
}

}  // namespace xva
