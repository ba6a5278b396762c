#pragma once

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace xva {

// Step function: values[i] holds on [breaks[i-1], breaks[i]), last value extends to infinity.
struct PiecewiseConstant {
    std::vector<double> breaks;
    std::vector<double> values{0.0};

    static PiecewiseConstant constant(double v) { return {{}, {v}}; }

    double operator()(double t) const;
    double integral(double a, double b) const;
    double min_value() const;
    double max_value() const;
    bool is_constant() const { return values.size() == 1; }
    void validate(const std::string& name) const;
};

enum class RateKind { constant, vasicek };

struct ShortRateModel {
    RateKind kind = RateKind::constant;
    double r0 = 0.0;
    double kappa = 0.0;
    double theta = 0.0;
    double sigma_r = 0.0;

    double mean(double t) const;
    void validate() const;
};

struct AssetModel {
    std::vector<double> s0;
    std::vector<std::vector<double>> vol;  // row i is sigma^i
    std::vector<double> sigma_H;           // empty means jump-only
    std::vector<double> sigma_C;

    std::size_t n() const { return s0.size(); }
    double vol_norm(std::size_t i) const;
    void validate() const;
};

struct IntensityCurve {
    PiecewiseConstant hH;
    PiecewiseConstant hC;

    double h(double t) const { return hH(t) + hC(t); }
    void validate() const;
};

struct FundingSpreads {
    PiecewiseConstant s_ell;
    PiecewiseConstant s_b;
    void validate() const;
};

struct LegacyPortfolio {
    double epsilon = 0.0;

    // R^eps - r: lending spread for a long legacy book, borrowing spread otherwise
    double spread(const FundingSpreads& s, double t) const {
        return epsilon >= 0.0 ? s.s_ell(t) : s.s_b(t);
    }
    double spread_integral(const FundingSpreads& s, double a, double b) const {
        return epsilon >= 0.0 ? s.s_ell.integral(a, b) : s.s_b.integral(a, b);
    }
};

// Names are "1".."n", "H", "C".
struct RepoSet {
    std::set<std::string> names;
    bool contains(const std::string& n) const { return names.count(n) > 0; }
    bool all(std::size_t n_assets) const;
};

struct MarketModel {
    ShortRateModel rate;
    AssetModel assets;
    IntensityCurve intensity;
    FundingSpreads spreads;
    LegacyPortfolio legacy;
    RepoSet repo;

    bool bond_market() const { return rate.kind == RateKind::vasicek; }
    // Brownian dimension: one factor per stock, or the single rate factor
    std::size_t dim() const { return bond_market() ? 1 : assets.n(); }
    void validate() const;
};

struct TimeGrid {
    std::vector<double> t;

    static TimeGrid uniform(double T, int steps);
    std::size_t steps() const { return t.size() - 1; }
    double T() const { return t.back(); }
    double dt(std::size_t k) const { return t[k + 1] - t[k]; }
    void validate() const;
};

// Layout is time-major so a regression slice is contiguous:
// S[(k*n + i)*N + p], dW[(k*d + j)*N + p], r and B_inv at [k*N + p].
struct PathEnsemble {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::size_t n_assets = 0;
    std::size_t dim = 0;
    std::uint64_t seed = 0;
    std::vector<double> dW;
    std::vector<double> S;
    std::vector<double> r;
    std::vector<double> B_inv;

    double s(std::size_t k, std::size_t i, std::size_t p) const { return S[(k * n_assets + i) * n_paths + p]; }
    double dw(std::size_t k, std::size_t j, std::size_t p) const { return dW[(k * dim + j) * n_paths + p]; }
    double rate(std::size_t k, std::size_t p) const { return r[k * n_paths + p]; }
    double binv(std::size_t k, std::size_t p) const { return B_inv[k * n_paths + p]; }
};

// drift[k][j]: deterministic dt-coefficient added to the j-th Brownian increment on step k.
using DriftSchedule = std::vector<std::vector<double>>;

PathEnsemble simulate_paths(const MarketModel& market, const TimeGrid& grid, std::size_t n_paths,
                            std::uint64_t seed, const DriftSchedule* drift = nullptr);

double survival(const PiecewiseConstant& h, double t);
std::pair<double, double> survival(const IntensityCurve& curve, double t);
double survival_total(const IntensityCurve& curve, double t);

// B^eps_t given the realised integral of r over [0, t].
double legacy_value(const LegacyPortfolio& lp, const FundingSpreads& spreads, double int_r, double t);
// B^eps_t / B_t, deterministic because the short rate cancels.
double legacy_discounted(const LegacyPortfolio& lp, const FundingSpreads& spreads, double t);
// per-path B^eps at grid node k
std::vector<double> legacy_value(const LegacyPortfolio& lp, const FundingSpreads& spreads,
                                 const PathEnsemble& ens, std::size_t k);

struct DefaultTimes {
    std::vector<double> tau_H;
    std::vector<double> tau_C;
};

inline constexpr double kNever = std::numeric_limits<double>::infinity();

DefaultTimes sample_default_times(const IntensityCurve& curve, std::size_t n_paths, std::uint64_t seed);

// first time the cumulative hazard of h reaches level e, or kNever
double hazard_inverse(const PiecewiseConstant& h, double e);

}  // namespace xva
