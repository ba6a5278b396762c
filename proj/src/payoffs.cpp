#include "xva/payoffs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xva/closedform.hpp"
#include "xva/errors.hpp"
#include "xva/regression.hpp"

namespace xva {

std::string to_string(ContractKind k) {
    switch (k) {
        case ContractKind::forward_combo: return "forward_combo";
        case ContractKind::call: return "call";
        case ContractKind::put: return "put";
        case ContractKind::asian_floating_call: return "asian_floating_call";
        case ContractKind::zero_coupon_bond: return "zero_coupon_bond";
        case ContractKind::bond_option: return "bond_option";
    }
    return "?";
}

std::string to_string(Side s) { return s == Side::hedger_pays ? "hedger_pays" : "hedger_receives"; }

std::string to_string(Closeout c) { return c == Closeout::clean ? "clean" : "replacement"; }

void Contract::validate() const {
    auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!unit(Lm) || !unit(LH) || !unit(LC)) throw ConfigError("contract: loss rates must lie in [0,1]");
    if (!(maturity > 0.0)) throw ConfigError("contract: maturity must be positive");
    if (strike < 0.0) throw ConfigError("contract: strike must be nonnegative");
    if (notional < 0.0) throw ConfigError("contract: notional must be nonnegative");
    if (kind == ContractKind::forward_combo) {
        if (weights.empty() || weights.size() != strikes.size())
            throw ConfigError("contract: forward_combo needs matching weights and strikes");
        for (double k : strikes)
            if (k < 0.0) throw ConfigError("contract: strikes must be nonnegative");
    }
    if (kind == ContractKind::bond_option && !(bond_maturity > maturity))
        throw ConfigError("contract: bond_option needs bond maturity U > T");
}

double Contract::notional_or_default(const MarketModel& m) const {
    if (notional > 0.0) return notional;
    switch (kind) {
        case ContractKind::zero_coupon_bond:
        case ContractKind::bond_option: return 1.0;
        case ContractKind::forward_combo: {
            double acc = 0.0;
            for (std::size_t i = 0; i < weights.size(); ++i)
                acc += std::abs(weights[i]) * std::max(m.assets.s0.empty() ? 0.0 : m.assets.s0[0], strikes[i]);
            return acc > 0.0 ? acc : 1.0;
        }
        default: return std::max(m.assets.s0.empty() ? 1.0 : m.assets.s0[0], strike);
    }
}

static bool stock_kind(ContractKind k) {
    return k == ContractKind::forward_combo || k == ContractKind::call || k == ContractKind::put ||
           k == ContractKind::asian_floating_call;
}

void check_compatible(const Contract& c, const MarketModel& m) {
    c.validate();
    if (stock_kind(c.kind) && (m.bond_market() || m.assets.n() == 0))
        throw UnsupportedError("contract: " + to_string(c.kind) + " needs a stock market");
    if (c.kind == ContractKind::bond_option && !m.bond_market())
        throw UnsupportedError("contract: bond_option needs a vasicek rate market");
}

static void check_maturity(const Contract& c, const PathEnsemble& ens) {
    if (std::abs(ens.grid.T() - c.maturity) > 1e-12 * std::max(1.0, c.maturity))
        throw ConfigError("contract maturity must equal the grid end");
}

std::vector<double> log_average_table(const PathEnsemble& ens) {
    const std::size_t N = ens.n_paths, M = ens.grid.steps();
    std::vector<double> J((M + 1) * N, 0.0);
    if (ens.n_assets == 0) return J;
    for (std::size_t j = 0; j < M; ++j) {
        const double h = 0.5 * ens.grid.dt(j);
        for (std::size_t p = 0; p < N; ++p)
            J[(j + 1) * N + p] = J[j * N + p] + h * (std::log(ens.s(j, 0, p)) + std::log(ens.s(j + 1, 0, p)));
    }
    return J;
}

std::vector<double> log_average_integral(const PathEnsemble& ens, std::size_t k) {
    auto tab = log_average_table(ens);
    return {tab.begin() + static_cast<std::ptrdiff_t>(k * ens.n_paths),
            tab.begin() + static_cast<std::ptrdiff_t>((k + 1) * ens.n_paths)};
}

std::vector<double> terminal_xi(const Contract& c, const MarketModel& m, const PathEnsemble& ens) {
    check_compatible(c, m);
    check_maturity(c, ens);
    const std::size_t M = ens.grid.steps(), N = ens.n_paths;
    const double sg = c.sign(), T = c.maturity;
    std::vector<double> xi(N);
    switch (c.kind) {
        case ContractKind::forward_combo:
            for (std::size_t p = 0; p < N; ++p) {
                double acc = 0.0;
                for (std::size_t i = 0; i < c.weights.size(); ++i)
                    acc += c.weights[i] * (ens.s(M, 0, p) - c.strikes[i]);
                xi[p] = sg * ens.binv(M, p) * acc;
            }
            break;
        case ContractKind::call:
        case ContractKind::put: {
            const double w = c.kind == ContractKind::call ? 1.0 : -1.0;
            for (std::size_t p = 0; p < N; ++p)
                xi[p] = sg * ens.binv(M, p) * std::max(w * (ens.s(M, 0, p) - c.strike), 0.0);
            break;
        }
        case ContractKind::asian_floating_call: {
            auto J = log_average_integral(ens, M);
            for (std::size_t p = 0; p < N; ++p)
                xi[p] = sg * ens.binv(M, p) * std::max(ens.s(M, 0, p) - c.strike * std::exp(J[p] / T), 0.0);
            break;
        }
        case ContractKind::zero_coupon_bond:
            for (std::size_t p = 0; p < N; ++p) xi[p] = sg * ens.binv(M, p);
            break;
        case ContractKind::bond_option:
            for (std::size_t p = 0; p < N; ++p) {
                const double P = vasicek_zcb(m.rate, T, c.bond_maturity, ens.rate(M, p));
                xi[p] = sg * ens.binv(M, p) * std::max(P - c.strike, 0.0);
            }
            break;
    }
    return xi;
}

bool has_analytic_clean_price(const Contract& c, const MarketModel& m) {
    switch (c.kind) {
        case ContractKind::forward_combo:
        case ContractKind::call:
        case ContractKind::put: return !m.bond_market() && m.rate.kind == RateKind::constant;
        case ContractKind::zero_coupon_bond:
        case ContractKind::bond_option: return true;
        default: return false;
    }
}

Eigen::MatrixXd state_features(const Contract& c, const MarketModel& m, const PathEnsemble& ens, std::size_t k) {
    std::vector<double> J;
    if (c.kind == ContractKind::asian_floating_call) J = log_average_table(ens);
    return state_features(c, m, ens, k, J);
}

Eigen::MatrixXd state_features(const Contract& c, const MarketModel& m, const PathEnsemble& ens, std::size_t k,
                               const std::vector<double>& Jtab) {
    const auto N = static_cast<Eigen::Index>(ens.n_paths);
    if (m.bond_market()) {
        Eigen::MatrixXd f(N, 2);
        for (Eigen::Index p = 0; p < N; ++p) {
            f(p, 0) = ens.rate(k, static_cast<std::size_t>(p));
            f(p, 1) = std::log(ens.binv(k, static_cast<std::size_t>(p)));
        }
        return f;
    }
    const auto n = static_cast<Eigen::Index>(ens.n_assets);
    const bool asian = c.kind == ContractKind::asian_floating_call;
    Eigen::MatrixXd f(N, n + (asian ? 1 : 0));
    for (Eigen::Index p = 0; p < N; ++p)
        for (Eigen::Index i = 0; i < n; ++i)
            f(p, i) = std::log(ens.s(k, static_cast<std::size_t>(i), static_cast<std::size_t>(p)) *
                               ens.binv(k, static_cast<std::size_t>(p)));
    if (asian) {
        if (Jtab.size() != (ens.grid.steps() + 1) * ens.n_paths) throw ArgumentError("state_features: bad average table");
        // log spot over the running average with the remaining time frozen: the moneyness
        const double w = ens.grid.t[k] / c.maturity;
        for (Eigen::Index p = 0; p < N; ++p) {
            const auto q = static_cast<std::size_t>(p);
            f(p, n) = w * std::log(ens.s(k, 0, q)) - Jtab[k * ens.n_paths + q] / c.maturity;
        }
    }
    return f;
}

namespace {

std::vector<double> malliavin_impl(const Contract& c, const MarketModel& m, const PathEnsemble& ens, double theta,
                                   const double* JT);

// sigma^1 of the traded bond seen at t
double bond_vol(const ShortRateModel& rm, double t, double U) {
    return -rm.sigma_r * (1.0 - std::exp(-rm.kappa * (U - t))) / rm.kappa;
}

void analytic_curve(const Contract& c, const MarketModel& m, const PathEnsemble& ens, CleanPriceCurve& out) {
    const std::size_t M = ens.grid.steps(), N = ens.n_paths, d = ens.dim;
    const double sg = c.sign(), T = c.maturity;
    for (std::size_t k = 0; k < M; ++k) {
        const double t = ens.grid.t[k];
        for (std::size_t p = 0; p < N; ++p) {
            double pt = 0.0, zscale = 0.0;  // Z^N_j = zscale * (vol row)_j for stocks
            double zbond = 0.0;
            switch (c.kind) {
                case ContractKind::forward_combo: {
                    const double sT = ens.s(k, 0, p) * ens.binv(k, p);
                    const double dfT = std::exp(-m.rate.r0 * T);
                    double acc = 0.0, wsum = 0.0;
                    for (std::size_t i = 0; i < c.weights.size(); ++i) {
                        acc += c.weights[i] * (sT - dfT * c.strikes[i]);
                        wsum += c.weights[i];
                    }
                    pt = sg * acc;
                    zscale = sg * wsum * sT;
                    break;
                }
                case ContractKind::call:
                case ContractKind::put: {
                    const bool call = c.kind == ContractKind::call;
                    const double S = ens.s(k, 0, p), vol = m.assets.vol_norm(0), tau = T - t;
                    const double bi = ens.binv(k, p);
                    pt = sg * bi * bs_price(S, c.strike, tau, vol, m.rate.r0, call);
                    zscale = sg * bi * S * bs_delta(S, c.strike, tau, vol, m.rate.r0, call);
                    break;
                }
                case ContractKind::zero_coupon_bond:
                    if (m.bond_market()) {
                        pt = sg * ens.binv(k, p) * vasicek_zcb(m.rate, t, T, ens.rate(k, p));
                        zbond = pt * bond_vol(m.rate, t, T);
                    } else {
                        pt = sg * std::exp(-m.rate.r0 * T);
                    }
                    break;
                case ContractKind::bond_option: {
                    auto v = vasicek_zbc(m.rate, t, T, c.bond_maturity, c.strike, ens.rate(k, p));
                    pt = sg * ens.binv(k, p) * v.value;
                    zbond = sg * ens.binv(k, p) * m.rate.sigma_r * v.d_dr;
                    break;
                }
                default: break;
            }
            out.p_tilde[k * N + p] = pt;
            if (m.bond_market()) {
                if (d > 0) out.Z[(k * d + 0) * N + p] = zbond;
            } else {
                for (std::size_t j = 0; j < d; ++j) out.Z[(k * d + j) * N + p] = zscale * m.assets.vol[0][j];
            }
        }
    }
}

// discounted intrinsic value at node k, used as an extra regressor
Eigen::MatrixXd intrinsic_proxy(const Contract& c, const PathEnsemble& ens, std::size_t k,
                                const std::vector<double>& Jtab) {
    const std::size_t N = ens.n_paths;
    const double T = c.maturity, t = ens.grid.t[k];
    Eigen::MatrixXd x(static_cast<Eigen::Index>(N), 1);
    const double* J = Jtab.empty() ? nullptr : Jtab.data() + k * N;
    for (std::size_t p = 0; p < N; ++p) {
        const double S = ens.s(k, 0, p), bi = ens.binv(k, p);
        double v = 0.0;
        switch (c.kind) {
            case ContractKind::call: v = std::max(S - c.strike, 0.0) * bi; break;
            case ContractKind::put: v = std::max(c.strike - S, 0.0) * bi; break;
            case ContractKind::asian_floating_call: {
                // average with the remaining time frozen at today's spot
                const double lavg = J[p] / T + (1.0 - t / T) * std::log(S);
                v = std::max(S - c.strike * std::exp(lavg), 0.0) * bi;
                break;
            }
            default: v = 0.0;
        }
        x(static_cast<Eigen::Index>(p), 0) = v;
    }
    return x;
}

void clamp_to_sign(Eigen::VectorXd& fit, const Eigen::VectorXd& target) {
    if (target.minCoeff() >= 0.0)
        fit = fit.cwiseMax(0.0);
    else if (target.maxCoeff() <= 0.0)
        fit = fit.cwiseMin(0.0);
}

void regression_curve(const Contract& c, const MarketModel& m, const PathEnsemble& ens, int degree,
                      CleanPriceCurve& out) {
    const std::size_t M = ens.grid.steps(), N = ens.n_paths, d = ens.dim;
    const auto xi = terminal_xi(c, m, ens);
    const Eigen::Map<const Eigen::VectorXd> y(xi.data(), static_cast<Eigen::Index>(N));
    RegressionBasis basis;
    basis.degree = degree;
    basis.bundles = static_cast<int>(std::clamp<std::size_t>(N / 2500, 1, 40));
    std::vector<double> Jtab;
    if (c.kind == ContractKind::asian_floating_call) Jtab = log_average_table(ens);
    for (std::size_t k = 0; k < M; ++k) {
        const double theta = ens.grid.t[k] + 0.5 * ens.grid.dt(k);
        auto D = malliavin_impl(c, m, ens, theta, Jtab.empty() ? nullptr : Jtab.data() + M * N);
        Eigen::MatrixXd Dm(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t p = 0; p < N; ++p)
                Dm(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = D[j * N + p];
        Eigen::VectorXd fp;
        Eigen::MatrixXd fz;
        if (k == 0) {
            fp = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(N), y.mean());
            fz = Eigen::MatrixXd(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(d));
            for (std::size_t j = 0; j < d; ++j) fz.col(static_cast<Eigen::Index>(j)).setConstant(Dm.col(j).mean());
        } else {
            const Eigen::MatrixXd feat = state_features(c, m, ens, k, Jtab);
            const Eigen::MatrixXd ext = intrinsic_proxy(c, ens, k, Jtab);
            basis.bundle_key = moneyness_column(c);
            Projector proj(feat, ext, basis, k);
            fp = proj.fit(Eigen::VectorXd(y));
            fz = proj.fit(Dm);
            // a conditional expectation keeps the sign of a one-signed regressand
            clamp_to_sign(fp, y);
            for (Eigen::Index j = 0; j < fz.cols(); ++j) {
                Eigen::VectorXd col = fz.col(j);
                clamp_to_sign(col, Dm.col(j));
                fz.col(j) = col;
            }
        }
        for (std::size_t p = 0; p < N; ++p) {
            out.p_tilde[k * N + p] = fp(static_cast<Eigen::Index>(p));
            for (std::size_t j = 0; j < d; ++j)
                out.Z[(k * d + j) * N + p] = fz(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j));
        }
    }
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / std::max<double>(1.0, static_cast<double>(N) - 1.0);
    out.p0_se = std::sqrt(var / static_cast<double>(N));
}

}  // namespace

CleanPriceCurve clean_price(const Contract& c, const MarketModel& m, const PathEnsemble& ens, int degree,
                            bool force_regression) {
    check_compatible(c, m);
    check_maturity(c, ens);
    CleanPriceCurve out;
    out.steps = ens.grid.steps();
    out.n_paths = ens.n_paths;
    out.dim = ens.dim;
    out.p_tilde.assign((out.steps + 1) * out.n_paths, 0.0);
    out.Z.assign(out.steps * out.dim * out.n_paths, 0.0);
    const bool analytic = has_analytic_clean_price(c, m) && !(force_regression && stock_kind(c.kind));
    out.analytic = analytic;
    if (analytic)
        analytic_curve(c, m, ens, out);
    else
        regression_curve(c, m, ens, degree, out);
    return out;
}

bool has_malliavin(const Contract& c, const MarketModel& m) {
    if (stock_kind(c.kind)) return !m.bond_market() && m.rate.kind == RateKind::constant;
    return true;
}

namespace {

std::vector<double> malliavin_impl(const Contract& c, const MarketModel& m, const PathEnsemble& ens, double theta,
                                   const double* JT) {
    if (!has_malliavin(c, m))
        throw UnsupportedError("malliavin_xi: no catalogued derivative for " + to_string(c.kind) +
                               " in this market");
    const double T = c.maturity;
    if (theta > T || theta < 0.0) throw ArgumentError("malliavin_xi: theta outside [0, T]");
    const std::size_t M = ens.grid.steps(), N = ens.n_paths, d = ens.dim;
    const double sg = c.sign();
    std::vector<double> out(d * N, 0.0);
    if (d == 0) return out;

    if (m.bond_market()) {
        const auto& rm = m.rate;
        const double dBT = -rm.sigma_r * (1.0 - std::exp(-rm.kappa * (T - theta))) / rm.kappa;  // D ln B^{-1}_T
        for (std::size_t p = 0; p < N; ++p) {
            const double bi = ens.binv(M, p);
            double v = 0.0;
            if (c.kind == ContractKind::zero_coupon_bond) {
                v = sg * bi * dBT;
            } else {
                const double U = c.bond_maturity;
                const double P = vasicek_zcb(rm, T, U, ens.rate(M, p));
                if (P > c.strike) v = sg * (bi * P * bond_vol(rm, theta, U) - c.strike * bi * dBT);
            }
            out[p] = v;
        }
        return out;
    }

    // stock market, constant rate
    const auto& vol = m.assets.vol[0];
    for (std::size_t p = 0; p < N; ++p) {
        const double ST = ens.s(M, 0, p), bi = ens.binv(M, p), sT = ST * bi;
        double a = 0.0;  // D_theta xi = a * sigma^1
        switch (c.kind) {
            case ContractKind::forward_combo: {
                double w = 0.0;
                for (double x : c.weights) w += x;
                a = sg * w * sT;
                break;
            }
            case ContractKind::call: a = ST > c.strike ? sg * sT : 0.0; break;
            case ContractKind::put: a = ST < c.strike ? -sg * sT : 0.0; break;
            case ContractKind::asian_floating_call: {
                const double I = std::exp(JT[p] / T);
                if (ST > c.strike * I) a = sg * (sT - bi * c.strike * I * (T - theta) / T);
                break;
            }
            default: break;
        }
        for (std::size_t j = 0; j < d; ++j) out[j * N + p] = a * vol[j];
    }
    return out;
}

}  // namespace

std::vector<double> malliavin_xi(const Contract& c, const MarketModel& m, const PathEnsemble& ens, double theta) {
    check_compatible(c, m);
    check_maturity(c, ens);
    std::vector<double> JT;
    if (c.kind == ContractKind::asian_floating_call) JT = log_average_integral(ens, ens.grid.steps());
    return malliavin_impl(c, m, ens, theta, JT.data());
}

}  // namespace xva
