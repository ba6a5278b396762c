#include "xva/bsde.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xva/errors.hpp"

namespace xva {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    const double n = static_cast<double>(v.size());
    return n > 1 ? std::sqrt(s / (n - 1.0) / n) : 0.0;
}

double bond_vol(const ShortRateModel& rm, double t, double U) {
    return -rm.sigma_r * (1.0 - std::exp(-rm.kappa * (U - t))) / rm.kappa;
}

// integral of 1/(1 - e^{-kappa u}) du is u + ln(1 - e^{-kappa u})/kappa
double inv_bond_factor_primitive(double kappa, double u) { return u + std::log1p(-std::exp(-kappa * u)) / kappa; }

}  // namespace

double PhiMap::dot(std::size_t k, const std::vector<double>& v) const {
    if (zero) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += alpha[k][j] * v[j];
    return s;
}

PhiMap build_phi(const MarketModel& market, const TimeGrid& grid, double U) {
    const std::size_t M = grid.steps(), d = market.dim();
    PhiMap phi;
    phi.alpha.assign(M, std::vector<double>(d, 0.0));
    const std::size_t n_trad = market.bond_market() ? 1 : market.assets.n();
    if (market.repo.all(n_trad) || d == 0) {
        phi.tag = "repo_all";
        return phi;
    }
    const bool hc = market.repo.contains("H") || market.repo.contains("C");
    if (market.bond_market()) {
        // the three bonds share sigma^1, so the unfunded position is sum(pi)
        if (hc || market.repo.contains("1"))
            throw UnsupportedError(
                "phi: in the rate market either every bond is repo-funded or none is; mixed repo sets make phi depend "
                "on the defaultable hedges");
        if (!(market.rate.sigma_r > 0.0)) throw UnsupportedError("phi: zero rate volatility leaves the hedge undefined");
        for (std::size_t k = 0; k < M; ++k) {
            if (!(U > grid.t[k])) throw UnsupportedError("phi: traded bond matures inside the grid");
            phi.alpha[k][0] = 1.0 / bond_vol(market.rate, grid.t[k], U);
        }
        phi.zero = false;
        phi.tag = "bond_unfunded";
        return phi;
    }
    if (!market.repo.contains("H") || !market.repo.contains("C"))
        throw UnsupportedError(
            "phi: un-repo'd defaultable bonds in a stock market make phi depend on their hedges; put H and C in the repo "
            "set");
    const std::size_t n = market.assets.n();
    Eigen::MatrixXd S(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) S(i, j) = market.assets.vol[i][j];
    Eigen::VectorXd u(n);
    for (std::size_t i = 0; i < n; ++i) u(i) = market.repo.contains(std::to_string(i + 1)) ? 0.0 : 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    if (!lu.isInvertible()) throw UnsupportedError("phi: volatility matrix is singular");
    const Eigen::VectorXd a = lu.solve(u);  // alpha = Sigma^{-1} u
    for (std::size_t k = 0; k < M; ++k)
        for (std::size_t j = 0; j < n; ++j) phi.alpha[k][j] = a(j);
    phi.zero = a.cwiseAbs().maxCoeff() == 0.0;
    phi.tag = "stock_unfunded";
    return phi;
}

Problem make_problem(const MarketModel& market, const Contract& contract, const TimeGrid& grid, std::size_t n_paths,
                     std::uint64_t seed, int degree, bool force_regression) {
    market.validate();
    grid.validate();
    check_compatible(contract, market);
    if (degree < 0) throw ConfigError("numerics: basis degree must be nonnegative");
    Problem p;
    p.market = market;
    p.contract = contract;
    p.grid = grid;
    p.degree = degree;
    p.force_regression = force_regression;
    p.phi = build_phi(market, grid, contract.traded_bond_maturity());
    p.ens = simulate_paths(market, grid, n_paths, seed);
    p.xi = terminal_xi(contract, market, p.ens);
    if (contract.kind == ContractKind::asian_floating_call) p.avg_table = log_average_table(p.ens);
    p.clean = clean_price(contract, market, p.ens, degree, force_regression);
    return p;
}

RegressionBasis Problem::solver_basis() const {
    RegressionBasis b;
    b.degree = degree;
    // about 2500 paths per bundle, at most 40 bundles
    b.bundles = bundles > 0 ? bundles : static_cast<int>(std::clamp<std::size_t>(ens.n_paths / 2500, 1, 40));
    return b;
}

std::string to_string(GenMode m) {
    switch (m) {
        case GenMode::semilinear: return "semilinear";
        case GenMode::linear_b: return "linear_b";
        case GenMode::linear_ell: return "linear_ell";
    }
    return "?";
}

double GeneratorSpec::lipschitz_y(std::size_t k) const {
    const auto& c = node[k];
    return std::max(c.s_ell, c.s_b) + 2.0 * c.h() + c.hH * closeout.LH * closeout.Lm + c.hC * closeout.LC * closeout.Lm;
}

GeneratorSpec make_generator(const Problem& prob, GenMode mode) {
    GeneratorSpec g;
    g.prob = &prob;
    g.mode = mode;
    g.closeout = CloseoutSpec::from(prob.contract);
    const auto& m = prob.market;
    g.node.resize(prob.grid.t.size());
    for (std::size_t k = 0; k < g.node.size(); ++k) {
        const double t = prob.grid.t[k];
        auto& c = g.node[k];
        c.t = t;
        c.s_ell = m.spreads.s_ell(t);
        c.s_b = m.spreads.s_b(t);
        c.s_eps = m.legacy.spread(m.spreads, t);
        c.hH = m.intensity.hH(t);
        c.hC = m.intensity.hC(t);
        c.B_eps = legacy_discounted(m.legacy, m.spreads, t);
        c.G = survival_total(m.intensity, t);
    }
    bool pos = true, neg = true;
    for (double x : prob.xi) {
        pos = pos && x >= 0.0;
        neg = neg && x <= 0.0;
    }
    g.xi_sign = pos ? 1 : (neg ? -1 : 0);
    if (mode != GenMode::semilinear && g.closeout.convention == Closeout::replacement && g.xi_sign == 0)
        throw PreconditionError("linear replacement generator needs a payoff of one sign (options only)");
    return g;
}

GenTerms generator_terms(const GeneratorSpec& spec, std::size_t k, double p_tilde, const double* zn, double y,
                         const double* z) {
    const auto& c = spec.node[k];
    const auto& phi = spec.prob->phi;
    GenTerms g;
    double ph = 0.0;
    if (!phi.zero)
        for (std::size_t j = 0; j < phi.alpha[k].size(); ++j) ph += phi.alpha[k][j] * (z[j] + zn[j]);
    g.arg = y + p_tilde + c.B_eps - discounted_margin(spec.closeout, y, p_tilde) - ph;
    switch (spec.mode) {
        case GenMode::semilinear:
            g.funding = -std::max(g.arg, 0.0) * c.s_ell + std::max(-g.arg, 0.0) * c.s_b;
            break;
        case GenMode::linear_b: g.funding = -g.arg * c.s_b; break;
        case GenMode::linear_ell: g.funding = -g.arg * c.s_ell; break;
    }
    g.legacy = c.s_eps * c.B_eps;
    const auto ex = theta_exposures(spec.closeout, y, p_tilde);
    g.dH = ex.dH;
    g.dC = ex.dC;
    double dflt;
    if (spec.mode != GenMode::semilinear && spec.closeout.convention == Closeout::replacement) {
        // V keeps the payoff's sign, so the x-linear exposure parts cancel against -h y
        const double a = spec.xi_sign >= 0 ? c.hH * spec.closeout.LH * spec.closeout.Lm
                                           : c.hC * spec.closeout.LC * spec.closeout.Lm;
        dflt = -a * (y + p_tilde) + c.h() * y;
    } else {
        dflt = -c.hH * ex.dH + c.hC * ex.dC;
    }
    g.hat = g.funding + g.legacy + dflt;
    g.value = g.hat - c.h() * y;
    return g;
}

double generator_eval(const GeneratorSpec& spec, std::size_t k, double p_tilde, const double* zn, double y,
                      const double* z) {
    return generator_terms(spec, k, p_tilde, zn, y, z).value;
}

BsdeSolution solve_semilinear(const GeneratorSpec& spec, const PathEnsemble& ens, const std::vector<double>& terminal,
                              const RegressionBasis& basis) {
    const Problem& prob = *spec.prob;
    const std::size_t M = ens.grid.steps(), N = ens.n_paths, d = ens.dim;
    if (N != prob.ens.n_paths || M != prob.ens.grid.steps())
        throw ConfigError("solve_semilinear: ensemble does not match the problem");
    if (terminal.size() != N) throw ArgumentError("solve_semilinear: one terminal value per path");
    for (double x : terminal)
        if (!std::isfinite(x)) throw ArgumentError("solve_semilinear: terminal values must be finite");
    for (std::size_t k = 0; k < M; ++k) {
        if (spec.lipschitz_y(k) * ens.grid.dt(k) >= 1.0)
            throw StepSizeError("solve_semilinear: L*dt >= 1 at step " + std::to_string(k) +
                                ", the fixed point does not contract; use more steps");
    }

    BsdeSolution sol;
    sol.steps = M;
    sol.n_paths = N;
    sol.dim = d;
    sol.has_paths = true;
    sol.method = to_string(spec.mode);
    sol.Y.assign((M + 1) * N, 0.0);
    sol.Z.assign(M * d * N, 0.0);
    sol.diagnostics.resize(M);

    const double GM = spec.node[M].G;
    Eigen::VectorXd acc(static_cast<Eigen::Index>(N));
    sol.terminal.resize(N);
    for (std::size_t p = 0; p < N; ++p) {
        sol.Y[M * N + p] = terminal[p];
        sol.terminal[p] = GM * terminal[p];
        acc(static_cast<Eigen::Index>(p)) = GM * terminal[p];
    }

    std::vector<double> zbuf(d), znbuf(d);
    Eigen::VectorXd C(static_cast<Eigen::Index>(N));
    Eigen::MatrixXd R(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(d)), Zf;
    for (std::size_t kk = M; kk-- > 0;) {
        const std::size_t k = kk;
        const double dt = ens.grid.dt(k), Gk = spec.node[k].G, Gn = spec.node[k + 1].G;
        if (k == 0) {
            C.setConstant(acc.mean());
        } else {
            // clean price and its delta field: Y and Z inherit their kinks
            Eigen::MatrixXd extra(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(1 + d));
            for (std::size_t p = 0; p < N; ++p) {
                extra(static_cast<Eigen::Index>(p), 0) = prob.clean.p(k, p);
                for (std::size_t j = 0; j < d; ++j)
                    extra(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(1 + j)) = prob.clean.z(k, j, p);
            }
            const Eigen::MatrixXd feat = prob.features(k);
            RegressionBasis b = basis;
            b.bundle_key = moneyness_column(prob.contract);
            Projector proj(feat, extra, b, k);
            sol.diagnostics[k] = {proj.condition(), proj.rank(), proj.n_functions()};
            C = proj.fit(acc);
            if (d > 0) {
                for (std::size_t j = 0; j < d; ++j)
                    for (std::size_t p = 0; p < N; ++p) {
                        const auto P = static_cast<Eigen::Index>(p);
                        R(P, static_cast<Eigen::Index>(j)) = (Gn * sol.Y[(k + 1) * N + p] - C(P)) * ens.dw(k, j, p);
                    }
                Zf = proj.fit(R);
            }
        }
        if (k == 0) {
            sol.diagnostics[0] = {1.0, 1, 1};
            if (d > 0) {
                Zf.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(d));
                for (std::size_t j = 0; j < d; ++j) {
                    double s = 0.0;
                    for (std::size_t p = 0; p < N; ++p) s += (Gn * sol.Y[N + p] - C(0)) * ens.dw(0, j, p);
                    Zf.col(static_cast<Eigen::Index>(j)).setConstant(s / static_cast<double>(N));
                }
            }
        }
        for (std::size_t p = 0; p < N; ++p) {
            const auto P = static_cast<Eigen::Index>(p);
            for (std::size_t j = 0; j < d; ++j) {
                zbuf[j] = Zf(P, static_cast<Eigen::Index>(j)) / (dt * Gk);
                znbuf[j] = prob.clean.z(k, j, p);
                sol.Z[(k * d + j) * N + p] = zbuf[j];
            }
            const double pt = prob.clean.p(k, p);
            const double c0 = C(P) / Gk;
            double y = c0;
            for (int it = 0; it < 2; ++it) y = c0 + generator_terms(spec, k, pt, znbuf.data(), y, zbuf.data()).hat * dt;
            sol.Y[k * N + p] = y;
            acc(P) += Gk * generator_terms(spec, k, pt, znbuf.data(), y, zbuf.data()).hat * dt;
        }
    }
    sol.samples.assign(acc.data(), acc.data() + N);
    sol.Y0 = mean_of(sol.samples);
    sol.Y0_se = se_of(sol.samples);
    if (!std::isfinite(sol.Y0)) throw DegeneracyError("solve_semilinear: non-finite solution");
    return sol;
}

BsdeSolution solve_linear(const GeneratorSpec& spec, const PathEnsemble& ens) {
    if (spec.mode == GenMode::semilinear) throw ConfigError("solve_linear: generator is not in a linear mode");
    const Problem& prob = *spec.prob;
    const auto& m = prob.market;
    const auto& grid = ens.grid;
    const std::size_t M = grid.steps(), N = ens.n_paths, d = ens.dim;
    const bool clean = spec.closeout.convention == Closeout::clean;
    if (clean && !prob.clean.analytic)
        throw UnsupportedError("solve_linear: clean close-out needs an analytic clean price on the shifted paths");
    const PiecewiseConstant& s = spec.mode == GenMode::linear_b ? m.spreads.s_b : m.spreads.s_ell;

    DriftSchedule drift(M, std::vector<double>(d, 0.0));
    if (!prob.phi.zero) {
        for (std::size_t k = 0; k < M; ++k) {
            const double t0 = grid.t[k], t1 = grid.t[k + 1], dt = t1 - t0;
            const double s_avg = s.integral(t0, t1) / dt;
            if (m.bond_market()) {
                const double U = prob.contract.traded_bond_maturity();
                if (!(U > t1))
                    throw UnsupportedError(
                        "solve_linear: the measure shift diverges at the traded bond's maturity; use the regression "
                        "solver in linear mode");
                const auto& rm = m.rate;
                const double ia = -(rm.kappa / rm.sigma_r) *
                                  (inv_bond_factor_primitive(rm.kappa, U - t0) - inv_bond_factor_primitive(rm.kappa, U - t1));
                drift[k][0] = ia / dt * s_avg;
            } else {
                for (std::size_t j = 0; j < d; ++j) drift[k][j] = prob.phi.alpha[k][j] * s_avg;
            }
        }
    }
    const PathEnsemble shifted = simulate_paths(m, grid, N, ens.seed, &drift);
    const auto xi = terminal_xi(prob.contract, m, shifted);
    CleanPriceCurve cp;
    if (clean) cp = clean_price(prob.contract, m, shifted, prob.degree, false);

    const double Lm = spec.closeout.Lm, LH = spec.closeout.LH, LC = spec.closeout.LC;
    // discount exponent and its running integral
    std::vector<double> A(M + 1, 1.0);
    double cum = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
        const double t0 = grid.t[k], t1 = grid.t[k + 1];
        const double S = s.integral(t0, t1), iH = m.intensity.hH.integral(t0, t1), iC = m.intensity.hC.integral(t0, t1);
        if (clean)
            cum += S + iH + iC;
        else
            cum += Lm * S + (spec.xi_sign >= 0 ? iH * LH * Lm : iC * LC * Lm);
        A[k + 1] = std::exp(-cum);
    }
    auto source = [&](std::size_t k, double pt) {
        const auto& c = spec.node[k];
        const double sk = s(c.t);
        double v = (c.s_eps - sk) * c.B_eps;
        if (clean) {
            const double gamma = pt >= 0.0 ? c.hH * LH * Lm : c.hC * LC * Lm;
            v += (sk * (1.0 - Lm) + c.h() - gamma) * pt;
        }
        return v;
    };

    std::vector<double> V(N);
    for (std::size_t p = 0; p < N; ++p) {
        double v = A[M] * xi[p];
        double prev = A[0] * source(0, clean ? cp.p(0, p) : 0.0);
        for (std::size_t k = 0; k < M; ++k) {
            const double pt = clean ? (k + 1 == M ? xi[p] : cp.p(k + 1, p)) : 0.0;
            const double next = A[k + 1] * source(k + 1, pt);
            v += 0.5 * grid.dt(k) * (prev + next);
            prev = next;
        }
        V[p] = v;
    }
    BsdeSolution sol;
    sol.steps = M;
    sol.n_paths = N;
    sol.dim = d;
    sol.has_paths = false;
    sol.method = "forward_" + to_string(spec.mode);
    sol.samples = V;
    const double p0 = prob.clean.p0();
    for (auto& x : sol.samples) x -= p0;
    sol.Y0 = mean_of(V) - p0;
    sol.Y0_se = std::sqrt(std::pow(se_of(V), 2) + std::pow(prob.clean.p0_se, 2));
    return sol;
}

LiftResult lift_to_G(const BsdeSolution& sol, const GeneratorSpec& spec) {
    if (!sol.has_paths) throw ArgumentError("lift_to_G: needs a path-wise solution");
    const Problem& prob = *spec.prob;
    const std::size_t M = sol.steps, N = sol.n_paths, d = sol.dim;
    LiftResult out;
    out.pi_H.resize(M * N);
    out.pi_C.resize(M * N);
    for (std::size_t k = 0; k < M; ++k)
        for (std::size_t p = 0; p < N; ++p) {
            const double y = sol.y(k, p);
            const auto ex = theta_exposures(spec.closeout, y, prob.clean.p(k, p));
            out.pi_H[k * N + p] = y + ex.H;
            out.pi_C[k * N + p] = y - ex.C;
        }
    if (d == 0) return out;
    const auto& m = prob.market;
    if (m.bond_market()) {
        const double U = prob.contract.traded_bond_maturity();
        if (!(m.rate.sigma_r > 0.0)) {
            out.hedge_error = "rate volatility is zero, the bond hedge is undefined";
            return out;
        }
        out.pi_assets.resize(M * N);
        for (std::size_t k = 0; k < M; ++k) {
            const double v = bond_vol(m.rate, prob.grid.t[k], U);
            for (std::size_t p = 0; p < N; ++p)
                out.pi_assets[k * N + p] = (sol.Z[k * N + p] + prob.clean.z(k, 0, p)) / v;
        }
        return out;
    }
    const std::size_t n = m.assets.n();
    Eigen::MatrixXd St(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) St(j, i) = m.assets.vol[i][j];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(St);
    if (!lu.isInvertible()) {
        out.hedge_error = "volatility matrix is singular, asset hedges cannot be rebuilt";
        return out;
    }
    out.pi_assets.resize(M * n * N);
    Eigen::VectorXd Pi(n);
    for (std::size_t k = 0; k < M; ++k)
        for (std::size_t p = 0; p < N; ++p) {
            for (std::size_t j = 0; j < n; ++j) Pi(j) = sol.Z[(k * d + j) * N + p] + prob.clean.z(k, j, p);
            const Eigen::VectorXd pi = lu.solve(Pi);
            for (std::size_t i = 0; i < n; ++i) out.pi_assets[(k * n + i) * N + p] = pi(i);
        }
    return out;
}

double lifted_value(const BsdeSolution& sol, const GeneratorSpec& spec, std::size_t k, std::size_t p, double tau_H,
                    double tau_C) {
    const auto& t = spec.prob->grid.t;
    const double tau = std::min(tau_H, tau_C);
    if (t[k] < tau || tau > t.back()) return sol.y(k, p);
    std::size_t kd = 0;
    while (kd + 1 < t.size() && t[kd + 1] < tau) ++kd;
    const auto ex = theta_exposures(spec.closeout, sol.y(kd, p), spec.prob->clean.p(kd, p));
    return tau_H <= tau_C ? -ex.dH : ex.dC;
}

FullFiltrationResult full_filtration_mc(const GeneratorSpec& spec, const BsdeSolution& sol, std::uint64_t seed) {
    if (!sol.has_paths) throw ArgumentError("full_filtration_mc: needs a path-wise solution");
    const Problem& prob = *spec.prob;
    const auto& t = prob.grid.t;
    const std::size_t M = sol.steps, N = sol.n_paths, d = sol.dim;
    const auto taus = sample_default_times(prob.market.intensity, N, seed);
    std::vector<double> est(N), diff(N), z(d), zn(d);
    FullFiltrationResult out;
    for (std::size_t p = 0; p < N; ++p) {
        const double tH = taus.tau_H[p], tC = taus.tau_C[p], tau = std::min(tH, tC);
        double v = 0.0;
        bool defaulted = false;
        for (std::size_t k = 0; k < M && t[k] < tau; ++k) {
            for (std::size_t j = 0; j < d; ++j) {
                z[j] = sol.Z[(k * d + j) * N + p];
                zn[j] = prob.clean.z(k, j, p);
            }
            const auto g = generator_terms(spec, k, prob.clean.p(k, p), zn.data(), sol.y(k, p), z.data());
            const double overlap = std::min(t[k + 1], tau) - t[k];
            v += (g.funding + g.legacy) * overlap;
            if (tau <= t[k + 1]) {
                if (tH <= tC) {
                    v -= g.dH;
                    ++out.defaults_H;
                } else {
                    v += g.dC;
                    ++out.defaults_C;
                }
                defaulted = true;
                break;
            }
        }
        if (!defaulted) v += sol.y(M, p);
        est[p] = v;
        diff[p] = v - sol.samples[p];
    }
    out.Y0 = mean_of(est);
    out.se = se_of(est);
    out.diff = mean_of(diff);
    out.diff_se = se_of(diff);
    return out;
}

}  // namespace xva
