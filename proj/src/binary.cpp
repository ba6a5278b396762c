#include "xva/binary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "xva/closedform.hpp"
#include "xva/errors.hpp"

namespace xva {

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::fba_zero: return "fba_zero";
        case Outcome::fca_zero: return "fca_zero";
        case Outcome::undetermined: return "undetermined";
    }
    return "?";
}

std::string to_string(VerdictMode m) { return m == VerdictMode::analytic ? "analytic" : "empirical"; }

std::string to_string(SignClass s) {
    switch (s) {
        case SignClass::positive: return "positive";
        case SignClass::nil: return "nil";
        case SignClass::negative: return "negative";
    }
    return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Range {
    double lo = kInf;
    double hi = -kInf;
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool empty() const { return lo > hi; }
};

Evidence le_zero(const std::string& name, const Range& r) {
    const double w = r.empty() ? 0.0 : r.hi;
    return {name, "<=0", w, w <= kMarginTol, false};
}

Evidence ge_zero(const std::string& name, const Range& r) {
    const double w = r.empty() ? 0.0 : r.lo;
    return {name, ">=0", w, w >= -kMarginTol, false};
}

bool all_hold(const std::vector<Evidence>& ev) {
    return std::all_of(ev.begin(), ev.end(), [](const Evidence& e) { return e.skipped || e.holds; });
}

bool stock_analytic(const Contract& c, const MarketModel& m) {
    const bool k = c.kind == ContractKind::forward_combo || c.kind == ContractKind::call || c.kind == ContractKind::put;
    return k && !m.bond_market() && m.rate.kind == RateKind::constant;
}

double alpha_dot(const Problem& prob, std::size_t k, const double* v, std::size_t stride) {
    if (prob.phi.zero) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < prob.ens.dim; ++j) s += prob.phi.alpha[k][j] * v[j * stride];
    return s;
}

// (p~ - alpha D p~, alpha Z^N - alpha D(alpha Z^N)) at node k, theta <= t_k
std::pair<double, double> clean_kernels(const Problem& prob, std::size_t k, std::size_t p) {
    const auto& c = prob.contract;
    const auto& m = prob.market;
    const auto& ens = prob.ens;
    const std::size_t d = ens.dim;
    const double pt = prob.clean.p(k, p);
    if (d == 0) return {pt, 0.0};
    std::vector<double> zn(d);
    for (std::size_t j = 0; j < d; ++j) zn[j] = prob.clean.z(k, j, p);
    const double aZ = alpha_dot(prob, k, zn.data(), 1);
    if (m.bond_market()) {
        // D_theta p~_t = sigma^1_theta p~_t, so alpha_theta D_theta acts as multiplication by u
        const double u = prob.phi.zero ? 0.0 : 1.0;
        return {(1.0 - u) * pt, u * (1.0 - u) * pt};
    }
    double a = 0.0;
    if (!prob.phi.zero)
        for (std::size_t j = 0; j < d; ++j) a += prob.phi.alpha[k][j] * m.assets.vol[0][j];
    const double q1 = pt - aZ;
    if (c.kind == ContractKind::forward_combo) return {q1, aZ * (1.0 - a)};
    // call/put: d/dlnS of (S Delta) adds the gamma term
    const double S = ens.s(k, 0, p), vol = m.assets.vol_norm(0), tau = c.maturity - ens.grid.t[k];
    const double sv = vol * std::sqrt(tau);
    double gamma_term = 0.0;
    if (sv > 0.0 && c.strike > 0.0) {
        const double d1 = (std::log(S / c.strike) + (m.rate.r0 + 0.5 * vol * vol) * tau) / sv;
        gamma_term = c.sign() * ens.binv(k, p) * S * norm_pdf(d1) / sv;
    }
    return {q1, aZ - a * (aZ + a * gamma_term)};
}

}  // namespace

std::optional<EpsilonBounds> forward_epsilon_bounds(const Contract& c, const MarketModel& m) {
    if (c.kind != ContractKind::forward_combo || c.weights.size() != 1 || c.closeout != Closeout::clean) return {};
    const double w = c.sign() * c.weights[0];
    if (!(w > 0.0)) return {};
    if (m.bond_market() || m.rate.kind != RateKind::constant) return {};
    const auto& in = m.intensity;
    const auto& sp = m.spreads;
    if (!in.hH.is_constant() || !in.hC.is_constant() || !sp.s_ell.is_constant() || !sp.s_b.is_constant()) return {};
    const double T = c.maturity, r = m.rate.r0, K = c.strikes[0] * w;
    const double h = in.hH(0.0) + in.hC(0.0);
    double q = c.Lm;
    if (h > 0.0) q = std::min(q, 1.0 - in.hH(0.0) * c.LH * c.Lm / h);
    return EpsilonBounds{K * std::exp(-(r + sp.s_ell(0.0)) * T) * q, K * std::exp(-(r + sp.s_b(0.0)) * T)};
}

Verdict check_clean(const Problem& prob) {
    const auto& c = prob.contract;
    const auto& m = prob.market;
    if (c.closeout != Closeout::clean) throw ArgumentError("check_clean: contract uses replacement close-out");
    Verdict v;
    v.eps_bounds = forward_epsilon_bounds(c, m);
    const bool catalogued = stock_analytic(c, m) || c.kind == ContractKind::zero_coupon_bond;
    if (!catalogued || prob.force_regression) {
        v.mode = VerdictMode::empirical;
        v.note = "no catalogued analytic check for " + to_string(c.kind) + "; decided by the solver census";
        return v;
    }
    v.mode = VerdictMode::analytic;
    const auto& ens = prob.ens;
    const std::size_t M = ens.grid.steps(), N = ens.n_paths, d = ens.dim;
    const double Lm = c.Lm;
    const double BT = legacy_discounted(m.legacy, m.spreads, c.maturity);

    Range r1;
    for (std::size_t kt = 0; kt < M; ++kt) {
        const auto D = malliavin_xi(c, m, ens, ens.grid.t[kt]);
        for (std::size_t p = 0; p < N; ++p) {
            const double aD = d ? alpha_dot(prob, kt, D.data() + p, N) : 0.0;
            r1.add(Lm * (prob.xi[p] - aD) + BT);
        }
    }
    Range r2, rb, rl;
    const double LH = c.LH, LC = c.LC;
    std::vector<double> zn(d);
    for (std::size_t k = 0; k < M; ++k) {
        const double t = ens.grid.t[k];
        const double hH = m.intensity.hH(t), hC = m.intensity.hC(t), h = hH + hC;
        const double sb = m.spreads.s_b(t), sl = m.spreads.s_ell(t);
        const double Be = legacy_discounted(m.legacy, m.spreads, t);
        for (std::size_t p = 0; p < N; ++p) {
            for (std::size_t j = 0; j < d; ++j) zn[j] = prob.clean.z(k, j, p);
            if (d) r2.add(alpha_dot(prob, k, zn.data(), 1));
            const double pt = prob.clean.p(k, p);
            if (pt == 0.0) {
                ++v.zero_states;
                continue;
            }
            const auto [q1, q2] = clean_kernels(prob, k, p);
            const double common = h * Be + (pt > 0.0 ? (h - hH * LH * Lm) : (h - hC * LC * Lm)) * q1;
            rb.add(sb * (1.0 - Lm) * q2 + common);
            rl.add(sl * (1.0 - Lm) * q2 + common);
        }
    }
    const bool skip_z = Lm == 1.0 || d == 0;
    std::vector<Evidence> e1{le_zero("Lm(xi - aD xi) + B~eps_T", r1), ge_zero("a.Z^N", r2),
                             le_zero("xi^b - aD xi^b", rb)};
    std::vector<Evidence> e2{ge_zero("Lm(xi - aD xi) + B~eps_T", r1), le_zero("a.Z^N", r2),
                             ge_zero("xi^l - aD xi^l", rl)};
    e1[1].skipped = e2[1].skipped = skip_z;
    const bool c1 = all_hold(e1), c2 = all_hold(e2);
    if (c1) {
        v.outcome = Outcome::fba_zero;
        v.evidence = e1;
        v.linear_bsde = "linear_b";
    } else if (c2) {
        v.outcome = Outcome::fca_zero;
        v.evidence = e2;
        v.linear_bsde = "linear_ell";
    } else {
        v.outcome = Outcome::undetermined;
        v.evidence = e1;
        v.evidence.insert(v.evidence.end(), e2.begin(), e2.end());
    }
    if (v.zero_states) v.note = std::to_string(v.zero_states) + " states with a zero clean price were excluded";
    return v;
}

Verdict check_replacement(const Problem& prob) {
    const auto& c = prob.contract;
    const auto& m = prob.market;
    if (c.closeout != Closeout::replacement)
        throw ArgumentError("check_replacement: contract uses clean close-out");
    bool pos = true, neg = true;
    for (double x : prob.xi) {
        pos = pos && x >= 0.0;
        neg = neg && x <= 0.0;
    }
    if (!pos && !neg)
        throw PreconditionError(
            "replacement close-out checks cover options only; this payoff takes both signs across paths");
    const int sgn = pos ? 1 : -1;
    Verdict v;
    const bool catalogued = has_malliavin(c, m) && c.kind != ContractKind::forward_combo;
    if (!catalogued) {
        v.mode = VerdictMode::empirical;
        v.note = "no catalogued analytic check for " + to_string(c.kind) + "; decided by the solver census";
        return v;
    }
    v.mode = VerdictMode::analytic;
    const auto& ens = prob.ens;
    const std::size_t M = ens.grid.steps(), N = ens.n_paths, d = ens.dim;
    Range r;
    for (std::size_t kt = 0; kt < M; ++kt) {
        const auto D = malliavin_xi(c, m, ens, ens.grid.t[kt]);
        for (std::size_t p = 0; p < N; ++p) {
            const double aD = d ? alpha_dot(prob, kt, D.data() + p, N) : 0.0;
            r.add(c.Lm * prob.xi[p] - aD);
        }
    }
    const double eps = m.legacy.epsilon;
    auto ei = le_zero("Lm xi - aD xi", r), eii = ge_zero("Lm xi - aD xi", r);
    Evidence eps_i{"epsilon", "<=0", eps, eps <= 0.0, false}, eps_ii{"epsilon", ">=0", eps, eps >= 0.0, false};
    const std::string party = sgn > 0 ? "/H" : "/C";
    if (ei.holds && eps_i.holds) {
        v.outcome = Outcome::fba_zero;
        v.evidence = {ei, eps_i};
        v.linear_bsde = "linear_b" + party;
    } else if (eii.holds && eps_ii.holds) {
        v.outcome = Outcome::fca_zero;
        v.evidence = {eii, eps_ii};
        v.linear_bsde = "linear_ell" + party;
    } else {
        v.outcome = Outcome::undetermined;
        v.evidence = {ei, eps_i, eii, eps_ii};
    }
    return v;
}

Verdict verify(const Problem& prob) {
    return prob.contract.closeout == Closeout::clean ? check_clean(prob) : check_replacement(prob);
}

SignCensus sign_census(const BsdeSolution& sol, const GeneratorSpec& spec, const PathEnsemble& ens, double band) {
    if (!sol.has_paths) throw ArgumentError("sign_census: needs a path-wise solution");
    const Problem& prob = *spec.prob;
    const std::size_t M = sol.steps, N = sol.n_paths, d = sol.dim;
    if (N != ens.n_paths) throw ArgumentError("sign_census: ensemble mismatch");
    SignCensus out;
    std::vector<double> z(d), zn(d);
    for (std::size_t k = 0; k < M; ++k)
        for (std::size_t p = 0; p < N; ++p) {
            const double pt = prob.clean.p(k, p);
            if (pt == 0.0) {
                ++out.zero_excluded;
                continue;
            }
            for (std::size_t j = 0; j < d; ++j) {
                z[j] = sol.Z[(k * d + j) * N + p];
                zn[j] = prob.clean.z(k, j, p);
            }
            const double a = generator_terms(spec, k, pt, zn.data(), sol.y(k, p), z.data()).arg;
            ++out.states;
            if (a > band) ++out.positive;
            if (a < -band) ++out.negative;
        }
    return out;
}

double empirical_sign_fraction(const BsdeSolution& sol, const GeneratorSpec& spec, const PathEnsemble& ens,
                               Outcome predicted, double band) {
    const auto c = sign_census(sol, spec, ens, band);
    switch (predicted) {
        case Outcome::fba_zero: return c.frac_positive();
        case Outcome::fca_zero: return c.frac_negative();
        default: return std::min(c.frac_positive(), c.frac_negative());
    }
}

Verdict empirical_verdict(const BsdeSolution& sol, const GeneratorSpec& spec, const PathEnsemble& ens, double band,
                          double max_fraction) {
    const auto c = sign_census(sol, spec, ens, band);
    Verdict v;
    v.mode = VerdictMode::empirical;
    v.zero_states = c.zero_excluded;
    v.evidence.push_back({"fraction arg>band", "<=tol", c.frac_positive(), c.frac_positive() <= max_fraction, false});
    v.evidence.push_back({"fraction arg<-band", "<=tol", c.frac_negative(), c.frac_negative() <= max_fraction, false});
    if (c.frac_positive() <= max_fraction)
        v.outcome = Outcome::fba_zero;
    else if (c.frac_negative() <= max_fraction)
        v.outcome = Outcome::fca_zero;
    std::ostringstream os;
    os << "census over " << c.states << " states";
    if (c.zero_excluded) os << ", " << c.zero_excluded << " zero-price states excluded";
    v.note = os.str();
    return v;
}

SignClass classify(const Estimate& e, double floor) {
    const double thr = std::max(3.0 * e.se, floor);
    if (e.value > thr) return SignClass::positive;
    if (e.value < -thr) return SignClass::negative;
    return SignClass::nil;
}

bool TableResult::all_match() const {
    return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const TableRow& r) { return r.matches; });
}

TableResult table_one(const MarketModel& market, const Contract& base, const TimeGrid& grid, std::size_t n_paths,
                      std::uint64_t seed, int degree, double nil_floor_rel) {
    MarketModel mk = market;
    mk.legacy.epsilon = 0.0;
    struct Cell {
        Side side;
        ContractKind kind;
        SignClass fba, dva;
    };
    const Cell cells[] = {
        {Side::hedger_receives, ContractKind::call, SignClass::positive, SignClass::nil},
        {Side::hedger_pays, ContractKind::call, SignClass::nil, SignClass::positive},
        {Side::hedger_receives, ContractKind::put, SignClass::nil, SignClass::nil},
        {Side::hedger_pays, ContractKind::put, SignClass::positive, SignClass::positive},
    };
    TableResult out;
    for (const auto& cell : cells) {
        Contract c = base;
        c.kind = cell.kind;
        c.side = cell.side;
        c.closeout = Closeout::replacement;
        Problem prob = make_problem(mk, c, grid, n_paths, seed, degree);
        TableRow row;
        row.side = cell.side;
        row.kind = cell.kind;
        row.verdict = check_replacement(prob);
        auto spec = make_generator(prob, GenMode::semilinear);
        auto sol = solve_semilinear(spec, prob.ens);
        auto rep = decompose(sol, spec, prob.ens);
        const double floor = nil_floor_rel * prob.notional();
        out.floor = floor;
        row.fca_delta = rep.fca_delta;
        row.fba_delta = rep.fba_delta;
        row.dva = rep.dva;
        row.fba_sign = classify(rep.fba_delta, floor);
        row.dva_sign = classify(rep.dva, floor);
        row.fba_expected = cell.fba;
        row.dva_expected = cell.dva;
        row.matches = row.fba_sign == cell.fba && row.dva_sign == cell.dva;
        switch (row.verdict.outcome) {
            case Outcome::fba_zero: row.consistent = row.fba_sign == SignClass::nil; break;
            case Outcome::fca_zero: row.consistent = classify(rep.fca_delta, floor) == SignClass::nil; break;
            default: row.consistent = true;
        }
        if (cell.side == Side::hedger_pays && cell.kind == ContractKind::put) {
            out.sell_put_gap = rep.fba_delta.value - rep.dva.value;
            out.sell_put_gap_se = std::sqrt(rep.fba_delta.se * rep.fba_delta.se + rep.dva.se * rep.dva.se);
            out.sell_put_separated = std::abs(out.sell_put_gap) > 3.0 * out.sell_put_gap_se;
        }
        out.rows.push_back(row);
    }
    return out;
}

bool TableResult::all_consistent() const {
    return std::all_of(rows.begin(), rows.end(), [](const TableRow& r) { return r.consistent; });
}

void require_table_match(const TableResult& t) {
    for (const auto& r : t.rows)
        if (!r.consistent)
            throw TableMismatch("table: " + to_string(r.side) + "/" + to_string(r.kind) + " has verdict " +
                                r.verdict.label() + " but the vanishing side is not nil (FCA " +
                                std::to_string(r.fca_delta.value) + ", FBA " + std::to_string(r.fba_delta.value) +
                                ")");
}

}  // namespace xva
