#include "xva/engine.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "xva/closedform.hpp"
#include "xva/errors.hpp"

namespace xva {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
    if (std::isnan(x)) return "";
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

class Csv {
public:
    Csv(const std::string& dir, const std::string& name, const RunConfig& cfg) {
        fs::create_directories(dir);
        const auto path = (fs::path(dir) / name).string();
        out_.open(path, std::ios::binary);
        if (!out_) throw ConfigError("cannot write '" + path + "'");
        out_ << "# seed=" << cfg.numerics.seed << " paths=" << cfg.numerics.paths << " steps=" << cfg.numerics.steps
             << " T=" << fmt(cfg.contract.maturity) << "\n";
    }
    Csv& row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) out_ << ',';
            out_ << quote(c);
            first = false;
        }
        out_ << '\n';
        return *this;
    }
    Csv& row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << quote(cells[i]);
        out_ << '\n';
        return *this;
    }

private:
    std::ofstream out_;
};

Problem build(const RunConfig& cfg) {
    auto p = make_problem(cfg.market, cfg.contract, cfg.grid(), cfg.numerics.paths, cfg.numerics.seed,
                          cfg.numerics.basis_degree, cfg.numerics.clean_price == CleanPriceMethod::regression);
    p.bundles = cfg.numerics.bundles;
    return p;
}

Estimate mean_se(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    const double n = static_cast<double>(v.size());
    return {m, n > 1 ? std::sqrt(s / (n - 1) / n) : 0.0};
}

void write_verdict(const RunConfig& cfg, const std::string& dir, const Verdict& v) {
    Csv csv(dir, "verdict.csv", cfg);
    csv.row({"outcome", "mode", "check", "relation", "worst", "holds", "skipped", "eps_lower", "eps_upper",
             "linear_bsde", "zero_states", "note"});
    const std::string lo = v.eps_bounds ? fmt(v.eps_bounds->lower) : "";
    const std::string hi = v.eps_bounds ? fmt(v.eps_bounds->upper) : "";
    auto base = [&](const Evidence* e) {
        return std::vector<std::string>{to_string(v.outcome),
                                        to_string(v.mode),
                                        e ? e->name : "",
                                        e ? e->relation : "",
                                        e ? fmt(e->worst) : "",
                                        e ? (e->holds ? "1" : "0") : "",
                                        e ? (e->skipped ? "1" : "0") : "",
                                        lo,
                                        hi,
                                        v.linear_bsde,
                                        std::to_string(v.zero_states),
                                        v.note};
    };
    if (v.evidence.empty()) csv.row(base(nullptr));
    for (const auto& e : v.evidence) csv.row(base(&e));
}

}  // namespace

std::optional<double> closed_form_price(const RunConfig& cfg) {
    const auto& c = cfg.contract;
    const auto& m = cfg.market;
    if (c.kind != ContractKind::call || c.side != Side::hedger_pays || c.closeout != Closeout::replacement)
        return {};
    if (m.bond_market() || m.assets.n() != 1 || m.legacy.epsilon > 0.0) return {};
    if (!m.spreads.s_b.is_constant() || !m.intensity.hH.is_constant()) return {};
    // the formula hedges with the stock unfunded and both bonds on repo
    if (m.repo.contains("1") || !m.repo.contains("H") || !m.repo.contains("C")) return {};
    ClosedFormInputs in;
    in.S = m.assets.s0[0];
    in.K = c.strike;
    in.T_minus_t = c.maturity;
    in.sigma = m.assets.vol_norm(0);
    in.r = m.rate.r0;
    in.s_b = m.spreads.s_b(0.0);
    in.s_ell = m.spreads.s_ell(0.0);
    in.hH = m.intensity.hH(0.0);
    in.LH = c.LH;
    in.Lm = c.Lm;
    in.epsilon = m.legacy.epsilon;
    if (!(in.sigma > 0.0)) return {};
    return call_price_replacement(in);
}

PriceResult run_price(const RunConfig& cfg, const std::string& out_dir) {
    Problem prob = build(cfg);
    PriceResult r;
    r.notional = prob.notional();
    try {
        r.verdict = verify(prob);
    } catch (const PreconditionError& e) {
        r.verdict = Verdict{};
        r.verdict.note = e.what();
    }
    auto spec = make_generator(prob, GenMode::semilinear);
    const auto sol = solve_semilinear(spec, prob.ens);
    r.report = decompose(sol, spec, prob.ens);
    const double band = cfg.numerics.census_band * r.notional;
    if (r.verdict.mode == VerdictMode::empirical) {
        auto ev = empirical_verdict(sol, spec, prob.ens, band, cfg.numerics.sign_fraction);
        ev.eps_bounds = r.verdict.eps_bounds;
        if (!r.verdict.note.empty()) ev.note = r.verdict.note + "; " + ev.note;
        r.verdict = ev;
    }
    const auto census = sign_census(sol, spec, prob.ens, band);
    switch (r.verdict.outcome) {
        case Outcome::fba_zero: r.wrong_sign_fraction = census.frac_positive(); break;
        case Outcome::fca_zero: r.wrong_sign_fraction = census.frac_negative(); break;
        default: r.wrong_sign_fraction = std::min(census.frac_positive(), census.frac_negative());
    }
    r.report.verdict = r.verdict.label();
    r.clean = {prob.clean.p0(), prob.clean.p0_se};
    r.y0 = {sol.Y0, sol.Y0_se};
    r.price = {r.clean.value + r.y0.value, std::hypot(r.clean.se, r.y0.se)};
    r.method = "semilinear";
    if (r.verdict.authorizes_linear()) {
        try {
            auto lspec =
                make_generator(prob, r.verdict.outcome == Outcome::fba_zero ? GenMode::linear_b : GenMode::linear_ell);
            const auto lsol = solve_linear(lspec, prob.ens);
            r.linear_price = Estimate{prob.clean.p0() + lsol.Y0, lsol.Y0_se};
            r.method = to_string(lspec.mode) + "+semilinear";
        } catch (const UnsupportedError& e) {
            r.linear_note = e.what();
        }
        if (r.verdict.outcome == Outcome::fba_zero) {
            try {
                r.closed_form = closed_form_price(cfg);
            } catch (const RegimeError& e) {
                r.linear_note += std::string(r.linear_note.empty() ? "" : "; ") + e.what();
            }
        }
    }
    try {
        r.identity = identity_check(r.report, r.y0);
    } catch (const IdentityError& e) {
        r.identity = {e.residual, e.se};
        r.identity_ok = false;
    }

    const std::string nan_s;
    Csv price(out_dir, "price.csv", cfg);
    price.row({"clean_price", "clean_se", "y0", "y0_se", "price", "price_se", "method", "linear_price", "linear_se",
               "closed_form", "epsilon", "verdict", "mode", "wrong_sign_fraction", "identity_residual", "identity_se",
               "note"});
    price.row({fmt(r.clean.value), fmt(r.clean.se), fmt(r.y0.value), fmt(r.y0.se), fmt(r.price.value),
               fmt(r.price.se), r.method, r.linear_price ? fmt(r.linear_price->value) : nan_s,
               r.linear_price ? fmt(r.linear_price->se) : nan_s, r.closed_form ? fmt(*r.closed_form) : nan_s,
               fmt(cfg.market.legacy.epsilon), r.verdict.label(), to_string(r.verdict.mode),
               fmt(r.wrong_sign_fraction), fmt(r.identity.residual), fmt(r.identity.se),
               r.linear_note.empty() ? r.verdict.note : r.linear_note});

    Csv x(out_dir, "xva.csv", cfg);
    x.row({"component", "value", "se"});
    const auto& rep = r.report;
    const std::pair<const char*, const Estimate*> comps[] = {
        {"fca_delta", &rep.fca_delta}, {"fba_delta", &rep.fba_delta},   {"dva", &rep.dva},
        {"cva", &rep.cva},             {"opportunity_cost", &rep.opportunity_cost}, {"fca", &rep.fca},
        {"fba", &rep.fba},             {"fva", &rep.fva},               {"fva_delta", &rep.fva_delta},
        {"total_xva", &rep.total_xva}, {"y0", &r.y0}};
    for (const auto& [name, e] : comps) x.row({name, fmt(e->value), fmt(e->se)});

    Csv s(out_dir, "solution.csv", cfg);
    std::vector<std::string> head{"t", "mean_y", "se_y"};
    for (std::size_t j = 0; j < sol.dim; ++j) head.push_back("mean_z" + std::to_string(j + 1));
    s.row(head);
    Csv cl(out_dir, "clean.csv", cfg);
    cl.row({"t", "mean", "se"});
    const std::size_t N = sol.n_paths;
    for (std::size_t k = 0; k <= sol.steps; ++k) {
        std::vector<double> y(sol.Y.begin() + static_cast<std::ptrdiff_t>(k * N),
                              sol.Y.begin() + static_cast<std::ptrdiff_t>((k + 1) * N));
        const auto ey = mean_se(y);
        std::vector<std::string> cells{fmt(prob.grid.t[k]), fmt(ey.value), fmt(ey.se)};
        for (std::size_t j = 0; j < sol.dim; ++j) {
            if (k == sol.steps) {
                cells.push_back("");
                continue;
            }
            const double* z = sol.z_ptr(k, j);
            cells.push_back(fmt(mean_se(std::vector<double>(z, z + N)).value));
        }
        s.row(cells);
        std::vector<double> pc(prob.clean.p_tilde.begin() + static_cast<std::ptrdiff_t>(k * N),
                               prob.clean.p_tilde.begin() + static_cast<std::ptrdiff_t>((k + 1) * N));
        const auto ep = mean_se(pc);
        cl.row({fmt(prob.grid.t[k]), fmt(ep.value), fmt(ep.se)});
    }
    write_verdict(cfg, out_dir, r.verdict);

    if (!r.identity_ok)
        throw IdentityError("decomposition identity breached: residual " + fmt(r.identity.residual) + ", SE " +
                                fmt(r.identity.se),
                            r.identity.residual, r.identity.se);
    return r;
}

Verdict run_verify(const RunConfig& cfg, const std::string& out_dir) {
    Problem prob = build(cfg);
    Verdict v = verify(prob);  // PreconditionError escapes before any file is written
    if (v.mode == VerdictMode::empirical) {
        auto spec = make_generator(prob, GenMode::semilinear);
        const auto sol = solve_semilinear(spec, prob.ens);
        auto ev = empirical_verdict(sol, spec, prob.ens, cfg.numerics.census_band * prob.notional(),
                                    cfg.numerics.sign_fraction);
        ev.eps_bounds = v.eps_bounds;
        ev.note = v.note + "; " + ev.note;
        v = ev;
    }
    write_verdict(cfg, out_dir, v);
    return v;
}

TableResult run_table(const RunConfig& cfg, const std::string& out_dir) {
    auto t = table_one(cfg.market, cfg.contract, cfg.grid(), cfg.numerics.paths, cfg.numerics.seed,
                       cfg.numerics.basis_degree, cfg.numerics.nil_floor);
    Csv csv(out_dir, "table.csv", cfg);
    csv.row({"side", "kind", "verdict", "fba_delta", "fba_se", "fba_sign", "dva", "dva_se", "dva_sign",
             "fba_expected", "dva_expected", "matches", "consistent"});
    for (const auto& r : t.rows) {
        csv.row({r.side == Side::hedger_pays ? "sell" : "buy", to_string(r.kind), r.verdict.label(),
                 fmt(r.fba_delta.value), fmt(r.fba_delta.se), to_string(r.fba_sign), fmt(r.dva.value),
                 fmt(r.dva.se), to_string(r.dva_sign), to_string(r.fba_expected), to_string(r.dva_expected),
                 r.matches ? "1" : "0", r.consistent ? "1" : "0"});
    }
    require_table_match(t);
    return t;
}

void run_paths(const RunConfig& cfg, const std::string& out_dir) {
    const auto grid = cfg.grid();
    const auto ens = simulate_paths(cfg.market, grid, cfg.numerics.paths, cfg.numerics.seed);
    Csv csv(out_dir, "paths.csv", cfg);
    std::vector<std::string> head{"path_id", "t"};
    for (std::size_t i = 0; i < ens.n_assets; ++i) head.push_back("S" + std::to_string(i + 1));
    head.push_back("r");
    head.push_back("B_inv");
    csv.row(head);
    for (std::size_t p = 0; p < ens.n_paths; ++p)
        for (std::size_t k = 0; k < grid.t.size(); ++k) {
            std::vector<std::string> cells{std::to_string(p), fmt(grid.t[k])};
            for (std::size_t i = 0; i < ens.n_assets; ++i) cells.push_back(fmt(ens.s(k, i, p)));
            cells.push_back(fmt(ens.rate(k, p)));
            cells.push_back(fmt(ens.binv(k, p)));
            csv.row(cells);
        }
}

}  // namespace xva
