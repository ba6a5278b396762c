// xva: price | verify | table | paths <config.json>
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "xva/engine.hpp"
#include "xva/errors.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kSolver = 3, kPrecondition = 4, kTable = 5 };

struct Overrides {
    std::string config;
    std::string out = "out";
    long long paths = -1, steps = -1, seed = -1;
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("config", o.config, "run configuration (JSON)")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--paths", o.paths, "override numerics.paths");
    sub->add_option("--steps", o.steps, "override numerics.steps");
    sub->add_option("--seed", o.seed, "override numerics.seed");
}

xva::RunConfig load(const Overrides& o) {
    auto cfg = xva::load_config(o.config);
    if (o.paths >= 0) cfg.numerics.paths = static_cast<std::size_t>(o.paths);
    if (o.steps >= 0) cfg.numerics.steps = static_cast<int>(o.steps);
    if (o.seed >= 0) cfg.numerics.seed = static_cast<std::uint64_t>(o.seed);
    cfg.numerics.validate();
    return cfg;
}

void print(const char* name, const xva::Estimate& e) { std::printf("  %-17s %14.6f  (se %.6f)\n", name, e.value, e.se); }

int cmd_price(const Overrides& o) {
    const auto cfg = load(o);
    const auto r = xva::run_price(cfg, o.out);
    std::printf("verdict  %s\n", r.verdict.label().c_str());
    print("clean price", r.clean);
    print("Y0", r.y0);
    print("price", r.price);
    if (r.linear_price) print("linear price", *r.linear_price);
    if (r.closed_form) std::printf("  %-17s %14.6f\n", "closed form", *r.closed_form);
    const auto& x = r.report;
    print("FCA^D", x.fca_delta);
    print("FBA^D", x.fba_delta);
    print("DVA", x.dva);
    print("CVA", x.cva);
    print("opportunity cost", x.opportunity_cost);
    std::printf("  identity residual %.3e (se %.3e)\n", r.identity.residual, r.identity.se);
    return kOk;
}

int cmd_verify(const Overrides& o) {
    const auto v = xva::run_verify(load(o), o.out);
    std::printf("verdict  %s", v.label().c_str());
    if (!v.linear_bsde.empty()) std::printf("  (%s)", v.linear_bsde.c_str());
    std::printf("\n");
    for (const auto& e : v.evidence)
        std::printf("  %-28s %s  worst %.6g%s\n", e.name.c_str(), e.relation.c_str(), e.worst,
                    e.skipped ? "  skipped" : (e.holds ? "" : "  FAILS"));
    if (v.eps_bounds) std::printf("  eps_* %.6f  eps^* %.6f\n", v.eps_bounds->lower, v.eps_bounds->upper);
    if (!v.note.empty()) std::printf("  note: %s\n", v.note.c_str());
    return kOk;
}

int cmd_table(const Overrides& o) {
    const auto t = xva::run_table(load(o), o.out);
    std::printf("%-5s %-5s %-22s %12s %-9s %12s %-9s\n", "side", "kind", "verdict", "FBA^D", "", "DVA", "");
    for (const auto& r : t.rows)
        std::printf("%-5s %-5s %-22s %12.6f %-9s %12.6f %-9s\n", r.side == xva::Side::hedger_pays ? "sell" : "buy",
                    xva::to_string(r.kind).c_str(), r.verdict.label().c_str(), r.fba_delta.value,
                    xva::to_string(r.fba_sign).c_str(), r.dva.value, xva::to_string(r.dva_sign).c_str());
    std::printf("reference sign pattern: %s\n", t.all_match() ? "reproduced" : "NOT reproduced");
    return kOk;
}

int cmd_paths(const Overrides& o) {
    xva::run_paths(load(o), o.out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"incremental XVA engine"};
    app.require_subcommand(1);
    Overrides o;
    auto* price = app.add_subcommand("price", "solve and decompose");
    auto* verify = app.add_subcommand("verify", "check the funding sign conditions");
    auto* table = app.add_subcommand("table", "buy/sell x call/put FBA and DVA signs");
    auto* paths = app.add_subcommand("paths", "dump the simulated ensemble");
    for (auto* s : {price, verify, table, paths}) add_common(s, o);
    CLI11_PARSE(app, argc, argv);
    try {
        if (price->parsed()) return cmd_price(o);
        if (verify->parsed()) return cmd_verify(o);
        if (table->parsed()) return cmd_table(o);
        if (paths->parsed()) return cmd_paths(o);
    } catch (const xva::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const xva::UnsupportedError& e) {
        std::cerr << "unsupported configuration: " << e.what() << "\n";
        return kConfig;
    } catch (const xva::ArgumentError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const xva::PreconditionError& e) {
        std::cerr << "precondition failed: " << e.what() << "\n";
        return kPrecondition;
    } catch (const xva::TableMismatch& e) {
        std::cerr << "table mismatch: " << e.what() << "\n";
        return kTable;
    } catch (const xva::Error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolver;
    }
    return kUsage;
}
