#include "xva/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "xva/errors.hpp"

namespace xva {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

const json& need(const json& j, const std::string& where, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(where + ": missing '" + key + "'");
    return *it;
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

double num_or(const json& j, const char* key, double def, const std::string& where) {
    auto it = j.find(key);
    return it == j.end() ? def : num(*it, where + "." + key);
}

std::vector<double> vec(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>()};
    if (!j.is_array()) throw ConfigError(where + ": expected a number or an array");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(num(x, where));
    return out;
}

std::string str(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

PiecewiseConstant curve(const json& j, const std::string& where) {
    if (j.is_number()) return PiecewiseConstant::constant(j.get<double>());
    only_keys(j, where, {"breaks", "values"});
    PiecewiseConstant pc;
    auto it = j.find("breaks");
    if (it != j.end()) pc.breaks = vec(*it, where + ".breaks");
    pc.values = vec(need(j, where, "values"), where + ".values");
    pc.validate(where);
    return pc;
}

ShortRateModel parse_rate(const json& j) {
    ShortRateModel r;
    if (j.is_number()) {
        r.r0 = j.get<double>();
        return r;
    }
    only_keys(j, "market.rate", {"kind", "r0", "kappa", "theta", "sigma"});
    const std::string kind = j.contains("kind") ? str(j["kind"], "market.rate.kind") : "constant";
    if (kind == "constant")
        r.kind = RateKind::constant;
    else if (kind == "vasicek")
        r.kind = RateKind::vasicek;
    else
        throw ConfigError("market.rate.kind: expected constant or vasicek, got '" + kind + "'");
    r.r0 = num(need(j, "market.rate", "r0"), "market.rate.r0");
    r.kappa = num_or(j, "kappa", 0.0, "market.rate");
    r.theta = num_or(j, "theta", r.r0, "market.rate");
    r.sigma_r = num_or(j, "sigma", 0.0, "market.rate");
    return r;
}

AssetModel parse_assets(const json& j) {
    only_keys(j, "market.assets", {"s0", "vol"});
    AssetModel a;
    a.s0 = vec(need(j, "market.assets", "s0"), "market.assets.s0");
    const json& v = need(j, "market.assets", "vol");
    if (v.is_number()) {
        if (a.s0.size() != 1) throw ConfigError("market.assets.vol: a scalar volatility needs exactly one asset");
        a.vol = {{v.get<double>()}};
    } else if (v.is_array()) {
        for (const auto& row : v) a.vol.push_back(vec(row, "market.assets.vol"));
    } else {
        throw ConfigError("market.assets.vol: expected a number or a matrix");
    }
    return a;
}

RepoSet parse_repo(const json& j, const MarketModel& m) {
    RepoSet r;
    if (j.is_string()) {
        if (str(j, "market.repo") != "all") throw ConfigError("market.repo: expected \"all\" or a list");
        r.names = {"H", "C"};
        const std::size_t n = m.bond_market() ? 1 : m.assets.n();
        for (std::size_t i = 1; i <= n; ++i) r.names.insert(std::to_string(i));
        return r;
    }
    if (!j.is_array()) throw ConfigError("market.repo: expected \"all\" or a list");
    for (const auto& x : j) {
        if (x.is_number_integer())
            r.names.insert(std::to_string(x.get<long long>()));
        else
            r.names.insert(str(x, "market.repo[]"));
    }
    return r;
}

MarketModel parse_market(const json& j) {
    only_keys(j, "market", {"rate", "assets", "intensity", "spreads", "repo", "epsilon"});
    MarketModel m;
    m.rate = parse_rate(need(j, "market", "rate"));
    if (j.contains("assets")) m.assets = parse_assets(j["assets"]);
    if (j.contains("intensity")) {
        const json& in = j["intensity"];
        only_keys(in, "market.intensity", {"hH", "hC"});
        m.intensity.hH = in.contains("hH") ? curve(in["hH"], "market.intensity.hH") : PiecewiseConstant::constant(0);
        m.intensity.hC = in.contains("hC") ? curve(in["hC"], "market.intensity.hC") : PiecewiseConstant::constant(0);
    } else {
        m.intensity.hH = m.intensity.hC = PiecewiseConstant::constant(0.0);
    }
    if (j.contains("spreads")) {
        const json& sp = j["spreads"];
        only_keys(sp, "market.spreads", {"s_ell", "s_b"});
        m.spreads.s_ell = sp.contains("s_ell") ? curve(sp["s_ell"], "market.spreads.s_ell") : PiecewiseConstant::constant(0);
        m.spreads.s_b = sp.contains("s_b") ? curve(sp["s_b"], "market.spreads.s_b") : PiecewiseConstant::constant(0);
    } else {
        m.spreads.s_ell = m.spreads.s_b = PiecewiseConstant::constant(0.0);
    }
    m.legacy.epsilon = num_or(j, "epsilon", 0.0, "market");
    m.repo = parse_repo(j.contains("repo") ? j["repo"] : json("all"), m);
    m.validate();
    return m;
}

ContractKind parse_kind(const std::string& s) {
    if (s == "forward_combo" || s == "forward") return ContractKind::forward_combo;
    if (s == "call") return ContractKind::call;
    if (s == "put") return ContractKind::put;
    if (s == "asian_floating_call" || s == "asian") return ContractKind::asian_floating_call;
    if (s == "zero_coupon_bond" || s == "zcb") return ContractKind::zero_coupon_bond;
    if (s == "bond_option") return ContractKind::bond_option;
    throw ConfigError("contract.kind: unknown kind '" + s + "'");
}

Side parse_side(const std::string& s) {
    if (s == "hedger_pays" || s == "sell") return Side::hedger_pays;
    if (s == "hedger_receives" || s == "buy") return Side::hedger_receives;
    throw ConfigError("contract.side: expected hedger_pays/sell or hedger_receives/buy, got '" + s + "'");
}

Contract parse_contract(const json& j) {
    only_keys(j, "contract",
              {"kind", "side", "maturity", "strike", "weights", "strikes", "bond_maturity", "closeout", "loss",
               "notional"});
    Contract c;
    c.kind = parse_kind(str(need(j, "contract", "kind"), "contract.kind"));
    c.side = parse_side(str(need(j, "contract", "side"), "contract.side"));
    c.maturity = num(need(j, "contract", "maturity"), "contract.maturity");
    c.strike = num_or(j, "strike", 0.0, "contract");
    if (j.contains("weights")) c.weights = vec(j["weights"], "contract.weights");
    if (j.contains("strikes")) c.strikes = vec(j["strikes"], "contract.strikes");
    c.bond_maturity = num_or(j, "bond_maturity", 0.0, "contract");
    c.notional = num_or(j, "notional", 0.0, "contract");
    const std::string co = j.contains("closeout") ? str(j["closeout"], "contract.closeout") : "clean";
    if (co == "clean")
        c.closeout = Closeout::clean;
    else if (co == "replacement")
        c.closeout = Closeout::replacement;
    else
        throw ConfigError("contract.closeout: expected clean or replacement, got '" + co + "'");
    if (j.contains("loss")) {
        const json& l = j["loss"];
        only_keys(l, "contract.loss", {"Lm", "LH", "LC"});
        c.Lm = num_or(l, "Lm", 1.0, "contract.loss");
        c.LH = num_or(l, "LH", 0.0, "contract.loss");
        c.LC = num_or(l, "LC", 0.0, "contract.loss");
    }
    c.validate();
    return c;
}

Numerics parse_numerics(const json& j) {
    only_keys(j, "numerics",
              {"steps", "paths", "seed", "basis_degree", "bundles", "clean_price", "nil_floor", "sign_fraction", "census_band"});
    Numerics n;
    auto integer = [&](const char* key, long long def) -> long long {
        auto it = j.find(key);
        if (it == j.end()) return def;
        if (!it->is_number_integer()) throw ConfigError(std::string("numerics.") + key + ": expected an integer");
        return it->get<long long>();
    };
    const long long steps = integer("steps", n.steps), paths = integer("paths", static_cast<long long>(n.paths)),
                    deg = integer("basis_degree", n.basis_degree);
    if (steps < 1) throw ConfigError("numerics.steps: must be positive");
    if (paths < 2) throw ConfigError("numerics.paths: need at least two paths");
    if (deg < 1 || deg > 6) throw ConfigError("numerics.basis_degree: must lie in 1..6");
    n.steps = static_cast<int>(steps);
    n.paths = static_cast<std::size_t>(paths);
    n.basis_degree = static_cast<int>(deg);
    const long long bun = integer("bundles", 0);
    if (bun < 0 || bun > 1000) throw ConfigError("numerics.bundles: must lie in 0..1000");
    n.bundles = static_cast<int>(bun);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("numerics.seed: expected a nonnegative integer");
        n.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("clean_price")) {
        const auto s = str(j["clean_price"], "numerics.clean_price");
        if (s == "auto")
            n.clean_price = CleanPriceMethod::automatic;
        else if (s == "regression")
            n.clean_price = CleanPriceMethod::regression;
        else
            throw ConfigError("numerics.clean_price: expected auto or regression");
    }
    n.nil_floor = num_or(j, "nil_floor", n.nil_floor, "numerics");
    n.sign_fraction = num_or(j, "sign_fraction", n.sign_fraction, "numerics");
    n.census_band = num_or(j, "census_band", n.census_band, "numerics");
    n.validate();
    return n;
}

}  // namespace

void Numerics::validate() const {
    if (steps < 1) throw ConfigError("numerics.steps: must be positive");
    if (paths < 2) throw ConfigError("numerics.paths: need at least two paths");
    if (!(nil_floor >= 0.0)) throw ConfigError("numerics.nil_floor: must be nonnegative");
    if (!(sign_fraction >= 0.0 && sign_fraction <= 1.0)) throw ConfigError("numerics.sign_fraction: must lie in [0,1]");
    if (!(census_band >= 0.0)) throw ConfigError("numerics.census_band: must be nonnegative");
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    only_keys(j, "config", {"market", "contract", "numerics"});
    RunConfig cfg;
    cfg.market = parse_market(need(j, "config", "market"));
    cfg.contract = parse_contract(need(j, "config", "contract"));
    if (j.contains("numerics")) cfg.numerics = parse_numerics(j["numerics"]);
    check_compatible(cfg.contract, cfg.market);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace xva
