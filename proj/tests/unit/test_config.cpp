#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "xva/config.hpp"
#include "xva/errors.hpp"

using namespace xva;
using nlohmann::json;

namespace {
json base() {
    return json::parse(R"({
      "market": {"rate": 0.02, "assets": {"s0": [100], "vol": 0.2},
                 "intensity": {"hH": 0.02, "hC": {"breaks": [1], "values": [0.03, 0.04]}},
                 "spreads": {"s_ell": 0.005, "s_b": 0.01}, "repo": ["H", "C"], "epsilon": -1},
      "contract": {"kind": "call", "side": "sell", "maturity": 1, "strike": 100, "closeout": "replacement",
                   "loss": {"Lm": 0.4, "LH": 0.6, "LC": 0.6}},
      "numerics": {"steps": 10, "paths": 1000, "seed": 5}
    })");
}
}  // namespace

TEST_CASE("config parses") {
    const auto c = parse_config(base().dump());
    CHECK(c.market.rate.r0 == 0.02);
    CHECK(c.market.assets.vol[0][0] == 0.2);
    CHECK(c.market.intensity.hC(1.5) == 0.04);
    CHECK(c.market.repo.contains("H"));
    CHECK_FALSE(c.market.repo.contains("1"));
    CHECK(c.market.legacy.epsilon == -1.0);
    CHECK(c.contract.side == Side::hedger_pays);
    CHECK(c.contract.closeout == Closeout::replacement);
    CHECK(c.contract.Lm == 0.4);
    CHECK(c.numerics.steps == 10);
    CHECK(c.numerics.seed == 5u);
    CHECK(c.grid().steps() == 10);

    auto j = base();
    j["market"].erase("repo");
    CHECK(parse_config(j.dump()).market.repo.all(1));
    j["contract"]["side"] = "buy";
    CHECK(parse_config(j.dump()).contract.side == Side::hedger_receives);
    j["market"]["rate"] = json::parse(R"({"kind": "vasicek", "r0": 0.02, "kappa": 0.5, "theta": 0.03, "sigma": 0.01})");
    j["market"].erase("assets");
    j["contract"] = json::parse(R"({"kind": "zcb", "side": "buy", "maturity": 5})");
    const auto z = parse_config(j.dump());
    CHECK(z.market.bond_market());
    CHECK(z.contract.kind == ContractKind::zero_coupon_bond);
}

TEST_CASE("config rejects bad input") {
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("[]"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.json"), ConfigError);

    auto bad = [](auto edit) {
        auto j = base();
        edit(j);
        CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
    };
    bad([](json& j) { j["extra"] = 1; });
    bad([](json& j) { j["market"]["spreads"]["s_x"] = 1; });
    bad([](json& j) { j.erase("contract"); });
    bad([](json& j) { j["contract"]["kind"] = "swap"; });
    bad([](json& j) { j["contract"]["side"] = "long"; });
    bad([](json& j) { j["contract"]["closeout"] = "dirty"; });
    bad([](json& j) { j["contract"]["loss"]["Lm"] = 1.5; });
    bad([](json& j) { j["contract"]["maturity"] = "one"; });
    bad([](json& j) { j["numerics"]["steps"] = 0; });
    bad([](json& j) { j["numerics"]["paths"] = 1.5; });
    bad([](json& j) { j["numerics"]["seed"] = -3; });
    bad([](json& j) { j["numerics"]["clean_price"] = "magic"; });
    bad([](json& j) { j["numerics"]["sign_fraction"] = 2; });
    bad([](json& j) { j["market"]["intensity"]["hH"] = -0.1; });
    bad([](json& j) { j["market"]["intensity"]["hC"]["breaks"] = json::array({2, 1}); });
    bad([](json& j) { j["market"]["repo"] = json::array({"Z"}); });
    bad([](json& j) { j["market"]["repo"] = "some"; });
    bad([](json& j) { j["market"]["assets"]["vol"] = json::array({json::array({0.2, 0.1})}); });
    bad([](json& j) { j["market"]["rate"] = json::parse(R"({"kind": "cir", "r0": 0.02})"); });
    bad([](json& j) { j["market"]["rate"] = json::parse(R"({"kind": "vasicek", "r0": 0.02, "kappa": 0})"); });
}

TEST_CASE("config rejects incompatible contracts") {
    auto j = base();
    j["market"]["rate"] = json::parse(R"({"kind": "vasicek", "r0": 0.02, "kappa": 0.5, "sigma": 0.01})");
    CHECK_THROWS(parse_config(j.dump()));  // stock block in a rate market
    j["market"].erase("assets");
    CHECK_THROWS_AS(parse_config(j.dump()), UnsupportedError);  // call without a stock
}
