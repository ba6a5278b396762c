#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xva/bsde.hpp"
#include "xva/xva.hpp"

namespace xva {

enum class Outcome { fba_zero, fca_zero, undetermined };
enum class VerdictMode { analytic, empirical };

std::string to_string(Outcome o);
std::string to_string(VerdictMode m);

// One checked inequality. worst is the extreme sampled value of the left-hand side;
// the inequality holds when worst <= tol (relation "<=0") or worst >= -tol (relation ">=0").
struct Evidence {
    std::string name;
    std::string relation;
    double worst = 0.0;
    bool holds = false;
    bool skipped = false;
};

struct EpsilonBounds {
    double lower;  // fba side holds at or below
    double upper;  // fca side holds at or above
};

struct Verdict {
    Outcome outcome = Outcome::undetermined;
    VerdictMode mode = VerdictMode::empirical;
    std::vector<Evidence> evidence;
    std::optional<EpsilonBounds> eps_bounds;
    std::string linear_bsde;  // which linear BSDE applies, when determined
    std::size_t zero_states = 0;
    std::string note;

    std::string label() const { return to_string(outcome) + "/" + to_string(mode); }
    bool authorizes_linear() const { return mode == VerdictMode::analytic && outcome != Outcome::undetermined; }
};

inline constexpr double kMarginTol = 1e-12;

Verdict check_clean(const Problem& prob);
// throws PreconditionError for a payoff of mixed sign
Verdict check_replacement(const Problem& prob);
Verdict verify(const Problem& prob);

// Short-forward thresholds: fba_zero at or below lower, fca_zero at or above upper.
std::optional<EpsilonBounds> forward_epsilon_bounds(const Contract& c, const MarketModel& m);

struct SignCensus {
    std::size_t states = 0;
    std::size_t positive = 0;
    std::size_t negative = 0;
    std::size_t zero_excluded = 0;  // states with a clean price of exactly zero
    double frac_positive() const { return states ? static_cast<double>(positive) / static_cast<double>(states) : 0.0; }
    double frac_negative() const { return states ? static_cast<double>(negative) / static_cast<double>(states) : 0.0; }
};

// band: arguments within +-band count as neither sign
SignCensus sign_census(const BsdeSolution& sol, const GeneratorSpec& spec, const PathEnsemble& ens, double band);

// fraction of states with the sign the prediction says vanishes
double empirical_sign_fraction(const BsdeSolution& sol, const GeneratorSpec& spec, const PathEnsemble& ens,
                               Outcome predicted, double band = 0.0);

// empirical fallback: the census alone decides, never authorizing the linear path
Verdict empirical_verdict(const BsdeSolution& sol, const GeneratorSpec& spec, const PathEnsemble& ens, double band,
                          double max_fraction = 1e-3);

enum class SignClass { positive, nil, negative };
std::string to_string(SignClass s);
SignClass classify(const Estimate& e, double floor);

struct TableRow {
    Side side;
    ContractKind kind;
    Verdict verdict;
    Estimate fca_delta;
    Estimate fba_delta;
    Estimate dva;
    SignClass fba_sign;
    SignClass dva_sign;
    SignClass fba_expected;
    SignClass dva_expected;
    bool matches = false;     // agrees with the reference sign pattern
    bool consistent = false;  // the side the verdict zeroes is nil
};

struct TableResult {
    std::vector<TableRow> rows;
    double floor = 0.0;
    bool sell_put_separated = false;
    double sell_put_gap = 0.0;
    double sell_put_gap_se = 0.0;
    bool all_match() const;
    bool all_consistent() const;
};

// buy/sell x call/put under replacement close-out with a zero legacy book
TableResult table_one(const MarketModel& market, const Contract& base, const TimeGrid& grid, std::size_t n_paths,
                      std::uint64_t seed, int degree, double nil_floor_rel);
// throws TableMismatch when a cell contradicts its own verdict
void require_table_match(const TableResult& t);

}  // namespace xva
