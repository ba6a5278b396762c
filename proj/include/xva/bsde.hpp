#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xva/closeout.hpp"
#include "xva/market.hpp"
#include "xva/payoffs.hpp"
#include "xva/regression.hpp"

namespace xva {

// phi_t(z) = alpha_t . (z + Z^N_t); alpha stored per grid node, nodes 0..M-1
struct PhiMap {
    std::vector<std::vector<double>> alpha;
    std::string tag;
    bool zero = true;

    double dot(std::size_t k, const std::vector<double>& v) const;
};

// U is the maturity of the traded bond (ignored for stock markets).
PhiMap build_phi(const MarketModel& market, const TimeGrid& grid, double U);

struct Problem {
    MarketModel market;
    Contract contract;
    TimeGrid grid;
    PathEnsemble ens;
    CleanPriceCurve clean;
    PhiMap phi;
    std::vector<double> xi;
    std::vector<double> avg_table;  // running log average, asian only
    int degree = 3;
    int bundles = 0;  // solver regression bundles, 0 picks by path count
    bool force_regression = false;

    RegressionBasis solver_basis() const;

    double notional() const { return contract.notional_or_default(market); }
    Eigen::MatrixXd features(std::size_t k) const { return state_features(contract, market, ens, k, avg_table); }
};

Problem make_problem(const MarketModel& market, const Contract& contract, const TimeGrid& grid, std::size_t n_paths,
                     std::uint64_t seed, int degree = 3, bool force_regression = false);

enum class GenMode { semilinear, linear_b, linear_ell };
std::string to_string(GenMode m);

// deterministic coefficients at a grid node
struct NodeCoefs {
    double t = 0.0;
    double s_ell = 0.0;
    double s_b = 0.0;
    double s_eps = 0.0;
    double hH = 0.0;
    double hC = 0.0;
    double B_eps = 0.0;  // discounted legacy value
    double G = 1.0;      // joint survival
    double h() const { return hH + hC; }
};

struct GeneratorSpec {
    const Problem* prob = nullptr;
    GenMode mode = GenMode::semilinear;
    CloseoutSpec closeout;
    int xi_sign = 1;  // picks the default party in the linear replacement generator
    std::vector<NodeCoefs> node;

    // Lipschitz constant in y, used for the step-size guard
    double lipschitz_y(std::size_t k) const;
};

GeneratorSpec make_generator(const Problem& prob, GenMode mode);

// the pieces of g^F at one state
struct GenTerms {
    double arg = 0.0;      // y + p~ + B~eps - c - phi(z)
    double funding = 0.0;  // -arg^+ s^l + arg^- s^b (or the linear replacement)
    double legacy = 0.0;   // s^eps B~eps
    double dH = 0.0;       // Theta~^{Delta,H}(y)
    double dC = 0.0;       // Theta~^{Delta,C}(y)
    double value = 0.0;    // g^F
    double hat = 0.0;      // g^F + h y, the survival-weighted integrand
};

// zn: Z^N at the state (dim entries), z likewise
GenTerms generator_terms(const GeneratorSpec& spec, std::size_t k, double p_tilde, const double* zn, double y,
                         const double* z);
double generator_eval(const GeneratorSpec& spec, std::size_t k, double p_tilde, const double* zn, double y,
                      const double* z);

struct SliceDiagnostics {
    double condition = 1.0;
    std::size_t rank = 0;
    std::size_t functions = 0;
};

struct BsdeSolution {
    std::size_t steps = 0;
    std::size_t n_paths = 0;
    std::size_t dim = 0;
    bool has_paths = false;
    std::vector<double> Y;         // (M+1)*N
    std::vector<double> Z;         // M*d*N
    std::vector<double> samples;   // per-path estimator of Y0
    std::vector<double> terminal;  // per-path survival-weighted terminal part
    double Y0 = 0.0;
    double Y0_se = 0.0;
    std::vector<SliceDiagnostics> diagnostics;
    std::string method;

    double y(std::size_t k, std::size_t p) const { return Y[k * n_paths + p]; }
    const double* z_ptr(std::size_t k, std::size_t j) const { return Z.data() + (k * dim + j) * n_paths; }
};

BsdeSolution solve_semilinear(const GeneratorSpec& spec, const PathEnsemble& ens, const std::vector<double>& terminal,
                              const RegressionBasis& basis);
inline BsdeSolution solve_semilinear(const GeneratorSpec& spec, const PathEnsemble& ens) {
    return solve_semilinear(spec, ens, std::vector<double>(ens.n_paths, 0.0), spec.prob->solver_basis());
}

// Forward representation of the linear BSDE under the drift-shifted measure.
BsdeSolution solve_linear(const GeneratorSpec& spec, const PathEnsemble& ens);

struct LiftResult {
    std::vector<double> pi_H;       // M*N
    std::vector<double> pi_C;       // M*N
    std::vector<double> pi_assets;  // M*n*N, empty when the hedge cannot be rebuilt
    std::optional<std::string> hedge_error;
};

LiftResult lift_to_G(const BsdeSolution& sol, const GeneratorSpec& spec);

// Y^G at time t on one path given its default times
double lifted_value(const BsdeSolution& sol, const GeneratorSpec& spec, std::size_t k, std::size_t p, double tau_H,
                    double tau_C);

struct FullFiltrationResult {
    double Y0 = 0.0;
    double se = 0.0;       // of the full-filtration estimator alone
    double diff = 0.0;     // full-filtration minus reduced
    double diff_se = 0.0;  // paired standard error of the difference
    std::size_t defaults_H = 0;
    std::size_t defaults_C = 0;
};

// Realizes default times and the at-default cash-flows on the solver's paths.
FullFiltrationResult full_filtration_mc(const GeneratorSpec& spec, const BsdeSolution& sol, std::uint64_t seed);

}  // namespace xva
