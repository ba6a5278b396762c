#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "xva/market.hpp"

namespace xva {

enum class ContractKind { forward_combo, call, put, asian_floating_call, zero_coupon_bond, bond_option };
enum class Side { hedger_pays, hedger_receives };
enum class Closeout { clean, replacement };

std::string to_string(ContractKind k);
std::string to_string(Side s);
std::string to_string(Closeout c);

struct Contract {
    ContractKind kind = ContractKind::call;
    Side side = Side::hedger_pays;
    double maturity = 1.0;
    std::vector<double> weights;  // forward_combo
    std::vector<double> strikes;  // forward_combo
    double strike = 0.0;          // call, put, bond_option; averaging multiplier for the asian
    double bond_maturity = 0.0;   // bond_option
    double Lm = 1.0;
    double LH = 0.0;
    double LC = 0.0;
    Closeout closeout = Closeout::clean;
    double notional = 0.0;  // 0 picks a default from the market

    // +1 when the hedger pays the payoff
    double sign() const { return side == Side::hedger_pays ? 1.0 : -1.0; }
    void validate() const;
    // maturity of the bond that plays the traded asset in a rate market
    double traded_bond_maturity() const {
        return kind == ContractKind::bond_option ? bond_maturity : maturity;
    }
    double notional_or_default(const MarketModel& m) const;
};

// Checks that the contract can live in this market.
void check_compatible(const Contract& c, const MarketModel& m);

std::vector<double> terminal_xi(const Contract& c, const MarketModel& m, const PathEnsemble& ens);

struct CleanPriceCurve {
    std::size_t steps = 0;
    std::size_t n_paths = 0;
    std::size_t dim = 0;
    bool analytic = true;
    std::vector<double> p_tilde;  // (M+1)*N, zero at maturity after the payment
    std::vector<double> Z;        // M*d*N, nodes 0..M-1
    double p0_se = 0.0;

    double p(std::size_t k, std::size_t q) const { return p_tilde[k * n_paths + q]; }
    double z(std::size_t k, std::size_t j, std::size_t q) const { return Z[(k * dim + j) * n_paths + q]; }
    const double* z_ptr(std::size_t k, std::size_t j) const { return Z.data() + (k * dim + j) * n_paths; }
    double p0() const { return p_tilde[0]; }
};

// Analytic wherever the kind admits one; force_regression uses least squares throughout.
CleanPriceCurve clean_price(const Contract& c, const MarketModel& m, const PathEnsemble& ens, int degree = 3,
                            bool force_regression = false);
bool has_analytic_clean_price(const Contract& c, const MarketModel& m);

// D_theta xi, per path and Brownian component: out[j*N + p]
std::vector<double> malliavin_xi(const Contract& c, const MarketModel& m, const PathEnsemble& ens, double theta);
bool has_malliavin(const Contract& c, const MarketModel& m);

// Markov state at node k used by every regression (one column per feature)
Eigen::MatrixXd state_features(const Contract& c, const MarketModel& m, const PathEnsemble& ens, std::size_t k);
// same, with a precomputed log_average_table (may be empty for non-averaging kinds)
Eigen::MatrixXd state_features(const Contract& c, const MarketModel& m, const PathEnsemble& ens, std::size_t k,
                               const std::vector<double>& Jtab);

// feature column that orders paths by moneyness (regression bundles follow it)
inline int moneyness_column(const Contract& c) { return c.kind == ContractKind::asian_floating_call ? 1 : 0; }

// running trapezoid integral of ln S^1 up to node k
std::vector<double> log_average_integral(const PathEnsemble& ens, std::size_t k);
// all nodes at once: J[k*N + p]
std::vector<double> log_average_table(const PathEnsemble& ens);

}  // namespace xva
