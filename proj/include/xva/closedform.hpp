#pragma once

#include "xva/market.hpp"

namespace xva {

struct Contract;
struct Verdict;

struct ClosedFormInputs {
    double S = 100.0;
    double K = 100.0;
    double T_minus_t = 1.0;
    double sigma = 0.2;
    double r = 0.0;
    double s_b = 0.0;
    double s_ell = 0.0;
    double hH = 0.0;
    double LH = 0.0;
    double Lm = 1.0;
    double epsilon = 0.0;

    double R_b() const { return r + s_b; }
    double beta() const { return (s_b + hH * LH) * Lm; }
};

double norm_cdf(double x);
double norm_pdf(double x);

// Black-Scholes with a single carry/discount rate; delta is dV/dS
double bs_price(double S, double K, double tau, double sigma, double rate, bool call);
double bs_delta(double S, double K, double tau, double sigma, double rate, bool call);

// call value discounted at the borrowing rate
double bs_cb(const ClosedFormInputs& in);

// sell call, replacement close-out, borrowing side only
double call_price_replacement(const ClosedFormInputs& in);

double vasicek_zcb(const ShortRateModel& model, double t, double U, double r_t);
inline double vasicek_zcb(const ShortRateModel& model, double t, double U) { return vasicek_zcb(model, t, U, model.r0); }
double vasicek_B(const ShortRateModel& model, double tau);

struct BondOptionValue {
    double value;
    double d_dr;
};
// European call on the U-bond expiring at T, seen at t with short rate r_t
BondOptionValue vasicek_zbc(const ShortRateModel& model, double t, double T, double U, double K, double r_t);

struct McEstimate {
    double value = 0.0;
    double se = 0.0;
};

// Forward linear representation of a forward combination under clean close-out.
// Needs an analytic verdict; returns V^F_0 = p^N_0 + Y_0.
McEstimate forward_linear_price(const Contract& c, const MarketModel& m, const Verdict& v, const TimeGrid& grid,
                                std::size_t n_paths, std::uint64_t seed);

}  // namespace xva
