#include "xva/xva.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xva/errors.hpp"

namespace xva {

namespace {

Estimate estimate(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double m = 0.0;
    for (double x : v) m += x;
    m /= n;
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, n > 1 ? std::sqrt(s / (n - 1.0) / n) : 0.0};
}

}  // namespace

XvaReport decompose(const BsdeSolution& sol, const GeneratorSpec& spec, const PathEnsemble& ens) {
    if (!sol.has_paths) throw ArgumentError("decompose: needs a path-wise solution");
    if (sol.n_paths != ens.n_paths || sol.steps != ens.grid.steps())
        throw ArgumentError("decompose: solution and ensemble grids differ");
    const Problem& prob = *spec.prob;
    const std::size_t M = sol.steps, N = sol.n_paths, d = sol.dim;
    std::vector<double> fca(N, 0.0), fba(N, 0.0), fcad(N), fbad(N), dva(N, 0.0), cva(N, 0.0), opp(N, 0.0),
        total(N), fva(N), fvad(N);
    std::vector<double> z(d), zn(d);
    for (std::size_t k = 0; k < M; ++k) {
        const auto& c = spec.node[k];
        const double w = c.G * ens.grid.dt(k);
        const double leg = c.s_eps * c.B_eps;
        for (std::size_t p = 0; p < N; ++p) {
            for (std::size_t j = 0; j < d; ++j) {
                z[j] = sol.Z[(k * d + j) * N + p];
                zn[j] = prob.clean.z(k, j, p);
            }
            const double y = sol.y(k, p);
            const auto g = generator_terms(spec, k, prob.clean.p(k, p), zn.data(), y, z.data());
            fca[p] += w * std::max(-g.arg, 0.0) * c.s_b;
            fba[p] += w * std::max(g.arg, 0.0) * c.s_ell;
            dva[p] += w * c.hH * g.dH;
            cva[p] += w * c.hC * g.dC;
            opp[p] += w * leg;
        }
    }
    // O^- and O^+ are the parts of the legacy drift carried by each side
    double om = 0.0, op = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
        const auto& c = spec.node[k];
        const double v = c.G * ens.grid.dt(k) * c.s_eps * c.B_eps;
        op += std::max(v, 0.0);
        om += std::max(-v, 0.0);
    }
    for (std::size_t p = 0; p < N; ++p) {
        fcad[p] = fca[p] - om;
        fbad[p] = fba[p] - op;
        total[p] = fcad[p] - fbad[p] - dva[p] + cva[p] + sol.terminal[p];
        fva[p] = fca[p] - fba[p];
        fvad[p] = fcad[p] - fbad[p];
    }
    XvaReport r;
    r.fca = estimate(fca);
    r.fba = estimate(fba);
    r.fca_delta = estimate(fcad);
    r.fba_delta = estimate(fbad);
    r.dva = estimate(dva);
    r.cva = estimate(cva);
    r.opportunity_cost = estimate(opp);
    r.terminal = estimate(sol.terminal);
    r.total_xva = estimate(total);
    r.fva = estimate(fva);
    r.fva_delta = estimate(fvad);
    r.convention = spec.closeout.convention;
    r.total_paths = std::move(total);
    return r;
}

IdentityResult identity_check(const XvaReport& report, const Estimate& Y0) {
    IdentityResult out;
    out.residual = Y0.value - report.total_xva.value;
    out.se = std::sqrt(Y0.se * Y0.se + report.total_xva.se * report.total_xva.se);
    const double slack = 1e-12 * std::max(1.0, std::abs(Y0.value));
    if (!(std::abs(out.residual) <= 3.0 * out.se + slack)) {
        std::ostringstream os;
        os << "decomposition identity breached: residual " << out.residual << " vs 3*SE " << 3.0 * out.se;
        throw IdentityError(os.str(), out.residual, out.se);
    }
    return out;
}

}  // namespace xva
