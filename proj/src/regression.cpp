#include "xva/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "xva/errors.hpp"

namespace xva {

namespace {

// columns with (numerically) no spread carry no information beyond the constant
Eigen::MatrixXd standardize(const Eigen::MatrixXd& f) {
    const auto N = f.rows();
    std::vector<Eigen::Index> keep;
    Eigen::VectorXd mu(f.cols()), sd(f.cols());
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
        mu(c) = f.col(c).mean();
        sd(c) = std::sqrt((f.col(c).array() - mu(c)).square().sum() / static_cast<double>(N));
        if (sd(c) > 1e-12 * (1.0 + std::abs(mu(c)))) keep.push_back(c);
    }
    Eigen::MatrixXd out(N, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        const auto c = keep[j];
        out.col(static_cast<Eigen::Index>(j)) = (f.col(c).array() - mu(c)) / sd(c);
    }
    return out;
}

void monomials(int nvar, int degree, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    out.push_back(cur);
    if (static_cast<int>(cur.size()) == degree) return;
    for (int v = start; v < nvar; ++v) {
        cur.push_back(v);
        monomials(nvar, degree, v, cur, out);
        cur.pop_back();
    }
}

}  // namespace

Eigen::MatrixXd polynomial_design(const Eigen::MatrixXd& features, int degree) {
    if (degree < 0) throw ConfigError("regression: degree must be nonnegative");
    const Eigen::MatrixXd z = standardize(features);
    std::vector<std::vector<int>> terms;
    std::vector<int> cur;
    monomials(static_cast<int>(z.cols()), degree, 0, cur, terms);
    Eigen::MatrixXd X(z.rows(), static_cast<Eigen::Index>(terms.size()));
    for (std::size_t t = 0; t < terms.size(); ++t) {
        Eigen::VectorXd col = Eigen::VectorXd::Ones(z.rows());
        for (int v : terms[t]) col.array() *= z.col(v).array();
        X.col(static_cast<Eigen::Index>(t)) = col;
    }
    return X;
}

void Projector::build(Part& part, const Eigen::MatrixXd& features, const Eigen::MatrixXd& extras, int degree,
                      double rank_tol, std::size_t slice) {
    const auto N = features.rows();
    Eigen::MatrixXd poly = polynomial_design(features, degree);
    Eigen::MatrixXd ext = extras.size() > 0 ? standardize(extras) : Eigen::MatrixXd(N, 0);
    part.X.resize(N, poly.cols() + ext.cols());
    part.X << poly, ext;
    if (part.X.cols() > N)
        throw DegeneracyError("regression: more basis functions than paths at time slice " + std::to_string(slice));

    const Eigen::MatrixXd G = (part.X.transpose() * part.X) / static_cast<double>(N);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success)
        throw DegeneracyError("regression: eigen-decomposition failed at time slice " + std::to_string(slice));
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double lmax = lam.maxCoeff();
    if (!(lmax > 0.0)) throw DegeneracyError("regression: zero design at time slice " + std::to_string(slice));
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
    double lmin = lmax;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) > rank_tol * lmax) {
            inv(i) = 1.0 / lam(i);
            lmin = std::min(lmin, lam(i));
            ++rank_;
        }
    }
    cond_ = std::max(cond_, lmax / lmin);
    functions_ += static_cast<std::size_t>(part.X.cols());
    // pseudo-inverse: collinear columns (e.g. a running average that is affine in the spot at the first step)
    const Eigen::MatrixXd Ginv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    part.solve = Ginv * part.X.transpose() / static_cast<double>(N);
}

Projector::Projector(const Eigen::MatrixXd& features, const Eigen::MatrixXd& extras, const RegressionBasis& basis,
                     std::size_t slice) {
    const auto N = features.rows();
    n_ = N;
    if (N < 1) throw DegeneracyError("regression: empty slice " + std::to_string(slice));
    if (!features.allFinite() || (extras.size() > 0 && !extras.allFinite()))
        throw DegeneracyError("regression: non-finite state at time slice " + std::to_string(slice));
    if (basis.bundles < 1) throw ConfigError("regression: need at least one bundle");
    if (basis.bundles == 1 || features.cols() == 0) {
        parts_.resize(1);
        build(parts_[0], features, extras, basis.degree, basis.rank_tol, slice);
        return;
    }
    const auto B = static_cast<Eigen::Index>(basis.bundles);
    if (N < 4 * B) throw DegeneracyError("regression: too few paths per bundle at time slice " + std::to_string(slice));
    const Eigen::Index kc = basis.bundle_key;
    if (kc < 0 || kc >= features.cols() + extras.cols()) throw ConfigError("regression: bundle key out of range");
    const Eigen::VectorXd key = kc < features.cols() ? features.col(kc) : extras.col(kc - features.cols());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return key(a) < key(b); });
    parts_.resize(static_cast<std::size_t>(B));
    for (Eigen::Index b = 0; b < B; ++b) {
        auto& part = parts_[static_cast<std::size_t>(b)];
        const Eigen::Index lo = b * N / B, hi = (b + 1) * N / B;
        part.rows.assign(order.begin() + lo, order.begin() + hi);
        const Eigen::Index n = hi - lo;
        Eigen::MatrixXd f(n, features.cols()), e(n, extras.cols());
        for (Eigen::Index i = 0; i < n; ++i) {
            f.row(i) = features.row(part.rows[static_cast<std::size_t>(i)]);
            if (extras.cols() > 0) e.row(i) = extras.row(part.rows[static_cast<std::size_t>(i)]);
        }
        build(part, f, e, basis.local_degree, basis.rank_tol, slice);
    }
}

Eigen::MatrixXd Projector::fit(const Eigen::MatrixXd& y) const {
    if (y.rows() != n_) throw ArgumentError("regression: observation count differs from the design");
    if (parts_.size() == 1 && parts_[0].rows.empty()) return parts_[0].X * (parts_[0].solve * y);
    Eigen::MatrixXd out(y.rows(), y.cols());
    for (const auto& part : parts_) {
        const auto n = static_cast<Eigen::Index>(part.rows.size());
        Eigen::MatrixXd yl(n, y.cols());
        for (Eigen::Index i = 0; i < n; ++i) yl.row(i) = y.row(part.rows[static_cast<std::size_t>(i)]);
        const Eigen::MatrixXd fl = part.X * (part.solve * yl);
        for (Eigen::Index i = 0; i < n; ++i) out.row(part.rows[static_cast<std::size_t>(i)]) = fl.row(i);
    }
    return out;
}

Eigen::VectorXd Projector::fit(const Eigen::VectorXd& y) const {
    return fit(Eigen::MatrixXd(y)).col(0);
}

}  // namespace xva
