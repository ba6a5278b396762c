#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace xva {

struct RegressionBasis {
    int degree = 3;
    // singular directions below this fraction of the largest eigenvalue are dropped
    double rank_tol = 1e-11;
    // >1: split paths into equal-count bundles along the first feature and fit each
    // bundle separately with polynomials of local_degree (keeps tails from leaking)
    int bundles = 1;
    int local_degree = 1;
    // column that orders the bundles, indexing features then extras
    int bundle_key = 0;
};

// Least-squares projection onto polynomials of total degree <= basis.degree in the
// (standardized) features, plus extra regressors entering linearly. With bundles the
// projection is piecewise, one local fit per bundle.
class Projector {
public:
    Projector(const Eigen::MatrixXd& features, const Eigen::MatrixXd& extras, const RegressionBasis& basis,
              std::size_t slice);

    Eigen::VectorXd fit(const Eigen::VectorXd& y) const;
    Eigen::MatrixXd fit(const Eigen::MatrixXd& y) const;

    std::size_t n_functions() const { return functions_; }
    std::size_t rank() const { return rank_; }
    double condition() const { return cond_; }
    std::size_t n_bundles() const { return parts_.size(); }

private:
    struct Part {
        std::vector<Eigen::Index> rows;  // empty means all rows, in order
        Eigen::MatrixXd X;
        Eigen::MatrixXd solve;  // k x n, maps observations to coefficients
    };
    std::vector<Part> parts_;
    Eigen::Index n_ = 0;
    std::size_t functions_ = 0;
    std::size_t rank_ = 0;
    double cond_ = 1.0;

    void build(Part& part, const Eigen::MatrixXd& features, const Eigen::MatrixXd& extras, int degree,
               double rank_tol, std::size_t slice);
};

// Standardized monomial design matrix; exposed for tests.
Eigen::MatrixXd polynomial_design(const Eigen::MatrixXd& features, int degree);

}  // namespace xva
