#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "flutrack/common.hpp"

namespace flutrack {

struct LogitFit {
    Eigen::VectorXd beta;          // includes intercept at index 0
    Eigen::MatrixXd covariance;    // inverse observed information at beta
    double ybar = 0.0;
    int iterations = 0;
    double final_grad_norm = 0.0;
    double loglik = 0.0;
    std::vector<std::string> names; // column names, names[0] == "(intercept)"
};

namespace detail {

inline double bernoulli_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // log(p) = eta - log(1 + e^eta), computed stably on both tails.
        const double e = eta[i];
        const double log1pe = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        ll += y[i] * e - log1pe;
    }
    return ll;
}

} // namespace detail

// Maximum-likelihood logistic regression via iteratively reweighted least
// squares with step halving. X must include the intercept column. Converges
// when the largest score component drops below 1e-8 or the relative
// log-likelihood change drops below 1e-10.
//
// Errors: a rank-deficient design names the collinear columns; coefficients
// diverging past |beta_j| > 15 under non-decreasing likelihood steps are
// reported as complete separation.
inline LogitFit fit_logit_irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               std::vector<std::string> names, int max_iter = 100) {
    const Eigen::Index n = X.rows(), k = X.cols();
    if (n == 0) throw numeric_error("fit_logit: empty sample");
    if (y.size() != n) throw numeric_error("fit_logit: X and y dimensions differ");
    const double ybar = y.mean();
    if (!(ybar > 0.0 && ybar < 1.0))
        throw numeric_error("fit_logit: need at least one case and one control");

    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        qr.setThreshold(1e-10);
        if (qr.rank() < k) {
            std::string bad;
            const auto& perm = qr.colsPermutation().indices();
            for (Eigen::Index j = qr.rank(); j < k; ++j) {
                if (!bad.empty()) bad += ", ";
                bad += names[static_cast<std::size_t>(perm[j])];
            }
            throw numeric_error("fit_logit: design matrix is rank deficient (collinear: " + bad + ")");
        }
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd eta = X * beta;
    double ll = detail::bernoulli_loglik(eta, y);
    double grad_norm = 0.0;
    int iter = 0;

    for (; iter < max_iter; ++iter) {
        Eigen::VectorXd p(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p[i] = inv_logit(eta[i]);
            w[i] = std::max(p[i] * (1.0 - p[i]), 1e-12);
        }
        const Eigen::VectorXd score = X.transpose() * (y - p);
        grad_norm = score.cwiseAbs().maxCoeff();
        if (grad_norm < 1e-8) break;

        const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
        const Eigen::VectorXd step = info.ldlt().solve(score);

        double scale = 1.0;
        Eigen::VectorXd beta_new, eta_new;
        double ll_new = -std::numeric_limits<double>::infinity();
        for (int half = 0; half < 40; ++half) {
            beta_new = beta + scale * step;
            eta_new = X * beta_new;
            ll_new = detail::bernoulli_loglik(eta_new, y);
            if (ll_new >= ll - 1e-12) break;
            scale *= 0.5;
        }
        const double rel_change = std::abs(ll_new - ll) / (std::abs(ll) + 1.0);
        beta = beta_new;
        eta = eta_new;
        ll = ll_new;

        if (beta.cwiseAbs().maxCoeff() > 15.0) {
            Eigen::Index j;
            beta.cwiseAbs().maxCoeff(&j);
            throw numeric_error("fit_logit: complete or quasi-complete separation (|" +
                                names[static_cast<std::size_t>(j)] + "| diverging)");
        }
        if (rel_change < 1e-10) { ++iter; break; }
    }
    if (iter >= max_iter)
        throw numeric_error("fit_logit: IRLS did not converge in " + std::to_string(max_iter) +
                            " iterations");

    Eigen::VectorXd p(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p[i] = inv_logit(eta[i]);
        w[i] = std::max(p[i] * (1.0 - p[i]), 1e-12);
    }
    const Eigen::VectorXd score = X.transpose() * (y - p);
    grad_norm = score.cwiseAbs().maxCoeff();
    const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;

    LogitFit fit;
    fit.beta = beta;
    fit.covariance = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    // Symmetrize away solver round-off so the covariance stays valid input
    // for Cholesky-based simulation.
    fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
    fit.ybar = ybar;
    fit.iterations = iter;
    fit.final_grad_norm = grad_norm;
    fit.loglik = ll;
    fit.names = std::move(names);
    return fit;
}

} // namespace flutrack
