#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flutrack/common.hpp"
#include "flutrack/logistic.hpp"
#include "flutrack/rng.hpp"

namespace flutrack::cc {

// Respondent-level case-control rows: y is the A1-search outcome, columns are
// the survey covariates (log search volume, demographics, ILI indicators).
struct CaseControlTable {
    std::vector<std::string> columns; // covariate names, excludes y
    Eigen::MatrixXd values;           // n x columns.size()
    Eigen::VectorXd y;                // n, each 0 or 1

    Eigen::Index column_index(const std::string& name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end())
            throw config_error("unknown covariate '" + name + "'");
        return static_cast<Eigen::Index>(it - columns.begin());
    }
};

// A model term is either a main effect (one column) or a product interaction
// written a:b in the formula file.
struct ModelTerm {
    std::vector<std::string> factors;

    std::string name() const {
        std::string out;
        for (std::size_t i = 0; i < factors.size(); ++i) {
            if (i) out += ":";
            out += factors[i];
        }
        return out;
    }
};

struct ModelFormula {
    std::vector<ModelTerm> terms;
};

// One term per line, '#' comments; interactions as "a:b".
inline ModelFormula parse_formula(const std::string& text, const std::string& source_name) {
    ModelFormula out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // trim
        const auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t");
        line = line.substr(b, e - b + 1);
        if (line.empty() || line[0] == '#') continue;
        ModelTerm term;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t colon = line.find(':', start);
            if (colon == std::string::npos) colon = line.size();
            const std::string factor = line.substr(start, colon - start);
            if (factor.empty())
                throw config_error(source_name + ":" + std::to_string(lineno) +
                                   ": empty factor in term '" + line + "'");
            term.factors.push_back(factor);
            start = colon + 1;
            if (colon == line.size()) break;
        }
        out.terms.push_back(std::move(term));
    }
    if (out.terms.empty())
        throw config_error(source_name + ": formula lists no terms");
    return out;
}

inline ModelFormula load_formula(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open formula file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_formula(ss.str(), path);
}

inline ModelFormula default_formula(const CaseControlTable& table) {
    ModelFormula f;
    for (const auto& c : table.columns) f.terms.push_back(ModelTerm{{c}});
    return f;
}

// Design matrix with the intercept in column 0 and one column per term.
inline Eigen::MatrixXd build_design(const CaseControlTable& table, const ModelFormula& formula,
                                    std::vector<std::string>* names_out) {
    const Eigen::Index n = table.values.rows();
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(formula.terms.size()) + 1);
    X.col(0).setOnes();
    std::vector<std::string> names{"(intercept)"};
    for (std::size_t t = 0; t < formula.terms.size(); ++t) {
        Eigen::VectorXd col = Eigen::VectorXd::Ones(n);
        for (const auto& f : formula.terms[t].factors)
            col = col.cwiseProduct(table.values.col(table.column_index(f)));
        X.col(static_cast<Eigen::Index>(t) + 1) = col;
        names.push_back(formula.terms[t].name());
    }
    if (names_out) *names_out = names;
    return X;
}

// Fitted behavioral model. `calibration` is the outcome rate the intercept is
// currently calibrated to: the sampling rate ybar after fitting, then the
// requested population rate once corrected. Tracking it makes the correction
// invertible (re-correcting to ybar restores the original constant exactly).
struct FittedLogit {
    LogitFit fit;
    bool corrected = false;
    double tau = kNaN;
    double calibration = kNaN;
};

inline FittedLogit fit_logit(const CaseControlTable& table, const ModelFormula& formula) {
    for (Eigen::Index i = 0; i < table.y.size(); ++i)
        if (table.y[i] != 0.0 && table.y[i] != 1.0)
            throw numeric_error("fit_logit: outcome must be 0 or 1");
    std::vector<std::string> names;
    const Eigen::MatrixXd X = build_design(table, formula, &names);
    FittedLogit out;
    out.fit = fit_logit_irls(X, table.y, std::move(names));
    out.calibration = out.fit.ybar;
    return out;
}

// Rare-events intercept correction: replaces the constant term by
// B0 - ln[((1-tau)/tau) * (ybar/(1-ybar))] so predicted probabilities match
// the population rate tau instead of the case-control sampling rate ybar.
// Slopes and covariance are untouched.
inline FittedLogit correct_intercept(const FittedLogit& fitted, double tau) {
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("correct_intercept: tau must lie in (0, 1)");
    const double current = std::isnan(fitted.calibration) ? fitted.fit.ybar : fitted.calibration;
    FittedLogit out = fitted;
    out.fit.beta[0] -= std::log(((1.0 - tau) / tau) * (current / (1.0 - current)));
    out.corrected = true;
    out.tau = tau;
    out.calibration = tau;
    return out;
}

struct RiskContrast {
    double rr = kNaN;
    double rd = kNaN;
    double rr_lo = kNaN, rr_hi = kNaN; // 95% simulation interval
    double rd_lo = kNaN, rd_hi = kNaN;
    double tau = kNaN;
    Eigen::VectorXd x1, x0; // covariate vectors (no intercept)
};

namespace detail {

// Factor of the covariance for multivariate-normal draws; tolerates
// semi-definite (including zero) matrices, rejects indefinite ones.
inline Eigen::MatrixXd mvn_factor(const Eigen::MatrixXd& cov) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    Eigen::VectorXd d = ldlt.vectorD();
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] < -1e-8 * scale)
            throw numeric_error("covariance matrix is not positive semi-definite");
        d[i] = d[i] > 0.0 ? std::sqrt(d[i]) : 0.0;
    }
    Eigen::MatrixXd L = ldlt.matrixL();
    L = L * d.asDiagonal();
    return ldlt.transpositionsP().transpose() * L;
}

inline double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = h - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

inline Eigen::VectorXd with_intercept(const Eigen::VectorXd& x) {
    Eigen::VectorXd out(x.size() + 1);
    out[0] = 1.0;
    out.tail(x.size()) = x;
    return out;
}

} // namespace detail

// Relative risk and risk difference of the outcome under covariate profiles
// x1 vs x0, with 95% intervals from n_draws parametric-simulation draws of
// beta ~ N(beta_hat, covariance) (percentile method, deterministic by seed).
inline RiskContrast risk_contrast(const FittedLogit& fitted, const Eigen::VectorXd& x1,
                                  const Eigen::VectorXd& x0, int n_draws, std::uint64_t seed) {
    if (!fitted.corrected)
        throw std::invalid_argument("risk_contrast: intercept correction must be applied first");
    if (n_draws < 1000)
        throw std::invalid_argument("risk_contrast: n_draws must be >= 1000");
    const Eigen::VectorXd z1 = detail::with_intercept(x1);
    const Eigen::VectorXd z0 = detail::with_intercept(x0);
    if (z1.size() != fitted.fit.beta.size() || z0.size() != fitted.fit.beta.size())
        throw std::invalid_argument("risk_contrast: covariate vector length mismatch");

    const Eigen::MatrixXd L = detail::mvn_factor(fitted.fit.covariance);
    const Eigen::Index k = fitted.fit.beta.size();
    Rng rng(seed);
    std::vector<double> rr_draws(static_cast<std::size_t>(n_draws));
    std::vector<double> rd_draws(static_cast<std::size_t>(n_draws));
    Eigen::VectorXd z(k);
    for (int i = 0; i < n_draws; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) z[j] = rng.normal();
        const Eigen::VectorXd beta = fitted.fit.beta + L * z;
        const double p1 = inv_logit(beta.dot(z1));
        const double p0 = inv_logit(beta.dot(z0));
        rr_draws[static_cast<std::size_t>(i)] = p1 / p0;
        rd_draws[static_cast<std::size_t>(i)] = p1 - p0;
    }

    RiskContrast out;
    const double p1 = inv_logit(fitted.fit.beta.dot(z1));
    const double p0 = inv_logit(fitted.fit.beta.dot(z0));
    out.rr = p1 / p0;
    out.rd = p1 - p0;
    out.rr_lo = detail::percentile(rr_draws, 0.025);
    out.rr_hi = detail::percentile(rr_draws, 0.975);
    out.rd_lo = detail::percentile(rd_draws, 0.025);
    out.rd_hi = detail::percentile(rd_draws, 0.975);
    out.tau = fitted.tau;
    out.x1 = x1;
    out.x0 = x0;
    return out;
}

// Requested contrast: named covariate assignments for the exposed (x1) and
// unexposed (x0) profiles; anything unassigned sits at its sample mean.
struct ContrastSpec {
    std::string name;
    std::map<std::string, double> x1, x0;
};

namespace detail {

inline std::map<std::string, double> parse_assignments(const std::string& text,
                                                       const std::string& where) {
    std::map<std::string, double> out;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw config_error(where + ": expected var=value, got '" + item + "'");
        const std::string var = item.substr(0, eq);
        const std::string val = item.substr(eq + 1);
        try {
            out[var] = std::stod(val);
        } catch (...) {
            throw config_error(where + ": bad value in '" + item + "'");
        }
    }
    if (out.empty()) throw config_error(where + ": empty assignment list");
    return out;
}

} // namespace detail

// One contrast per line: NAME<TAB>x1-assignments<TAB>x0-assignments, with
// assignments as comma-separated var=value pairs.
inline std::vector<ContrastSpec> parse_contrasts(const std::string& text,
                                                 const std::string& source_name) {
    std::vector<ContrastSpec> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::string where = source_name + ":" + std::to_string(lineno);
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw config_error(where + ": expected NAME<TAB>x1<TAB>x0");
        ContrastSpec c;
        c.name = line.substr(0, t1);
        c.x1 = detail::parse_assignments(line.substr(t1 + 1, t2 - t1 - 1), where);
        c.x0 = detail::parse_assignments(line.substr(t2 + 1), where);
        out.push_back(std::move(c));
    }
    if (out.empty()) throw config_error(source_name + ": no contrasts");
    return out;
}

inline std::vector<ContrastSpec> load_contrasts(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open contrasts file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_contrasts(ss.str(), path);
}

// Term-space covariate vector (no intercept) for one profile: each formula
// term is the product of its factors, at the assigned value or the sample
// mean.
inline Eigen::VectorXd term_vector(const CaseControlTable& table, const ModelFormula& formula,
                                   const std::map<std::string, double>& assignments) {
    for (const auto& [var, v] : assignments) table.column_index(var); // validates names
    Eigen::VectorXd out(static_cast<Eigen::Index>(formula.terms.size()));
    for (std::size_t t = 0; t < formula.terms.size(); ++t) {
        double prod = 1.0;
        for (const auto& f : formula.terms[t].factors) {
            const auto it = assignments.find(f);
            prod *= it != assignments.end() ? it->second
                                            : table.values.col(table.column_index(f)).mean();
        }
        out[static_cast<Eigen::Index>(t)] = prod;
    }
    return out;
}

// Per-draw outcome probabilities at covariate profile x, for density plots of
// the estimated population-level search rate.
inline std::vector<double> expected_density(const FittedLogit& fitted, const Eigen::VectorXd& x,
                                            int n_draws, std::uint64_t seed) {
    if (!fitted.corrected)
        throw std::invalid_argument("expected_density: intercept correction must be applied first");
    if (n_draws < 1000)
        throw std::invalid_argument("expected_density: n_draws must be >= 1000");
    const Eigen::VectorXd z1 = detail::with_intercept(x);
    if (z1.size() != fitted.fit.beta.size())
        throw std::invalid_argument("expected_density: covariate vector length mismatch");
    const Eigen::MatrixXd L = detail::mvn_factor(fitted.fit.covariance);
    const Eigen::Index k = fitted.fit.beta.size();
    Rng rng(seed);
    std::vector<double> draws(static_cast<std::size_t>(n_draws));
    Eigen::VectorXd z(k);
    for (int i = 0; i < n_draws; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) z[j] = rng.normal();
        const Eigen::VectorXd beta = fitted.fit.beta + L * z;
        draws[static_cast<std::size_t>(i)] = inv_logit(beta.dot(z1));
    }
    return draws;
}

} // namespace flutrack::cc
