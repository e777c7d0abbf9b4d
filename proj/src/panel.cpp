#include "hypedyn/panel.hpp"

#include "hypedyn/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>

namespace hypedyn::econ {

using Eigen::MatrixXd;
using Eigen::VectorXd;

PanelDataset::PanelDataset(std::string dependent_name, std::vector<std::string> column_names)
    : dependent_name_(std::move(dependent_name)),
      names_(std::move(column_names)),
      columns_(names_.size()) {
    std::set<std::string> seen(names_.begin(), names_.end());
    detail::require(seen.size() == names_.size(), "panel column names must be unique");
}

void PanelDataset::add_row(std::string group, std::string time, double dependent,
                           std::span<const double> values, std::string cluster) {
    detail::require(values.size() == names_.size(), "row arity does not match panel columns");
    if (cluster.empty()) {
        cluster = group;
    }
    groups_.push_back(std::move(group));
    times_.push_back(std::move(time));
    clusters_.push_back(std::move(cluster));
    dependent_.push_back(dependent);
    for (std::size_t k = 0; k < values.size(); ++k) {
        columns_[k].push_back(values[k]);
    }
}

void PanelDataset::add_column(std::string name, std::vector<double> values) {
    detail::require(values.size() == rows(), "new column must have one value per row");
    detail::require(!has_column(name), "duplicate panel column: " + name);
    names_.push_back(std::move(name));
    columns_.push_back(std::move(values));
}

bool PanelDataset::has_column(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t PanelDataset::index_of(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        throw InvalidArgument("unknown panel column: " + name);
    }
    return static_cast<std::size_t>(it - names_.begin());
}

const std::vector<double>& PanelDataset::column(const std::string& name) const {
    return columns_[index_of(name)];
}

std::vector<double>& PanelDataset::column(const std::string& name) {
    return columns_[index_of(name)];
}

PanelDataset PanelDataset::select(std::span<const std::size_t> rows) const {
    PanelDataset out(dependent_name_, names_);
    std::vector<double> values(names_.size());
    for (std::size_t i : rows) {
        detail::require(i < this->rows(), "row index out of range");
        for (std::size_t k = 0; k < names_.size(); ++k) {
            values[k] = columns_[k][i];
        }
        out.add_row(groups_[i], times_[i], dependent_[i], values, clusters_[i]);
    }
    return out;
}

PanelDataset PanelDataset::complete_cases(std::span<const std::string> names) const {
    std::vector<std::size_t> cols;
    if (names.empty()) {
        cols.resize(names_.size());
        for (std::size_t k = 0; k < cols.size(); ++k) {
            cols[k] = k;
        }
    } else {
        for (const auto& n : names) {
            cols.push_back(index_of(n));
        }
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < rows(); ++i) {
        bool ok = std::isfinite(dependent_[i]);
        for (std::size_t k : cols) {
            ok = ok && std::isfinite(columns_[k][i]);
        }
        if (ok) {
            keep.push_back(i);
        }
    }
    return select(keep);
}

void PanelDataset::validate() const {
    for (const auto& c : columns_) {
        detail::require(c.size() == rows(), "panel column length mismatch");
    }
    std::set<std::pair<std::string, std::string>> keys;
    for (std::size_t i = 0; i < rows(); ++i) {
        if (!keys.emplace(groups_[i], times_[i]).second) {
            throw InvalidArgument("duplicate panel key (" + groups_[i] + ", " + times_[i] + ")");
        }
    }
}

MatrixXd PanelDataset::design(std::span<const std::string> names, bool intercept) const {
    const auto offset = static_cast<Eigen::Index>(intercept ? 1 : 0);
    MatrixXd x(static_cast<Eigen::Index>(rows()), offset + static_cast<Eigen::Index>(names.size()));
    if (intercept) {
        x.col(0).setOnes();
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto& c = column(names[k]);
        x.col(offset + static_cast<Eigen::Index>(k)) =
            Eigen::Map<const VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    }
    return x;
}

VectorXd PanelDataset::response() const {
    return Eigen::Map<const VectorXd>(dependent_.data(), static_cast<Eigen::Index>(rows()));
}

namespace {

std::vector<std::size_t> level_codes(const std::vector<std::string>& ids, std::size_t& n_levels) {
    std::unordered_map<std::string, std::size_t> code;
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        out.push_back(code.try_emplace(id, code.size()).first->second);
    }
    n_levels = code.size();
    return out;
}

// Subtracts level means in place; returns the largest adjustment made.
double demean(std::vector<double>& v, const std::vector<std::size_t>& codes, std::size_t levels) {
    std::vector<double> sum(levels, 0.0);
    std::vector<double> count(levels, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        sum[codes[i]] += v[i];
        count[codes[i]] += 1.0;
    }
    double largest = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double m = sum[codes[i]] / count[codes[i]];
        v[i] -= m;
        largest = std::max(largest, std::abs(m));
    }
    return largest;
}

struct LeastSquares {
    VectorXd beta;
    MatrixXd bread;  // (X'X)^{-1}
};

LeastSquares solve_least_squares(const MatrixXd& x, const VectorXd& y,
                                 const std::vector<std::string>& names) {
    const auto n = x.rows();
    const auto k = x.cols();
    if (n <= k) {
        throw InvalidArgument("need more observations (" + std::to_string(n) +
                              ") than parameters (" + std::to_string(k) + ")");
    }
    // Scale columns so the rank threshold is relative to each column's size.
    VectorXd scale = x.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < k; ++j) {
        if (scale(j) == 0.0) {
            throw NumericalError("design matrix is rank deficient; collinear columns: " +
                                 names[static_cast<std::size_t>(j)]);
        }
    }
    const MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<MatrixXd> qr(xs);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        std::string cols;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < k; ++j) {
            cols += (cols.empty() ? "" : ", ") + names[static_cast<std::size_t>(perm(j))];
        }
        throw NumericalError("design matrix is rank deficient; collinear columns: " + cols);
    }
    LeastSquares out;
    out.beta = qr.solve(y).cwiseQuotient(scale);

    const MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(k, k));
    const MatrixXd scaled_bread = r_inv * r_inv.transpose();
    const auto p = qr.colsPermutation();
    const MatrixXd unpermuted = p * scaled_bread * p.transpose();
    out.bread = scale.cwiseInverse().asDiagonal() * unpermuted * scale.cwiseInverse().asDiagonal();
    return out;
}

double sum_sq_total(const VectorXd& y, bool centered) {
    if (!centered) {
        return y.squaredNorm();
    }
    return (y.array() - y.mean()).matrix().squaredNorm();
}

// Fills statistics and covariance for a fit whose coefficients are known.
FitResult finish_fit(std::vector<std::string> names, const MatrixXd& x_cov, VectorXd beta,
                     const MatrixXd& bread, VectorXd residuals, const VectorXd& y,
                     bool intercept, std::size_t absorbed, CovarianceType cov_type,
                     const std::vector<std::string>& clusters) {
    FitResult fit;
    const auto n = static_cast<std::size_t>(y.size());
    const auto k = static_cast<std::size_t>(beta.size());
    const std::size_t df_resid = n > k + absorbed ? n - k - absorbed : 0;
    if (df_resid == 0) {
        throw InvalidArgument("no residual degrees of freedom");
    }

    fit.names = std::move(names);
    fit.n_obs = n;
    fit.covariance_type = cov_type;

    const bool centered = intercept || absorbed > 0;
    const double ssr = residuals.squaredNorm();
    const double sst = sum_sq_total(y, centered);
    fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
    const double base = centered ? 1.0 : 0.0;
    fit.adj_r_squared = 1.0 - (1.0 - fit.r_squared) * (static_cast<double>(n) - base) /
                                  static_cast<double>(df_resid);
    const std::size_t slopes = intercept ? k - 1 : k;
    if (slopes > 0 && ssr > 0.0) {
        fit.f_statistic = ((sst - ssr) / static_cast<double>(slopes)) /
                          (ssr / static_cast<double>(df_resid));
    }

    switch (cov_type) {
        case CovarianceType::Classical:
            fit.covariance = bread * (ssr / static_cast<double>(df_resid));
            break;
        case CovarianceType::HC1: {
            MatrixXd meat = x_cov.transpose() * residuals.array().square().matrix().asDiagonal() * x_cov;
            fit.covariance = bread * meat * bread *
                             (static_cast<double>(n) / static_cast<double>(n - k));
            break;
        }
        case CovarianceType::Cluster: {
            fit.covariance = cluster_robust_cov(x_cov, residuals, clusters, bread, k);
            std::set<std::string> distinct(clusters.begin(), clusters.end());
            fit.n_clusters = distinct.size();
            break;
        }
    }
    fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose());
    fit.coefficients = std::move(beta);
    fit.residuals = std::move(residuals);
    return fit;
}

std::vector<std::string> with_intercept(const std::vector<std::string>& names, bool intercept) {
    std::vector<std::string> out;
    if (intercept) {
        out.emplace_back("(intercept)");
    }
    out.insert(out.end(), names.begin(), names.end());
    return out;
}

}  // namespace

std::size_t absorbed_levels(const PanelDataset& panel, FixedEffects dims) {
    std::size_t levels = 0;
    std::size_t n = 0;
    if (dims.group) {
        level_codes(panel.groups(), n);
        levels += n;
    }
    if (dims.time) {
        level_codes(panel.times(), n);
        levels += n;
    }
    // Two-way effects share one normalization.
    if (dims.group && dims.time && levels > 0) {
        levels -= 1;
    }
    return levels;
}

PanelDataset within_transform(const PanelDataset& panel, FixedEffects dims,
                              const WithinOptions& opts) {
    detail::require(panel.rows() > 0, "within_transform: empty panel");
    PanelDataset out = panel.complete_cases();
    detail::require(out.rows() > 0, "within_transform: no complete rows");
    if (!dims.group && !dims.time) {
        return out;
    }

    std::size_t n_groups = 0;
    std::size_t n_times = 0;
    const auto group_codes = level_codes(out.groups(), n_groups);
    const auto time_codes = level_codes(out.times(), n_times);

    auto transform = [&](std::vector<double>& v) {
        if (dims.group != dims.time) {
            demean(v, dims.group ? group_codes : time_codes, dims.group ? n_groups : n_times);
            return;
        }
        for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
            const double a = demean(v, group_codes, n_groups);
            const double b = demean(v, time_codes, n_times);
            if (std::max(a, b) < opts.tolerance) {
                break;
            }
        }
    };

    transform(out.dependent());
    for (const auto& name : out.column_names()) {
        transform(out.column(name));
    }
    return out;
}

Eigen::MatrixXd cluster_robust_cov(const MatrixXd& x, const VectorXd& residuals,
                                   std::span<const std::string> cluster_ids, const MatrixXd& bread,
                                   std::size_t n_params) {
    const auto n = static_cast<std::size_t>(x.rows());
    detail::require(cluster_ids.size() == n && static_cast<std::size_t>(residuals.size()) == n,
                    "cluster ids and residuals must match the design rows");

    std::map<std::string_view, VectorXd> scores;
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, fresh] = scores.try_emplace(cluster_ids[i], VectorXd::Zero(x.cols()));
        it->second += x.row(static_cast<Eigen::Index>(i)).transpose() *
                      residuals(static_cast<Eigen::Index>(i));
    }
    const std::size_t g = scores.size();
    if (g < 2) {
        throw InvalidArgument("cluster-robust covariance needs at least 2 clusters");
    }
    detail::require(n > n_params, "cluster-robust covariance needs n > k");

    MatrixXd meat = MatrixXd::Zero(x.cols(), x.cols());
    for (const auto& [id, s] : scores) {
        meat.noalias() += s * s.transpose();
    }
    const double correction = static_cast<double>(g) / static_cast<double>(g - 1) *
                              static_cast<double>(n - 1) / static_cast<double>(n - n_params);
    return correction * bread * meat * bread;
}

FitResult ols(const PanelDataset& panel, const OlsSpec& spec) {
    const PanelDataset data = panel.complete_cases(spec.regressors);
    const MatrixXd x = data.design(spec.regressors, spec.intercept);
    const VectorXd y = data.response();
    auto names = with_intercept(spec.regressors, spec.intercept);

    LeastSquares ls = solve_least_squares(x, y, names);
    VectorXd resid = y - x * ls.beta;
    return finish_fit(std::move(names), x, std::move(ls.beta), ls.bread, std::move(resid), y,
                      spec.intercept, spec.absorbed_dof, spec.covariance, data.clusters());
}

IvResult tsls(const PanelDataset& panel, const IvSpec& spec) {
    detail::require(!spec.endogenous.empty(), "tsls needs at least one endogenous regressor");
    if (spec.instruments.size() < spec.endogenous.size()) {
        throw InvalidArgument("tsls under-identified: " + std::to_string(spec.instruments.size()) +
                              " instruments for " + std::to_string(spec.endogenous.size()) +
                              " endogenous regressors");
    }

    std::vector<std::string> used = spec.endogenous;
    used.insert(used.end(), spec.instruments.begin(), spec.instruments.end());
    used.insert(used.end(), spec.exogenous.begin(), spec.exogenous.end());
    const PanelDataset data = panel.complete_cases(used);

    std::vector<std::string> z_names = spec.exogenous;
    z_names.insert(z_names.end(), spec.instruments.begin(), spec.instruments.end());
    const MatrixXd z = data.design(z_names, spec.intercept);
    const MatrixXd z_exog = data.design(spec.exogenous, spec.intercept);
    const VectorXd y = data.response();
    const auto n = static_cast<std::size_t>(y.size());

    IvResult out;
    const auto z_labels = with_intercept(z_names, spec.intercept);
    const LeastSquares z_ls = solve_least_squares(z, VectorXd::Zero(z.rows()), z_labels);

    // First stages: each endogenous regressor on all instruments.
    MatrixXd fitted(z.rows(), static_cast<Eigen::Index>(spec.endogenous.size()));
    for (std::size_t e = 0; e < spec.endogenous.size(); ++e) {
        const auto& c = data.column(spec.endogenous[e]);
        const VectorXd d = Eigen::Map<const VectorXd>(c.data(), static_cast<Eigen::Index>(n));
        const VectorXd pi = z_ls.bread * (z.transpose() * d);
        VectorXd resid = d - z * pi;
        fitted.col(static_cast<Eigen::Index>(e)) = z * pi;

        // Partial F on the excluded instruments against the exogenous-only fit.
        double ssr_restricted = d.squaredNorm();
        if (z_exog.cols() > 0) {
            const VectorXd g = z_exog.colPivHouseholderQr().solve(d);
            ssr_restricted = (d - z_exog * g).squaredNorm();
        }
        const double ssr = resid.squaredNorm();
        const double q = static_cast<double>(spec.instruments.size());
        const double df = static_cast<double>(n - static_cast<std::size_t>(z.cols()) - spec.absorbed_dof);
        out.first_stage_f.push_back(ssr > 0.0 ? ((ssr_restricted - ssr) / q) / (ssr / df)
                                              : std::numeric_limits<double>::infinity());

        out.first_stage.push_back(finish_fit(z_labels, z, pi, z_ls.bread, std::move(resid), d,
                                             spec.intercept, spec.absorbed_dof, spec.covariance,
                                             data.clusters()));
    }

    // Second stage on [intercept, endogenous-hat, exogenous].
    std::vector<std::string> x_names = spec.endogenous;
    x_names.insert(x_names.end(), spec.exogenous.begin(), spec.exogenous.end());
    const MatrixXd x = data.design(x_names, spec.intercept);
    MatrixXd x_hat = x;
    const Eigen::Index off = spec.intercept ? 1 : 0;
    x_hat.middleCols(off, fitted.cols()) = fitted;

    auto labels = with_intercept(x_names, spec.intercept);
    LeastSquares ls = solve_least_squares(x_hat, y, labels);
    VectorXd structural = y - x * ls.beta;

    // Sargan-style score: structural residuals on every instrument.
    const VectorXd gamma = z_ls.bread * (z.transpose() * structural);
    const double ssr_aux = (structural - z * gamma).squaredNorm();
    const double sst_aux = sum_sq_total(structural, spec.intercept || spec.absorbed_dof > 0);
    const double r2_aux = sst_aux > 0.0 ? std::max(0.0, 1.0 - ssr_aux / sst_aux) : 0.0;
    out.j_statistic = static_cast<double>(n) * r2_aux;
    out.overid_dof = spec.instruments.size() - spec.endogenous.size();

    out.second_stage = finish_fit(std::move(labels), x_hat, std::move(ls.beta), ls.bread,
                                  std::move(structural), y, spec.intercept, spec.absorbed_dof,
                                  spec.covariance, data.clusters());
    return out;
}

std::size_t FitResult::index(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw InvalidArgument("no coefficient named " + name);
    }
    return static_cast<std::size_t>(it - names.begin());
}

double FitResult::coef(const std::string& name) const {
    return coefficients(static_cast<Eigen::Index>(index(name)));
}

double FitResult::se(const std::string& name) const {
    const auto i = static_cast<Eigen::Index>(index(name));
    return std::sqrt(covariance(i, i));
}

std::string to_string(CovarianceType type) {
    switch (type) {
        case CovarianceType::Classical: return "classical";
        case CovarianceType::HC1: return "hc1";
        case CovarianceType::Cluster: return "cluster_cr1";
    }
    return "?";
}

}  // namespace hypedyn::econ
