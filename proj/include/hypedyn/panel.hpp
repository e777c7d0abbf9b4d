#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hypedyn::econ {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Long-format panel: one row per (group, time) observation with a
/// dependent variable and named numeric columns. NaN marks a missing value.
class PanelDataset {
public:
    PanelDataset() = default;
    PanelDataset(std::string dependent_name, std::vector<std::string> column_names);

    void add_row(std::string group, std::string time, double dependent,
                 std::span<const double> values, std::string cluster = {});

    /// Appends a column; `values` must have one entry per existing row.
    void add_column(std::string name, std::vector<double> values);

    [[nodiscard]] std::size_t rows() const { return dependent_.size(); }
    [[nodiscard]] const std::string& dependent_name() const { return dependent_name_; }
    [[nodiscard]] const std::vector<std::string>& column_names() const { return names_; }
    [[nodiscard]] bool has_column(const std::string& name) const;
    [[nodiscard]] const std::vector<double>& column(const std::string& name) const;
    [[nodiscard]] std::vector<double>& column(const std::string& name);
    [[nodiscard]] const std::vector<double>& dependent() const { return dependent_; }
    [[nodiscard]] std::vector<double>& dependent() { return dependent_; }
    [[nodiscard]] const std::vector<std::string>& groups() const { return groups_; }
    [[nodiscard]] const std::vector<std::string>& times() const { return times_; }
    [[nodiscard]] const std::vector<std::string>& clusters() const { return clusters_; }

    /// Rows where the dependent and every listed column are finite
    /// (all columns when `names` is empty).
    [[nodiscard]] PanelDataset complete_cases(std::span<const std::string> names = {}) const;

    /// Row subset in the given order.
    [[nodiscard]] PanelDataset select(std::span<const std::size_t> rows) const;

    /// Throws on duplicate (group, time) keys or inconsistent column lengths.
    void validate() const;

    /// n x k design built from the named columns, optionally with a leading intercept.
    [[nodiscard]] Eigen::MatrixXd design(std::span<const std::string> names, bool intercept) const;
    [[nodiscard]] Eigen::VectorXd response() const;

private:
    std::size_t index_of(const std::string& name) const;

    std::string dependent_name_ = "y";
    std::vector<std::string> names_;
    std::vector<std::string> groups_;
    std::vector<std::string> times_;
    std::vector<std::string> clusters_;
    std::vector<double> dependent_;
    std::vector<std::vector<double>> columns_;
};

struct FixedEffects {
    bool group = false;
    bool time = false;
};

struct WithinOptions {
    std::size_t max_sweeps = 50;
    double tolerance = 1e-12;
};

/// Demeans the dependent variable and every column within each requested
/// dimension. Two-way effects use alternating projections. Rows with a
/// missing value are dropped first.
PanelDataset within_transform(const PanelDataset& panel, FixedEffects dims,
                              const WithinOptions& opts = {});

/// Number of fixed-effect levels absorbed by `within_transform` (for degrees of freedom).
std::size_t absorbed_levels(const PanelDataset& panel, FixedEffects dims);

enum class CovarianceType { Classical, HC1, Cluster };

struct OlsSpec {
    std::vector<std::string> regressors;
    bool intercept = true;
    CovarianceType covariance = CovarianceType::Cluster;
    std::size_t absorbed_dof = 0;  ///< fixed-effect parameters removed by demeaning
};

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd covariance;
    Eigen::VectorXd residuals;
    double r_squared = 0.0;
    double adj_r_squared = 0.0;
    double f_statistic = 0.0;
    std::size_t n_obs = 0;
    std::size_t n_clusters = 0;
    CovarianceType covariance_type = CovarianceType::Cluster;

    [[nodiscard]] std::size_t index(const std::string& name) const;
    [[nodiscard]] double coef(const std::string& name) const;
    [[nodiscard]] double se(const std::string& name) const;
};

struct IvSpec {
    std::vector<std::string> endogenous;
    std::vector<std::string> instruments;  ///< excluded instruments
    std::vector<std::string> exogenous;
    bool intercept = true;
    CovarianceType covariance = CovarianceType::Cluster;
    std::size_t absorbed_dof = 0;
};

struct IvResult {
    std::vector<FitResult> first_stage;
    std::vector<double> first_stage_f;  ///< F on the excluded instruments, per endogenous regressor
    FitResult second_stage;
    double j_statistic = 0.0;  ///< n R^2 of structural residuals on all instruments
    std::size_t overid_dof = 0;
};

/// Least squares with rank check (pivoted QR, tolerance 1e-10). Throws
/// NumericalError naming the collinear columns.
FitResult ols(const PanelDataset& panel, const OlsSpec& spec);

/// CR1 sandwich: bread * (sum_g X_g' u_g u_g' X_g) * bread scaled by
/// G / (G - 1) * (n - 1) / (n - k).
Eigen::MatrixXd cluster_robust_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals,
                                   std::span<const std::string> cluster_ids,
                                   const Eigen::MatrixXd& bread, std::size_t n_params);

/// Two-stage least squares.
IvResult tsls(const PanelDataset& panel, const IvSpec& spec);

std::string to_string(CovarianceType type);

}  // namespace hypedyn::econ
