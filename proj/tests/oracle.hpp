#pragma once

// Brute-force reference implementations shared by the unit tests and the
// acceptance runner. They take the slow, obvious route on purpose.

#include "hypedyn/panel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// (X'X)^{-1} by explicit normal equations.
inline MatrixXd normal_inverse(const MatrixXd& x) {
    MatrixXd xtx = x.transpose() * x;
    return xtx.ldlt().solve(MatrixXd::Identity(xtx.rows(), xtx.cols()));
}

inline VectorXd normal_beta(const MatrixXd& x, const VectorXd& y) {
    return normal_inverse(x) * (x.transpose() * y);
}

// CR1: loop over clusters, outer products of score sums.
inline MatrixXd cluster_sandwich(const MatrixXd& x, const VectorXd& u, const MatrixXd& bread,
                                 const std::vector<std::string>& clusters, double k) {
    std::map<std::string, VectorXd> score;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        auto it = score.find(clusters[i]);
        if (it == score.end()) it = score.emplace(clusters[i], VectorXd::Zero(x.cols())).first;
        for (Eigen::Index j = 0; j < x.cols(); ++j) it->second(j) += x(i, j) * u(i);
    }
    MatrixXd meat = MatrixXd::Zero(x.cols(), x.cols());
    for (auto& [g, s] : score) meat += s * s.transpose();
    double n = double(x.rows()), g = double(score.size());
    return g / (g - 1) * (n - 1) / (n - k) * bread * meat * bread;
}

// Dummy-variable design: slopes first, then one column per level
// (the first time level is dropped when both dimensions are present).
inline MatrixXd lsdv_design(const hypedyn::econ::PanelDataset& p,
                            const std::vector<std::string>& names, bool group, bool time) {
    std::map<std::string, int> gl, tl;
    for (const auto& g : p.groups()) gl.emplace(g, 0);
    for (const auto& t : p.times()) tl.emplace(t, 0);
    int c = 0;
    for (auto& [k, v] : gl) v = c++;
    c = 0;
    for (auto& [k, v] : tl) v = c++;
    Eigen::Index cols = Eigen::Index(names.size()) + (group ? Eigen::Index(gl.size()) : 0) +
                        (time ? Eigen::Index(tl.size()) - (group ? 1 : 0) : 0);
    if (!group && !time) cols += 1;
    MatrixXd x = MatrixXd::Zero(Eigen::Index(p.rows()), cols);
    for (std::size_t i = 0; i < p.rows(); ++i) {
        Eigen::Index j = 0;
        for (const auto& n : names) x(Eigen::Index(i), j++) = p.column(n)[i];
        if (!group && !time) x(Eigen::Index(i), j) = 1.0;
        if (group) x(Eigen::Index(i), j + gl[p.groups()[i]]) = 1.0;
        if (group) j += Eigen::Index(gl.size());
        if (time) {
            int t = tl[p.times()[i]];
            if (!group) x(Eigen::Index(i), j + t) = 1.0;
            else if (t > 0) x(Eigen::Index(i), j + t - 1) = 1.0;
        }
    }
    return x;
}

struct RandomPanel {
    hypedyn::econ::PanelDataset data;
    std::vector<std::string> regressors;
};

// Unbalanced panel with group and time effects in y and x.
inline RandomPanel random_panel(std::mt19937_64& rng, std::size_t k) {
    std::uniform_int_distribution<int> ng(6, 15), nt(4, 9);
    std::normal_distribution<double> z(0, 1);
    std::bernoulli_distribution keep(0.85);
    int groups = ng(rng), times = nt(rng);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < k; ++j) names.push_back("x" + std::to_string(j));
    hypedyn::econ::PanelDataset p("y", names);
    std::vector<double> ge(groups), te(times);
    for (auto& v : ge) v = z(rng);
    for (auto& v : te) v = z(rng);
    std::vector<double> row(k);
    for (int g = 0; g < groups; ++g) {
        for (int t = 0; t < times; ++t) {
            if (!keep(rng)) continue;
            double y = ge[g] + te[t];
            for (std::size_t j = 0; j < k; ++j) {
                row[j] = z(rng) + 0.5 * ge[g] - 0.3 * te[t];
                y += (0.5 + double(j)) * row[j];
            }
            y += z(rng) * (1.0 + 0.5 * std::abs(row[0]));
            p.add_row("g" + std::to_string(g), "t" + std::to_string(t), y, row,
                      "c" + std::to_string(g / 2));
        }
    }
    return {std::move(p), names};
}

inline double max_abs_diff(const MatrixXd& a, const MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace oracle
