#include "hypedyn/report.hpp"

#include <cmath>

namespace hypedyn::econ {

namespace {

// JSON has no NaN or infinity; emit null instead.
nlohmann::json number(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const FitResult& fit) {
    nlohmann::json coefs = nlohmann::json::array();
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double est = fit.coefficients(k);
        const double se = std::sqrt(fit.covariance(k, k));
        coefs.push_back({{"name", fit.names[i]},
                         {"estimate", number(est)},
                         {"se", number(se)},
                         {"t", number(se > 0.0 ? est / se : std::nan(""))}});
    }
    nlohmann::json out{{"coefficients", coefs},
                       {"covariance", to_string(fit.covariance_type)},
                       {"r_squared", number(fit.r_squared)},
                       {"adj_r_squared", number(fit.adj_r_squared)},
                       {"f_statistic", number(fit.f_statistic)},
                       {"n_obs", fit.n_obs}};
    if (fit.covariance_type == CovarianceType::Cluster) {
        out["n_clusters"] = fit.n_clusters;
    }
    return out;
}

nlohmann::json to_json(const IvResult& iv) {
    nlohmann::json first = nlohmann::json::array();
    for (std::size_t i = 0; i < iv.first_stage.size(); ++i) {
        auto stage = to_json(iv.first_stage[i]);
        stage["excluded_instrument_f"] = number(iv.first_stage_f[i]);
        first.push_back(std::move(stage));
    }
    return {{"second_stage", to_json(iv.second_stage)},
            {"first_stage", first},
            {"j_statistic", number(iv.j_statistic)},
            {"overid_dof", iv.overid_dof}};
}

nlohmann::json to_json(const ImpactResult& impact) {
    nlohmann::json eqs = nlohmann::json::array();
    for (const auto& eq : impact.equations) {
        nlohmann::json e{{"outcome", eq.outcome},
                         {"regressors", eq.regressors},
                         {"reduced_form", to_json(eq.reduced_form)}};
        if (eq.iv) {
            e["iv"] = to_json(*eq.iv);
        }
        eqs.push_back(std::move(e));
    }
    return {{"first_stage",
             {{"contagion", to_json(impact.contagion_stage)},
              {"bull_log_odds", to_json(impact.bull_stage)},
              {"bear_log_odds", to_json(impact.bear_stage)}}},
            {"equations", eqs}};
}

nlohmann::json to_json(const PeerEstimates& peers) {
    nlohmann::json out{{"frequent_posters",
                        {{"rows", peers.frequent_rows},
                         {"ols", to_json(peers.frequent_ols)},
                         {"iv", to_json(peers.frequent_iv)}}},
                       {"placebo", {{"ols", to_json(peers.placebo_ols)}}}};
    if (peers.placebo_iv) {
        out["placebo"]["iv"] = to_json(*peers.placebo_iv);
    }
    if (peers.network_iv) {
        out["commenter_network"] = {{"rows", peers.network_rows}, {"iv", to_json(*peers.network_iv)}};
    }
    return out;
}

}  // namespace hypedyn::econ
