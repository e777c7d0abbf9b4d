// Command-line front end. Every subcommand writes its data to --out (or
// stdout) and a JSON run manifest to stdout (or stderr when data goes to stdout).

#include "hypedyn/dynamics.hpp"
#include "hypedyn/error.hpp"
#include "hypedyn/estimate.hpp"
#include "hypedyn/matching.hpp"
#include "hypedyn/panel_io.hpp"
#include "hypedyn/peers.hpp"
#include "hypedyn/report.hpp"
#include "hypedyn/scans.hpp"
#include "hypedyn/sir.hpp"
#include "hypedyn/stability.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using nlohmann::json;
namespace hd = hypedyn;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
    std::uint64_t seed = 0;
    std::string out;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("HYPEDYN_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw hd::InvalidArgument(std::string("HYPEDYN_SEED is not an unsigned integer: ") + env);
        }
    }
    return 0;
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "RNG seed (default: $HYPEDYN_SEED or 0)");
    cmd->add_option("--out", c.out, "output file (default: stdout)");
}

json versions() {
    return {{"hypedyn", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                          "." + std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__},
            {"cxx_standard", __cplusplus}};
}

// Runs `body` with the data stream and writes the manifest afterwards.
int run(const std::string& name, const Common& c, const json& inputs,
        const std::function<json(std::ostream&)>& body) {
    std::ofstream file;
    std::ostream* data = &std::cout;
    if (!c.out.empty()) {
        file.open(c.out);
        if (!file) {
            throw hd::InvalidArgument("cannot write " + c.out);
        }
        data = &file;
    }
    json results = body(*data);
    data->flush();
    json manifest{{"command", name},
                  {"inputs", inputs},
                  {"seed", c.seed},
                  {"output", c.out.empty() ? "stdout" : c.out},
                  {"versions", versions()}};
    if (!results.is_null()) {
        manifest["results"] = std::move(results);
    }
    (c.out.empty() ? std::cerr : std::cout) << manifest.dump(2) << '\n';
    return 0;
}

json params_json(const hd::ModelParams& p) {
    return {{"alpha", p.alpha},
            {"beta", p.beta},
            {"gamma", p.gamma},
            {"lambda", p.lambda},
            {"capacity", p.capacity}};
}

void add_model(CLI::App* cmd, hd::ModelParams& p, bool capacity_required = true) {
    cmd->add_option("--alpha", p.alpha, "consensus strength")->required();
    cmd->add_option("--beta", p.beta, "trend following")->capture_default_str();
    cmd->add_option("--gamma", p.gamma, "risk aversion (no effect on the map)")->capture_default_str();
    cmd->add_option("--lambda", p.lambda, "decision-noise scale")->capture_default_str();
    auto* c = cmd->add_option("--capacity", p.capacity, "capacity C = MN/(pQ)");
    if (capacity_required) {
        c->required();
    }
}

json complex_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

struct PanelInputs {
    std::string submissions, comments, market, calendar, weekly, benchmark;
    std::size_t threshold = 31;
    std::string denominator = "authors";
    bool drop_bots = true;
};

void add_panel_inputs(CLI::App* cmd, PanelInputs& in) {
    cmd->add_option("--submissions", in.submissions, "submissions CSV");
    cmd->add_option("--comments", in.comments, "comments CSV");
    cmd->add_option("--market", in.market, "daily market CSV");
    cmd->add_option("--calendar", in.calendar, "trading calendar CSV");
    cmd->add_option("--weekly", in.weekly, "pre-aggregated weekly ticker CSV (instead of raw inputs)");
    cmd->add_option("--benchmark", in.benchmark, "pre-aggregated weekly benchmark CSV");
    cmd->add_option("--threshold", in.threshold, "tickers with fewer submissions form the benchmark")
        ->capture_default_str();
    cmd->add_option("--denominator", in.denominator, "active-user count")
        ->check(CLI::IsMember({"authors", "authors+commenters"}))
        ->capture_default_str();
    cmd->add_flag("!--keep-bots", in.drop_bots, "keep authors above 100 posts per month");
}

json panel_inputs_json(const PanelInputs& in) {
    return {{"submissions", in.submissions}, {"comments", in.comments},   {"market", in.market},
            {"calendar", in.calendar},       {"weekly", in.weekly},       {"benchmark", in.benchmark},
            {"threshold", in.threshold},     {"denominator", in.denominator}, {"drop_bots", in.drop_bots}};
}

hd::io::WeeklyPanel load_weekly(const PanelInputs& in) {
    hd::io::WeeklyPanel panel;
    if (!in.weekly.empty()) {
        if (in.benchmark.empty()) {
            throw hd::InvalidArgument("--weekly needs --benchmark");
        }
        std::ifstream w(in.weekly), b(in.benchmark);
        if (!w || !b) {
            throw hd::InvalidArgument("cannot open weekly/benchmark input");
        }
        panel.rows = hd::io::read_weekly(w, in.weekly);
        panel.benchmark = hd::io::read_benchmark(b, in.benchmark);
        return panel;
    }
    if (in.submissions.empty()) {
        throw hd::InvalidArgument("need --submissions (and usually --market) or --weekly/--benchmark");
    }
    auto subs = hd::io::load_submissions(in.submissions);
    std::vector<hd::CommentRecord> comments;
    if (!in.comments.empty()) {
        comments = hd::io::load_comments(in.comments);
    }
    std::vector<hd::MarketRecord> market;
    if (!in.market.empty()) {
        market = hd::io::load_market(in.market);
    }
    if (in.drop_bots) {
        auto f = hd::io::filter_bots(subs, comments);
        subs = std::move(f.submissions);
        comments = std::move(f.comments);
    }
    std::optional<hd::io::TradingCalendar> cal;
    if (!in.calendar.empty()) {
        cal.emplace(hd::io::load_calendar(in.calendar));
    }
    hd::io::AggregateOptions opts;
    opts.benchmark_threshold = in.threshold;
    opts.denominator = in.denominator == "authors" ? hd::io::Denominator::Authors
                                                   : hd::io::Denominator::AuthorsAndCommenters;
    opts.calendar = cal ? &*cal : nullptr;
    return hd::io::weekly_aggregate(subs, market, comments, opts);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) {
        throw hd::InvalidArgument("grid needs at least one point");
    }
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return g;
}

std::string fmt(double x) {
    std::string s = hd::io::format_double(x);
    return s.empty() ? "nan" : s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hype-investor dynamics, contagion and estimation toolkit", "hypedyn"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;
    int exit_code = 0;
    std::function<int()> action;

    // simulate
    hd::ModelParams sim_p;
    double phi0 = 0.0, r0 = 0.0, sim_noise = 0.0;
    std::size_t sim_steps = 1000;
    auto* sim = app.add_subcommand("simulate", "iterate the sentiment-return map; CSV t,phi,r");
    add_model(sim, sim_p);
    sim->add_option("--phi0", phi0, "initial sentiment")->capture_default_str();
    sim->add_option("--r0", r0, "initial return")->capture_default_str();
    sim->add_option("--steps", sim_steps, "iterations")->capture_default_str();
    sim->add_option("--noise", sim_noise, "std of additive return noise")->capture_default_str();
    add_common(sim, common);
    sim->callback([&] {
        action = [&] {
            json inputs = params_json(sim_p);
            inputs.update({{"phi0", phi0}, {"r0", r0}, {"steps", sim_steps}, {"noise", sim_noise}});
            return run("simulate", common, inputs, [&](std::ostream& os) {
                const auto path = hd::simulate(sim_p, {phi0, r0}, sim_steps, sim_noise, common.seed);
                os << "t,phi,r\n";
                for (std::size_t t = 0; t < path.size(); ++t) {
                    os << t << ',' << fmt(path[t].phi) << ',' << fmt(path[t].ret) << '\n';
                }
                return json{{"final_phi", path.back().phi}, {"final_r", path.back().ret}};
            });
        };
    });

    // stability
    hd::ModelParams st_p;
    st_p.beta = 1.0;
    auto* stab = app.add_subcommand("stability", "steady states, Jacobians, eigenvalues and region labels; JSON");
    add_model(stab, st_p);
    add_common(stab, common);
    stab->callback([&] {
        action = [&] {
            return run("stability", common, params_json(st_p), [&](std::ostream& os) {
                const hd::ModelParams n = st_p.normalized();
                json states = json::array();
                for (const auto& s : hd::steady_states(st_p)) {
                    const auto j = hd::jacobian_at(n, {s.phi, s.ret, s.kind});
                    const auto e = hd::eigenvalues(j);
                    json entry{{"phi", s.phi},
                               {"r", s.ret},
                               {"kind", std::string(hd::to_string(s.kind))},
                               {"trace", j.trace()},
                               {"determinant", j.determinant()},
                               {"eigenvalues", {complex_json(e.first), complex_json(e.second)}},
                               {"spectral_radius", e.spectral_radius()}};
                    try {
                        entry["class"] = std::string(hd::to_string(hd::classify(e)));
                    } catch (const hd::BoundaryCase&) {
                        entry["class"] = "boundary";
                    }
                    states.push_back(std::move(entry));
                }
                json doc{{"normalized", params_json(n)}, {"steady_states", states}};
                try {
                    const auto labels = hd::region_label(st_p);
                    doc["region"] = {{"zero", std::string(hd::to_string(labels.zero))}};
                    if (labels.nonzero) {
                        doc["region"]["nonzero"] = std::string(hd::to_string(*labels.nonzero));
                    }
                } catch (const hd::BoundaryCase&) {
                    doc["region"] = "boundary";
                }
                os << doc.dump(2) << '\n';
                return json{{"steady_state_count", states.size()}};
            });
        };
    });

    // regions
    double a_min = 0.05, a_max = 3.0, cbeta_max = 4.0;
    std::size_t a_steps = 60, scan_points = 4000;
    auto* reg = app.add_subcommand("regions", "stability-region boundaries in the (alpha, C*beta) plane; CSV");
    reg->add_option("--alpha-min", a_min)->capture_default_str();
    reg->add_option("--alpha-max", a_max)->capture_default_str();
    reg->add_option("--alpha-steps", a_steps)->capture_default_str();
    reg->add_option("--cbeta-max", cbeta_max)->capture_default_str();
    reg->add_option("--scan-points", scan_points, "bracketing grid for real-eigenvalue crossings")
        ->capture_default_str();
    bool region_map = false;
    std::size_t cbeta_steps = 80;
    reg->add_flag("--map", region_map, "label a grid instead: alpha,cbeta,zero_region,nonzero_region");
    reg->add_option("--cbeta-steps", cbeta_steps, "grid size along C*beta for --map")->capture_default_str();
    add_common(reg, common);
    reg->callback([&] {
        action = [&] {
            json inputs{{"alpha_min", a_min}, {"alpha_max", a_max}, {"alpha_steps", a_steps},
                        {"cbeta_max", cbeta_max}, {"scan_points", scan_points}, {"map", region_map},
                        {"cbeta_steps", cbeta_steps}};
            return run("regions", common, inputs, [&](std::ostream& os) {
                if (region_map) {
                    os << "alpha,cbeta,zero_region,nonzero_region\n";
                    std::size_t cells = 0;
                    for (double a : linspace(a_min, a_max, a_steps)) {
                        for (double cb : linspace(0.0, cbeta_max, cbeta_steps)) {
                            hd::ModelParams p;
                            p.alpha = a;
                            p.beta = 1.0;
                            p.capacity = cb;
                            os << fmt(a) << ',' << fmt(cb) << ',';
                            try {
                                const auto l = hd::region_label(p);
                                os << hd::to_string(l.zero) << ','
                                   << (l.nonzero ? std::string(hd::to_string(*l.nonzero)) : "") << '\n';
                            } catch (const hd::BoundaryCase&) {
                                os << "boundary,boundary\n";
                            }
                            ++cells;
                        }
                    }
                    return json{{"cells", cells}};
                }
                const auto grid = linspace(a_min, a_max, a_steps);
                const auto pts = hd::trace_region_boundaries(grid, cbeta_max, scan_points);
                os << "alpha,cbeta,kind,state\n";
                for (const auto& p : pts) {
                    os << fmt(p.alpha) << ',' << fmt(p.cbeta) << ',' << hd::to_string(p.kind) << ','
                       << (p.nonzero_state ? "nonzero" : "zero") << '\n';
                }
                return json{{"points", pts.size()}};
            });
        };
    });

    // phase
    hd::ModelParams ph_p;
    ph_p.beta = 1.0;
    hd::PhaseBox box;
    std::size_t grid_n = 15, ph_steps = 200;
    double ph_h = 0.05;
    std::vector<std::string> starts_raw;
    auto* phase = app.add_subcommand("phase", "vector field and RK4 trajectories of the continualized flow; CSV");
    add_model(phase, ph_p);
    phase->add_option("--r-min", box.r_min)->capture_default_str();
    phase->add_option("--r-max", box.r_max)->capture_default_str();
    phase->add_option("--phi-min", box.phi_min)->capture_default_str();
    phase->add_option("--phi-max", box.phi_max)->capture_default_str();
    phase->add_option("--grid", grid_n, "field lattice size per axis")->capture_default_str();
    phase->add_option("--start", starts_raw, "trajectory start r:phi (repeatable)");
    phase->add_option("--steps", ph_steps)->capture_default_str();
    phase->add_option("--step-size", ph_h, "RK4 step")->capture_default_str();
    add_common(phase, common);
    phase->callback([&] {
        action = [&] {
            std::vector<hd::MarketState> starts;
            for (const auto& s : starts_raw) {
                const auto colon = s.find(':');
                if (colon == std::string::npos) {
                    throw hd::InvalidArgument("--start expects r:phi, got " + s);
                }
                starts.push_back({hd::io::parse_double(s.substr(colon + 1)),
                                  hd::io::parse_double(s.substr(0, colon))});
            }
            json inputs = params_json(ph_p);
            inputs.update({{"box", {box.r_min, box.r_max, box.phi_min, box.phi_max}},
                           {"grid", grid_n}, {"starts", starts_raw}, {"steps", ph_steps}, {"step_size", ph_h}});
            return run("phase", common, inputs, [&](std::ostream& os) {
                const auto pp = hd::phase_portrait(ph_p, box, grid_n, starts, ph_steps, ph_h);
                os << "series,step,r,phi,dr,dphi\n";
                for (const auto& f : pp.field) {
                    os << "field,," << fmt(f.r) << ',' << fmt(f.phi) << ',' << fmt(f.dr) << ','
                       << fmt(f.dphi) << '\n';
                }
                for (std::size_t k = 0; k < pp.trajectories.size(); ++k) {
                    const auto& tr = pp.trajectories[k];
                    for (std::size_t t = 0; t < tr.size(); ++t) {
                        os << "trajectory" << k << ',' << t << ',' << fmt(tr[t].ret) << ','
                           << fmt(tr[t].phi) << ",,\n";
                    }
                }
                return json{{"field_points", pp.field.size()}, {"trajectories", pp.trajectories.size()}};
            });
        };
    });

    // bifurcate / volscan share a scan configuration.
    hd::ScanConfig scan;
    scan.fixed.beta = 1.0;
    std::string vary = "capacity";
    double g_min = 0.0, g_max = 2.0;
    std::size_t g_points = 50;
    double bif_noise = 0.0, vol_noise = 1e-3;
    auto add_scan = [&](CLI::App* cmd, double& noise) {
        cmd->add_option("--vary", vary, "scanned parameter")
            ->check(CLI::IsMember({"capacity", "alpha"}))
            ->capture_default_str();
        cmd->add_option("--min", g_min, "grid start")->capture_default_str();
        cmd->add_option("--max", g_max, "grid end")->capture_default_str();
        cmd->add_option("--points", g_points, "grid size")->capture_default_str();
        cmd->add_option("--alpha", scan.fixed.alpha, "fixed alpha")->capture_default_str();
        cmd->add_option("--beta", scan.fixed.beta)->capture_default_str();
        cmd->add_option("--lambda", scan.fixed.lambda)->capture_default_str();
        cmd->add_option("--capacity", scan.fixed.capacity, "fixed capacity")->capture_default_str();
        cmd->add_option("--runs", scan.n_init, "runs per grid value")->capture_default_str();
        cmd->add_option("--iters", scan.iters)->capture_default_str();
        cmd->add_option("--burn-in", scan.burn_in)->capture_default_str();
        cmd->add_option("--init-r-std", scan.init_r_std, "std of the random initial return")
            ->capture_default_str();
        cmd->add_option("--noise", noise, "std of additive return noise")->capture_default_str();
        add_common(cmd, common);
    };
    auto scan_inputs = [&] {
        return json{{"vary", vary},           {"min", g_min},          {"max", g_max},
                    {"points", g_points},     {"fixed", params_json(scan.fixed)},
                    {"runs", scan.n_init},    {"iters", scan.iters},   {"burn_in", scan.burn_in},
                    {"init_r_std", scan.init_r_std}, {"noise", scan.noise_std}};
    };
    auto prepare_scan = [&](double noise) {
        scan.noise_std = noise;
        scan.vary = vary == "alpha" ? hd::ScanAxis::Alpha : hd::ScanAxis::Capacity;
        scan.grid = linspace(g_min, g_max, g_points);
        scan.base_seed = common.seed;
    };

    auto* bif = app.add_subcommand("bifurcate", "final states over a parameter grid; CSV value,run,phi,r");
    add_scan(bif, bif_noise);
    bif->callback([&] {
        action = [&] {
            prepare_scan(bif_noise);
            return run("bifurcate", common, scan_inputs(), [&](std::ostream& os) {
                const auto pts = hd::bifurcation_scan(scan);
                os << "value,run,final_phi,final_r\n";
                for (const auto& p : pts) {
                    os << fmt(p.value) << ',' << p.run << ',' << fmt(p.final_phi) << ','
                       << fmt(p.final_ret) << '\n';
                }
                return json{{"rows", pts.size()}};
            });
        };
    });

    auto* vol = app.add_subcommand("volscan", "mean return volatility over a parameter grid; CSV value,mean_std");
    add_scan(vol, vol_noise);
    bool per_run = false;
    vol->add_flag("--per-run", per_run, "one row per run with its return std instead of the mean");
    vol->callback([&] {
        action = [&] {
            prepare_scan(vol_noise);
            return run("volscan", common, scan_inputs(), [&](std::ostream& os) {
                const auto v = hd::volatility_scan(scan);
                if (per_run) {
                    os << "value,run,final_phi,final_r,std_r\n";
                    for (const auto& p : v.runs) {
                        os << fmt(p.value) << ',' << p.run << ',' << fmt(p.final_phi) << ','
                           << fmt(p.final_ret) << ',' << fmt(p.std_ret.value_or(std::nan(""))) << '\n';
                    }
                } else {
                    os << "value,mean_std\n";
                    for (const auto& p : v.summary) {
                        os << fmt(p.value) << ',' << fmt(p.mean_std) << '\n';
                    }
                }
                return json{{"rows", v.summary.size()}};
            });
        };
    });

    // sir
    hd::sir::SirParams sp;
    double i0 = 1.0, horizon = 100.0, dt = 0.01;
    std::size_t stride = 10;
    auto* sirc = app.add_subcommand("sir", "integrate the interest-contagion SIR model; CSV t,V,A,B");
    sirc->add_option("--contagion", sp.contagion_rate, "contagion rate c")->required();
    sirc->add_option("--recovery", sp.recovery_rate, "recovery rate r")->required();
    sirc->add_option("--population", sp.population, "population N")->required();
    sirc->add_option("--initial-active", i0, "initial active A(0)")->capture_default_str();
    sirc->add_option("--horizon", horizon)->capture_default_str();
    sirc->add_option("--dt", dt)->capture_default_str();
    sirc->add_option("--stride", stride, "record every n-th step")->capture_default_str();
    add_common(sirc, common);
    sirc->callback([&] {
        action = [&] {
            json inputs{{"contagion", sp.contagion_rate}, {"recovery", sp.recovery_rate},
                        {"population", sp.population},    {"initial_active", i0},
                        {"horizon", horizon},             {"dt", dt},
                        {"stride", stride}};
            return run("sir", common, inputs, [&](std::ostream& os) {
                const auto path = hd::sir::integrate(sp, {sp.population - i0, i0, 0.0}, dt, horizon, stride);
                os << "t,V,A,B\n";
                for (const auto& s : path) {
                    os << fmt(s.t) << ',' << fmt(s.state.susceptible) << ',' << fmt(s.state.active) << ','
                       << fmt(s.state.recovered) << '\n';
                }
                const auto th = hd::sir::outbreak_threshold(sp, sp.population - i0);
                const auto fs = hd::sir::final_size(sp, i0);
                return json{{"r0", th.r0},
                            {"outbreak", th.outbreak},
                            {"final_recovered", fs.recovered},
                            {"super_threshold", fs.super_threshold}};
            });
        };
    });

    // aggregate
    PanelInputs agg_in;
    std::string agg_bench_out;
    auto* agg = app.add_subcommand("aggregate", "weekly ticker panel from raw CSVs; CSV");
    add_panel_inputs(agg, agg_in);
    agg->add_option("--benchmark-out", agg_bench_out, "write the weekly benchmark CSV here");
    add_common(agg, common);
    agg->callback([&] {
        action = [&] {
            return run("aggregate", common, panel_inputs_json(agg_in), [&](std::ostream& os) {
                const auto panel = load_weekly(agg_in);
                hd::io::write_weekly(os, panel.rows);
                if (!agg_bench_out.empty()) {
                    std::ofstream b(agg_bench_out);
                    if (!b) {
                        throw hd::InvalidArgument("cannot write " + agg_bench_out);
                    }
                    hd::io::write_benchmark(b, panel.benchmark);
                }
                return json{{"rows", panel.rows.size()}, {"weeks", panel.benchmark.size()}};
            });
        };
    });

    // estimate
    auto* est = app.add_subcommand("estimate", "panel regressions; JSON");
    est->require_subcommand(1);

    PanelInputs con_in;
    bool ticker_fe = false, week_fe = false;
    auto* con = est->add_subcommand("contagion", "log(a/s) on a(1-a), a, lagged return and variance");
    add_panel_inputs(con, con_in);
    con->add_flag("--ticker-fe", ticker_fe, "ticker fixed effects");
    con->add_flag("--week-fe", week_fe, "week fixed effects");
    add_common(con, common);
    con->callback([&] {
        action = [&] {
            json inputs = panel_inputs_json(con_in);
            inputs.update({{"ticker_fe", ticker_fe}, {"week_fe", week_fe}});
            return run("estimate contagion", common, inputs, [&](std::ostream& os) {
                const auto panel = load_weekly(con_in);
                const auto changes = hd::econ::weekly_change_panel(panel.rows, panel.benchmark);
                const auto fit = hd::econ::estimate_contagion(changes, {ticker_fe, week_fe});
                os << hd::econ::to_json(fit).dump(2) << '\n';
                return json{{"n_obs", fit.n_obs}};
            });
        };
    });

    PanelInputs imp_in;
    bool no_iv = false;
    auto* imp = est->add_subcommand("impact", "market impact of contagion and consensus with week effects");
    add_panel_inputs(imp, imp_in);
    imp->add_flag("--no-iv", no_iv, "reduced form only");
    add_common(imp, common);
    imp->callback([&] {
        action = [&] {
            json inputs = panel_inputs_json(imp_in);
            inputs["iv"] = !no_iv;
            return run("estimate impact", common, inputs, [&](std::ostream& os) {
                const auto panel = load_weekly(imp_in);
                const auto changes = hd::econ::weekly_change_panel(panel.rows, panel.benchmark);
                const auto res = hd::econ::estimate_impact(changes, {!no_iv});
                os << hd::econ::to_json(res).dump(2) << '\n';
                return json{{"equations", res.equations.size()}};
            });
        };
    });

    std::string peer_subs, peer_comments;
    auto* peer = est->add_subcommand("peers", "frequent-poster and commenter-network peer effects");
    peer->add_option("--submissions", peer_subs, "submissions CSV")->required();
    peer->add_option("--comments", peer_comments, "comments CSV");
    add_common(peer, common);
    peer->callback([&] {
        action = [&] {
            json inputs{{"submissions", peer_subs}, {"comments", peer_comments}};
            return run("estimate peers", common, inputs, [&](std::ostream& os) {
                const auto subs = hd::io::load_submissions(peer_subs);
                std::vector<hd::CommentRecord> comments;
                if (!peer_comments.empty()) {
                    comments = hd::io::load_comments(peer_comments);
                }
                const auto posts = hd::econ::to_sentiment_posts(subs);
                const auto res = hd::econ::estimate_peers(posts, comments, common.seed);
                os << hd::econ::to_json(res).dump(2) << '\n';
                return json{{"frequent_rows", res.frequent_rows}, {"network_rows", res.network_rows}};
            });
        };
    });

    // match
    std::string profiles_path, exposures_path, first_posts_path, effects_path;
    std::vector<double> weights_raw;
    auto* mat = app.add_subcommand("match", "match commenters to similar non-commenters; CSV of pairs");
    mat->add_option("--profiles", profiles_path, "user profiles CSV")->required();
    mat->add_option("--exposures", exposures_path, "user_id,ticker,timestamp_utc of comments")->required();
    mat->add_option("--first-posts", first_posts_path, "user_id,ticker,timestamp_utc of first submissions");
    mat->add_option("--effects", effects_path, "write per-ticker treatment effects CSV here");
    mat->add_option("--weights", weights_raw, "six weights for D1..D6")->expected(6);
    add_common(mat, common);
    mat->callback([&] {
        action = [&] {
            json inputs{{"profiles", profiles_path},
                        {"exposures", exposures_path},
                        {"first_posts", first_posts_path},
                        {"weights", weights_raw}};
            return run("match", common, inputs, [&](std::ostream& os) {
                auto open = [](const std::string& p) {
                    std::ifstream f(p);
                    if (!f) {
                        throw hd::InvalidArgument("cannot open " + p);
                    }
                    return f;
                };
                auto pf = open(profiles_path);
                auto ef = open(exposures_path);
                const auto profiles = hd::match::read_profiles(pf, profiles_path);
                const auto exposures = hd::match::read_exposures(ef, exposures_path);
                std::vector<hd::match::FirstPost> first;
                if (!first_posts_path.empty()) {
                    auto ff = open(first_posts_path);
                    first = hd::match::read_first_posts(ff, first_posts_path);
                }
                hd::match::Weights w = hd::match::kUnitWeights;
                if (!weights_raw.empty()) {
                    std::copy(weights_raw.begin(), weights_raw.end(), w.begin());
                }
                const auto pairs = hd::match::match_users(profiles, exposures, first, w);
                hd::match::write_pairs(os, pairs);
                std::vector<hd::match::MatchedOutcome> outcomes;
                for (const auto& p : pairs) {
                    outcomes.push_back({p.ticker, p.exposures, p.treated_posted, p.control_posted});
                }
                json summary{{"pairs", pairs.size()}};
                if (!outcomes.empty()) {
                    const auto pooled = hd::match::treatment_effect(outcomes);
                    summary["pi_treated"] = pooled.pi_treated;
                    summary["pi_control"] = pooled.pi_control;
                    summary["difference"] = pooled.difference;
                    if (!effects_path.empty()) {
                        std::ofstream e(effects_path);
                        if (!e) {
                            throw hd::InvalidArgument("cannot write " + effects_path);
                        }
                        hd::match::write_effects(e, hd::match::treatment_effects(outcomes));
                    }
                }
                return summary;
            });
        };
    });

    try {
        common.seed = default_seed();
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 1;
    } catch (const hd::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        exit_code = action ? action() : 1;
    } catch (const hd::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const hd::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
    return exit_code;
}
