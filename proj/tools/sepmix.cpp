// Command line front end. Every flag overrides a key of the JSON config given
// by --config; outputs go to --out as CSV plus a manifest.json.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "sepmix/errors.hpp"
#include "sepmix/estimators.hpp"
#include "sepmix/exact.hpp"
#include "sepmix/experiments.hpp"
#include "sepmix/io.hpp"
#include "sepmix/spectral.hpp"

using namespace sepmix;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
}

// flag values land here and are merged over the config file
struct Overrides {
    std::string config_path;
    std::vector<std::pair<std::string, std::function<void(json&)>>> setters;

    template <class T>
    void bind(CLI::App* app, const std::string& flag, const std::string& key, std::optional<T>& slot,
              const std::string& help) {
        app->add_option(flag, slot, help);
        setters.emplace_back(key, [&slot, key](json& j) {
            if (!slot)
                return;
            json* node = &j;
            std::string rest = key;
            for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
                node = &(*node)[rest.substr(0, dot)];
                rest = rest.substr(dot + 1);
            }
            (*node)[rest] = *slot;
        });
    }

    json resolve() const {
        json j = config_path.empty() ? json::object() : read_json_file(config_path);
        for (const auto& [key, set] : setters)
            set(j);
        return j;
    }
};

struct Common {
    std::optional<std::string> out, profile_file, profile_kind;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<int> n, k;
};

void add_common(CLI::App* app, Overrides& ov, Common& c) {
    app->add_option("--config", ov.config_path, "JSON config; flags override its keys");
    ov.bind(app, "--out", "out_dir", c.out, "output directory");
    ov.bind(app, "--profile", "profile.file", c.profile_file, "profile JSON file");
    ov.bind(app, "--profile-kind", "profile.kind", c.profile_kind,
            "homogeneous, iid-uniform, iid-discrete, explicit, one-slow-bond");
    ov.bind(app, "--seed", "seed", c.seed, "run seed (also the random-profile seed unless profile.seed is set)");
    ov.bind(app, "--threads", "threads", c.threads, "worker threads, 0 = all cores");
    ov.bind(app, "-n,--n", "n", c.n, "number of sites N");
    ov.bind(app, "-k,--k", "k", c.k, "number of particles k");
}

template <class T>
T need(const json& j, const char* key) {
    if (!j.contains(key))
        throw ConfigError(std::string("missing required setting '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <class T>
T get(const json& j, const char* key, T fallback) {
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

ConductanceProfile resolve_profile(json& cfg, int n) {
    json prof = cfg.value("profile", json::object());
    if (prof.contains("file"))
        return load_profile(prof.at("file").get<std::string>());
    if (!prof.contains("seed"))
        prof["seed"] = get<std::uint64_t>(cfg, "seed", 1);
    cfg["profile"] = prof;
    try {
        return build_profile(profile_spec_from_json(prof), n);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad profile section: ") + e.what());
    }
}

std::string out_dir(const json& cfg) { return get<std::string>(cfg, "out_dir", "out"); }

std::string out_path(const json& cfg, const std::string& name) { return (fs::path(out_dir(cfg)) / name).string(); }

void finish(const std::string& command, const json& cfg, std::vector<std::uint64_t> seeds,
            std::vector<std::string> outputs) {
    auto m = make_manifest(command, cfg, seeds, outputs);
    write_atomic(out_path(cfg, "manifest.json"), m.dump(2) + "\n");
    for (const auto& o : outputs)
        std::cout << "wrote " << out_path(cfg, o) << "\n";
}

CsvTable estimate_table() { return CsvTable({"quantity", "value", "stderr", "replicas", "seed"}); }

void add_estimate(CsvTable& t, const Estimate& e) {
    t.row().cell(e.quantity).cell(e.value).cell(e.stderr_).cell(static_cast<std::uint64_t>(e.replicas)).cell(e.seed);
}

// ---- subcommands -----------------------------------------------------------------

int cmd_spectrum(json cfg) {
    const int n = need<int>(cfg, "n");
    auto p = resolve_profile(cfg, n);
    const int count = std::min(get<int>(cfg, "count", 4), n - 1);
    const std::string boundary = get<std::string>(cfg, "boundary", "both");
    const std::string method = get<std::string>(cfg, "method", "dense");
    if (boundary != "neumann" && boundary != "dirichlet" && boundary != "both")
        throw ConfigError("boundary must be neumann, dirichlet or both");
    if (method != "dense" && method != "shooting")
        throw ConfigError("method must be dense or shooting");
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CsvTable vals({"boundary", "i", "eigenvalue", "scaled", "homogeneous"});
    CsvTable funcs({"boundary", "i", "x", "g", "reference"});
    if (boundary != "dirichlet") {
        auto es = solve_neumann(p, count);
        for (int i = 0; i <= count; ++i) {
            vals.row().cell("neumann").cell(i).cell(es.eigenvalues[i]).cell(double(n) * n * es.eigenvalues[i] / pi2)
                .cell(homogeneous_eigenvalue(n, i));
            double ref0 = cosine_shape(n, i, 1);
            for (int x = 1; x <= n; ++x)
                funcs.row().cell("neumann").cell(i).cell(x).cell(es.g(i, x)).cell(cosine_shape(n, i, x) / ref0);
        }
    }
    if (boundary != "neumann") {
        auto es = solve_dirichlet(p, count,
                                  method == "shooting" ? DirichletMethod::shooting : DirichletMethod::dense);
        for (int i = 1; i <= count; ++i) {
            vals.row().cell("dirichlet").cell(i).cell(es.eigenvalues[i - 1])
                .cell(double(n) * n * es.eigenvalues[i - 1] / pi2).cell(homogeneous_eigenvalue(n, i));
            for (int x = 1; x <= n - 1; ++x)
                funcs.row().cell("dirichlet").cell(i).cell(x).cell(es.g(i - 1, x)).cell(sine_shape(n, i, x));
        }
    }
    std::vector<std::string> outs{"eigenvalues.csv", "eigenfunctions.csv", "profile.json"};
    vals.save(out_path(cfg, outs[0]));
    funcs.save(out_path(cfg, outs[1]));
    save_profile(p, out_path(cfg, outs[2]));
    if (cfg.contains("delta")) {
        auto ext = solve_extended(p, cfg.at("delta").get<double>());
        CsvTable t({"x", "G", "G_bar"});
        for (int x = 1; x <= n; ++x)
            t.row().cell(x).cell(ext.at(x)).cell(x < n ? ext.bar(x) : 0.0);
        t.save(out_path(cfg, "extended.csv"));
        outs.push_back("extended.csv");
        std::cout << "lambda_bar1 " << format_double(ext.lambda_bar1) << " delta_min " << format_double(ext.delta_min)
                  << " delta_max " << format_double(ext.delta_max) << "\n";
    }
    finish("spectrum", cfg, {}, outs);
    return exit_ok;
}

int cmd_simulate(json cfg) {
    const int n = need<int>(cfg, "n");
    const int k = need<int>(cfg, "k");
    const double t = need<double>(cfg, "t");
    const auto seed = get<std::uint64_t>(cfg, "seed", 1);
    auto p = resolve_profile(cfg, n);
    auto start = parse_start_kind(get<std::string>(cfg, "start", "wedge"));
    auto occ = draw_start(n, k, start, seed, 0);
    std::string bits;
    for (int x = 1; x <= n; ++x)
        bits += occ[x] ? '1' : '0';
    auto c0 = Configuration::from_string(bits);
    CoupledEnsemble ens(p, {c0}, seed);
    std::vector<EventRecord> log;
    ens.evolve_logged(t, nullptr, log);
    CsvTable ev({"t", "x", "dir", "applied", "states_hash"});
    for (const auto& e : log)
        ev.row().cell(e.t).cell(e.x).cell(e.dir == Dir::up ? "up" : "down").cell(e.applied).cell(e.states_hash);
    CsvTable hs({"x", "h_start", "h_end"});
    auto h0 = height_of(c0), h1 = height_of(ens.config(0));
    for (int x = 0; x <= n; ++x)
        hs.row().cell(x).cell(h0.at(x)).cell(h1.at(x));
    ev.save(out_path(cfg, "events.csv"));
    hs.save(out_path(cfg, "heights.csv"));
    std::cout << "final " << ens.config(0).str() << " after " << log.size() << " rings\n";
    finish("simulate", cfg, {seed}, {"events.csv", "heights.csv"});
    return exit_ok;
}

int cmd_coalesce(json cfg) {
    const int n = need<int>(cfg, "n");
    const int k = need<int>(cfg, "k");
    const auto seed = get<std::uint64_t>(cfg, "seed", 1);
    const auto replicas = get<std::size_t>(cfg, "replicas", 100);
    const auto threads = get<unsigned>(cfg, "threads", 0);
    auto p = resolve_profile(cfg, n);
    const std::string mode_s = get<std::string>(cfg, "mode", "top-bottom");
    CoalescenceMode mode;
    if (mode_s == "top-bottom")
        mode = CoalescenceMode::top_bottom;
    else if (mode_s == "top-vs-stationary")
        mode = CoalescenceMode::top_vs_stationary;
    else
        throw ConfigError("mode must be top-bottom or top-vs-stationary");
    double max_time = get<double>(cfg, "max_time", 0.0);
    if (max_time <= 0)
        max_time = default_max_time(p, k);
    auto recs = run_replicas(replicas, threads,
                             [&](std::size_t i) { return run_coalescence(p, k, mode, max_time, seed, i); });
    CsvTable t({"replica", "T", "T1", "T2", "events", "censored"});
    CoalescenceSummary s;
    s.max_time = max_time;
    s.seed = seed;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        t.row().cell(static_cast<std::uint64_t>(i)).cell(r.T).cell(r.T1).cell(r.T2).cell(r.event_count)
            .cell(r.censored ? 1 : 0);
        s.T.push_back(r.T);
        s.censored += r.censored;
    }
    std::sort(s.T.begin(), s.T.end());
    CsvTable sv({"t", "survival", "stderr"});
    const double top = s.T.empty() ? 0 : s.T.back();
    for (int i = 0; i <= 100; ++i) {
        double tt = top * i / 100;
        sv.row().cell(tt).cell(s.survival(tt)).cell(s.survival_se(tt));
    }
    auto est = estimate_table();
    for (double eps : get<std::vector<double>>(cfg, "eps", {0.25}))
        add_estimate(est, {"upper_quantile_eps_" + format_double(eps), s.quantile_upper(eps), 0, replicas, seed});
    Welford w;
    for (double v : s.T)
        w.add(v);
    add_estimate(est, {"mean_T", w.mean(), w.se(), replicas, seed});
    t.save(out_path(cfg, "coalescence.csv"));
    sv.save(out_path(cfg, "survival.csv"));
    est.save(out_path(cfg, "estimate.csv"));
    finish("coalesce", cfg, {seed}, {"coalescence.csv", "survival.csv", "estimate.csv"});
    return exit_ok;
}

int cmd_mix_exact(json cfg) {
    const int n = need<int>(cfg, "n");
    const int k = need<int>(cfg, "k");
    auto p = resolve_profile(cfg, n);
    auto ch = build_chain(p, k, get<std::size_t>(cfg, "state_budget", default_state_budget));
    const double gap = gap_of(ch);
    const int points = get<int>(cfg, "points", 200);
    const double t_max = get<double>(cfg, "t_max", std::log(binomial_real(n, k) / 0.02) / gap);
    if (points < 2 || !(t_max > 0))
        throw ConfigError("need points >= 2 and t_max > 0");
    std::vector<double> grid;
    for (int i = 0; i < points; ++i)
        grid.push_back(t_max * i / (points - 1));
    const bool all = get<bool>(cfg, "all_starts", false);
    auto curve = tv_curve(ch, all ? Starts::all : Starts::extremal, grid);
    const double mu_min = 1.0 / binomial_real(n, k);
    CsvTable c({"t", "d", "lower_sandwich", "upper_sandwich"});
    for (std::size_t i = 0; i < grid.size(); ++i)
        c.row().cell(grid[i]).cell(curve.d[i]).cell(0.5 * std::exp(-gap * grid[i]))
            .cell(std::min(1.0, std::exp(-gap * grid[i]) / (2 * mu_min)));
    CsvTable m({"eps", "t_mix", "gap_lower", "gap_upper", "gap"});
    for (double eps : get<std::vector<double>>(cfg, "eps", {0.05, 0.25}))
        m.row().cell(eps).cell(mixing_time(ch, curve, eps)).cell(std::log(1 / (2 * eps)) / gap)
            .cell(std::log(1 / (2 * eps * mu_min)) / gap).cell(gap);
    c.save(out_path(cfg, "mixing_curve.csv"));
    m.save(out_path(cfg, "mixing_times.csv"));
    finish("mix-exact", cfg, {}, {"mixing_curve.csv", "mixing_times.csv"});
    return exit_ok;
}

int cmd_estimate(json cfg) {
    const std::string what = need<std::string>(cfg, "what");
    const auto seed = get<std::uint64_t>(cfg, "seed", 1);
    const auto threads = get<unsigned>(cfg, "threads", 0);
    const auto replicas = get<std::size_t>(cfg, "replicas", 1000);
    auto est = estimate_table();
    std::vector<std::string> outs{"estimate.csv"};

    if (what == "covariance") {
        const int n = need<int>(cfg, "n");
        const int k = need<int>(cfg, "k");
        const std::string mode = get<std::string>(cfg, "mode", "exact");
        if (mode != "exact" && mode != "mc")
            throw ConfigError("covariance mode must be exact or mc");
        auto rep = two_phase_covariance_audit(n, k, mode == "exact" ? CovarianceMode::exact : CovarianceMode::mc,
                                              seed, replicas, get<double>(cfg, "delta", 0.1));
        add_estimate(est, {"sum_abs_cov", rep.sum_abs_cov, 0, rep.samples, seed});
        add_estimate(est, {"bound", rep.bound, 0, rep.samples, seed});
        add_estimate(est, {"diag_sum", rep.diag_sum, 0, rep.samples, seed});
        CsvTable cv({"x", "y", "cov", "stderr"});
        for (int x = 1; x <= n; ++x)
            for (int y = 1; y <= n; ++y) {
                std::size_t e = static_cast<std::size_t>((x - 1) * n + (y - 1));
                cv.row().cell(x).cell(y).cell(rep.cov[e]).cell(rep.cov_se[e]);
            }
        cv.save(out_path(cfg, "covariance.csv"));
        outs.push_back("covariance.csv");
    } else {
        const int n = need<int>(cfg, "n");
        const int k = need<int>(cfg, "k");
        auto p = resolve_profile(cfg, n);
        if (what == "wilson") {
            WilsonOptions o;
            o.eps = get<double>(cfg, "eps", 0.25);
            o.replicas = replicas;
            o.seed = seed;
            o.threads = threads;
            o.threshold = parse_wilson_threshold(get<std::string>(cfg, "threshold", "midway"));
            o.c_eps = get<double>(cfg, "c_eps", o.c_eps);
            o.sparse_fraction = get<double>(cfg, "sparse_fraction", o.sparse_fraction);
            auto w = wilson_lower_estimate(p, k, o);
            add_estimate(est, {"wilson_lower", w.estimate, 0, replicas, seed});
            add_estimate(est, {"wilson_flagged", w.flagged ? 1.0 : 0.0, 0, replicas, seed});
            add_estimate(est, {"stationary_mean_f", w.stationary_mean, w.stationary_se, replicas, seed});
            CsvTable g({"t", "threshold", "mean", "stderr", "exact_mean", "p_start", "p_mu", "sigma", "certified"});
            for (const auto& pt : w.points)
                g.row().cell(pt.t).cell(pt.threshold).cell(pt.mean).cell(pt.se).cell(pt.exact_mean).cell(pt.p_start)
                    .cell(pt.p_mu).cell(pt.sigma).cell(pt.certified ? 1 : 0);
            g.save(out_path(cfg, "wilson.csv"));
            outs.push_back("wilson.csv");
        } else if (what == "bracket") {
            auto b = bracket_variance(p, k, need<double>(cfg, "t"),
                                      parse_start_kind(get<std::string>(cfg, "start", "wedge")), replicas, seed,
                                      threads);
            add_estimate(est, b.jumps);
            add_estimate(est, b.compensator);
            add_estimate(est, b.direct);
            add_estimate(est, b.bound);
            add_estimate(est, {"bracket_bound_trivial", b.bound_trivial, 0, replicas, seed});
        } else if (what == "area") {
            AreaOptions o;
            o.delta = get<double>(cfg, "delta", 0.5);
            o.grid_points = get<std::size_t>(cfg, "grid_points", 10);
            o.threads = threads;
            double horizon = get<double>(cfg, "t", 0.0);
            if (horizon <= 0)
                horizon = 1.0 / solve_extended(p, o.delta).lambda_bar1;
            auto a = area_supermartingale_audit(p, k, horizon, replicas, seed, o);
            add_estimate(est, {"q_exceed_freq", a.q_exceed_freq, 0, replicas, seed});
            add_estimate(est, {"negative_events", double(a.negative_events), 0, replicas, seed});
            add_estimate(est, {"decay_ok", a.decay_ok() ? 1.0 : 0.0, 0, replicas, seed});
            CsvTable g({"t", "mean_A", "stderr_A", "mean_H", "mean_Q", "decay_rhs", "decay_diff", "decay_diff_se"});
            for (std::size_t j = 0; j < a.grid.size(); ++j) {
                g.row().cell(a.grid[j]).cell(a.mean_A[j]).cell(a.se_A[j]).cell(a.mean_H[j]).cell(a.mean_Q[j]);
                if (j > 0)
                    g.cell(a.decay[j - 1].rhs).cell(a.decay[j - 1].diff_mean).cell(a.decay[j - 1].diff_se);
                else
                    g.cell("").cell("").cell("");
            }
            g.save(out_path(cfg, "area.csv"));
            outs.push_back("area.csv");
        } else if (what == "heat") {
            auto h = heat_mean_check(p, k, need<double>(cfg, "t"), replicas, seed, threads);
            add_estimate(est, {"max_abs_dev", h.max_abs_dev, 0, replicas, seed});
            add_estimate(est, {"max_z", h.max_z, 0, replicas, seed});
            add_estimate(est, {"envelope", h.envelope, 0, replicas, seed});
            CsvTable g({"x", "spectral", "mc_mean", "stderr"});
            for (std::size_t x = 0; x < h.spectral.size(); ++x)
                g.row().cell(static_cast<std::uint64_t>(x)).cell(h.spectral[x]).cell(h.mc_mean[x]).cell(h.mc_se[x]);
            g.save(out_path(cfg, "heat.csv"));
            outs.push_back("heat.csv");
        } else {
            throw ConfigError("unknown --what '" + what + "' (wilson, bracket, area, covariance, heat)");
        }
    }
    est.save(out_path(cfg, "estimate.csv"));
    finish("estimate", cfg, {seed}, outs);
    return exit_ok;
}

int cmd_cutoff(json cfg) {
    auto c = config_from_json(cfg);
    auto full = config_to_json(c);
    std::cout << cutoff_csv_header() << "\n";
    auto rep = run_cutoff_profile(c, [](const CutoffRow& r) {
        auto cells = cutoff_csv_cells(r);
        for (std::size_t i = 0; i < cells.size(); ++i)
            std::cout << (i ? "," : "") << cells[i];
        std::cout << std::endl;
    });
    finish("cutoff", full, {c.seed}, {"cutoff.csv"});
    return rep.bracket_ok() ? exit_ok : exit_invariant;
}

int cmd_verify(json cfg, const std::string& suite) {
    VerifyOptions o;
    o.full = suite == "full";
    o.seed = get<std::uint64_t>(cfg, "seed", 1);
    if (cfg.contains("profile") && cfg["profile"].contains("file"))
        o.profile_file = cfg["profile"]["file"].get<std::string>();
    auto results = run_verify(o);
    CsvTable cov({"check", "module", "property", "status", "seconds", "detail"});
    bool ok = true;
    for (const auto& r : results) {
        std::printf("%-4s %-26s %-18s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.module.c_str(),
                    r.detail.c_str());
        cov.row().cell(r.name).cell(r.module).cell(r.property).cell(r.passed ? "pass" : "fail").cell(r.seconds)
            .cell(r.detail);
        ok = ok && r.passed;
    }
    cov.save(out_path(cfg, "coverage.csv"));
    finish("verify", cfg, {o.seed}, {"coverage.csv"});
    if (!ok) {
        for (const auto& r : results)
            if (!r.passed)
                std::cerr << "invariant failure: " << r.module << ": " << r.property << "\n";
        return exit_invariant;
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simple exclusion with conductances: spectra, couplings, exact mixing, estimators"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* app;
        Overrides ov;
        Common common;
    };
    std::vector<std::unique_ptr<Sub>> subs;
    auto make = [&](const std::string& name, const std::string& help) -> Sub& {
        auto s = std::make_unique<Sub>();
        s->app = app.add_subcommand(name, help);
        add_common(s->app, s->ov, s->common);
        subs.push_back(std::move(s));
        return *subs.back();
    };

    auto& spectrum = make("spectrum", "eigenvalues and eigenfunctions of the one-particle and Dirichlet operators");
    std::optional<int> count;
    std::optional<std::string> boundary, method;
    std::optional<double> sp_delta;
    spectrum.ov.bind(spectrum.app, "--count", "count", count, "number of eigenpairs");
    spectrum.ov.bind(spectrum.app, "--boundary", "boundary", boundary, "neumann, dirichlet or both");
    spectrum.ov.bind(spectrum.app, "--method", "method", method, "dense or shooting (Dirichlet)");
    spectrum.ov.bind(spectrum.app, "--delta", "delta", sp_delta, "also solve the extended segment");

    auto& simulate = make("simulate", "one trajectory of the graphical construction with its ring log");
    std::optional<double> sim_t;
    std::optional<std::string> sim_start;
    simulate.ov.bind(simulate.app, "-t,--t", "t", sim_t, "horizon");
    simulate.ov.bind(simulate.app, "--start", "start", sim_start, "wedge, vee, two-phase, stationary");

    auto& coalesce = make("coalesce", "coalescence times of the extremal states under the grand coupling");
    std::optional<std::size_t> co_reps;
    std::optional<std::string> co_mode;
    std::optional<double> co_max;
    std::optional<std::vector<double>> co_eps;
    coalesce.ov.bind(coalesce.app, "--replicas", "replicas", co_reps, "replica count");
    coalesce.ov.bind(coalesce.app, "--mode", "mode", co_mode, "top-bottom or top-vs-stationary");
    coalesce.ov.bind(coalesce.app, "--max-time", "max_time", co_max, "censoring horizon");
    coalesce.ov.bind(coalesce.app, "--eps", "eps", co_eps, "quantile levels");

    auto& mix = make("mix-exact", "exact total variation curve and mixing times");
    std::optional<double> mx_tmax;
    std::optional<int> mx_points;
    std::optional<std::vector<double>> mx_eps;
    std::optional<std::size_t> mx_budget;
    bool all_starts = false;
    mix.ov.bind(mix.app, "--t-max", "t_max", mx_tmax, "grid end");
    mix.ov.bind(mix.app, "--points", "points", mx_points, "grid points");
    mix.ov.bind(mix.app, "--eps", "eps", mx_eps, "eps values");
    mix.ov.bind(mix.app, "--state-budget", "state_budget", mx_budget, "maximum state count");
    mix.app->add_flag("--all-starts", all_starts, "worst case over every start, not only the extremal ones");

    auto& estimate = make("estimate", "Monte Carlo estimators");
    std::optional<std::string> what, es_start, es_threshold, es_mode;
    std::optional<std::size_t> es_reps, es_grid;
    std::optional<double> es_t, es_eps, es_delta, es_ceps;
    estimate.ov.bind(estimate.app, "--what", "what", what, "wilson, bracket, area, covariance, heat");
    estimate.ov.bind(estimate.app, "--replicas", "replicas", es_reps, "replica (or sample) count");
    estimate.ov.bind(estimate.app, "-t,--t", "t", es_t, "time (bracket t0, heat t, area horizon)");
    estimate.ov.bind(estimate.app, "--eps", "eps", es_eps, "Wilson eps");
    estimate.ov.bind(estimate.app, "--start", "start", es_start, "bracket start");
    estimate.ov.bind(estimate.app, "--threshold", "threshold", es_threshold, "midway, dense, sparse");
    estimate.ov.bind(estimate.app, "--c-eps", "c_eps", es_ceps, "constant of the sparse threshold");
    estimate.ov.bind(estimate.app, "--mode", "mode", es_mode, "covariance: exact or mc");
    estimate.ov.bind(estimate.app, "--delta", "delta", es_delta, "area: extended segment; covariance: exponent");
    estimate.ov.bind(estimate.app, "--grid-points", "grid_points", es_grid, "area grid size");

    auto& cutoff = make("cutoff", "lower/upper bracket of the mixing time along an N ladder");
    std::optional<std::vector<int>> ladder;
    std::optional<std::vector<double>> cu_eps;
    cutoff.ov.bind(cutoff.app, "--ladder", "n_ladder", ladder, "increasing list of N");
    cutoff.ov.bind(cutoff.app, "--eps", "eps", cu_eps, "eps values");

    auto& verify = make("verify", "invariant suite");
    std::string suite = "fast";
    verify.app->add_option("suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    try {
        for (auto& s : subs) {
            if (!s->app->parsed())
                continue;
            json cfg = s->ov.resolve();
            const std::string name = s->app->get_name();
            if (name == "mix-exact" && all_starts)
                cfg["all_starts"] = true;
            if (name == "cutoff" && cfg.contains("n")) {
                cfg["n_ladder"] = json::array({cfg["n"]});
                cfg.erase("n");
            }
            if (name == "cutoff" && cfg.contains("k")) {
                cfg["k_rule"] = {{"kind", "fixed"}, {"k", cfg["k"]}};
                cfg.erase("k");
            }
            if (name == "spectrum")
                return cmd_spectrum(cfg);
            if (name == "simulate")
                return cmd_simulate(cfg);
            if (name == "coalesce")
                return cmd_coalesce(cfg);
            if (name == "mix-exact")
                return cmd_mix_exact(cfg);
            if (name == "estimate")
                return cmd_estimate(cfg);
            if (name == "cutoff")
                return cmd_cutoff(cfg);
            if (name == "verify")
                return cmd_verify(cfg, suite);
        }
    } catch (const InvariantError& e) {
        std::cerr << "invariant failure: " << e.what() << "\n";
        return exit_invariant;
    } catch (const CapacityError& e) {
        std::cerr << "capacity: " << e.what() << "\n";
        return exit_capacity;
    } catch (const ConfigError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_invariant;
    }
    return exit_config;
}
