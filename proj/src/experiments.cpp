#include "sepmix/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "sepmix/errors.hpp"
#include "sepmix/estimators.hpp"
#include "sepmix/exact.hpp"
#include "sepmix/io.hpp"
#include "sepmix/rng.hpp"
#include "sepmix/spectral.hpp"

#ifndef SEPMIX_GIT_REV
#define SEPMIX_GIT_REV "unknown"
#endif

namespace sepmix {

using nlohmann::json;

namespace {

template <class T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

}  // namespace

ProfileSpec profile_spec_from_json(const json& j) {
    ProfileSpec s;
    if (!j.is_object())
        throw ConfigError("profile section must be an object");
    if (j.contains("kind"))
        s.kind = parse_profile_kind(j.at("kind").get<std::string>());
    take(j, "seed", s.seed);
    take(j, "a", s.a);
    take(j, "b", s.b);
    take(j, "values", s.values);
    take(j, "probs", s.probs);
    take(j, "rates", s.rates);
    take(j, "position", s.slow_position);
    take(j, "resistance", s.slow_resistance);
    take(j, "normalize", s.normalize);
    return s;
}

json profile_spec_to_json(const ProfileSpec& s) {
    json j{{"kind", to_string(s.kind)}, {"seed", s.seed}, {"normalize", s.normalize}};
    switch (s.kind) {
    case ProfileKind::iid_uniform:
        j["a"] = s.a;
        j["b"] = s.b;
        break;
    case ProfileKind::iid_discrete:
        j["values"] = s.values;
        j["probs"] = s.probs;
        break;
    case ProfileKind::explicit_rates: j["rates"] = s.rates; break;
    case ProfileKind::one_slow_bond:
        j["position"] = s.slow_position;
        j["resistance"] = s.slow_resistance;
        break;
    case ProfileKind::homogeneous: break;
    }
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    try {
        if (j.contains("profile")) {
            c.profile = profile_spec_from_json(j.at("profile"));
            if (j.at("profile").contains("file"))
                c.profile_file = j.at("profile").at("file").get<std::string>();
        }
        take(j, "n_ladder", c.n_ladder);
        if (j.contains("k_rule")) {
            const auto& kr = j.at("k_rule");
            std::string kind = kr.is_string() ? kr.get<std::string>() : kr.value("kind", "half");
            if (kind == "half")
                c.k_rule = KRule::half;
            else if (kind == "power")
                c.k_rule = KRule::power;
            else if (kind == "fixed")
                c.k_rule = KRule::fixed;
            else
                throw ConfigError("unknown k_rule '" + kind + "' (half, power, fixed)");
            if (kr.is_object()) {
                take(kr, "rho", c.rho);
                take(kr, "c_rho", c.c_rho);
                take(kr, "k", c.k_fixed);
            }
        }
        take(j, "eps", c.eps);
        if (j.contains("replicas")) {
            const auto& r = j.at("replicas");
            if (r.is_number()) {
                c.wilson_replicas = c.coalescence_replicas = r.get<std::size_t>();
            } else {
                take(r, "wilson", c.wilson_replicas);
                take(r, "coalescence", c.coalescence_replicas);
            }
        }
        take(j, "seed", c.seed);
        take(j, "out_dir", c.out_dir);
        take(j, "threads", c.threads);
        take(j, "state_budget", c.state_budget);
        take(j, "delta", c.delta);
        take(j, "wilson_points", c.wilson_points);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    if (c.n_ladder.empty())
        throw ConfigError("n_ladder is empty");
    for (std::size_t i = 0; i < c.n_ladder.size(); ++i)
        if (c.n_ladder[i] < 2 || (i && c.n_ladder[i] <= c.n_ladder[i - 1]))
            throw ConfigError("n_ladder must be increasing with N >= 2");
    for (double e : c.eps)
        if (!(e > 0 && e < 1))
            throw ConfigError("eps values must lie in (0,1)");
    if (!(c.delta > 0 && c.delta <= 1))
        throw ConfigError("delta must lie in (0,1]");
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json prof = profile_spec_to_json(c.profile);
    if (!c.profile_file.empty())
        prof["file"] = c.profile_file;
    json kr{{"kind", c.k_rule == KRule::half ? "half" : c.k_rule == KRule::power ? "power" : "fixed"}};
    if (c.k_rule == KRule::power) {
        kr["rho"] = c.rho;
        kr["c_rho"] = c.c_rho;
    }
    if (c.k_rule == KRule::fixed)
        kr["k"] = c.k_fixed;
    return {{"profile", prof},
            {"n_ladder", c.n_ladder},
            {"k_rule", kr},
            {"eps", c.eps},
            {"replicas", {{"wilson", c.wilson_replicas}, {"coalescence", c.coalescence_replicas}}},
            {"seed", c.seed},
            {"out_dir", c.out_dir},
            {"threads", c.threads},
            {"state_budget", c.state_budget},
            {"delta", c.delta},
            {"wilson_points", c.wilson_points}};
}

int k_for(const ExperimentConfig& c, int n) {
    int k = 0;
    switch (c.k_rule) {
    case KRule::half: k = n / 2; break;
    case KRule::power: k = static_cast<int>(std::ceil(c.c_rho * std::pow(double(n), c.rho) - 1e-9)); break;
    case KRule::fixed: k = c.k_fixed; break;
    }
    if (k < 1 || k > n - 1)
        throw ConfigError("k rule gives k = " + std::to_string(k) + " outside [1, N-1] for N = " + std::to_string(n));
    return k;
}

ConductanceProfile profile_for(const ExperimentConfig& c, int n) {
    if (!c.profile_file.empty()) {
        auto p = load_profile(c.profile_file);
        if (p.n_sites() != n)
            throw ConfigError("profile file has N = " + std::to_string(p.n_sites()) + ", ladder asks for " +
                              std::to_string(n));
        return p;
    }
    return build_profile(c.profile, n);
}

// ---- cutoff ---------------------------------------------------------------------------

bool CutoffReport::bracket_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const CutoffRow& r) { return r.lower <= r.upper; });
}

bool CutoffReport::contains_universal() const {
    return std::all_of(rows.begin(), rows.end(),
                       [](const CutoffRow& r) { return r.lower <= r.pred_universal && r.pred_universal <= r.upper; });
}

bool CutoffReport::ratio_nonincreasing(double eps) const {
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        if (r.eps != eps)
            continue;
        double ratio = r.upper / r.lower;
        if (!(ratio <= prev))
            return false;
        prev = ratio;
    }
    return true;
}

std::string cutoff_csv_header() {
    return "n,k,eps,lower,lower_flagged,upper,upper_censored,pred_gap,pred_extended,pred_universal,exact_tmix,"
           "lambda1";
}

std::vector<std::string> cutoff_csv_cells(const CutoffRow& r) {
    return {std::to_string(r.n),
            std::to_string(r.k),
            format_double(r.eps),
            format_double(r.lower),
            r.lower_flagged ? "1" : "0",
            format_double(r.upper),
            std::to_string(r.upper_censored),
            format_double(r.pred_gap),
            format_double(r.pred_extended),
            format_double(r.pred_universal),
            r.exact_tmix ? format_double(*r.exact_tmix) : std::string(),
            format_double(r.lambda1)};
}

namespace {

std::vector<double> exact_mixing_times(const ConductanceProfile& p, int k, const std::vector<double>& eps,
                                       double gap, std::size_t budget) {
    auto ch = build_chain(p, k, budget);
    const double e_min = *std::min_element(eps.begin(), eps.end());
    const double step = 0.05 / gap;
    std::vector<double> grid{0.0};
    while (true) {
        auto c = tv_curve(ch, Starts::extremal, grid);
        if (c.d.back() <= e_min || grid.size() > 20000) {
            std::vector<double> out;
            for (double e : eps)
                out.push_back(mixing_time(ch, c, e));
            return out;
        }
        std::size_t m = grid.size();
        for (std::size_t i = 0; i < m; ++i)
            grid.push_back(grid.back() + step);
    }
}

void save_cutoff(const std::string& dir, const CutoffReport& rep) {
    std::string out = cutoff_csv_header() + "\n";
    for (const auto& r : rep.rows) {
        auto cells = cutoff_csv_cells(r);
        for (std::size_t i = 0; i < cells.size(); ++i)
            out += (i ? "," : "") + cells[i];
        out += "\n";
    }
    write_atomic((std::filesystem::path(dir) / "cutoff.csv").string(), out);
}

}  // namespace

CutoffReport run_cutoff_profile(const ExperimentConfig& cfg, const std::function<void(const CutoffRow&)>& on_row) {
    CutoffReport rep;
    for (int n : cfg.n_ladder) {
        const auto p = profile_for(cfg, n);
        const int k = k_for(cfg, n);
        const double lam1 = solve_neumann(p, 1).eigenvalues[1];
        const double logk = std::log(static_cast<double>(k));
        double lam_bar = std::numeric_limits<double>::quiet_NaN();
        if (static_cast<int>(std::floor(cfg.delta * n)) >= 1)
            lam_bar = solve_extended(p, cfg.delta).lambda_bar1;

        std::vector<double> exact;
        if (binomial_real(n, k) <= static_cast<double>(cfg.state_budget) && n <= 63)
            exact = exact_mixing_times(p, k, cfg.eps, lam1, cfg.state_budget);

        const std::uint64_t wseed = derive_key(cfg.seed, Tag::replica, 2 * static_cast<std::uint64_t>(n));
        const std::uint64_t cseed = derive_key(cfg.seed, Tag::replica, 2 * static_cast<std::uint64_t>(n) + 1);
        auto coal = coalescence_times(p, k, cfg.coalescence_replicas, cseed, 0, cfg.threads);

        for (std::size_t e = 0; e < cfg.eps.size(); ++e) {
            CutoffRow row;
            row.n = n;
            row.k = k;
            row.eps = cfg.eps[e];
            row.lambda1 = lam1;
            row.pred_gap = logk / (2 * lam1);
            row.pred_extended = logk / (2 * lam_bar);
            row.pred_universal = double(n) * n * logk / (2 * std::numbers::pi * std::numbers::pi);
            WilsonOptions wo;
            wo.eps = cfg.eps[e];
            wo.replicas = cfg.wilson_replicas;
            wo.seed = wseed;
            wo.threads = cfg.threads;
            const double top = 1.5 * std::max(row.pred_gap, row.pred_universal);
            for (std::size_t i = 1; i <= cfg.wilson_points; ++i)
                wo.grid.push_back(top * static_cast<double>(i) / static_cast<double>(cfg.wilson_points));
            if (k >= 2) {
                auto w = wilson_lower_estimate(p, k, wo);
                row.lower = w.estimate;
                row.lower_flagged = w.flagged;
            } else {
                row.lower_flagged = true;
            }
            row.upper = coal.quantile_upper(cfg.eps[e]);
            row.upper_censored = coal.censored;
            if (!exact.empty())
                row.exact_tmix = exact[e];
            rep.rows.push_back(row);
            if (!cfg.out_dir.empty())
                save_cutoff(cfg.out_dir, rep);
            if (on_row)
                on_row(row);
        }
    }
    return rep;
}

std::string git_revision() { return SEPMIX_GIT_REV; }

json make_manifest(const std::string& command, const json& config, const std::vector<std::uint64_t>& seeds,
                   const std::vector<std::string>& outputs) {
    const std::string dumped = config.dump();
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(dumped)));
    return {{"command", command},
            {"config", config},
            {"config_hash", hash},
            {"git_rev", git_revision()},
            {"seeds", seeds},
            {"outputs", outputs},
            {"csv_schema_version", csv_schema_version}};
}

}  // namespace sepmix
