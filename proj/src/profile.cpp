#include "sepmix/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sepmix/errors.hpp"
#include "sepmix/io.hpp"
#include "sepmix/rng.hpp"

namespace sepmix {

namespace {

void require_positive(const std::vector<double>& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0) || !std::isfinite(v[i])) {
            std::ostringstream os;
            os << "nonpositive " << what << " at edge " << (i + 1) << ": " << v[i];
            throw ConfigError(os.str());
        }
    }
}

}  // namespace

ConductanceProfile ConductanceProfile::from_resistances(std::vector<double> r) {
    if (r.empty())
        throw ConfigError("profile needs n_sites >= 2");
    require_positive(r, "resistance");
    ConductanceProfile p;
    p.c_.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        p.c_[i] = 1.0 / r[i];
    p.r_ = std::move(r);
    return p;
}

ConductanceProfile ConductanceProfile::from_rates(const std::vector<double>& c) {
    if (c.empty())
        throw ConfigError("profile needs n_sites >= 2");
    require_positive(c, "rate");
    ConductanceProfile p;
    p.c_ = c;
    p.r_.resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        p.r_[i] = 1.0 / c[i];
    return p;
}

ConductanceProfile ConductanceProfile::homogeneous(int n) {
    if (n < 2)
        throw ConfigError("profile needs n_sites >= 2");
    return from_resistances(std::vector<double>(n - 1, 1.0));
}

ConductanceProfile build_profile(const ProfileSpec& spec, int n) {
    if (n < 2)
        throw ConfigError("profile needs n_sites >= 2");
    const int m = n - 1;
    std::vector<double> r(m, 1.0);

    switch (spec.kind) {
    case ProfileKind::homogeneous:
        break;
    case ProfileKind::iid_uniform:
        if (!(spec.a > 0) || !(spec.b >= spec.a))
            throw ConfigError("iid-uniform needs 0 < a <= b");
        for (int x = 0; x < m; ++x)
            r[x] = spec.a + (spec.b - spec.a) * keyed_uniform(spec.seed, Tag::profile, x);
        break;
    case ProfileKind::iid_discrete: {
        if (spec.values.empty() || spec.values.size() != spec.probs.size())
            throw ConfigError("iid-discrete needs matching values and probs");
        double s = 0;
        for (double q : spec.probs) {
            if (q < 0)
                throw ConfigError("iid-discrete probability is negative");
            s += q;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw ConfigError("iid-discrete probabilities do not sum to 1");
        require_positive(spec.values, "resistance value");
        for (int x = 0; x < m; ++x) {
            double u = keyed_uniform(spec.seed, Tag::profile, x), acc = 0;
            std::size_t j = 0;
            for (; j + 1 < spec.values.size(); ++j) {
                acc += spec.probs[j];
                if (u < acc)
                    break;
            }
            r[x] = spec.values[j];
        }
        break;
    }
    case ProfileKind::explicit_rates:
        if (static_cast<int>(spec.rates.size()) != m)
            throw ConfigError("explicit list has " + std::to_string(spec.rates.size()) + " rates, need " +
                              std::to_string(m));
        require_positive(spec.rates, "rate");
        for (int x = 0; x < m; ++x)
            r[x] = 1.0 / spec.rates[x];
        break;
    case ProfileKind::one_slow_bond:
        if (spec.slow_position < 1 || spec.slow_position > m)
            throw ConfigError("slow bond position outside 1..N-1");
        if (!(spec.slow_resistance > 0))
            throw ConfigError("slow bond resistance must be positive");
        r[spec.slow_position - 1] = spec.slow_resistance;
        break;
    }

    if (spec.normalize) {
        double mean = std::accumulate(r.begin(), r.end(), 0.0) / m;
        for (double& v : r)
            v /= mean;
    }
    return ConductanceProfile::from_resistances(std::move(r));
}

ProfileKind parse_profile_kind(const std::string& s) {
    if (s == "homogeneous")
        return ProfileKind::homogeneous;
    if (s == "iid-uniform")
        return ProfileKind::iid_uniform;
    if (s == "iid-discrete")
        return ProfileKind::iid_discrete;
    if (s == "explicit")
        return ProfileKind::explicit_rates;
    if (s == "one-slow-bond")
        return ProfileKind::one_slow_bond;
    throw ConfigError("unknown profile kind '" + s + "'");
}

std::string to_string(ProfileKind k) {
    switch (k) {
    case ProfileKind::homogeneous: return "homogeneous";
    case ProfileKind::iid_uniform: return "iid-uniform";
    case ProfileKind::iid_discrete: return "iid-discrete";
    case ProfileKind::explicit_rates: return "explicit";
    case ProfileKind::one_slow_bond: return "one-slow-bond";
    }
    return "?";
}

AssumptionReport check_assumptions(const ConductanceProfile& p, int k, const AssumptionParams& params) {
    const int n = p.n_sites();
    if (k < 1 || k > n - 1)
        throw ConfigError("k must lie in [1, N-1]");
    AssumptionReport rep;
    const auto& r = p.resistances();
    // running r(1,m) - (m-1) for m = 2..N
    double partial = 0, sup = 0;
    for (int m = 2; m <= n; ++m) {
        partial += r[m - 2] - 1.0;
        sup = std::max(sup, std::abs(partial));
    }
    rep.lln_discrepancy = sup / n;
    auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    rep.min_resistance = *lo;
    rep.max_resistance = *hi;
    const double logn = std::log(static_cast<double>(n));
    rep.upsilon_margin = rep.max_resistance / (params.c_p * std::exp(std::pow(logn, params.upsilon)));
    rep.upsilon_bar = rep.min_resistance;
    rep.upsilon_bar_target = params.upsilon_bar_n.value_or(logn > 0 ? 1.0 / std::sqrt(logn) : 1.0);
    rep.k_range_ok = params.c_rho * std::pow(static_cast<double>(n), params.rho) <= k && 2 * k <= n;
    return rep;
}

nlohmann::json profile_to_json(const ConductanceProfile& p) {
    return {{"n_sites", p.n_sites()}, {"resistances", p.resistances()}};
}

ConductanceProfile profile_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("n_sites") || !j.contains("resistances"))
        throw ConfigError("profile file needs n_sites and resistances");
    int n = j.at("n_sites").get<int>();
    auto r = j.at("resistances").get<std::vector<double>>();
    if (static_cast<int>(r.size()) != n - 1)
        throw ConfigError("profile file: resistances must have n_sites-1 entries");
    return ConductanceProfile::from_resistances(std::move(r));
}

ConductanceProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open profile " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("profile " + path + ": " + e.what());
    }
    return profile_from_json(j);
}

void save_profile(const ConductanceProfile& p, const std::string& path) {
    write_atomic(path, profile_to_json(p).dump(2) + "\n");
}

}  // namespace sepmix
