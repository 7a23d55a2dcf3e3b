// Conductance profiles on the segment 1..N. Edge x joins sites x and x+1,
// x = 1..N-1; c is the swap rate on that edge and r = 1/c its resistance.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sepmix {

class ConductanceProfile {
public:
    // resistances r(1,2), ..., r(N-1,N)
    static ConductanceProfile from_resistances(std::vector<double> r);
    static ConductanceProfile from_rates(const std::vector<double>& c);
    static ConductanceProfile homogeneous(int n);

    int n_sites() const { return static_cast<int>(r_.size()) + 1; }
    double rate(int x) const { return c_[x - 1]; }
    double resistance(int x) const { return r_[x - 1]; }
    const std::vector<double>& rates() const { return c_; }
    const std::vector<double>& resistances() const { return r_; }

private:
    std::vector<double> r_, c_;
};

enum class ProfileKind { homogeneous, iid_uniform, iid_discrete, explicit_rates, one_slow_bond };

struct ProfileSpec {
    ProfileKind kind = ProfileKind::homogeneous;
    std::uint64_t seed = 1;
    double a = 0.5, b = 1.5;            // iid-uniform resistance range
    std::vector<double> values, probs;  // iid-discrete resistances
    std::vector<double> rates;          // explicit list, one rate per edge
    int slow_position = 1;              // one-slow-bond
    double slow_resistance = 10.0;
    bool normalize = false;             // divide r by its empirical mean
};

ConductanceProfile build_profile(const ProfileSpec& spec, int n_sites);

ProfileKind parse_profile_kind(const std::string& s);
std::string to_string(ProfileKind k);

struct AssumptionParams {
    double c_p = 1.0;
    double upsilon = 0.5;                     // illustrative
    std::optional<double> upsilon_bar_n;      // defaults to (log N)^{-1/2}
    double c_rho = 1.0;
    double rho = 1.0;
};

struct AssumptionReport {
    double lln_discrepancy = 0;
    double max_resistance = 0;
    double min_resistance = 0;
    double upsilon_margin = 0;
    double upsilon_bar = 0;
    double upsilon_bar_target = 0;
    bool k_range_ok = false;
};

AssumptionReport check_assumptions(const ConductanceProfile& p, int k, const AssumptionParams& params = {});

// disk format: {"n_sites": N, "resistances": [...]}
nlohmann::json profile_to_json(const ConductanceProfile& p);
ConductanceProfile profile_from_json(const nlohmann::json& j);
ConductanceProfile load_profile(const std::string& path);
void save_profile(const ConductanceProfile& p, const std::string& path);

}  // namespace sepmix
