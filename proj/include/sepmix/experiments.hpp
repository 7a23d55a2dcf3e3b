// Experiment orchestration shared by the CLI: configuration, the cutoff
// study, run manifests, and the verification suite.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sepmix/profile.hpp"

namespace sepmix {

inline constexpr const char* csv_schema_version = "1";

enum class KRule { half, power, fixed };

struct ExperimentConfig {
    ProfileSpec profile;
    std::string profile_file;  // takes precedence over the generated profile
    std::vector<int> n_ladder{8};
    KRule k_rule = KRule::half;
    double rho = 1.0, c_rho = 1.0;
    int k_fixed = 0;
    std::vector<double> eps{0.25};
    std::size_t wilson_replicas = 400;
    std::size_t coalescence_replicas = 200;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    unsigned threads = 0;
    std::size_t state_budget = 200000;
    double delta = 0.1;  // extended segment for the lambda-bar prediction
    std::size_t wilson_points = 60;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
int k_for(const ExperimentConfig& c, int n);
ConductanceProfile profile_for(const ExperimentConfig& c, int n);

// profile section of a config: {"kind", "seed", "a", "b", "values", "probs",
// "rates", "position", "resistance", "normalize", "file"}
ProfileSpec profile_spec_from_json(const nlohmann::json& j);
nlohmann::json profile_spec_to_json(const ProfileSpec& s);

struct CutoffRow {
    int n = 0, k = 0;
    double eps = 0;
    double lower = 0;
    bool lower_flagged = false;
    double upper = 0;
    std::size_t upper_censored = 0;
    double pred_gap = 0;        // log k / (2 lambda_1)
    double pred_extended = 0;   // log k / (2 lambda-bar_1)
    double pred_universal = 0;  // N^2 log k / (2 pi^2)
    std::optional<double> exact_tmix;
    double lambda1 = 0;
};

struct CutoffReport {
    std::vector<CutoffRow> rows;
    bool bracket_ok() const;       // lower <= upper everywhere
    bool contains_universal() const;
    bool ratio_nonincreasing(double eps) const;
};

// rows are appended to <out>/cutoff.csv as they finish
CutoffReport run_cutoff_profile(const ExperimentConfig& cfg, const std::function<void(const CutoffRow&)>& on_row = {});

std::string cutoff_csv_header();
std::vector<std::string> cutoff_csv_cells(const CutoffRow& r);

// manifest: command, config, its hash, git revision, seeds, outputs
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& outputs);
std::string git_revision();

// ---- verification suite ---------------------------------------------------------------

struct CheckResult {
    std::string name;
    std::string module;
    std::string property;
    bool passed = false;
    std::string detail;
    double seconds = 0;
};

struct VerifyOptions {
    bool full = false;
    std::uint64_t seed = 1;
    std::string profile_file;  // optional extra profile validated first
};

std::vector<CheckResult> run_verify(const VerifyOptions& opt);

}  // namespace sepmix
