#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "walklab/construction.hpp"
#include "walklab/group.hpp"
#include "walklab/heavytail.hpp"
#include "walklab/measure.hpp"

namespace walklab {

inline constexpr const char* kVersion = "0.1.0";

// Full experiment: calibration -> construction -> claim check -> event
// bounds -> tv profiles -> control. Every stage draws from its own stream of
// the master seed, so identical configs reproduce identical reports (modulo
// wall-clock fields).
struct ExperimentConfig {
    GroupDescriptor group;                 // construction target
    double eps = 0.05;
    std::uint64_t seed = 1;

    std::uint64_t cal_m = 1024;            // calibration horizon
    std::uint64_t cal_samples = 100'000;
    std::uint32_t cal_kcap = 64;

    std::uint64_t steps = 8;               // production construction steps
    OracleMode mode = OracleMode::certificate;

    std::uint64_t claim_m = 64;            // desk-scale claim state
    std::uint64_t claim_pairs = 10'000;
    std::uint64_t claim_K = 2;
    std::uint64_t claim_N = 32;
    std::uint64_t claim_steps = 0;         // 0 = auto: m^2 + 504 - N

    std::vector<std::uint64_t> event_m_list = {64, 128, 256};
    std::uint64_t event_samples = 100'000;

    std::uint64_t profile_mmax = 12;
    double prune = 1e-12;

    bool run_control = true;
    std::uint64_t control_mmax = 4096;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

struct StageTiming {
    std::string name;
    double wall_ms = 0.0;
};

struct Report {
    nlohmann::json config;
    std::string version = kVersion;
    nlohmann::json calibration;
    nlohmann::json construction;
    nlohmann::json claim;
    nlohmann::json event_bounds;
    nlohmann::json entropy;
    nlohmann::json profile;
    nlohmann::json control;
    std::vector<StageTiming> timings;
    bool failed = false;
    std::string failure_stage;
    std::string failure_message;

    nlohmann::json to_json(bool include_timings = true) const;
};

Report run_pipeline(const ExperimentConfig& config);

// report.json plus profile.csv / control.csv / calibration.csv under dir.
// Returns the list of files written.
std::vector<std::string> emit_report(const Report& report, const std::string& dir);

// Exact lazy-walk control on Z: step (delta_-1 + delta_0 + delta_1)/3,
// translate by h_coord.
std::vector<ProfileRow> control_profile_z(int h_coord, std::uint64_t m_max);

nlohmann::json profile_rows_to_json(const std::vector<ProfileRow>& rows);
void write_profile_csv(const std::vector<ProfileRow>& rows, const std::string& path);

}  // namespace walklab
