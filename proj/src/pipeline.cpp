#include "walklab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "walklab/errors.hpp"

namespace walklab {

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

nlohmann::json calibration_to_json(const CalibrationResult& c) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [k, frac] : c.sweep_trace) {
        trace.push_back({{"K", k}, {"pass34_fraction", frac}});
    }
    return nlohmann::json{
        {"K", dec_string(c.K)},
        {"N", dec_string(c.N)},
        {"mass", c.mass},
        {"sigma", c.sigma},
        {"target", c.target},
        {"samples", c.samples},
        {"m", c.m},
        {"fail_prefix_bound", c.fail_prefix_bound},
        {"fail_growth_or_tie", c.fail_growth_or_tie},
        {"sweep", std::move(trace)},
    };
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json m_list = nlohmann::json::array();
    for (auto m : event_m_list) m_list.push_back(m);
    return nlohmann::json{
        {"group", group.name()},
        {"eps", eps},
        {"seed", seed},
        {"cal_m", cal_m},
        {"cal_samples", cal_samples},
        {"cal_kcap", cal_kcap},
        {"steps", steps},
        {"mode", oracle_mode_name(mode)},
        {"claim_m", claim_m},
        {"claim_pairs", claim_pairs},
        {"claim_K", claim_K},
        {"claim_N", claim_N},
        {"claim_steps", claim_steps},
        {"event_m_list", std::move(m_list)},
        {"event_samples", event_samples},
        {"profile_mmax", profile_mmax},
        {"prune", prune},
        {"run_control", run_control},
        {"control_mmax", control_mmax},
    };
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("group")) c.group = descriptor_from_name(j.at("group").get<std::string>());
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("eps", c.eps);
    get("seed", c.seed);
    get("cal_m", c.cal_m);
    get("cal_samples", c.cal_samples);
    get("cal_kcap", c.cal_kcap);
    get("steps", c.steps);
    if (j.contains("mode")) c.mode = oracle_mode_from_name(j.at("mode").get<std::string>());
    get("claim_m", c.claim_m);
    get("claim_pairs", c.claim_pairs);
    get("claim_K", c.claim_K);
    get("claim_N", c.claim_N);
    get("claim_steps", c.claim_steps);
    if (j.contains("event_m_list")) {
        c.event_m_list.clear();
        for (const auto& v : j.at("event_m_list")) c.event_m_list.push_back(v.get<std::uint64_t>());
    }
    get("event_samples", c.event_samples);
    get("profile_mmax", c.profile_mmax);
    get("prune", c.prune);
    get("run_control", c.run_control);
    get("control_mmax", c.control_mmax);
    return c;
}

nlohmann::json Report::to_json(bool include_timings) const {
    nlohmann::json j{
        {"schema_version", 1},
        {"version", version},
        {"config", config},
        {"calibration", calibration},
        {"construction", construction},
        {"claim", claim},
        {"event_bounds", event_bounds},
        {"entropy", entropy},
        {"profile", profile},
        {"control", control},
        {"failed", failed},
    };
    if (failed) {
        j["failure_stage"] = failure_stage;
        j["failure_message"] = failure_message;
    }
    if (include_timings) {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& s : timings) t.push_back({{"stage", s.name}, {"wall_ms", s.wall_ms}});
        j["timings"] = std::move(t);
    }
    return j;
}

nlohmann::json profile_rows_to_json(const std::vector<ProfileRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const ProfileRow& r : rows) {
        arr.push_back({{"m", r.m},
                       {"tv", r.tv},
                       {"error", r.error},
                       {"support_size", r.support},
                       {"wall_ms", r.wall_ms}});
    }
    return arr;
}

void write_profile_csv(const std::vector<ProfileRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open " + path + " for writing");
    out << "m,tv,error,support_size,wall_ms\n";
    char buf[160];
    for (const ProfileRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%llu,%.12g,%.6g,%zu,%.3f\n",
                      static_cast<unsigned long long>(r.m), r.tv, r.error, r.support, r.wall_ms);
        out << buf;
    }
}

std::vector<ProfileRow> control_profile_z(int h_coord, std::uint64_t m_max) {
    GroupDescriptor z{GroupKind::free_abelian, 1};
    SparseMeasure step(z);
    step.add(vector_element(z, {BigInt(-1)}), 1.0 / 3.0);
    step.add(vector_element(z, {BigInt(0)}), 1.0 / 3.0);
    step.add(vector_element(z, {BigInt(1)}), 1.0 / 3.0);
    GroupElement h = vector_element(z, {BigInt(h_coord)});
    return tv_profile(step, h, m_max, 0.0);
}

Report run_pipeline(const ExperimentConfig& config) {
    Report report;
    report.config = config.to_json();
    const HeavyTail& dist = HeavyTail::shared();
    std::string stage = "calibration";
    double t0 = now_ms();
    auto mark = [&](const std::string& next) {
        report.timings.push_back({stage, now_ms() - t0});
        stage = next;
        t0 = now_ms();
    };
    try {
        // Calibration of (K, N) at the configured eps.
        StreamRng cal_rng(config.seed, stream_id::calibration);
        CalibrationResult cal =
            calibrate_KN(config.eps, config.cal_m, config.cal_samples, cal_rng, config.cal_kcap, dist);
        report.calibration = calibration_to_json(cal);
        mark("construction");

        // Production state at the calibrated constants.
        BuildParams prod;
        prod.group = config.group;
        prod.h = lamplighter_element({BigInt(0)}, BigInt(0));
        prod.eps = config.eps;
        prod.K = cal.K;
        prod.N = cal.N;
        prod.steps = config.steps;
        prod.mode = config.mode;
        ConstructionState state = ConstructionState::build(prod);
        bool certs_ok = state.revalidate_certificates();
        SparseMeasure mu = full_measure(state, dist, /*renormalize=*/false);
        SparseMeasure mu_hat = full_measure(state, dist, /*renormalize=*/true);
        report.construction = nlohmann::json{
            {"h", element_to_json(prod.h)},
            {"K", dec_string(prod.K)},
            {"N", dec_string(prod.N)},
            {"steps", prod.steps},
            {"mode", oracle_mode_name(prod.mode)},
            {"certificates_valid", certs_ok},
            {"support_size", mu.support_size()},
            {"stored_mass", mu.total_mass()},
            {"truncation_deficit", mu.lost_mass()},
            {"symmetric", is_symmetric(mu, 1e-12)},
        };
        if (!certs_ok) throw VerificationError("certificate revalidation failed");
        mark("entropy");

        Enclosure hp = dist.entropy_enclosure();
        Enclosure hp_cond = dist.entropy_conditioned(state.n_trunc());
        double h_mu = measure_entropy(mu_hat);
        double lim = hp_cond.upper() + std::log(4.0);
        report.entropy = nlohmann::json{
            {"H_p", hp.mid()},
            {"H_p_width", hp.width()},
            {"H_p_truncated", hp_cond.mid()},
            {"H_mu", h_mu},
            {"chain_limit", lim},
            {"chain_holds", h_mu <= lim},
        };
        if (h_mu > lim) throw VerificationError("entropy chain violated");
        mark("claim");

        // Desk-scale claim state: small padding constants, enough steps for
        // the truncated support to reach the m^2 running-max floor.
        BuildParams cb;
        cb.group = config.group;
        cb.h = prod.h;
        cb.eps = config.eps;
        cb.K = config.claim_K;
        cb.N = config.claim_N;
        std::uint64_t want_steps = config.claim_steps;
        if (want_steps == 0) {
            want_steps = config.claim_m * config.claim_m + 504 - config.claim_N;
        }
        cb.steps = want_steps;
        cb.mode = OracleMode::certificate;
        ConstructionState claim_state = ConstructionState::build(cb);
        StreamRng claim_rng(config.seed, stream_id::claim_check);
        ClaimCheckResult claim =
            verify_claim(claim_state, config.claim_m, config.claim_pairs, claim_rng, dist);
        report.claim = nlohmann::json{
            {"m", config.claim_m},
            {"K", config.claim_K},
            {"N", config.claim_N},
            {"steps", cb.steps},
            {"pairs", claim.pairs},
            {"violations", claim.violations},
            {"proposals", claim.proposals},
            {"acceptance", claim.acceptance},
            {"peeling_envelope", claim.peeling_envelope},
        };
        if (claim.violations > 0) {
            throw VerificationError("claim check found " + std::to_string(claim.violations) +
                                    " equalities");
        }
        mark("event_bounds");

        nlohmann::json bounds = nlohmann::json::array();
        StreamRng event_rng(config.seed, stream_id::omega_mass);
        double floor = 2.0 - 8.0 * config.eps;
        for (std::uint64_t m : config.event_m_list) {
            EventBoundResult eb = event_tv_bound(state, m, config.event_samples, event_rng, dist);
            bounds.push_back({{"m", m},
                              {"eta_hat", eb.eta_hat},
                              {"bound", eb.bound},
                              {"ci", eb.ci},
                              {"samples", eb.samples},
                              {"meets_floor", eb.bound >= floor - eb.ci}});
        }
        report.event_bounds = nlohmann::json{{"floor", floor}, {"per_m", std::move(bounds)}};
        mark("profile");

        std::vector<ProfileRow> rows = tv_profile(mu, prod.h, config.profile_mmax, config.prune);
        report.profile = profile_rows_to_json(rows);
        mark("control");

        if (config.run_control) {
            std::vector<ProfileRow> crows = control_profile_z(1, config.control_mmax);
            nlohmann::json checkpoints = nlohmann::json::array();
            for (const ProfileRow& r : crows) {
                if (r.m == 1 || r.m == 16 || r.m == 256 || r.m == 1024 || r.m == config.control_mmax) {
                    checkpoints.push_back({{"m", r.m}, {"tv", r.tv}});
                }
            }
            report.control = nlohmann::json{
                {"group", "z"},
                {"step", "lazy"},
                {"h", 1},
                {"m_max", config.control_mmax},
                {"checkpoints", std::move(checkpoints)},
                {"rows", profile_rows_to_json(crows)},
            };
        }
        report.timings.push_back({stage, now_ms() - t0});
    } catch (const std::exception& e) {
        report.timings.push_back({stage, now_ms() - t0});
        report.failed = true;
        report.failure_stage = stage;
        report.failure_message = e.what();
    }
    return report;
}

std::vector<std::string> emit_report(const Report& report, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> written;
    {
        std::string path = (fs::path(dir) / "report.json").string();
        std::ofstream out(path);
        if (!out) throw UsageError("cannot open " + path + " for writing");
        out << report.to_json().dump(2) << "\n";
        written.push_back(path);
    }
    auto rows_from_json = [](const nlohmann::json& arr) {
        std::vector<ProfileRow> rows;
        for (const auto& r : arr) {
            rows.push_back({r.at("m").get<std::uint64_t>(), r.at("tv").get<double>(),
                            r.at("error").get<double>(), r.at("support_size").get<std::size_t>(),
                            r.at("wall_ms").get<double>()});
        }
        return rows;
    };
    if (report.profile.is_array()) {
        std::string path = (fs::path(dir) / "profile.csv").string();
        write_profile_csv(rows_from_json(report.profile), path);
        written.push_back(path);
    }
    if (report.control.is_object() && report.control.contains("rows")) {
        std::string path = (fs::path(dir) / "control.csv").string();
        write_profile_csv(rows_from_json(report.control.at("rows")), path);
        written.push_back(path);
    }
    if (report.calibration.is_object() && report.calibration.contains("sweep")) {
        std::string path = (fs::path(dir) / "calibration.csv").string();
        std::ofstream out(path);
        if (!out) throw UsageError("cannot open " + path + " for writing");
        out << "K,pass34_fraction\n";
        for (const auto& row : report.calibration.at("sweep")) {
            out << row.at("K").get<std::uint32_t>() << "," << row.at("pass34_fraction").get<double>()
                << "\n";
        }
        written.push_back(path);
    }
    return written;
}

}  // namespace walklab
