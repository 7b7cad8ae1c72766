#include "qmem/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "qmem/errors.hpp"

namespace qmem {

namespace {

const std::array<const char*, 10> kParamKeys = {
    "gamma0", "epsilon", "lambda",      "nu",          "tau",
    "dt",     "t_final", "n_traj",      "master_seed", "record_stride",
};

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // fixed '\n' line endings
    if (!out) throw SimulationError("cannot open output file: " + path.string());
    return out;
}

double parse_double(std::string_view text, const std::string& what) {
    double value{};
    const auto* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || p != end) throw ConfigError("cannot parse " + what);
    return value;
}

}  // namespace

std::string format_double(double x) {
    std::array<char, 32> buf;
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), p);
}

nlohmann::json params_to_json(const SimParams& p) {
    return nlohmann::json{
        {"gamma0", p.gamma0},   {"epsilon", p.epsilon},
        {"lambda", p.lambda},   {"nu", p.nu},
        {"tau", p.tau},         {"dt", p.dt},
        {"t_final", p.t_final}, {"n_traj", p.n_traj},
        {"master_seed", p.master_seed}, {"record_stride", p.record_stride},
    };
}

SimParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("parameter file must be a flat JSON object");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* k : kParamKeys) known |= key == k;
        if (!known) throw ConfigError("unknown parameter key: " + key);
    }
    for (const char* k : kParamKeys)
        if (!j.contains(k)) throw ConfigError(std::string("missing parameter key: ") + k);

    try {
        SimParams p;
        p.gamma0 = j.at("gamma0").get<double>();
        p.epsilon = j.at("epsilon").get<double>();
        p.lambda = j.at("lambda").get<double>();
        p.nu = j.at("nu").get<double>();
        p.tau = j.at("tau").get<double>();
        p.dt = j.at("dt").get<double>();
        p.t_final = j.at("t_final").get<double>();
        p.n_traj = j.at("n_traj").get<std::int64_t>();
        p.master_seed = j.at("master_seed").get<std::uint64_t>();
        p.record_stride = j.at("record_stride").get<std::int64_t>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed parameter value: ") + e.what());
    }
}

SimParams load_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open parameter file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return params_from_json(j);
}

SimParams apply_override(SimParams params, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("override must have the form key=value: " + std::string(assignment));
    const std::string_view key = assignment.substr(0, eq);
    const std::string_view value = assignment.substr(eq + 1);
    const std::string what = "override value for " + std::string(key);

    if (key == "gamma0") params.gamma0 = parse_double(value, what);
    else if (key == "epsilon") params.epsilon = parse_double(value, what);
    else if (key == "lambda") params.lambda = parse_double(value, what);
    else if (key == "nu") params.nu = parse_double(value, what);
    else if (key == "tau") params.tau = parse_double(value, what);
    else if (key == "dt") params.dt = parse_double(value, what);
    else if (key == "t_final") params.t_final = parse_double(value, what);
    else if (key == "n_traj") params.n_traj = static_cast<std::int64_t>(parse_double(value, what));
    else if (key == "master_seed")
        params.master_seed = static_cast<std::uint64_t>(parse_double(value, what));
    else if (key == "record_stride")
        params.record_stride = static_cast<std::int64_t>(parse_double(value, what));
    else
        throw ConfigError("unknown parameter key: " + std::string(key));
    return params;
}

GaussianState default_initial_state() {
    // displaced oscillator with vacuum variances: <phi> = 20, <q> = 0
    return GaussianState{20.0, 0.0, 0.5, 0.5, 0.0, 0.0};
}

ClassicalState classical_from_quantum(const GaussianState& init) {
    return ClassicalState{init.mean_phi, init.mean_q, init.mu};
}

Preset preset(std::string_view name) {
    Preset p;
    p.params = SimParams{};  // defaults carry the shared circuit parameters
    p.init = default_initial_state();
    if (name == "fig3a") p.params.tau = 0.005;
    else if (name == "fig3b") p.params.tau = 0.2;
    else if (name == "fig3c") p.params.tau = 4.0;
    else throw ConfigError("unknown preset: " + std::string(name) +
                           " (expected fig3a, fig3b or fig3c)");
    return p;
}

void write_ensemble_csv(const std::filesystem::path& path, const EnsembleStats& stats) {
    auto out = open_out(path);
    out << "time,e_q,e_phi,e_gamma,e_gamma_q,e_gamma_q2,var_mu,se_q,se_gamma_q\n";
    for (std::size_t k = 0; k < stats.times.size(); ++k) {
        out << format_double(stats.times[k]) << ',' << format_double(stats.e_q[k]) << ','
            << format_double(stats.e_phi[k]) << ',' << format_double(stats.e_gamma[k]) << ','
            << format_double(stats.e_gamma_q[k]) << ',' << format_double(stats.e_gamma_q2[k])
            << ',' << format_double(stats.var_mu[k]) << ',' << format_double(stats.se_q[k])
            << ',' << format_double(stats.se_gamma_q[k]) << '\n';
    }
}

EnsembleStats read_ensemble_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open ensemble file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "time,e_q,e_phi,e_gamma,e_gamma_q,e_gamma_q2,var_mu,se_q,se_gamma_q")
        throw ConfigError("unexpected ensemble.csv header in " + path.string());
    EnsembleStats stats;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::array<double, 9> row{};
        for (double& value : row) {
            if (!std::getline(ss, cell, ',')) throw ConfigError("short row in " + path.string());
            value = parse_double(cell, "ensemble.csv cell");
        }
        stats.times.push_back(row[0]);
        stats.e_q.push_back(row[1]);
        stats.e_phi.push_back(row[2]);
        stats.e_gamma.push_back(row[3]);
        stats.e_gamma_q.push_back(row[4]);
        stats.e_gamma_q2.push_back(row[5]);
        stats.var_mu.push_back(row[6]);
        stats.se_q.push_back(row[7]);
        stats.se_gamma_q.push_back(row[8]);
    }
    stats.se_gamma.assign(stats.times.size(), 0.0);
    stats.cov_q_gamma_q.assign(stats.times.size(), 0.0);
    return stats;
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record) {
    auto out = open_out(path);
    out << "time,mean_phi,mean_q,var_phi,var_q,cov,mu,gamma\n";
    for (std::size_t k = 0; k < record.times.size(); ++k) {
        const GaussianState& s = record.states[k];
        out << format_double(record.times[k]) << ',' << format_double(s.mean_phi) << ','
            << format_double(s.mean_q) << ',' << format_double(s.var_phi) << ','
            << format_double(s.var_q) << ',' << format_double(s.cov) << ','
            << format_double(s.mu) << ',' << format_double(record.gammas[k]) << '\n';
    }
}

TrajectoryRecord read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trajectory file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "time,mean_phi,mean_q,var_phi,var_q,cov,mu,gamma")
        throw ConfigError("unexpected trajectory header in " + path.string());
    TrajectoryRecord rec;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::array<double, 8> row{};
        for (double& value : row) {
            if (!std::getline(ss, cell, ',')) throw ConfigError("short row in " + path.string());
            value = parse_double(cell, "trajectory cell");
        }
        rec.times.push_back(row[0]);
        rec.states.push_back({row[1], row[2], row[3], row[4], row[5], row[6]});
        rec.gammas.push_back(row[7]);
    }
    return rec;
}

void write_classical_csv(const std::filesystem::path& path,
                         std::span<const ClassicalSample> samples) {
    auto out = open_out(path);
    out << "time,phi,q,mu,gamma,i_m\n";
    for (const ClassicalSample& s : samples) {
        out << format_double(s.t) << ',' << format_double(s.state.phi) << ','
            << format_double(s.state.q) << ',' << format_double(s.state.mu) << ','
            << format_double(s.gamma) << ',' << format_double(s.i_m) << '\n';
    }
}

void write_tau_scan_csv(const std::filesystem::path& path, const TauOptReport& report) {
    auto out = open_out(path);
    out << "tau,D\n";
    for (const auto& [tau, d] : report.samples)
        out << format_double(tau) << ',' << format_double(d) << '\n';
}

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report) {
    auto out = open_out(path);
    out << "dt,max_gamma_gap\n";
    for (std::size_t k = 0; k < report.dts.size(); ++k)
        out << format_double(report.dts[k]) << ',' << format_double(report.max_gamma_gaps[k])
            << '\n';
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace qmem
