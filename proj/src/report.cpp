#include "cltlab/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace cltlab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string prepare_bundle_dir(const std::string& dir, bool force) {
    fs::path target(dir);
    if (fs::exists(target) && !force) {
        for (int i = 1;; ++i) {
            fs::path candidate = target;
            candidate += "-" + std::to_string(i);
            if (!fs::exists(candidate)) {
                target = candidate;
                break;
            }
        }
    }
    fs::create_directories(target);
    return target.string();
}

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);  // binary: no platform newline games
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

}  // namespace

std::string write_bundle(const std::string& out_dir, const ExperimentConfig& config,
                         const std::string& config_text, const CltResult& result,
                         OutputFormat format, bool force) {
    const std::string dir = prepare_bundle_dir(out_dir, force);

    {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["name"] = config.name;
        j["seed"] = config.seed;
        j["config_text"] = config_text;
        auto out = open_out(fs::path(dir) / "config.json");
        out << j.dump(2) << "\n";
    }

    if (format == OutputFormat::Csv) {
        for (std::size_t i = 0; i < result.ns.size(); ++i) {
            auto out = open_out(fs::path(dir) /
                                ("stat_n" + std::to_string(result.ns[i]) + ".csv"));
            out << "n,replicate,statistic\n";
            for (std::size_t r = 0; r < result.statistic_samples[i].size(); ++r)
                out << result.ns[i] << "," << r << ","
                    << format_double(result.statistic_samples[i][r]) << "\n";
        }
        auto out = open_out(fs::path(dir) / "limit_sample.csv");
        out << "replicate,statistic\n";
        for (std::size_t r = 0; r < result.gaussian_sample.size(); ++r)
            out << r << "," << format_double(result.gaussian_sample[r]) << "\n";
    } else {
        nlohmann::json j;
        for (std::size_t i = 0; i < result.ns.size(); ++i)
            j["statistic"][std::to_string(result.ns[i])] = result.statistic_samples[i];
        j["limit_sample"] = result.gaussian_sample;
        auto out = open_out(fs::path(dir) / "samples.json");
        out << j.dump(2) << "\n";
    }

    {
        auto out = open_out(fs::path(dir) / "distances.csv");
        out << "n,ks,w1\n";
        for (std::size_t i = 0; i < result.ns.size(); ++i)
            out << result.ns[i] << "," << format_double(result.to_limit[i].ks) << ","
                << format_double(result.to_limit[i].w1) << "\n";
    }

    {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["name"] = config.name;
        j["seed"] = config.seed;
        j["n_schedule"] = result.ns;
        nlohmann::json dist = nlohmann::json::array();
        for (std::size_t i = 0; i < result.ns.size(); ++i)
            dist.push_back({{"n", result.ns[i]},
                            {"ks", result.to_limit[i].ks},
                            {"w1", result.to_limit[i].w1}});
        j["to_limit"] = dist;
        j["ks_consecutive"] = result.ks_consecutive;
        j["clip_total"] = result.clip_total;
        j["grid_mass_loss"] = result.grid_mass_loss;
        j["cov"] = {{"max_lag", result.cov.max_lag},
                    {"clipped_mass", result.cov.clipped_mass},
                    {"plateau_reached", result.cov.plateau_reached}};
        auto out = open_out(fs::path(dir) / "summary.json");
        out << j.dump(2) << "\n";
    }
    return dir;
}

void write_diagnostics(const std::string& dir, const DiagnosticsReport& report) {
    fs::create_directories(dir);
    auto out = open_out(fs::path(dir) / "diagnostics.csv");
    out << "n,metric,value\n";
    auto row = [&](std::size_t n, const std::string& metric, double v) {
        out << n << "," << metric << "," << format_double(v) << "\n";
    };
    for (std::size_t i = 0; i < report.ns.size(); ++i) {
        const std::size_t n = report.ns[i];
        row(n, "block_size", static_cast<double>(report.block_sizes[i]));
        row(n, "cond_expectation_norm", report.cond_expectation_norm[i]);
        for (std::size_t q = 0; q < report.panel_names.size(); ++q)
            row(n, "sigma_n." + report.panel_names[q], report.sigma_n[i][q]);
        for (std::size_t e = 0; e < report.lindeberg_eps.size(); ++e)
            row(n, "lindeberg.eps" + format_double(report.lindeberg_eps[e]),
                report.lindeberg[i][e]);
        for (std::size_t l = 0; l < report.levels.size(); ++l)
            row(n, "tail_mean_sq.level" + std::to_string(report.levels[l]),
                report.tail_mean_sq[i][l]);
    }
    for (std::size_t q = 0; q < report.panel_names.size(); ++q)
        row(0, "sigma_limit." + report.panel_names[q], report.sigma_limit[q]);
}

void write_mixing_profile(const std::string& path, const MixingProfile& profile) {
    auto out = open_out(path);
    const bool with_se = !profile.std_errors.empty();
    out << (with_se ? "k,value,stderr\n" : "k,value\n");
    for (std::size_t k = 0; k < profile.values.size(); ++k) {
        out << k << "," << format_double(profile.values[k]);
        if (with_se) out << "," << format_double(profile.std_errors[k]);
        out << "\n";
    }
}

void write_probe_report(const std::string& path, const ProbeReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n_schedule"] = report.ns;
    j["ks_doublings"] = report.ks_doublings;
    j["stabilizing"] = report.stabilizing;
    j["hill_index"] = report.hill_index;
    j["heavy_tail_flag"] = report.heavy_tail_flag;
    j["critical_alpha"] = report.critical_alpha;
    j["note"] = report.note;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_path_csv(const std::string& path, const PathSample& sample) {
    auto out = open_out(path);
    const std::size_t spec_hash = std::hash<std::string>{}(sample.spec_tag);
    char head[96];
    std::snprintf(head, sizeof(head), "value[spec=%zx seed=%llu stream=%llu]", spec_hash,
                  static_cast<unsigned long long>(sample.seed),
                  static_cast<unsigned long long>(sample.stream_id));
    out << head << "\n";
    for (double v : sample.values) out << format_double(v) << "\n";
}

}  // namespace cltlab
