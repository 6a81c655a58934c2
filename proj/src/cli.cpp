#include "cltlab/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cltlab/config.hpp"
#include "cltlab/harness.hpp"
#include "cltlab/report.hpp"

namespace fs = std::filesystem;

namespace cltlab {

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
    std::size_t jobs = 1;
    bool force = false;
    bool strict = false;
};

void add_common(CLI::App* sub, CommonOptions& opt, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config_path, "experiment config file");
    if (needs_config) c->required();
    sub->add_option("--seed", opt.seed, "seed override");
    sub->add_option("--out", opt.out, "output directory (default: $CLTLAB_OUT/<name>)");
    sub->add_option("--format", opt.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--jobs", opt.jobs, "worker thread cap");
    sub->add_flag("--force", opt.force, "overwrite existing output directories");
    sub->add_flag("--strict", opt.strict, "condition checks report partial sums only");
}

OutputFormat parse_format(const CommonOptions& opt) {
    return opt.format == "json" ? OutputFormat::Json : OutputFormat::Csv;
}

std::string resolve_out(const CommonOptions& opt, const std::string& name) {
    if (!opt.out.empty()) return opt.out;
    const char* root = std::getenv("CLTLAB_OUT");
    return (fs::path(root && *root ? root : "out") / name).string();
}

ConfigFile load(const CommonOptions& opt) {
    if (!fs::exists(opt.config_path))
        throw ConfigError("config file not found: " + opt.config_path, 0);
    return load_config(opt.config_path);
}

std::uint64_t entry_u64(const ConfigFile& cfg, const std::string& section,
                        const std::string& key, std::uint64_t fallback) {
    const ConfigEntry* e = cfg.find(section, key);
    if (!e) return fallback;
    try {
        return std::stoull(e->values.at(0));
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": not a count", 0);
    }
}

double entry_double(const ConfigFile& cfg, const std::string& section,
                    const std::string& key, double fallback) {
    const ConfigEntry* e = cfg.find(section, key);
    if (!e) return fallback;
    try {
        return std::stod(e->values.at(0));
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": not a number", 0);
    }
}

std::vector<std::size_t> entry_schedule(const ConfigFile& cfg, const std::string& section,
                                        const std::string& key,
                                        std::vector<std::size_t> fallback) {
    const ConfigEntry* e = cfg.find(section, key);
    if (!e) return fallback;
    std::vector<std::size_t> out;
    for (const auto& v : e->values) {
        try {
            out.push_back(std::stoull(v));
        } catch (const std::exception&) {
            throw ConfigError("[" + section + "] " + key + ": not a count", 0);
        }
    }
    return out;
}

void write_meta(const std::string& dir, const std::string& command, std::uint64_t seed,
                const std::string& config_text) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["seed"] = seed;
    j["config_text"] = config_text;
    std::ofstream out(fs::path(dir) / "meta.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

// ---- subcommand bodies -----------------------------------------------------

int cmd_simulate(const CommonOptions& opt, std::size_t n) {
    const ConfigFile cfg = load(opt);
    const ProcessSpec spec = process_from_config(cfg);
    const std::uint64_t seed = opt.seed.value_or(entry_u64(cfg, "experiment", "seed", 1));
    RngStream rng(seed, 0);
    PathSample path = generate_path(spec, n, rng);
    path.seed = seed;
    const std::string dir = prepare_bundle_dir(resolve_out(opt, "simulate"), opt.force);
    write_path_csv((fs::path(dir) / "path.csv").string(), path);
    write_meta(dir, "simulate", seed, serialize_config(cfg));
    std::cout << dir << "\n";
    return 0;
}

int cmd_mixing(const CommonOptions& opt) {
    const ConfigFile cfg = load(opt);
    const std::uint64_t seed = opt.seed.value_or(entry_u64(cfg, "mixing", "seed", 1));
    const std::size_t k_max = entry_u64(cfg, "mixing", "k_max", 20);
    const ConfigEntry* mode = cfg.find("mixing", "mode");
    if (!mode) throw ConfigError("[mixing] needs 'mode = exact|empirical|theoretical'", 0);

    MixingProfile profile;
    if (mode->values.at(0) == "theoretical") {
        const ConfigEntry* fam = cfg.find("mixing", "profile");
        if (!fam) throw ConfigError("[mixing] theoretical needs 'profile = ...'", 0);
        profile = profile_theoretical(rate_family_from_tokens(fam->values), k_max);
    } else if (mode->values.at(0) == "exact") {
        const ProcessSpec spec = process_from_config(cfg);
        const auto* chain = std::get_if<FiniteStateMarkov>(&spec.as_variant());
        if (!chain)
            throw ConfigError("[mixing] exact mode needs a finite-state markov process", 0);
        profile = profile_exact_markov(*chain, k_max);
    } else if (mode->values.at(0) == "empirical") {
        const ProcessSpec spec = process_from_config(cfg);
        const std::size_t replicates = entry_u64(cfg, "mixing", "replicates", 200);
        const std::size_t pairs = entry_u64(cfg, "mixing", "pairs", 2000);
        const std::size_t bins = entry_u64(cfg, "mixing", "bins", 16);
        // Threshold grid: state values for chains, marginal quantiles otherwise.
        std::vector<double> thresholds;
        if (const auto* chain = std::get_if<FiniteStateMarkov>(&spec.as_variant())) {
            thresholds = chain->states;
        } else {
            RngStream cal(seed, 1);
            PathSample calib = generate_path(spec, 65536, cal);
            std::sort(calib.values.begin(), calib.values.end());
            const std::size_t T = entry_u64(cfg, "mixing", "thresholds", 256);
            for (std::size_t t = 0; t < T; ++t)
                thresholds.push_back(
                    calib.values[(t + 1) * calib.values.size() / (T + 1)]);
            thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                             thresholds.end());
        }
        profile.provenance = ProfileKind::Empirical;
        for (std::size_t k = 0; k <= k_max; ++k) {
            RngStream rng(seed, 1000 + k);
            const BetaEstimate est =
                beta_tilde_empirical(spec, k, replicates, thresholds, rng, pairs, bins);
            profile.values.push_back(est.estimate);
            profile.std_errors.push_back(est.std_error);
        }
    } else {
        throw ConfigError("[mixing] unknown mode '" + mode->values.at(0) + "'", 0);
    }
    const std::string dir = prepare_bundle_dir(resolve_out(opt, "mixing"), opt.force);
    write_mixing_profile((fs::path(dir) / "profile.csv").string(), profile);
    write_meta(dir, "mixing", seed, serialize_config(cfg));
    std::cout << dir << "\n";
    return 0;
}

int cmd_check(const CommonOptions& opt) {
    const ConfigFile cfg = load(opt);
    const ConfigEntry* dist_e = cfg.find("check", "dist");
    const ConfigEntry* fam_e = cfg.find("check", "profile");
    if (!dist_e || !fam_e)
        throw ConfigError("[check] needs 'dist = ...' and 'profile = ...'", 0);
    const DistributionSpec dist = distribution_from_tokens(dist_e->values);
    const RateFamily family = rate_family_from_tokens(fam_e->values);
    const std::size_t n_max = entry_u64(cfg, "check", "n_max", 4096);
    const MixingProfile profile = profile_theoretical(family, n_max);

    const ConditionReport series =
        series_quantile_integral(profile, dist, n_max, opt.strict);
    nlohmann::json j = nlohmann::json::parse(to_json(series));

    if (const ConfigEntry* hyp = cfg.find("check", "hypothesis")) {
        RateHypothesis h;
        const auto& v = hyp->values;
        if (v.at(0) == "moment" && v.size() == 2)
            h = MomentHypothesis{std::stod(v[1])};
        else if (v.at(0) == "tail" && v.size() == 3)
            h = TailHypothesis{std::stod(v[1]), std::stod(v[2])};
        else if (v.at(0) == "logmoment" && v.size() == 3)
            h = LogMomentHypothesis{std::stod(v[1]), std::stod(v[2])};
        else
            throw ConfigError(
                "[check] hypothesis: want 'moment r' | 'tail r c' | 'logmoment a tau'", 0);
        const RateCheckResult rc = rate_condition_check(h, dist, profile, opt.strict);
        j["rate_check"] = {{"satisfied", rc.satisfied},
                           {"hypothesis_ok", rc.hypothesis_ok},
                           {"evidence", rc.evidence},
                           {"series", nlohmann::json::parse(to_json(rc.series))}};
    }
    const std::string text = j.dump(2);
    std::cout << text << "\n";
    if (!opt.out.empty()) {
        const std::string dir = prepare_bundle_dir(opt.out, opt.force);
        std::ofstream out(fs::path(dir) / "report.json", std::ios::binary);
        out << text << "\n";
    }
    return 0;
}

int cmd_verify(const CommonOptions& opt) {
    const ConfigFile cfg = load(opt);
    ExperimentConfig exp = experiment_from_config(cfg);
    if (opt.seed) exp.seed = *opt.seed;
    if (opt.jobs > 1) exp.jobs = opt.jobs;
    const CltResult result = run_clt_experiment(exp);
    const std::string dir = write_bundle(resolve_out(opt, exp.name), exp,
                                         serialize_config(cfg), result,
                                         parse_format(opt), opt.force);
    std::cout << dir << "\n";
    return 0;
}

int cmd_diagnose(const CommonOptions& opt) {
    const ConfigFile cfg = load(opt);
    const ProcessSpec spec = process_from_config(cfg);
    const auto* chain = std::get_if<FiniteStateMarkov>(&spec.as_variant());
    if (!chain)
        throw ConfigError("diagnose needs a finite-state markov [process]", 0);
    ExperimentConfig exp = experiment_from_config(cfg);
    if (opt.seed) exp.seed = *opt.seed;
    const GridMeasure grid = grid_from_measure(exp.measure, exp.grid_cells, exp.p);
    const DiagnosticsReport rep =
        martingale_diagnostics(*chain, grid, exp.n_schedule, exp.levels, exp.seed);
    const std::string dir = prepare_bundle_dir(resolve_out(opt, exp.name), opt.force);
    write_diagnostics(dir, rep);
    write_meta(dir, "diagnose", exp.seed, serialize_config(cfg));
    std::cout << dir << "\n";
    return 0;
}

int cmd_probe(const CommonOptions& opt) {
    const ConfigFile cfg = load(opt);
    if (!cfg.find("probe")) throw ConfigError("missing [probe] section", 0);
    const double gamma = entry_double(cfg, "probe", "gamma", 0.25);
    const double p = entry_double(cfg, "probe", "p", 2.0);
    const double alpha = entry_double(cfg, "probe", "alpha", 1.0);
    const double truncation = entry_double(cfg, "probe", "truncation", 50.0);
    const std::size_t grid_cells = entry_u64(cfg, "probe", "grid_cells", 64);
    const std::size_t replicates = entry_u64(cfg, "probe", "replicates", 200);
    const std::uint64_t seed = opt.seed.value_or(entry_u64(cfg, "probe", "seed", 1));
    const auto schedule =
        entry_schedule(cfg, "probe", "n_schedule", {512, 1024, 2048, 4096});
    ObservableKind kind = ObservableKind::InvPow;
    if (const ConfigEntry* k = cfg.find("probe", "kind")) {
        if (k->values.at(0) == "inv_pow_right")
            kind = ObservableKind::InvPowRight;
        else if (k->values.at(0) != "inv_pow")
            throw ConfigError("[probe] kind: want inv_pow or inv_pow_right", 0);
    }
    const ProbeReport rep = divergence_probe(gamma, p, alpha, kind, schedule, replicates,
                                             seed, opt.jobs, truncation, grid_cells);
    const std::string dir = prepare_bundle_dir(resolve_out(opt, "probe"), opt.force);
    write_probe_report((fs::path(dir) / "probe.json").string(), rep);
    write_meta(dir, "probe", seed, serialize_config(cfg));
    std::cout << dir << "\n";
    return 0;
}

int cmd_report(const CommonOptions& opt) {
    if (opt.out.empty()) throw ConfigError("report: --out must name a bundle directory", 0);
    const fs::path summary = fs::path(opt.out) / "summary.json";
    if (!fs::exists(summary))
        throw ConfigError("report: no summary.json in " + opt.out, 0);
    std::ifstream in(summary);
    nlohmann::json j;
    in >> j;
    if (parse_format(opt) == OutputFormat::Json) {
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "name: " << j.value("name", std::string("?")) << "\n";
    std::cout << "seed: " << j.value("seed", 0ULL) << "\n";
    std::cout << "n,ks,w1\n";
    for (const auto& row : j["to_limit"])
        std::cout << row["n"].get<std::uint64_t>() << ","
                  << format_double(row["ks"].get<double>()) << ","
                  << format_double(row["w1"].get<double>()) << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"simulation laboratory for dependent-sequence limit theorems"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::size_t simulate_n = 1024;

    CLI::App* simulate = app.add_subcommand("simulate", "generate a stationary path");
    add_common(simulate, opt, true);
    simulate->add_option("--n", simulate_n, "path length");
    CLI::App* mixing = app.add_subcommand("mixing", "mixing-coefficient profiles");
    add_common(mixing, opt, true);
    CLI::App* check = app.add_subcommand("check", "evaluate summability conditions");
    add_common(check, opt, true);
    CLI::App* verify = app.add_subcommand("verify", "run the Monte-Carlo limit experiment");
    add_common(verify, opt, true);
    CLI::App* diagnose = app.add_subcommand("diagnose", "block-martingale diagnostics");
    add_common(diagnose, opt, true);
    CLI::App* probe = app.add_subcommand("probe", "divergence probe for heavy observables");
    add_common(probe, opt, true);
    CLI::App* report = app.add_subcommand("report", "summarize an existing bundle");
    add_common(report, opt, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(opt, simulate_n);
        if (mixing->parsed()) return cmd_mixing(opt);
        if (check->parsed()) return cmd_check(opt);
        if (verify->parsed()) return cmd_verify(opt);
        if (diagnose->parsed()) return cmd_diagnose(opt);
        if (probe->parsed()) return cmd_probe(opt);
        if (report->parsed()) return cmd_report(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        std::cerr << "partial output may remain in the target directory\n";
        return 2;
    }
    return 1;
}

}  // namespace cltlab
