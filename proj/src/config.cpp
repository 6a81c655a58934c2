#include "cltlab/config.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>

namespace cltlab {

const ConfigSection* ConfigFile::find(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

const ConfigEntry* ConfigFile::find(const std::string& section,
                                    const std::string& key) const {
    const ConfigSection* s = find(section);
    if (!s) return nullptr;
    for (const auto& e : s->entries)
        if (e.key == key) return &e;
    return nullptr;
}

std::vector<const ConfigEntry*> ConfigFile::all(const std::string& section,
                                                const std::string& key) const {
    std::vector<const ConfigEntry*> out;
    if (const ConfigSection* s = find(section))
        for (const auto& e : s->entries)
            if (e.key == key) out.push_back(&e);
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

ConfigFile parse_config(const std::string& text) {
    ConfigFile cfg;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = raw;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ConfigError("malformed section header", line_no);
            const std::string name = trim(line.substr(1, line.size() - 2));
            // A repeated header continues the earlier section.
            const auto it = std::find_if(cfg.sections.begin(), cfg.sections.end(),
                                         [&](const ConfigSection& s) { return s.name == name; });
            if (it == cfg.sections.end())
                cfg.sections.push_back({name, {}});
            else
                std::rotate(it, it + 1, cfg.sections.end());
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = values'", line_no);
        if (cfg.sections.empty())
            throw ConfigError("entry before any [section]", line_no);
        ConfigEntry entry;
        entry.key = trim(line.substr(0, eq));
        entry.values = split_ws(line.substr(eq + 1));
        if (entry.key.empty()) throw ConfigError("empty key", line_no);
        cfg.sections.back().entries.push_back(std::move(entry));
    }
    return cfg;
}

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ConfigFile& config) {
    std::ostringstream os;
    bool first = true;
    for (const auto& s : config.sections) {
        if (!first) os << "\n";
        first = false;
        os << "[" << s.name << "]\n";
        for (const auto& e : s.entries) {
            os << e.key << " =";
            for (const auto& v : e.values) os << " " << v;
            os << "\n";
        }
    }
    return os.str();
}

// ---- builders --------------------------------------------------------------

namespace {

double to_double(const std::string& tok, const std::string& field) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("field '" + field + "': not a number: " + tok, 0);
    }
}

std::uint64_t to_u64(const std::string& tok, const std::string& field) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("field '" + field + "': not a count: " + tok, 0);
    }
}

std::vector<double> to_doubles(const std::vector<std::string>& toks, std::size_t from,
                               const std::string& field) {
    std::vector<double> out;
    for (std::size_t i = from; i < toks.size(); ++i)
        out.push_back(to_double(toks[i], field));
    return out;
}

void need(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message, 0);
}

std::vector<double> load_sample_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sample CSV: " + path, 0);
    std::string line;
    std::getline(in, line);  // mandatory header row
    std::vector<double> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        try {
            out.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw ConfigError("sample CSV " + path + ": bad value", line_no);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

DistributionSpec distribution_from_tokens(const std::vector<std::string>& tokens) {
    need(!tokens.empty(), "distribution: missing variant tag");
    const std::string& tag = tokens[0];
    if (tag == "uniform01") return Uniform01{};
    if (tag == "pareto") {
        need(tokens.size() == 3, "distribution pareto: want 'pareto <scale> <exponent>'");
        return ParetoTail{to_double(tokens[1], "pareto scale"),
                          to_double(tokens[2], "pareto exponent")};
    }
    if (tag == "pointmass") {
        need(tokens.size() == 2, "distribution pointmass: want 'pointmass <value>'");
        return PointMass{to_double(tokens[1], "pointmass value")};
    }
    if (tag == "empirical") {
        need(tokens.size() == 2, "distribution empirical: want 'empirical <csv path>'");
        return Empirical{load_sample_csv(tokens[1])};
    }
    if (tag == "discrete") {
        need(tokens.size() >= 3 && tokens.size() % 2 == 1,
             "distribution discrete: want 'discrete v1 p1 v2 p2 ...'");
        Discrete d;
        for (std::size_t i = 1; i + 1 < tokens.size(); i += 2) {
            d.values.push_back(to_double(tokens[i], "discrete value"));
            d.probs.push_back(to_double(tokens[i + 1], "discrete prob"));
        }
        return d;
    }
    if (tag == "table") {
        need(tokens.size() >= 5 && tokens.size() % 2 == 1,
             "distribution table: want 'table t1 s1 t2 s2 ...' with >= 2 nodes");
        TableSurvival t;
        for (std::size_t i = 1; i + 1 < tokens.size(); i += 2) {
            t.ts.push_back(to_double(tokens[i], "table t"));
            t.ss.push_back(to_double(tokens[i + 1], "table s"));
        }
        return t;
    }
    throw ConfigError("distribution: unknown variant '" + tag + "'", 0);
}

MeasureSpec measure_from_tokens(const std::vector<std::string>& tokens) {
    need(!tokens.empty(), "measure: missing variant tag");
    const std::string& tag = tokens[0];
    if (tag == "lebesgue_interval") {
        need(tokens.size() == 3, "measure: want 'lebesgue_interval <a> <b>'");
        return LebesgueInterval{to_double(tokens[1], "interval a"),
                                to_double(tokens[2], "interval b")};
    }
    if (tag == "lebesgue_line") {
        need(tokens.size() == 1, "measure: 'lebesgue_line' takes no parameters");
        return LebesgueLine{};
    }
    if (tag == "density") {
        need(tokens.size() >= 5, "measure: want 'density <a> <b> v1 v2 ...'");
        DensityWeighted d;
        d.a = to_double(tokens[1], "density a");
        d.b = to_double(tokens[2], "density b");
        d.density = to_doubles(tokens, 3, "density value");
        return d;
    }
    if (tag == "atomic") {
        need(tokens.size() >= 3 && tokens.size() % 2 == 1,
             "measure: want 'atomic loc1 mass1 loc2 mass2 ...'");
        Atomic a;
        for (std::size_t i = 1; i + 1 < tokens.size(); i += 2)
            a.atoms.emplace_back(to_double(tokens[i], "atom location"),
                                 to_double(tokens[i + 1], "atom mass"));
        return a;
    }
    throw ConfigError("measure: unknown variant '" + tag + "'", 0);
}

Observable observable_from_tokens(const std::vector<std::string>& tokens) {
    need(!tokens.empty(), "observable: missing variant tag");
    const std::string& tag = tokens[0];
    if (tag == "identity") return ObsIdentity{};
    if (tag == "inv_pow") {
        need(tokens.size() == 2, "observable: want 'inv_pow <alpha>'");
        return ObsInvPow{to_double(tokens[1], "inv_pow alpha")};
    }
    if (tag == "inv_pow_right") {
        need(tokens.size() == 2, "observable: want 'inv_pow_right <alpha>'");
        return ObsInvPowRight{to_double(tokens[1], "inv_pow_right alpha")};
    }
    if (tag == "table") {
        need(tokens.size() >= 5 && tokens.size() % 2 == 1,
             "observable: want 'table x1 y1 x2 y2 ...'");
        ObsMonotoneTable t;
        for (std::size_t i = 1; i + 1 < tokens.size(); i += 2) {
            t.xs.push_back(to_double(tokens[i], "observable x"));
            t.ys.push_back(to_double(tokens[i + 1], "observable y"));
        }
        return t;
    }
    throw ConfigError("observable: unknown variant '" + tag + "'", 0);
}

ProcessSpec process_from_config(const ConfigFile& config) {
    const ConfigSection* sec = config.find("process");
    need(sec != nullptr, "missing [process] section");
    const ConfigEntry* kind = config.find("process", "kind");
    need(kind && kind->values.size() == 1, "[process] needs 'kind = <variant>'");
    const std::string& tag = kind->values[0];

    ProcessSpec base = IIDProcess{};
    if (tag == "iid") {
        const ConfigEntry* dist = config.find("process", "dist");
        need(dist != nullptr, "[process] iid needs 'dist = ...'");
        base = IIDProcess{distribution_from_tokens(dist->values)};
    } else if (tag == "markov") {
        FiniteStateMarkov chain;
        const ConfigEntry* states = config.find("process", "states");
        need(states != nullptr, "[process] markov needs 'states = ...'");
        chain.states = to_doubles(states->values, 0, "states");
        for (const ConfigEntry* row : config.all("process", "row"))
            chain.rows.push_back(to_doubles(row->values, 0, "row"));
        need(!chain.rows.empty(), "[process] markov needs one 'row = ...' per state");
        if (const ConfigEntry* st = config.find("process", "stationary"))
            chain.stationary = to_doubles(st->values, 0, "stationary");
        base = chain;
    } else if (tag == "lsv_orbit" || tag == "lsv_dual") {
        const ConfigEntry* g = config.find("process", "gamma");
        need(g && g->values.size() == 1, "[process] lsv needs 'gamma = <value>'");
        const double gamma = to_double(g->values[0], "gamma");
        std::size_t burn_in = 10000;
        if (const ConfigEntry* b = config.find("process", "burn_in"))
            burn_in = to_u64(b->values.at(0), "burn_in");
        if (tag == "lsv_orbit")
            base = LSVOrbit{gamma, burn_in};
        else
            base = LSVDual{gamma, burn_in};
    } else {
        throw ConfigError("[process] unknown kind '" + tag + "'", 0);
    }

    if (const ConfigEntry* obs = config.find("process", "observable")) {
        const Observable o = observable_from_tokens(obs->values);
        if (!std::holds_alternative<ObsIdentity>(o))
            base = ComposedProcess{std::make_shared<ProcessSpec>(std::move(base)), o};
    }
    ProcessSpec spec = std::move(base);
    validate(spec);
    return spec;
}

RateFamily rate_family_from_tokens(const std::vector<std::string>& tokens) {
    need(!tokens.empty(), "profile: missing family tag");
    const std::string& tag = tokens[0];
    if (tag == "polynomial") {
        need(tokens.size() == 3, "profile: want 'polynomial <C> <s>'");
        return PolynomialRate{to_double(tokens[1], "polynomial C"),
                              to_double(tokens[2], "polynomial s")};
    }
    if (tag == "exponential") {
        need(tokens.size() == 4, "profile: want 'exponential <C> <tau> <a>'");
        return ExponentialRate{to_double(tokens[1], "exponential C"),
                               to_double(tokens[2], "exponential tau"),
                               to_double(tokens[3], "exponential a")};
    }
    throw ConfigError("profile: unknown family '" + tag + "'", 0);
}

ExperimentConfig experiment_from_config(const ConfigFile& config) {
    ExperimentConfig cfg;
    cfg.process = process_from_config(config);
    const ConfigEntry* measure = config.find("measure", "kind");
    need(measure != nullptr, "missing [measure] section with 'kind = ...'");
    cfg.measure = measure_from_tokens(measure->values);

    const ConfigSection* exp = config.find("experiment");
    need(exp != nullptr, "missing [experiment] section");
    for (const auto& e : exp->entries) {
        if (e.key == "name") {
            need(e.values.size() == 1, "experiment name: one token");
            cfg.name = e.values[0];
        } else if (e.key == "p") {
            cfg.p = to_double(e.values.at(0), "p");
        } else if (e.key == "grid_cells") {
            cfg.grid_cells = to_u64(e.values.at(0), "grid_cells");
        } else if (e.key == "n_schedule") {
            cfg.n_schedule.clear();
            for (const auto& v : e.values) cfg.n_schedule.push_back(to_u64(v, "n_schedule"));
        } else if (e.key == "replicates") {
            cfg.replicates = to_u64(e.values.at(0), "replicates");
        } else if (e.key == "max_lag") {
            cfg.max_lag = to_u64(e.values.at(0), "max_lag");
        } else if (e.key == "levels") {
            cfg.levels.clear();
            for (const auto& v : e.values)
                cfg.levels.push_back(static_cast<int>(to_u64(v, "levels")));
        } else if (e.key == "cov_budget") {
            cfg.cov_budget = to_u64(e.values.at(0), "cov_budget");
        } else if (e.key == "calibration") {
            cfg.calibration = to_u64(e.values.at(0), "calibration");
        } else if (e.key == "seed") {
            cfg.seed = to_u64(e.values.at(0), "seed");
        } else if (e.key == "jobs") {
            cfg.jobs = to_u64(e.values.at(0), "jobs");
        } else {
            throw ConfigError("[experiment] unknown key '" + e.key + "'", 0);
        }
    }
    validate(cfg);
    return cfg;
}

}  // namespace cltlab
