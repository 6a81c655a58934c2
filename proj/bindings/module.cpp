#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cltlab/conditions.hpp"
#include "cltlab/config.hpp"
#include "cltlab/harness.hpp"
#include "cltlab/mixing.hpp"

namespace py = pybind11;
using namespace cltlab;

namespace {

std::vector<std::string> tokens(const std::string& text) {
    std::istringstream is(text);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

DistributionSpec dist_of(const std::string& text) {
    return distribution_from_tokens(tokens(text));
}

FiniteStateMarkov chain_of(const std::vector<double>& states,
                           const std::vector<std::vector<double>>& rows) {
    FiniteStateMarkov c;
    c.states = states;
    c.rows = rows;
    ProcessSpec spec = c;
    validate(spec);
    return std::get<FiniteStateMarkov>(spec.as_variant());
}

}  // namespace

PYBIND11_MODULE(_cltlab, m) {
    m.doc() =
        "simulation laboratory for limit theorems of dependent sequences: "
        "quantile transforms, mixing coefficients, condition checks, and the "
        "Monte-Carlo statistic pipeline";

    // Laws are tagged token strings, e.g. "uniform01", "pareto 1 4",
    // "discrete 0 1 0.25 0.75".
    m.def("quantile", [](const std::string& d, double u) {
        return upper_tail_quantile(dist_of(d), u);
    }, py::arg("dist"), py::arg("u"));
    m.def("integrated_quantile", [](const std::string& d, double x) {
        return integrated_quantile(dist_of(d), x);
    }, py::arg("dist"), py::arg("x"));
    m.def("integrated_square_quantile", [](const std::string& d, double x) {
        return integrated_square_quantile(dist_of(d), x);
    }, py::arg("dist"), py::arg("x"));
    m.def("g_inverse", [](const std::string& d, double y) {
        return g_inverse(dist_of(d), y);
    }, py::arg("dist"), py::arg("y"));
    m.def("moment", [](const std::string& d, double order) {
        return moment(dist_of(d), order);
    }, py::arg("dist"), py::arg("order"));

    m.def("lsv_map", &lsv_map, py::arg("gamma"), py::arg("x"));
    m.def("observable_threshold", [](double gamma, double p, const std::string& kind) {
        const ObservableKind k = kind == "inv_pow_right" ? ObservableKind::InvPowRight
                                                         : ObservableKind::InvPow;
        const ThresholdResult t = lsv_observable_threshold(gamma, p, k);
        return py::make_tuple(t.critical_alpha, t.admissible);
    }, py::arg("gamma"), py::arg("p"), py::arg("kind") = "inv_pow");

    m.def("beta_tilde_exact", [](const std::vector<double>& states,
                                 const std::vector<std::vector<double>>& rows,
                                 std::size_t k) {
        return beta_tilde_exact_markov(chain_of(states, rows), k);
    }, py::arg("states"), py::arg("rows"), py::arg("k"));

    m.def("series_verdict", [](const std::string& dist, const std::string& profile,
                               std::size_t n_max, bool strict) {
        const MixingProfile prof =
            profile_theoretical(rate_family_from_tokens(tokens(profile)), n_max);
        const ConditionReport rep =
            series_quantile_integral(prof, dist_of(dist), n_max, strict);
        return to_json(rep);
    }, py::arg("dist"), py::arg("profile"), py::arg("n_max") = 1024,
       py::arg("strict") = false);

    m.def("generate_path", [](const std::string& config_text, std::size_t n,
                              std::uint64_t seed, std::uint64_t stream) {
        const ProcessSpec spec = process_from_config(parse_config(config_text));
        RngStream rng(seed, stream);
        return generate_path(spec, n, rng).values;
    }, py::arg("config_text"), py::arg("n"), py::arg("seed") = 1,
       py::arg("stream") = 0);

    m.def("compare_samples", [](std::vector<double> a, std::vector<double> b) {
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        const DistanceResult d = compare_distributions(a, b);
        return py::make_tuple(d.ks, d.w1);
    }, py::arg("a"), py::arg("b"));

    m.def("run_experiment", [](const std::string& config_text) {
        const ExperimentConfig cfg = experiment_from_config(parse_config(config_text));
        const CltResult res = run_clt_experiment(cfg);
        py::dict out;
        out["ns"] = res.ns;
        std::vector<double> ks, w1, means;
        for (const auto& d : res.to_limit) {
            ks.push_back(d.ks);
            w1.push_back(d.w1);
        }
        for (const auto& sample : res.statistic_samples) {
            double acc = 0.0;
            for (double v : sample) acc += v;
            means.push_back(acc / static_cast<double>(sample.size()));
        }
        out["ks_to_limit"] = ks;
        out["w1_to_limit"] = w1;
        out["statistic_mean"] = means;
        out["ks_consecutive"] = res.ks_consecutive;
        out["clip_total"] = res.clip_total;
        return out;
    }, py::arg("config_text"));
}
