// Thin bindings; structured values cross the boundary as JSON text and are
// decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lokg/error.hpp"
#include "lokg/evaluation.hpp"
#include "lokg/kg.hpp"
#include "lokg/metrics.hpp"
#include "lokg/pipeline.hpp"
#include "lokg/synth.hpp"
#include "lokg/text.hpp"
#include "lokg/tmp.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

lokg::GeneratorSpec spec_from(std::uint64_t seed, std::size_t journeys, int n_domains, double overlap,
                              double bilingual) {
    lokg::GeneratorSpec s;
    s.seed = seed;
    s.journeys = journeys;
    s.n_domains = n_domains;
    s.overlap = overlap;
    s.bilingual_fraction = bilingual;
    s.validate();
    return s;
}

std::string mine(const std::string& document, double threshold, std::size_t jobs) {
    const auto forest = lokg::parse_taxonomy(document);
    lokg::TmpConfig cfg;
    cfg.threshold = threshold;
    cfg.jobs = jobs;
    lokg::SimilarityEngine engine(lokg::builtin_providers(), cfg);
    const auto r = lokg::mine_relations(forest, engine);
    json passed = json::array();
    for (const auto& v : r.passed) passed.push_back(lokg::verdict_to_json(v));
    return json{{"candidate_pairs", r.candidate_pairs},
                {"evaluated", r.evaluated.size()},
                {"failures", r.failures.size()},
                {"passed", passed}}
        .dump();
}

std::string build(const std::string& document, const std::string& verdicts) {
    std::vector<lokg::SimilarityVerdict> vs;
    for (const auto& j : json::parse(verdicts)) vs.push_back(lokg::verdict_from_json(j));
    return lokg::serialize_kg(lokg::build_kg(lokg::parse_taxonomy(document), vs));
}

std::string metrics(const std::string& kg_document, const std::string& bc) {
    lokg::MetricsConfig mc;
    lokg::parse_bc_flag(bc, mc);
    const auto kg = lokg::parse_kg(kg_document);
    return lokg::compare_reports(lokg::full_report(kg.hierarchy_only(), mc), lokg::full_report(kg, mc)).dump();
}

std::string run(const std::string& config_path, bool reproducible) {
    const auto c = lokg::load_config(config_path);
    return lokg::run_all(c, reproducible).summary.dump();
}

}  // namespace

PYBIND11_MODULE(_lokg, m) {
    m.doc() = "Learning-object taxonomy to knowledge graph";
    py::register_exception<lokg::Error>(m, "LokgError");

    m.def("clean_text", [](const std::string& s) { return lokg::clean_text(s); });
    m.def("best_match_average", &lokg::best_match_average, py::arg("matrix"));
    m.def(
        "generate",
        [](std::uint64_t seed, std::size_t journeys, int n_domains, double overlap, double bilingual) {
            const auto spec = spec_from(seed, journeys, n_domains, overlap, bilingual);
            const auto corpus = lokg::generate(spec);
            return py::make_tuple(lokg::serialize_taxonomy(corpus.forest), lokg::labels_to_json(corpus, spec).dump());
        },
        py::arg("seed") = 7, py::arg("journeys") = 20, py::arg("n_domains") = 4, py::arg("overlap") = 0.2,
        py::arg("bilingual") = 0.2);
    m.def(
        "filter",
        [](const std::string& document) {
            const auto r = lokg::filter_dataset(lokg::parse_taxonomy(document));
            return py::make_tuple(lokg::serialize_taxonomy(r.forest), lokg::filter_report_to_json(r.report).dump());
        },
        py::arg("document"));
    m.def("mine", &mine, py::arg("document"), py::arg("threshold") = 0.88, py::arg("jobs") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("build", &build, py::arg("document"), py::arg("verdicts"));
    m.def("metrics", &metrics, py::arg("kg_document"), py::arg("bc") = "exact",
          py::call_guard<py::gil_scoped_release>());
    m.def("run", &run, py::arg("config_path"), py::arg("reproducible") = true,
          py::call_guard<py::gil_scoped_release>());
    m.def("default_config", [] { return lokg::RunConfig{}.to_ini(); });
}
