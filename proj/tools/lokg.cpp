#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lokg/error.hpp"
#include "lokg/pipeline.hpp"

namespace {

struct Options {
    std::string config_path;
    std::string dataset;
    std::string output;
    std::string bc;
    std::optional<std::size_t> jobs;
    bool dry_run = false;
    bool reproducible = false;
};

lokg::RunConfig resolve_config(const Options& o) {
    std::string path = o.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("LOKG_CONFIG"); env != nullptr) path = env;
    }
    lokg::RunConfig c = path.empty() ? lokg::RunConfig{} : lokg::load_config(path);
    if (!o.dataset.empty()) c.dataset = o.dataset;
    if (!o.output.empty()) c.output_dir = o.output;
    if (!o.bc.empty()) lokg::parse_bc_flag(o.bc, c.metrics);
    if (o.jobs) c.apply_jobs(*o.jobs);
    c.validate();
    return c;
}

void print(const lokg::StageResult& r) {
    std::cout << r.summary.dump(2) << "\n";
    for (const auto& p : r.written) std::cerr << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lokg: hierarchical learning-object taxonomy to knowledge graph"};
    app.require_subcommand(1);
    Options o;
    app.add_option("-c,--config", o.config_path, "Run configuration (INI); falls back to $LOKG_CONFIG");
    app.add_option("--dataset", o.dataset, "Override [dataset] path");
    app.add_option("-o,--output", o.output, "Override [output] dir");
    app.add_option("--bc", o.bc, "Betweenness mode: exact or pivot:k");
    app.add_option("-j,--jobs", o.jobs, "Worker threads (0 = all cores)");
    app.add_flag("--dry-run", o.dry_run, "Validate only, write nothing");
    app.add_flag("--reproducible", o.reproducible, "Leave timestamps out of the report");

    std::function<lokg::StageResult(const lokg::RunConfig&)> action;
    auto stage = [&](const char* name, const char* help, auto fn) {
        auto* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        sub->callback([&action, fn, &o] { action = [fn, &o](const lokg::RunConfig& c) { return fn(c, o); }; });
        return sub;
    };
    stage("ingest", "Parse and filter the dataset", [](const auto& c, const Options& opt) { return lokg::cmd_ingest(c, opt.dry_run); });
    stage("mine", "Mine semantic relations", [](const auto& c, const Options& opt) { return lokg::cmd_mine(c, opt.dry_run); });
    stage("build", "Build the knowledge graph", [](const auto& c, const Options& opt) { return lokg::cmd_build(c, opt.dry_run); });
    stage("metrics", "Graph quality metrics, hierarchy vs completed graph",
          [](const auto& c, const Options& opt) { return lokg::cmd_metrics(c, opt.dry_run); });
    stage("evaluate", "Relation quality assessment",
          [](const auto& c, const Options& opt) { return lokg::cmd_evaluate(c, opt.dry_run); });
    stage("report", "Assemble the run report",
          [](const auto& c, const Options& opt) { return lokg::cmd_report(c, opt.reproducible, opt.dry_run); });
    stage("run", "All stages in order", [](const auto& c, const Options& opt) {
        if (opt.dry_run) return lokg::cmd_ingest(c, true);
        return lokg::run_all(c, opt.reproducible);
    });

    std::string synth_out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> journeys;
    std::optional<int> domains;
    std::optional<double> overlap, bilingual;
    auto* gen = app.add_subcommand("gen-synth", "Write a synthetic dataset and its labels");
    gen->fallthrough();
    gen->add_option("--out", synth_out, "Dataset path (labels go to <stem>.labels.json)")->required();
    gen->add_option("--seed", seed);
    gen->add_option("--journeys", journeys);
    gen->add_option("--domains", domains);
    gen->add_option("--overlap", overlap);
    gen->add_option("--bilingual", bilingual);

    auto* config = app.add_subcommand("config", "Configuration helpers");
    config->require_subcommand(1);
    auto* defaults = config->add_subcommand("print-defaults", "Print the default configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (defaults->parsed()) {
            std::cout << lokg::RunConfig{}.to_ini();
            return 0;
        }
        if (gen->parsed()) {
            auto spec = (o.config_path.empty() && std::getenv("LOKG_CONFIG") == nullptr) ? lokg::GeneratorSpec{}
                                                                                          : resolve_config(o).synth;
            if (seed) spec.seed = *seed;
            if (journeys) spec.journeys = *journeys;
            if (domains) spec.n_domains = *domains;
            if (overlap) spec.overlap = *overlap;
            if (bilingual) spec.bilingual_fraction = *bilingual;
            spec.validate();
            if (o.dry_run) {
                std::cout << spec.to_json().dump(2) << "\n";
                return 0;
            }
            print(lokg::cmd_gen_synth(spec, synth_out));
            return 0;
        }
        const auto cfg = resolve_config(o);
        print(action(cfg));
        return 0;
    } catch (const lokg::Error& e) {
        std::cerr << "lokg: " << e.what() << "\n";
        return lokg::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "lokg: " << e.what() << "\n";
        return 1;
    }
}
