#include "lokg/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lokg/error.hpp"
#include "lokg/evaluation.hpp"
#include "lokg/kg.hpp"
#include "lokg/text.hpp"

namespace lokg {

using nlohmann::json;
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::SchemaError:
        case ErrorCode::LevelViolation:
        case ErrorCode::DuplicateId:
        case ErrorCode::ConfigError:
            return 2;
        default:
            return 1;
    }
}

// ---------------------------------------------------------------------------
// configuration

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::set<std::string> provider = {"mode",       "endpoint",   "model",         "timeout_ms",
                                                   "batch_size", "max_attempts", "backoff_ms", "max_in_flight"};
    static const std::map<std::string, std::set<std::string>> keys = {
        {"dataset", {"path"}},
        {"output", {"dir"}},
        {"provider.detect", provider},
        {"provider.translate", provider},
        {"provider.embed", provider},
        {"tmp", {"threshold", "w_title", "w_desc", "k_max", "mmr_lambda", "levels", "blocking", "blocking_max_df"}},
        {"kg", {"include_intra_journey"}},
        {"metrics", {"bc", "bc_weighted", "resolution", "seed"}},
        {"evaluation", {"sample_size", "seed"}},
        {"run", {"jobs", "max_failure_fraction"}},
        {"synth",
         {"seed", "journeys", "n_domains", "overlap", "bilingual_fraction", "course_concepts", "topic_concepts"}},
    };
    return keys;
}

[[noreturn]] void bad_value(const std::string& where, const std::string& value, const char* expected) {
    throw Error(ErrorCode::ConfigError, where + ": expected " + expected + ", got '" + value + "'");
}

double to_double(const std::string& where, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) bad_value(where, v, "a number");
    return d;
}

std::uint64_t to_uint(const std::string& where, const std::string& v) {
    char* end = nullptr;
    if (v.empty() || v[0] == '-') bad_value(where, v, "a non-negative integer");
    const auto u = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size()) bad_value(where, v, "a non-negative integer");
    return u;
}

bool to_bool(const std::string& where, const std::string& v) {
    const auto l = to_lower(v);
    if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
    if (l == "false" || l == "0" || l == "no" || l == "off") return false;
    bad_value(where, v, "a boolean");
}

void apply_provider(ProviderConfig& p, const std::string& key, const std::string& where, const std::string& v) {
    if (key == "mode") {
        const auto m = parse_provider_mode(v);
        if (!m) bad_value(where, v, "builtin or external");
        p.mode = *m;
    } else if (key == "endpoint") {
        p.endpoint = v.empty() ? std::nullopt : std::optional<std::string>(v);
    } else if (key == "model") {
        p.model_name = v;
    } else if (key == "timeout_ms") {
        p.timeout = std::chrono::milliseconds(to_uint(where, v));
    } else if (key == "batch_size") {
        p.batch_size = to_uint(where, v);
    } else if (key == "max_attempts") {
        p.max_attempts = static_cast<int>(to_uint(where, v));
    } else if (key == "backoff_ms") {
        p.backoff_base = std::chrono::milliseconds(to_uint(where, v));
    } else if (key == "max_in_flight") {
        p.max_in_flight = to_uint(where, v);
    }
}

json provider_json(const ProviderConfig& p) {
    return {{"mode", std::string(to_string(p.mode))},
            {"endpoint", p.endpoint.value_or("")},
            {"model", p.model_name},
            {"timeout_ms", p.timeout.count()},
            {"batch_size", p.batch_size},
            {"max_attempts", p.max_attempts},
            {"backoff_ms", p.backoff_base.count()},
            {"max_in_flight", p.max_in_flight}};
}

void provider_ini(std::ostream& out, const char* name, const ProviderConfig& p) {
    out << "[provider." << name << "]\n"
        << "mode = " << to_string(p.mode) << "\n"
        << "endpoint = " << p.endpoint.value_or("") << "\n"
        << "model = " << p.model_name << "\n"
        << "timeout_ms = " << p.timeout.count() << "\n"
        << "batch_size = " << p.batch_size << "\n"
        << "max_attempts = " << p.max_attempts << "\n"
        << "backoff_ms = " << p.backoff_base.count() << "\n"
        << "max_in_flight = " << p.max_in_flight << "\n\n";
}

}  // namespace

void RunConfig::validate() const {
    providers.detect.validate();
    providers.translate.validate();
    providers.embed.validate();
    tmp.validate();
    metrics.validate();
    synth.validate();
    if (sample_size == 0) throw Error(ErrorCode::ConfigError, "evaluation sample_size must be at least 1");
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "max_failure_fraction must be in [0,1]");
    }
    if (output_dir.empty()) throw Error(ErrorCode::ConfigError, "output directory is empty");
}

json RunConfig::to_json() const {
    return {{"providers",
             {{"detect", provider_json(providers.detect)},
              {"translate", provider_json(providers.translate)},
              {"embed", provider_json(providers.embed)}}},
            {"tmp", tmp.to_json()},
            {"kg", {{"include_intra_journey", include_intra_journey}}},
            {"metrics",
             {{"bc", metrics.bc_flag()},
              {"bc_weighted", metrics.bc_weighted},
              {"resolution", metrics.resolution},
              {"seed", metrics.seed}}},
            {"evaluation", {{"sample_size", sample_size}, {"seed", evaluation_seed}}},
            {"run", {{"max_failure_fraction", max_failure_fraction}}},
            {"synth", synth.to_json()}};
}

std::string RunConfig::hash() const { return hex64(fnv1a64(to_json().dump())); }

void RunConfig::apply_jobs(std::size_t j) {
    jobs = j;
    tmp.jobs = j;
    metrics.jobs = j;
}

std::string RunConfig::to_ini() const {
    std::ostringstream out;
    out << "; lokg run configuration\n\n"
        << "[dataset]\npath = " << dataset.string() << "\n\n"
        << "[output]\ndir = " << output_dir.string() << "\n\n";
    provider_ini(out, "detect", providers.detect);
    provider_ini(out, "translate", providers.translate);
    provider_ini(out, "embed", providers.embed);
    out << "[tmp]\n"
        << "threshold = " << format_double(tmp.threshold) << "\n"
        << "w_title = " << format_double(tmp.w_title) << "\n"
        << "w_desc = " << format_double(tmp.w_desc) << "\n"
        << "k_max = " << tmp.k_max << "\n"
        << "mmr_lambda = " << format_double(tmp.mmr_lambda) << "\n"
        << "levels = " << format_level_pairs(tmp.enabled_levels) << "\n"
        << "blocking = " << (tmp.blocking ? "true" : "false") << "\n"
        << "blocking_max_df = " << format_double(tmp.blocking_max_df) << "\n\n"
        << "[kg]\ninclude_intra_journey = " << (include_intra_journey ? "true" : "false") << "\n\n"
        << "[metrics]\n"
        << "; exact or pivot:k\n"
        << "bc = " << metrics.bc_flag() << "\n"
        << "bc_weighted = " << (metrics.bc_weighted ? "true" : "false") << "\n"
        << "resolution = " << format_double(metrics.resolution) << "\n"
        << "seed = " << metrics.seed << "\n\n"
        << "[evaluation]\nsample_size = " << sample_size << "\nseed = " << evaluation_seed << "\n\n"
        << "[run]\n"
        << "; 0 uses every core\n"
        << "jobs = " << jobs << "\n"
        << "max_failure_fraction = " << format_double(max_failure_fraction) << "\n\n"
        << "[synth]\n"
        << "seed = " << synth.seed << "\n"
        << "journeys = " << synth.journeys << "\n"
        << "n_domains = " << synth.n_domains << "\n"
        << "overlap = " << format_double(synth.overlap) << "\n"
        << "bilingual_fraction = " << format_double(synth.bilingual_fraction) << "\n"
        << "course_concepts = " << synth.course_concepts << "\n"
        << "topic_concepts = " << synth.topic_concepts << "\n";
    return out.str();
}

RunConfig parse_config(std::string_view text, const fs::path& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(e.line()) + ": " + e.message());
    }
    RunConfig c;
    const auto& known = known_keys();
    for (const auto& [section, body] : tree) {
        auto sit = known.find(section);
        if (sit == known.end()) throw Error(ErrorCode::ConfigError, "unknown section [" + section + "]");
        if (!body.data().empty()) throw Error(ErrorCode::ConfigError, "key '" + section + "' outside a section");
        for (const auto& [key, node] : body) {
            if (!sit->second.count(key)) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in [" + section + "]");
            const auto where = "[" + section + "] " + key;
            const auto v = node.get_value<std::string>();
            if (section == "dataset") {
                c.dataset = v.empty() ? fs::path() : base_dir / v;
            } else if (section == "output") {
                c.output_dir = base_dir / v;
            } else if (section.rfind("provider.", 0) == 0) {
                const auto which = section.substr(9);
                auto& p = which == "detect" ? c.providers.detect
                                            : which == "translate" ? c.providers.translate : c.providers.embed;
                apply_provider(p, key, where, v);
            } else if (section == "tmp") {
                if (key == "threshold") c.tmp.threshold = to_double(where, v);
                if (key == "w_title") c.tmp.w_title = to_double(where, v);
                if (key == "w_desc") c.tmp.w_desc = to_double(where, v);
                if (key == "k_max") c.tmp.k_max = to_uint(where, v);
                if (key == "mmr_lambda") c.tmp.mmr_lambda = to_double(where, v);
                if (key == "levels") c.tmp.enabled_levels = parse_level_pairs(v);
                if (key == "blocking") c.tmp.blocking = to_bool(where, v);
                if (key == "blocking_max_df") c.tmp.blocking_max_df = to_double(where, v);
            } else if (section == "kg") {
                c.include_intra_journey = to_bool(where, v);
            } else if (section == "metrics") {
                if (key == "bc") parse_bc_flag(v, c.metrics);
                if (key == "bc_weighted") c.metrics.bc_weighted = to_bool(where, v);
                if (key == "resolution") c.metrics.resolution = to_double(where, v);
                if (key == "seed") c.metrics.seed = to_uint(where, v);
            } else if (section == "evaluation") {
                if (key == "sample_size") c.sample_size = to_uint(where, v);
                if (key == "seed") c.evaluation_seed = to_uint(where, v);
            } else if (section == "run") {
                if (key == "jobs") c.jobs = to_uint(where, v);
                if (key == "max_failure_fraction") c.max_failure_fraction = to_double(where, v);
            } else if (section == "synth") {
                if (key == "seed") c.synth.seed = to_uint(where, v);
                if (key == "journeys") c.synth.journeys = to_uint(where, v);
                if (key == "n_domains") c.synth.n_domains = static_cast<int>(to_uint(where, v));
                if (key == "overlap") c.synth.overlap = to_double(where, v);
                if (key == "bilingual_fraction") c.synth.bilingual_fraction = to_double(where, v);
                if (key == "course_concepts") c.synth.course_concepts = to_uint(where, v);
                if (key == "topic_concepts") c.synth.topic_concepts = to_uint(where, v);
            }
        }
    }
    c.apply_jobs(c.jobs);
    c.validate();
    return c;
}

RunConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::ConfigError, "config file '" + path.string() + "' not found");
    return parse_config(read_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// stages

namespace {

fs::path artifact(const RunConfig& c, const char* name) { return c.output_dir / name; }

fs::path require(const RunConfig& c, const char* name, const char* stage) {
    auto p = artifact(c, name);
    if (!fs::exists(p)) {
        throw Error(ErrorCode::IoError, "missing '" + p.string() + "'; run `lokg " + stage + "` first");
    }
    return p;
}

json read_json(const fs::path& p) {
    try {
        return json::parse(read_file(p));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, "'" + p.string() + "' is not valid JSON: " + e.what());
    }
}

TaxonomyForest load_forest(const RunConfig& c) { return parse_taxonomy(read_file(require(c, "forest.json", "ingest"))); }

std::map<std::string, std::string> provider_tags(const Providers& p) {
    return {{"detect", p.detector->tag()}, {"translate", p.translator->tag()}, {"embed", p.embedder->tag()}};
}

void record(StageResult& r, const fs::path& p, std::string_view content) {
    write_file(p, content);
    r.written.push_back(p);
}

SimilarityEngine make_engine(const RunConfig& c, std::shared_ptr<EmbeddingCache>& cache) {
    cache = std::make_shared<EmbeddingCache>();
    cache->load(artifact(c, "embeddings.bin").string());
    return SimilarityEngine(make_providers(c.providers), c.tmp, cache);
}

ErrorCode code_of_message(const std::string& message) {
    for (int i = 0; i <= static_cast<int>(ErrorCode::IoError); ++i) {
        const auto code = static_cast<ErrorCode>(i);
        if (message.rfind(std::string(to_string(code)) + ":", 0) == 0) return code;
    }
    return ErrorCode::ProviderError;
}

}  // namespace

StageResult cmd_ingest(const RunConfig& c, bool dry_run) {
    c.validate();
    if (c.dataset.empty()) throw Error(ErrorCode::ConfigError, "no dataset path configured");
    if (!fs::exists(c.dataset)) throw Error(ErrorCode::ConfigError, "dataset '" + c.dataset.string() + "' not found");
    const auto forest = parse_taxonomy_file(c.dataset.string());
    const auto filtered = filter_dataset(forest);
    json levels = json::object();
    for (auto l : kAllLevels) levels[std::string(to_string(l))] = filtered.forest.count(l);
    StageResult r;
    r.summary = {{"stage", "ingest"},
                 {"config_hash", c.hash()},
                 {"dataset_hash", dataset_hash(filtered.forest)},
                 {"input_objects", forest.size()},
                 {"objects", filtered.forest.size()},
                 {"levels", levels},
                 {"removed", filter_report_to_json(filtered.report)}};
    if (dry_run) return r;
    record(r, artifact(c, "forest.json"), serialize_taxonomy(filtered.forest));
    record(r, artifact(c, "filter_report.json"), r.summary.dump(2) + "\n");
    return r;
}

StageResult cmd_mine(const RunConfig& c, bool dry_run) {
    c.validate();
    const auto forest = load_forest(c);
    std::shared_ptr<EmbeddingCache> cache;
    auto engine = make_engine(c, cache);
    const auto tags = provider_tags(engine.providers());
    const auto decision_key =
        hex64(fnv1a64(c.tmp.to_json().dump() + json(tags).dump() + dataset_hash(forest)));
    StageResult r;
    if (dry_run) {
        r.summary = {{"stage", "mine"}, {"config_hash", c.hash()}, {"decision_key", decision_key}, {"objects", forest.size()}};
        return r;
    }

    DecisionCache reuse;
    const auto key_path = artifact(c, "decisions.key");
    const auto ledger_path = artifact(c, "verdicts.csv");
    if (fs::exists(key_path) && fs::exists(ledger_path) && read_file(key_path) == decision_key + "\n") {
        for (auto& v : parse_verdict_ledger(read_file(ledger_path))) {
            auto key = std::pair{v.id_a, v.id_b};
            reuse.emplace(std::move(key), std::move(v));
        }
    }
    cache->reset_counters();
    const auto result = mine_relations(forest, engine, &reuse);
    cache->save(artifact(c, "embeddings.bin").string());
    r.written.push_back(artifact(c, "embeddings.bin"));

    json passed = json::array();
    for (const auto& v : result.passed) passed.push_back(verdict_to_json(v));
    json samples = json::array();
    std::map<std::string, std::size_t> by_code;
    for (const auto& f : result.failures) {
        ++by_code[std::string(to_string(code_of_message(f.message)))];
        if (samples.size() < 20) samples.push_back({{"id_a", f.id_a}, {"id_b", f.id_b}, {"message", f.message}});
    }
    std::size_t intra = 0;
    for (const auto& v : result.passed) intra += v.intra_journey ? 1 : 0;
    r.summary = {{"stage", "mine"},
                 {"config_hash", c.hash()},
                 {"decision_key", decision_key},
                 {"provider_tags", tags},
                 {"tmp", c.tmp.to_json()},
                 {"candidate_pairs", result.candidate_pairs},
                 {"evaluated", result.evaluated.size()},
                 {"passed_count", result.passed.size()},
                 {"passed_intra_journey", intra},
                 {"failure_count", result.failures.size()},
                 {"failures_by_code", by_code},
                 {"failure_samples", samples},
                 {"passed", passed}};
    record(r, ledger_path, format_verdict_ledger(result.evaluated));
    record(r, artifact(c, "relations.json"), r.summary.dump(2) + "\n");
    record(r, key_path, decision_key + "\n");
    const json stats = {{"embedding_hits", cache->hits()},
                        {"embedding_misses", cache->misses()},
                        {"embedding_cache_size", cache->size()},
                        {"reused_decisions", result.reused_decisions},
                        {"decisions", result.evaluated.size()}};
    record(r, artifact(c, "mine_stats.json"), stats.dump(2) + "\n");
    r.summary.erase("passed");
    r.summary["cache"] = stats;

    if (result.candidate_pairs > 0) {
        const double frac = static_cast<double>(result.failures.size()) / static_cast<double>(result.candidate_pairs);
        if (frac > c.max_failure_fraction) {
            auto dominant = std::max_element(by_code.begin(), by_code.end(),
                                             [](const auto& a, const auto& b) { return a.second < b.second; });
            const auto code = code_of_message(result.failures.front().message);
            throw Error(dominant != by_code.end() && dominant->first == to_string(code) ? code : ErrorCode::ProviderError,
                        std::to_string(result.failures.size()) + " of " + std::to_string(result.candidate_pairs) +
                            " pairs failed (allowed fraction " + format_double(c.max_failure_fraction) +
                            "); first: " + result.failures.front().message);
        }
    }
    return r;
}

StageResult cmd_build(const RunConfig& c, bool dry_run) {
    c.validate();
    const auto forest = load_forest(c);
    auto verdicts = parse_verdict_ledger(read_file(require(c, "verdicts.csv", "mine")));
    std::erase_if(verdicts, [](const SimilarityVerdict& v) { return !v.passed; });
    const auto relations = read_json(require(c, "relations.json", "mine"));
    KgBuildOptions opts;
    opts.include_intra_journey = c.include_intra_journey;
    opts.config_hash = c.hash();
    opts.provider_tags = relations.at("provider_tags").get<std::map<std::string, std::string>>();
    const auto kg = build_kg(forest, verdicts, opts);
    StageResult r;
    r.summary = {{"stage", "build"},
                 {"config_hash", c.hash()},
                 {"nodes", kg.nodes().size()},
                 {"hierarchical_edges", kg.hierarchical_edge_count()},
                 {"semantic_edges", kg.semantic_edge_count()},
                 {"passed_verdicts", verdicts.size()}};
    if (dry_run) return r;
    record(r, artifact(c, "kg.json"), serialize_kg(kg));
    record(r, artifact(c, "kg.graphml"), to_graphml(kg));
    record(r, artifact(c, "kg_edges.csv"), to_edge_list(kg));
    return r;
}

StageResult cmd_metrics(const RunConfig& c, bool dry_run) {
    c.validate();
    const auto kg = parse_kg(read_file(require(c, "kg.json", "build")));
    StageResult r;
    if (dry_run) {
        r.summary = {{"stage", "metrics"}, {"config_hash", c.hash()}, {"bc", c.metrics.bc_flag()}};
        return r;
    }
    const auto hierarchy = full_report(kg.hierarchy_only(), c.metrics);
    const auto completed = full_report(kg, c.metrics);
    auto doc = compare_reports(hierarchy, completed);
    doc["config_hash"] = c.hash();
    record(r, artifact(c, "metrics.json"), doc.dump(2) + "\n");
    record(r, artifact(c, "nodes.csv"), node_metrics_csv(completed));
    record(r, artifact(c, "nodes_hierarchy.csv"), node_metrics_csv(hierarchy));
    r.summary = {{"stage", "metrics"}, {"config_hash", c.hash()}, {"table", doc["table"]}};
    return r;
}

StageResult cmd_evaluate(const RunConfig& c, bool dry_run) {
    c.validate();
    const auto forest = load_forest(c);
    const auto kg = parse_kg(read_file(require(c, "kg.json", "build")));
    StageResult r;
    if (dry_run) {
        r.summary = {{"stage", "evaluate"}, {"config_hash", c.hash()}, {"sample_size", c.sample_size}};
        return r;
    }
    std::shared_ptr<EmbeddingCache> cache;
    auto engine = make_engine(c, cache);
    const auto sims = all_journey_similarities(forest, engine);
    const auto report = assess_relations(kg, sims.defined, c.sample_size, c.evaluation_seed);
    auto doc = evaluation_to_json(report);
    doc["config_hash"] = c.hash();
    doc["journeys_too_small"] = sims.too_small;
    record(r, artifact(c, "evaluation.json"), doc.dump(2) + "\n");
    record(r, artifact(c, "assessments.csv"), assessments_csv(report));
    std::ostringstream js;
    js << "journey_id,j_sim,pair_count\n";
    for (const auto& [id, s] : sims.defined) js << csv_escape(id) << ',' << format_double(s.j_sim) << ',' << s.pair_count << '\n';
    record(r, artifact(c, "journeys.csv"), js.str());
    r.summary = {{"stage", "evaluate"},
                 {"config_hash", c.hash()},
                 {"pass_fraction", report.pass_fraction},
                 {"sample_size", report.sample_size},
                 {"population_size", report.population_size}};
    return r;
}

namespace {

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::string fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

}  // namespace

StageResult cmd_report(const RunConfig& c, bool reproducible, bool dry_run) {
    c.validate();
    const auto ingest = read_json(require(c, "filter_report.json", "ingest"));
    const auto relations = read_json(require(c, "relations.json", "mine"));
    const auto kg = parse_kg(read_file(require(c, "kg.json", "build")));
    const auto metrics = read_json(require(c, "metrics.json", "metrics"));
    const auto evaluation = read_json(require(c, "evaluation.json", "evaluate"));
    StageResult r;
    if (dry_run) {
        r.summary = {{"stage", "report"}, {"config_hash", c.hash()}};
        return r;
    }

    json table = json::array();
    for (const auto& row : metrics.at("table")) {
        if (row.contains("preferred")) table.push_back(row);
    }
    json report = {
        {"tool", "lokg"},
        {"config_hash", c.hash()},
        {"config", c.to_json()},
        {"dataset_hash", kg.provenance().dataset_hash},
        {"provider_tags", kg.provenance().provider_tags},
        {"dataset",
         {{"input_objects", ingest.at("input_objects")},
          {"objects", ingest.at("objects")},
          {"levels", ingest.at("levels")},
          {"removed", ingest.at("removed").at("counts")}}},
        {"mining",
         {{"candidate_pairs", relations.at("candidate_pairs")},
          {"evaluated", relations.at("evaluated")},
          {"passed", relations.at("passed_count")},
          {"passed_intra_journey", relations.at("passed_intra_journey")},
          {"failures", relations.at("failure_count")}}},
        {"graph",
         {{"nodes", kg.nodes().size()},
          {"hierarchical_edges", kg.hierarchical_edge_count()},
          {"semantic_edges", kg.semantic_edge_count()}}},
        {"metrics", table},
        {"metrics_auxiliary",
         {{"adc_total", {{"hierarchy", metrics["hierarchy"]["adc_total"]}, {"kg", metrics["kg"]["adc_total"]}}},
          {"avg_local_clustering",
           {{"hierarchy", metrics["hierarchy"]["avg_local_clustering"]}, {"kg", metrics["kg"]["avg_local_clustering"]}}},
          {"method_flags", metrics["kg"]["method_flags"]}}},
        {"evaluation",
         {{"pass_fraction", evaluation.at("pass_fraction")},
          {"passed", evaluation.at("passed")},
          {"sample_size", evaluation.at("sample_size")},
          {"population_size", evaluation.at("population_size")},
          {"seed", evaluation.at("seed")}}},
        {"reference",
         {{"note", "published values on the original dataset, for orientation only"},
          {"pass_fraction", 0.79},
          {"sample_size", 240},
          {"journey_similarity_band", {0.86, 0.90}}}},
    };
    if (!reproducible) report["generated_at"] = utc_now();

    std::ostringstream md;
    md << "# lokg run report\n\n";
    if (!reproducible) md << "Generated " << report["generated_at"].get<std::string>() << ".\n\n";
    md << "- config hash: `" << c.hash() << "`\n"
       << "- dataset hash: `" << kg.provenance().dataset_hash << "`\n"
       << "- objects: " << ingest.at("objects") << " (removed by filtering: "
       << ingest.at("removed").at("counts").at("total") << ")\n"
       << "- pairs evaluated: " << relations.at("evaluated") << ", passed: " << relations.at("passed_count")
       << ", semantic edges: " << kg.semantic_edge_count() << "\n\n"
       << "## Graph quality\n\n"
       << "| Metric | Hierarchy | KG | Delta | Preferred | Trend | Reference hierarchy | Reference KG |\n"
       << "|---|---|---|---|---|---|---|---|\n";
    std::ostringstream csv;
    csv << "metric,hierarchy,kg,delta,preferred,trend_ok,reference_hierarchy,reference_kg\n";
    for (const auto& row : table) {
        const bool ok = row.at("trend_ok").get<bool>();
        md << "| " << row.at("metric").get<std::string>() << " | " << fixed(row.at("hierarchy").get<double>(), 4)
           << " | " << fixed(row.at("kg").get<double>(), 4) << " | " << fixed(row.at("delta").get<double>(), 4) << " | "
           << row.at("preferred").get<std::string>() << " | " << (ok ? "yes" : "no") << " | "
           << format_double(row.at("reference").at("hierarchy").get<double>()) << " | "
           << format_double(row.at("reference").at("kg").get<double>()) << " |\n";
        csv << row.at("metric").get<std::string>() << ',' << format_double(row.at("hierarchy").get<double>()) << ','
            << format_double(row.at("kg").get<double>()) << ',' << format_double(row.at("delta").get<double>()) << ','
            << row.at("preferred").get<std::string>() << ',' << (ok ? 1 : 0) << ','
            << format_double(row.at("reference").at("hierarchy").get<double>()) << ','
            << format_double(row.at("reference").at("kg").get<double>()) << '\n';
    }
    md << "\n## Relation assessment\n\n"
       << "- pass fraction: " << fixed(evaluation.at("pass_fraction").get<double>(), 4) << " ("
       << evaluation.at("passed") << " of " << evaluation.at("sample_size") << " sampled rows, population "
       << evaluation.at("population_size") << ")\n"
       << "- reference: 0.79 on a sample of 240\n";

    record(r, artifact(c, "report.json"), report.dump(2) + "\n");
    record(r, artifact(c, "report.md"), md.str());
    record(r, artifact(c, "metrics_table.csv"), csv.str());
    r.summary = {{"stage", "report"}, {"config_hash", c.hash()}};
    return r;
}

StageResult run_all(const RunConfig& c, bool reproducible) {
    StageResult all;
    all.summary = json::array();
    for (auto stage : {cmd_ingest, cmd_mine, cmd_build, cmd_metrics, cmd_evaluate}) {
        auto r = stage(c, false);
        all.written.insert(all.written.end(), r.written.begin(), r.written.end());
        all.summary.push_back(std::move(r.summary));
    }
    auto r = cmd_report(c, reproducible, false);
    all.written.insert(all.written.end(), r.written.begin(), r.written.end());
    all.summary.push_back(std::move(r.summary));
    return all;
}

StageResult cmd_gen_synth(const GeneratorSpec& spec, const fs::path& path) {
    const auto corpus = generate(spec);
    StageResult r;
    record(r, path, serialize_taxonomy(corpus.forest));
    auto labels = path.parent_path() / (path.stem().string() + ".labels.json");
    record(r, labels, labels_to_json(corpus, spec).dump(2) + "\n");
    r.summary = {{"stage", "gen-synth"}, {"objects", corpus.forest.size()}, {"generator", spec.to_json()}};
    return r;
}

}  // namespace lokg
