#include "lokg/evaluation.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "lokg/error.hpp"
#include "lokg/parallel.hpp"
#include "lokg/text.hpp"

namespace lokg {

using nlohmann::json;

namespace {

std::string level_pair_name(Level a, Level b) {
    const auto p = make_level_pair(a, b);
    return std::string(to_string(p.first)) + "-" + std::string(to_string(p.second));
}

std::vector<const LearningObject*> journey_members(const TaxonomyForest& forest, std::string_view journey_id,
                                                   const std::set<Level>& levels) {
    const auto* j = forest.find(journey_id);
    if (!j || j->level != Level::Journey) {
        throw Error(ErrorCode::NotAJourney, "'" + std::string(journey_id) + "' is not a Journey");
    }
    std::vector<const LearningObject*> members;
    for (const auto& id : forest.subtree_of(journey_id)) {
        const auto& o = forest.at(id);
        if (levels.count(o.level)) members.push_back(&o);
    }
    if (members.size() < 2) {
        throw Error(ErrorCode::JourneyTooSmall, "journey '" + std::string(journey_id) + "' has " +
                                                    std::to_string(members.size()) + " comparable objects");
    }
    return members;
}

}  // namespace

JourneySimilarity journey_similarity(const TaxonomyForest& forest, std::string_view journey_id,
                                     const std::set<Level>& levels, const PairScorer& scorer) {
    const auto members = journey_members(forest, journey_id, levels);
    JourneySimilarity js;
    js.journey_id = std::string(journey_id);
    double sum = 0.0;
    std::map<std::string, double> level_sums;
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            const double s = scorer(*members[i], *members[j]);
            sum += s;
            ++js.pair_count;
            const auto key = level_pair_name(members[i]->level, members[j]->level);
            level_sums[key] += s;
            ++js.per_level[key].pair_count;
        }
    }
    js.j_sim = sum / static_cast<double>(js.pair_count);
    for (auto& [key, b] : js.per_level) b.mean = level_sums[key] / static_cast<double>(b.pair_count);
    return js;
}

JourneySimilarities all_journey_similarities(const TaxonomyForest& forest, SimilarityEngine& engine) {
    const auto levels = engine.config().enabled_level_set();
    std::vector<const LearningObject*> objects;
    std::vector<std::string> journeys;
    for (const auto& [id, o] : forest.objects()) {
        if (levels.count(o.level)) objects.push_back(&o);
        if (o.level == Level::Journey) journeys.push_back(id);
    }
    const auto prepared = engine.prepare_all(objects);
    std::map<std::string, const PreparedObject*> by_id;
    for (const auto& p : prepared) by_id.emplace(p.id, &p);
    const SimilarityEngine& scoring = engine;
    const PairScorer scorer = [&](const LearningObject& a, const LearningObject& b) {
        return scoring.score(*by_id.at(a.id), *by_id.at(b.id)).combined;
    };

    std::vector<std::optional<JourneySimilarity>> results(journeys.size());
    parallel_chunks(journeys.size(), 1, engine.config().jobs, [&](std::size_t begin, std::size_t end) {
        for (auto k = begin; k < end; ++k) {
            try {
                results[k] = journey_similarity(forest, journeys[k], levels, scorer);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::JourneyTooSmall) throw;
            }
        }
    });
    JourneySimilarities out;
    for (std::size_t k = 0; k < journeys.size(); ++k) {
        if (results[k]) {
            out.defined.emplace(journeys[k], std::move(*results[k]));
        } else {
            out.too_small.push_back(journeys[k]);
        }
    }
    return out;
}

RelationAssessment assess(std::string id_a, std::string id_b, double sr_sim, std::string journey_i, double j_i,
                          std::string journey_j, double j_j) {
    RelationAssessment a;
    a.id_a = std::move(id_a);
    a.id_b = std::move(id_b);
    a.sr_sim = sr_sim;
    a.journey_i = std::move(journey_i);
    a.journey_j = std::move(journey_j);
    a.j_i = j_i;
    a.j_j = j_j;
    a.j_avg = (j_i + j_j) / 2.0;
    a.passed = sr_sim >= a.j_avg;
    return a;
}

EvaluationReport assess_relations(const KnowledgeGraph& kg, const std::map<std::string, JourneySimilarity>& journey_sims,
                                  std::size_t sample_size, std::uint64_t seed) {
    if (sample_size == 0) throw Error(ErrorCode::InvalidArgument, "sample size must be at least 1");
    const auto n = kg.nodes().size();
    std::vector<std::vector<std::size_t>> parents(n);
    for (const auto& e : kg.edges()) {
        if (e.kind == EdgeKind::Hierarchical) parents[*kg.index_of(e.dst)].push_back(*kg.index_of(e.src));
    }
    std::vector<std::optional<std::set<std::string>>> memo(n);
    auto journeys_of = [&](auto&& self, std::size_t v) -> const std::set<std::string>& {
        if (memo[v]) return *memo[v];
        std::set<std::string> out;
        if (kg.nodes()[v].level == Level::Journey) out.insert(kg.nodes()[v].id);
        for (auto p : parents[v]) {
            const auto& up = self(self, p);
            out.insert(up.begin(), up.end());
        }
        memo[v] = std::move(out);
        return *memo[v];
    };

    struct Row {
        const Edge* edge;
        std::string ji;
        std::string jj;
    };
    std::vector<Row> population;
    for (const auto& e : kg.edges()) {
        if (e.kind != EdgeKind::Semantic) continue;
        const auto& ja = journeys_of(journeys_of, *kg.index_of(e.src));
        const auto& jb = journeys_of(journeys_of, *kg.index_of(e.dst));
        std::set<std::pair<std::string, std::string>> bridged;
        for (const auto& i : ja) {
            for (const auto& j : jb) {
                if (i != j) bridged.emplace(std::min(i, j), std::max(i, j));
            }
        }
        for (const auto& [i, j] : bridged) population.push_back({&e, i, j});
    }
    if (population.empty()) throw Error(ErrorCode::NoSemanticEdges, "no semantic relation bridges two journeys");
    for (const auto& r : population) {
        for (const auto* j : {&r.ji, &r.jj}) {
            if (!journey_sims.count(*j)) {
                throw Error(ErrorCode::UndefinedJourneySimilarity, "journey '" + *j + "' has no similarity value");
            }
        }
    }

    std::vector<std::size_t> chosen(population.size());
    for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
    if (sample_size < population.size()) {
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < sample_size; ++i) {
            const auto j = i + static_cast<std::size_t>(rng() % (chosen.size() - i));
            std::swap(chosen[i], chosen[j]);
        }
        chosen.resize(sample_size);
        std::sort(chosen.begin(), chosen.end());
    }

    EvaluationReport report;
    report.population_size = population.size();
    report.seed = seed;
    std::set<std::string> touched;
    std::size_t passed = 0;
    for (auto idx : chosen) {
        const auto& r = population[idx];
        report.assessments.push_back(assess(r.edge->src, r.edge->dst, r.edge->weight, r.ji,
                                            journey_sims.at(r.ji).j_sim, r.jj, journey_sims.at(r.jj).j_sim));
        if (report.assessments.back().passed) ++passed;
        touched.insert(r.ji);
        touched.insert(r.jj);
    }
    report.sample_size = report.assessments.size();
    report.pass_fraction = static_cast<double>(passed) / static_cast<double>(report.sample_size);
    for (const auto& j : touched) report.journey_sims.push_back(journey_sims.at(j));
    return report;
}

json evaluation_to_json(const EvaluationReport& report) {
    json sims = json::array();
    for (const auto& js : report.journey_sims) {
        json per = json::object();
        for (const auto& [k, b] : js.per_level) per[k] = {{"mean", b.mean}, {"pair_count", b.pair_count}};
        sims.push_back({{"journey_id", js.journey_id}, {"j_sim", js.j_sim}, {"pair_count", js.pair_count}, {"per_level", per}});
    }
    std::size_t passed = 0;
    for (const auto& a : report.assessments) passed += a.passed ? 1 : 0;
    return {{"pass_fraction", report.pass_fraction},
            {"passed", passed},
            {"sample_size", report.sample_size},
            {"population_size", report.population_size},
            {"seed", report.seed},
            {"journey_sims", sims}};
}

std::string assessments_csv(const EvaluationReport& report) {
    std::ostringstream out;
    out << "id_a,id_b,sr_sim,j_i,j_j,j_avg,passed\n";
    for (const auto& a : report.assessments) {
        out << csv_escape(a.id_a) << ',' << csv_escape(a.id_b) << ',' << format_double(a.sr_sim) << ','
            << format_double(a.j_i) << ',' << format_double(a.j_j) << ',' << format_double(a.j_avg) << ','
            << (a.passed ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace lokg
