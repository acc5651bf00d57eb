#include "lokg/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "lokg/error.hpp"
#include "lokg/text.hpp"

namespace lokg {

using nlohmann::json;

std::string_view to_string(Level level) noexcept {
    switch (level) {
        case Level::Journey: return "Journey";
        case Level::Course: return "Course";
        case Level::Topic: return "Topic";
        case Level::EducationalPackage: return "EducationalPackage";
        case Level::EducationalContent: return "EducationalContent";
    }
    return "?";
}

std::optional<Level> parse_level(std::string_view name) {
    std::string key;
    for (char c : name) {
        if (c == '_' || c == '-' || c == ' ') continue;
        key.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
    }
    if (key == "journey") return Level::Journey;
    if (key == "course") return Level::Course;
    if (key == "topic") return Level::Topic;
    if (key == "educationalpackage" || key == "package") return Level::EducationalPackage;
    if (key == "educationalcontent" || key == "content") return Level::EducationalContent;
    return std::nullopt;
}

namespace {

const std::vector<std::string>& empty_ids() {
    static const std::vector<std::string> none;
    return none;
}

std::string describe(const LearningObject& o) { return "object '" + o.id + "' (" + std::string(to_string(o.level)) + ")"; }

}  // namespace

TaxonomyForest TaxonomyForest::from_objects(std::vector<LearningObject> objects) {
    TaxonomyForest forest;
    for (auto& o : objects) {
        if (o.id.empty()) throw Error(ErrorCode::SchemaError, "object with empty id");
        const auto cleaned = clean_text(o.title);
        if (cleaned.empty() && o.level != Level::EducationalContent) {
            throw Error(ErrorCode::SchemaError, describe(o) + " has an empty title");
        }
        if (utf8_length(cleaned) > kMaxTitleLength) {
            throw Error(ErrorCode::SchemaError, describe(o) + " title exceeds 512 characters");
        }
        std::sort(o.parent_ids.begin(), o.parent_ids.end());
        std::string id = o.id;
        if (!forest.objects_.emplace(id, std::move(o)).second) {
            throw Error(ErrorCode::DuplicateId, "id '" + id + "' appears more than once");
        }
    }

    for (const auto& [id, o] : forest.objects_) {
        if (o.level == Level::Journey && !o.parent_ids.empty()) {
            throw Error(ErrorCode::LevelViolation, describe(o) + " is a Journey but declares parents");
        }
        for (std::size_t i = 0; i < o.parent_ids.size(); ++i) {
            const auto& pid = o.parent_ids[i];
            if (i > 0 && o.parent_ids[i - 1] == pid) {
                throw Error(ErrorCode::SchemaError, describe(o) + " lists parent '" + pid + "' twice");
            }
            const auto* parent = forest.find(pid);
            if (parent == nullptr) {
                throw Error(ErrorCode::SchemaError, describe(o) + " references unknown parent '" + pid + "'");
            }
            if (depth(parent->level) + 1 != depth(o.level)) {
                throw Error(ErrorCode::LevelViolation, describe(o) + " has parent " + describe(*parent) +
                                                           " which is not exactly one level above");
            }
            forest.edges_.emplace_back(pid, id);
            forest.children_[pid].push_back(id);
        }
    }
    std::sort(forest.edges_.begin(), forest.edges_.end());
    for (auto& [_, kids] : forest.children_) std::sort(kids.begin(), kids.end());

    // Acyclicity is implied by the level check; verify it independently.
    enum class Mark : std::uint8_t { None, Active, Done };
    std::unordered_map<std::string_view, Mark> marks;
    std::function<void(std::string_view)> visit = [&](std::string_view id) {
        auto& m = marks[id];
        if (m == Mark::Done) return;
        if (m == Mark::Active) throw Error(ErrorCode::SchemaError, "hierarchy cycle through '" + std::string(id) + "'");
        m = Mark::Active;
        for (const auto& kid : forest.children_of(id)) visit(kid);
        marks[id] = Mark::Done;
    };
    for (const auto& [id, _] : forest.objects_) visit(id);

    return forest;
}

const LearningObject* TaxonomyForest::find(std::string_view id) const {
    auto it = objects_.find(id);
    return it == objects_.end() ? nullptr : &it->second;
}

const LearningObject& TaxonomyForest::at(std::string_view id) const {
    const auto* o = find(id);
    if (o == nullptr) throw Error(ErrorCode::InvalidArgument, "unknown object id '" + std::string(id) + "'");
    return *o;
}

const std::vector<std::string>& TaxonomyForest::children_of(std::string_view id) const {
    auto it = children_.find(id);
    return it == children_.end() ? empty_ids() : it->second;
}

std::set<std::string> TaxonomyForest::journeys_of(std::string_view id) const {
    std::set<std::string> out;
    std::vector<std::string_view> stack{id};
    std::set<std::string_view> seen;
    while (!stack.empty()) {
        const auto cur = stack.back();
        stack.pop_back();
        if (!seen.insert(cur).second) continue;
        const auto& o = at(cur);
        if (o.level == Level::Journey) out.insert(o.id);
        for (const auto& p : o.parent_ids) stack.push_back(p);
    }
    return out;
}

std::set<std::string> TaxonomyForest::subtree_of(std::string_view journey_id) const {
    std::set<std::string> out;
    std::vector<std::string_view> stack{journey_id};
    while (!stack.empty()) {
        const auto cur = stack.back();
        stack.pop_back();
        for (const auto& kid : children_of(cur)) {
            if (out.insert(kid).second) stack.push_back(kid);
        }
    }
    return out;
}

std::size_t TaxonomyForest::count(Level level) const {
    return static_cast<std::size_t>(
        std::count_if(objects_.begin(), objects_.end(), [&](const auto& kv) { return kv.second.level == level; }));
}

namespace {

std::string line_col(std::string_view doc, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < doc.size(); ++i) {
        if (doc[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string record_context(std::size_t index, const json& rec) {
    std::string ctx = "record #" + std::to_string(index);
    if (rec.is_object() && rec.contains("id") && rec["id"].is_string()) {
        ctx += " (id '" + rec["id"].get<std::string>() + "')";
    }
    return ctx;
}

const json& require(const json& rec, const char* key, std::size_t index) {
    if (!rec.contains(key)) {
        throw Error(ErrorCode::SchemaError, record_context(index, rec) + ": missing field '" + key + "'");
    }
    return rec[key];
}

std::string string_field(const json& value, const char* key, std::size_t index, const json& rec) {
    if (!value.is_string()) {
        throw Error(ErrorCode::SchemaError, record_context(index, rec) + ": field '" + key + "' must be a string");
    }
    return value.get<std::string>();
}

}  // namespace

TaxonomyForest parse_taxonomy(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, "malformed document at " + line_col(document, e.byte > 0 ? e.byte - 1 : 0) +
                                                ": " + e.what());
    }
    const json* records = &doc;
    if (doc.is_object() && doc.contains("objects")) records = &doc["objects"];
    if (!records->is_array()) throw Error(ErrorCode::SchemaError, "document must be an array of objects");

    std::vector<LearningObject> objects;
    objects.reserve(records->size());
    for (std::size_t i = 0; i < records->size(); ++i) {
        const json& rec = (*records)[i];
        if (!rec.is_object()) throw Error(ErrorCode::SchemaError, "record #" + std::to_string(i) + " is not an object");
        LearningObject o;
        o.id = string_field(require(rec, "id", i), "id", i, rec);
        const auto level_name = string_field(require(rec, "level", i), "level", i, rec);
        const auto level = parse_level(level_name);
        if (!level) throw Error(ErrorCode::SchemaError, record_context(i, rec) + ": unknown level '" + level_name + "'");
        o.level = *level;
        o.title = string_field(require(rec, "title", i), "title", i, rec);
        if (rec.contains("description") && !rec["description"].is_null()) {
            o.description = string_field(rec["description"], "description", i, rec);
        }
        if (rec.contains("language") && !rec["language"].is_null()) {
            o.declared_language = string_field(rec["language"], "language", i, rec);
        }
        if (rec.contains("parents")) {
            const auto& parents = rec["parents"];
            if (!parents.is_array()) {
                throw Error(ErrorCode::SchemaError, record_context(i, rec) + ": field 'parents' must be an array");
            }
            for (const auto& p : parents) o.parent_ids.push_back(string_field(p, "parents", i, rec));
        }
        objects.push_back(std::move(o));
    }
    return TaxonomyForest::from_objects(std::move(objects));
}

TaxonomyForest parse_taxonomy_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open dataset '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_taxonomy(buf.str());
}

json taxonomy_to_json(const TaxonomyForest& forest) {
    json arr = json::array();
    for (const auto& [id, o] : forest.objects()) {
        json rec = {{"id", o.id},
                    {"level", std::string(to_string(o.level))},
                    {"title", o.title},
                    {"description", o.description},
                    {"parents", o.parent_ids}};
        if (o.declared_language) rec["language"] = *o.declared_language;
        arr.push_back(std::move(rec));
    }
    return arr;
}

std::string serialize_taxonomy(const TaxonomyForest& forest) { return taxonomy_to_json(forest).dump(2) + "\n"; }

json filter_report_to_json(const FilterReport& r) {
    return {{"counts", {{"no_content", r.no_content}, {"duplicates", r.duplicates}, {"isolated", r.isolated}, {"total", r.total()}}},
            {"removed",
             {{"no_content", r.removed_no_content},
              {"duplicates", r.removed_duplicates},
              {"isolated", r.removed_isolated}}}};
}

FilterResult filter_dataset(const TaxonomyForest& forest) {
    struct Entry {
        LearningObject object;
        std::set<std::string> parents;
        std::set<std::string> children;
    };
    std::map<std::string, Entry> work;
    for (const auto& [id, o] : forest.objects()) {
        work[id].object = o;
        work[id].parents.insert(o.parent_ids.begin(), o.parent_ids.end());
    }
    for (const auto& [p, c] : forest.hierarchy_edges()) work[p].children.insert(c);

    auto erase = [&](const std::string& id) {
        auto& e = work.at(id);
        for (const auto& p : e.parents) work.at(p).children.erase(id);
        for (const auto& c : e.children) work.at(c).parents.erase(id);
        work.erase(id);
    };

    FilterResult result;
    auto& report = result.report;

    // 1. no educational content underneath
    std::map<std::string, bool> has_content;
    for (auto it = kAllLevels.rbegin(); it != kAllLevels.rend(); ++it) {
        for (const auto& [id, e] : work) {
            if (e.object.level != *it) continue;
            bool has = e.object.level == Level::EducationalContent;
            for (const auto& c : e.children) has = has || has_content[c];
            has_content[id] = has;
        }
    }
    for (const auto& [id, has] : has_content) {
        if (!has) report.removed_no_content.push_back(id);
    }
    for (const auto& id : report.removed_no_content) erase(id);

    // 2. exact duplicates, top-down so parents are final before children are compared
    for (Level level : kAllLevels) {
        std::map<std::tuple<std::string, std::string>, std::vector<std::string>> groups;
        for (const auto& [id, e] : work) {
            if (e.object.level != level) continue;
            groups[{clean_text(e.object.title), clean_text(e.object.description)}].push_back(id);
        }
        for (auto& [key, ids] : groups) {
            if (ids.size() < 2) continue;
            const std::string keep = ids.front();  // map order: lowest id first
            for (std::size_t i = 1; i < ids.size(); ++i) {
                const std::string& dup = ids[i];
                Entry removed = work.at(dup);
                erase(dup);
                auto& kept = work.at(keep);
                for (const auto& p : removed.parents) {
                    kept.parents.insert(p);
                    work.at(p).children.insert(keep);
                }
                for (const auto& c : removed.children) {
                    kept.children.insert(c);
                    work.at(c).parents.insert(keep);
                }
                report.removed_duplicates.push_back(dup);
            }
        }
    }
    std::sort(report.removed_duplicates.begin(), report.removed_duplicates.end());

    // 3. isolated
    for (const auto& [id, e] : work) {
        if (e.parents.empty() && e.children.empty()) report.removed_isolated.push_back(id);
    }
    for (const auto& id : report.removed_isolated) erase(id);

    report.no_content = report.removed_no_content.size();
    report.duplicates = report.removed_duplicates.size();
    report.isolated = report.removed_isolated.size();

    std::vector<LearningObject> objects;
    objects.reserve(work.size());
    for (auto& [id, e] : work) {
        e.object.parent_ids.assign(e.parents.begin(), e.parents.end());
        objects.push_back(std::move(e.object));
    }
    result.forest = TaxonomyForest::from_objects(std::move(objects));
    return result;
}

}  // namespace lokg
