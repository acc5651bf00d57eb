#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lokg/taxonomy.hpp"

namespace fixtures {

inline lokg::LearningObject lo(std::string id, lokg::Level level, std::string title, std::string description = {},
                               std::vector<std::string> parents = {},
                               std::optional<std::string> lang = std::nullopt) {
    lokg::LearningObject o;
    o.id = std::move(id);
    o.level = level;
    o.title = std::move(title);
    o.description = std::move(description);
    o.parent_ids = std::move(parents);
    o.declared_language = std::move(lang);
    return o;
}

/// Journey -> Course -> Topic -> Package -> Content chain under `prefix`,
/// with the given Course and Topic titles.
inline std::vector<lokg::LearningObject> chain(const std::string& prefix, const std::string& course,
                                               const std::string& topic, const std::string& course_desc = {},
                                               const std::string& topic_desc = {}) {
    using lokg::Level;
    return {lo(prefix + "-j", Level::Journey, "Journey " + prefix),
            lo(prefix + "-c", Level::Course, course, course_desc, {prefix + "-j"}),
            lo(prefix + "-t", Level::Topic, topic, topic_desc, {prefix + "-c"}),
            lo(prefix + "-p", Level::EducationalPackage, "Package " + prefix, {}, {prefix + "-t"}),
            lo(prefix + "-e", Level::EducationalContent, "Content " + prefix, {}, {prefix + "-p"})};
}

inline void append(std::vector<lokg::LearningObject>& into, std::vector<lokg::LearningObject> more) {
    for (auto& o : more) into.push_back(std::move(o));
}

/// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / (name + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace fixtures
