#pragma once

// Case manifests: a JSON file listing, per case, the N sample volumes plus
// optional ground-truth and raw-CT paths. Relative paths resolve against
// the manifest's directory. Schema documented in docs/formats.md.

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcseg/io.hpp"

namespace mcseg {

struct ManifestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CaseManifest {
    std::string case_id;
    std::vector<std::filesystem::path> samples;
    std::optional<std::filesystem::path> ground_truth;
    std::optional<std::filesystem::path> ct;
    /// Listed paths that did not exist when the manifest was loaded.
    std::vector<std::filesystem::path> missing;
};

inline std::vector<CaseManifest> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(path.string() + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("cases") || !doc["cases"].is_array())
        throw ManifestError(path.string() + ": manifest must be an object with a 'cases' array");

    const std::filesystem::path base = path.has_parent_path()
                                           ? path.parent_path()
                                           : std::filesystem::path(".");
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    std::vector<CaseManifest> cases;
    std::set<std::string> seen_ids;
    for (const auto& entry : doc["cases"]) {
        if (!entry.is_object() || !entry.contains("case_id") || !entry["case_id"].is_string())
            throw ManifestError(path.string() + ": every case needs a string 'case_id'");
        CaseManifest cm;
        cm.case_id = entry["case_id"].get<std::string>();
        if (cm.case_id.empty() || cm.case_id.find(',') != std::string::npos ||
            cm.case_id.find('\n') != std::string::npos)
            throw ManifestError(path.string() + ": case_id must be nonempty and free of ',' and newlines");
        if (!seen_ids.insert(cm.case_id).second)
            throw ManifestError(path.string() + ": duplicate case_id '" + cm.case_id + "'");

        if (!entry.contains("samples") || !entry["samples"].is_array())
            throw ManifestError(path.string() + ": case '" + cm.case_id +
                                "' needs a 'samples' array");
        std::set<std::string> seen_paths;
        for (const auto& s : entry["samples"]) {
            if (!s.is_string())
                throw ManifestError(path.string() + ": sample paths must be strings");
            const std::string raw = s.get<std::string>();
            if (!seen_paths.insert(raw).second)
                throw ManifestError(path.string() + ": case '" + cm.case_id +
                                    "' lists sample path '" + raw + "' twice");
            cm.samples.push_back(resolve(raw));
        }
        if (cm.samples.size() < 2)
            throw ManifestError(path.string() + ": case '" + cm.case_id + "' lists " +
                                std::to_string(cm.samples.size()) +
                                " sample volumes; at least 2 are required");

        if (entry.contains("ground_truth")) {
            if (!entry["ground_truth"].is_string())
                throw ManifestError(path.string() + ": 'ground_truth' must be a string path");
            cm.ground_truth = resolve(entry["ground_truth"].get<std::string>());
        }
        if (entry.contains("ct")) {
            if (!entry["ct"].is_string())
                throw ManifestError(path.string() + ": 'ct' must be a string path");
            cm.ct = resolve(entry["ct"].get<std::string>());
        }
        for (const auto& key : entry.items()) {
            const std::string& k = key.key();
            if (k != "case_id" && k != "samples" && k != "ground_truth" && k != "ct")
                throw ManifestError(path.string() + ": unknown manifest key '" + k + "'");
        }

        for (const auto& p : cm.samples)
            if (!std::filesystem::exists(p)) cm.missing.push_back(p);
        if (cm.ground_truth && !std::filesystem::exists(*cm.ground_truth))
            cm.missing.push_back(*cm.ground_truth);
        if (cm.ct && !std::filesystem::exists(*cm.ct)) cm.missing.push_back(*cm.ct);

        cases.push_back(std::move(cm));
    }
    return cases;
}

/// Write a manifest whose paths are relative to `path`'s directory.
inline void save_manifest(const std::filesystem::path& path,
                          const std::vector<CaseManifest>& cases) {
    nlohmann::json doc;
    doc["cases"] = nlohmann::json::array();
    const std::filesystem::path base =
        path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    auto rel = [&](const std::filesystem::path& p) {
        const auto r = p.lexically_relative(base);
        return (r.empty() || r.native().starts_with("..")) ? p.generic_string()
                                                           : r.generic_string();
    };
    for (const auto& cm : cases) {
        nlohmann::json e;
        e["case_id"] = cm.case_id;
        e["samples"] = nlohmann::json::array();
        for (const auto& s : cm.samples) e["samples"].push_back(rel(s));
        if (cm.ground_truth) e["ground_truth"] = rel(*cm.ground_truth);
        if (cm.ct) e["ct"] = rel(*cm.ct);
        doc["cases"].push_back(std::move(e));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    out << doc.dump(2) << '\n';
}

}  // namespace mcseg
