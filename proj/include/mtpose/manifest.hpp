#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtpose/error.hpp"
#include "mtpose/geometry.hpp"
#include "mtpose/image.hpp"

namespace mtpose {

enum class Category { WithObject, WithoutObject };

inline std::string to_string(Category c) {
    return c == Category::WithObject ? "with_object" : "without_object";
}

inline Category category_from_string(const std::string& s) {
    if (s == "with_object") return Category::WithObject;
    if (s == "without_object") return Category::WithoutObject;
    throw ParseError("unknown category '" + s + "'");
}

struct ManifestEntry {
    std::string id;
    std::filesystem::path image;  // relative to the manifest's directory
    Category category = Category::WithoutObject;
    HandLandmarks keypoints;
};

/// Canonical dataset manifest: one annotated sample per entry, order preserved.
struct DatasetManifest {
    std::filesystem::path root;  // directory the image paths are relative to
    std::vector<ManifestEntry> entries;

    std::size_t size() const { return entries.size(); }

    std::filesystem::path image_path(const ManifestEntry& e) const { return root / e.image; }
};

namespace detail {

inline HandLandmarks keypoints_from_json(const nlohmann::json& arr, const std::string& where) {
    if (!arr.is_array()) {
        throw ParseError(where + ": \"keypoints\" must be an array");
    }
    std::vector<Point> pts;
    pts.reserve(arr.size());
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw ParseError(where + ": each keypoint must be a [x, y] number pair");
        }
        pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (pts.size() != HandLandmarks::kCount) {
        throw ValidationError(where + ": expected 21 keypoints, got " +
                              std::to_string(pts.size()));
    }
    return HandLandmarks::from_points(pts);
}

inline nlohmann::json keypoints_to_json(const HandLandmarks& lm) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Point& p : lm) {
        arr.push_back({p.x, p.y});
    }
    return arr;
}

}  // namespace detail

/// Load and fully validate a dataset manifest.
///
/// The manifest is a JSON array of
///   {"id": string, "image": relative path, "category": "with_object" |
///    "without_object", "keypoints": [[x, y] x 21]}
/// with ids unique and every referenced image a readable PNG.
inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest '" + path.string() + "'");
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_array()) {
        throw ParseError("manifest '" + path.string() + "' must be a top-level array");
    }

    DatasetManifest manifest;
    manifest.root = path.parent_path();
    std::unordered_set<std::string> seen_ids;
    int index = 0;
    for (const auto& item : doc) {
        const std::string where = "manifest entry #" + std::to_string(index);
        if (!item.is_object()) {
            throw ParseError(where + ": expected an object");
        }
        for (const char* key : {"id", "image", "category", "keypoints"}) {
            if (!item.contains(key)) {
                throw ParseError(where + ": missing field \"" + key + "\"");
            }
        }
        ManifestEntry entry;
        entry.id = item["id"].get<std::string>();
        const std::string named = where + " (id '" + entry.id + "')";
        entry.image = item["image"].get<std::string>();
        entry.category = category_from_string(item["category"].get<std::string>());
        entry.keypoints = detail::keypoints_from_json(item["keypoints"], named);
        if (!seen_ids.insert(entry.id).second) {
            throw ValidationError(named + ": duplicate sample id");
        }
        const auto img_path = manifest.root / entry.image;
        if (!std::filesystem::exists(img_path)) {
            throw IoError(named + ": image file '" + img_path.string() + "' does not exist");
        }
        probe_png(img_path);  // must be a decodable PNG
        manifest.entries.push_back(std::move(entry));
        ++index;
    }
    return manifest;
}

/// Write a manifest in the canonical schema. Image paths are stored as given.
inline void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    nlohmann::json doc = nlohmann::json::array();
    for (const ManifestEntry& e : manifest.entries) {
        doc.push_back({{"id", e.id},
                       {"image", e.image.generic_string()},
                       {"category", to_string(e.category)},
                       {"keypoints", detail::keypoints_to_json(e.keypoints)}});
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write manifest '" + path.string() + "'");
    }
    out << doc.dump(2) << '\n';
}

}  // namespace mtpose
