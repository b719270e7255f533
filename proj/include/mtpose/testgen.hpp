#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtpose/error.hpp"
#include "mtpose/manifest.hpp"
#include "mtpose/preprocess.hpp"
#include "mtpose/testcase.hpp"
#include "mtpose/transforms.hpp"

namespace mtpose {

/// Everything that parameterizes suite generation. Two identical configs
/// over the same manifest produce byte-identical suites.
struct GenerationConfig {
    std::set<MrId> mrs{MrId::MR1, MrId::MR2, MrId::MR3, MrId::MR4};
    double occlusion_radius = 10.0;
    uint8_t occlusion_color = 0;
    int kernel_size = 20;
    /// Follow-ups are normally generated only for without-object samples;
    /// baselines always cover both categories.
    bool followups_with_object = false;
    /// Optional input normalization: square-patch crop then resize.
    bool preprocess = false;
    double crop_scale = 2.2;
    int image_side = 244;

    bool operator==(const GenerationConfig&) const = default;
};

inline nlohmann::json generation_config_to_json(const GenerationConfig& c) {
    std::vector<std::string> mrs;
    for (MrId mr : c.mrs) mrs.push_back(to_string(mr));
    return {{"mrs", mrs},
            {"occlusion_radius", c.occlusion_radius},
            {"occlusion_color", static_cast<int>(c.occlusion_color)},
            {"kernel_size", c.kernel_size},
            {"followups_with_object", c.followups_with_object},
            {"preprocess", c.preprocess},
            {"crop_scale", c.crop_scale},
            {"image_side", c.image_side}};
}

inline GenerationConfig generation_config_from_json(const nlohmann::json& j) {
    GenerationConfig c;
    c.mrs.clear();
    for (const auto& s : j.at("mrs")) c.mrs.insert(mr_from_string(s.get<std::string>()));
    c.occlusion_radius = j.at("occlusion_radius").get<double>();
    c.occlusion_color = static_cast<uint8_t>(j.at("occlusion_color").get<int>());
    c.kernel_size = j.at("kernel_size").get<int>();
    c.followups_with_object = j.at("followups_with_object").get<bool>();
    c.preprocess = j.at("preprocess").get<bool>();
    c.crop_scale = j.at("crop_scale").get<double>();
    c.image_side = j.at("image_side").get<int>();
    return c;
}

/// The four canonical exposure settings for TC7..TC10.
inline const std::array<double, 4>& canonical_gammas() {
    static const std::array<double, 4> gammas{5.0, 2.0, 0.5, 0.2};
    return gammas;
}

/// TC1 level n occludes the first n landmark indices 0..n-1.
inline std::vector<TestCaseDescriptor> gen_tc1(const std::string& source_id,
                                               const GenerationConfig& config) {
    std::vector<TestCaseDescriptor> cases;
    cases.reserve(HandLandmarks::kCount);
    for (int level = 1; level <= static_cast<int>(HandLandmarks::kCount); ++level) {
        OcclusionParams p;
        p.indices.resize(static_cast<std::size_t>(level));
        std::iota(p.indices.begin(), p.indices.end(), 0);
        p.radius = config.occlusion_radius;
        p.color = config.occlusion_color;
        cases.push_back({"TC1_L" + std::to_string(level), MrId::MR1, p, source_id});
    }
    return cases;
}

/// TC2..TC6 occlude one finger each (4 keypoints), thumb through pinky.
inline std::vector<TestCaseDescriptor> gen_finger_tcs(const std::string& source_id,
                                                      const GenerationConfig& config) {
    std::vector<TestCaseDescriptor> cases;
    cases.reserve(5);
    int tc = 2;
    for (Finger f : {Finger::Thumb, Finger::Index, Finger::Middle, Finger::Ring, Finger::Pinky}) {
        const auto idx = finger_indices(f);
        OcclusionParams p;
        p.indices.assign(idx.begin(), idx.end());
        p.radius = config.occlusion_radius;
        p.color = config.occlusion_color;
        cases.push_back({"TC" + std::to_string(tc), MrId::MR2, p, source_id});
        ++tc;
    }
    return cases;
}

/// TC7..TC10: gamma 5 (strong underexposure), 2, 0.5, 0.2 (strong
/// overexposure).
inline std::vector<TestCaseDescriptor> gen_exposure_tcs(const std::string& source_id) {
    std::vector<TestCaseDescriptor> cases;
    cases.reserve(4);
    int tc = 7;
    for (double gamma : canonical_gammas()) {
        cases.push_back({"TC" + std::to_string(tc), MrId::MR3, ExposureParams{gamma}, source_id});
        ++tc;
    }
    return cases;
}

/// TC11..TC13: vertical, horizontal, diagonal motion blur.
inline std::vector<TestCaseDescriptor> gen_blur_tcs(const std::string& source_id,
                                                    const GenerationConfig& config) {
    return {{"TC11", MrId::MR4, BlurParams{BlurDirection::Vertical, config.kernel_size}, source_id},
            {"TC12", MrId::MR4, BlurParams{BlurDirection::Horizontal, config.kernel_size}, source_id},
            {"TC13", MrId::MR4, BlurParams{BlurDirection::Diagonal, config.kernel_size}, source_id}};
}

/// All follow-up descriptors of the selected MRs for one sample, in the
/// fixed canonical order TC1_L1..L21, TC2..TC6, TC7..TC10, TC11..TC13.
inline std::vector<TestCaseDescriptor> gen_followups(const std::string& source_id,
                                                     const GenerationConfig& config) {
    std::vector<TestCaseDescriptor> cases;
    if (config.mrs.count(MrId::MR1)) {
        auto tc1 = gen_tc1(source_id, config);
        cases.insert(cases.end(), tc1.begin(), tc1.end());
    }
    if (config.mrs.count(MrId::MR2)) {
        auto tcs = gen_finger_tcs(source_id, config);
        cases.insert(cases.end(), tcs.begin(), tcs.end());
    }
    if (config.mrs.count(MrId::MR3)) {
        auto tcs = gen_exposure_tcs(source_id);
        cases.insert(cases.end(), tcs.begin(), tcs.end());
    }
    if (config.mrs.count(MrId::MR4)) {
        auto tcs = gen_blur_tcs(source_id, config);
        cases.insert(cases.end(), tcs.begin(), tcs.end());
    }
    return cases;
}

/// Apply a descriptor's transform to a source image. The ground-truth
/// landmarks are untouched: corruptions never move the true hand.
inline ImageBuffer apply_transform(const ImageBuffer& image, const HandLandmarks& landmarks,
                                   const TransformParams& params) {
    if (std::holds_alternative<std::monostate>(params)) {
        return image;
    }
    if (const auto* occ = std::get_if<OcclusionParams>(&params)) {
        return occlude(image, landmarks, occ->indices, {occ->radius, occ->color});
    }
    if (const auto* exp = std::get_if<ExposureParams>(&params)) {
        return adjust_gamma(image, GammaParam{exp->gamma});
    }
    const auto& blur = std::get<BlurParams>(params);
    return correlate(image, build_motion_kernel(blur.size, blur.direction));
}

/// One materialized suite case: descriptor, case id, on-disk image name,
/// source category, and the ground truth shared with the source sample.
struct SuiteCase {
    TestCaseDescriptor desc;
    std::string case_id;    // "<sample_id>__<tc_id>"
    std::string image_rel;  // PNG file name within the suite directory
    Category category = Category::WithoutObject;
    HandLandmarks ground_truth;
};

struct TestSuite {
    GenerationConfig config;
    std::filesystem::path dir;
    std::vector<SuiteCase> cases;

    const SuiteCase* find(const std::string& case_id) const {
        for (const auto& c : cases) {
            if (c.case_id == case_id) return &c;
        }
        return nullptr;
    }
};

inline std::string case_id_of(const std::string& sample_id, const std::string& tc_id) {
    return sample_id + "__" + tc_id;
}

namespace detail {

inline nlohmann::json suite_case_to_json(const SuiteCase& c) {
    nlohmann::json j = descriptor_to_json(c.desc);
    j["id"] = c.case_id;
    j["image"] = c.image_rel;
    j["category"] = to_string(c.category);
    j["keypoints"] = keypoints_to_json(c.ground_truth);
    return j;
}

inline SuiteCase suite_case_from_json(const nlohmann::json& j) {
    SuiteCase c;
    c.desc = descriptor_from_json(j);
    c.case_id = j.at("id").get<std::string>();
    c.image_rel = j.at("image").get<std::string>();
    c.category = category_from_string(j.at("category").get<std::string>());
    c.ground_truth = keypoints_from_json(j.at("keypoints"), "suite case '" + c.case_id + "'");
    return c;
}

}  // namespace detail

/// Materialize a test suite to dir: one PNG per case named
/// <sample_id>__<tc_id>.png, suite.json (array of case descriptors), and
/// generation.json (the config snapshot used for reuse checks).
inline TestSuite write_suite(const DatasetManifest& manifest, const GenerationConfig& config,
                             const std::filesystem::path& dir) {
    if (manifest.entries.empty()) {
        throw ValidationError("cannot build a suite from an empty manifest");
    }
    std::filesystem::create_directories(dir);

    TestSuite suite;
    suite.config = config;
    suite.dir = dir;

    for (const ManifestEntry& entry : manifest.entries) {
        ImageBuffer image = read_png(manifest.image_path(entry));
        HandLandmarks gt = entry.keypoints;
        if (config.preprocess) {
            Sample patch = crop_square_patch(image, gt, config.crop_scale);
            Sample normalized = resize(patch.image, patch.landmarks, config.image_side);
            image = std::move(normalized.image);
            gt = normalized.landmarks;
        }

        std::vector<TestCaseDescriptor> descs;
        descs.push_back({"BASELINE", MrId::None, std::monostate{}, entry.id});
        if (entry.category == Category::WithoutObject || config.followups_with_object) {
            auto followups = gen_followups(entry.id, config);
            descs.insert(descs.end(), followups.begin(), followups.end());
        }

        for (const TestCaseDescriptor& desc : descs) {
            SuiteCase c;
            c.desc = desc;
            c.case_id = case_id_of(entry.id, desc.tc_id);
            c.image_rel = c.case_id + ".png";
            c.category = entry.category;
            c.ground_truth = gt;
            write_png(dir / c.image_rel, apply_transform(image, gt, desc.params));
            suite.cases.push_back(std::move(c));
        }
    }

    nlohmann::json index = nlohmann::json::array();
    for (const SuiteCase& c : suite.cases) {
        index.push_back(detail::suite_case_to_json(c));
    }
    {
        std::ofstream out(dir / "suite.json");
        if (!out) {
            throw IoError("cannot write suite index to '" + (dir / "suite.json").string() + "'");
        }
        out << index.dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "generation.json");
        if (!out) {
            throw IoError("cannot write '" + (dir / "generation.json").string() + "'");
        }
        out << generation_config_to_json(config).dump(2) << '\n';
    }
    return suite;
}

/// Load a previously materialized suite.
inline TestSuite load_suite(const std::filesystem::path& dir) {
    std::ifstream in(dir / "suite.json");
    if (!in) {
        throw IoError("cannot open suite index '" + (dir / "suite.json").string() + "'");
    }
    nlohmann::json index;
    try {
        in >> index;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("suite index in '" + dir.string() + "' is not valid JSON: " + e.what());
    }
    if (!index.is_array()) {
        throw ParseError("suite index must be a top-level array");
    }
    TestSuite suite;
    suite.dir = dir;
    for (const auto& item : index) {
        suite.cases.push_back(detail::suite_case_from_json(item));
    }
    std::ifstream cfg(dir / "generation.json");
    if (cfg) {
        nlohmann::json j;
        cfg >> j;
        suite.config = generation_config_from_json(j);
    }
    return suite;
}

/// True when dir already holds a suite produced with exactly this config.
inline bool suite_reusable(const std::filesystem::path& dir, const GenerationConfig& config) {
    std::ifstream cfg(dir / "generation.json");
    if (!cfg || !std::filesystem::exists(dir / "suite.json")) {
        return false;
    }
    try {
        nlohmann::json j;
        cfg >> j;
        return generation_config_from_json(j) == config;
    } catch (...) {
        return false;
    }
}

}  // namespace mtpose
