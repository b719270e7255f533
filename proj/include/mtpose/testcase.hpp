#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtpose/error.hpp"
#include "mtpose/transforms.hpp"

namespace mtpose {

/// Tc id of the untransformed source case every follow-up is compared to.
inline constexpr const char* kBaselineTcId = "BASELINE";

enum class MrId { None, MR1, MR2, MR3, MR4 };

inline std::string to_string(MrId mr) {
    switch (mr) {
        case MrId::MR1: return "MR1";
        case MrId::MR2: return "MR2";
        case MrId::MR3: return "MR3";
        case MrId::MR4: return "MR4";
        default: return "none";
    }
}

inline MrId mr_from_string(const std::string& s) {
    if (s == "MR1") return MrId::MR1;
    if (s == "MR2") return MrId::MR2;
    if (s == "MR3") return MrId::MR3;
    if (s == "MR4") return MrId::MR4;
    if (s == "none") return MrId::None;
    throw ParseError("unknown metamorphic relation '" + s + "'");
}

struct OcclusionParams {
    std::vector<int> indices;
    double radius = 10.0;
    uint8_t color = 0;

    bool operator==(const OcclusionParams&) const = default;
};

struct ExposureParams {
    double gamma = 1.0;

    bool operator==(const ExposureParams&) const = default;
};

struct BlurParams {
    BlurDirection direction = BlurDirection::Horizontal;
    int size = 20;

    bool operator==(const BlurParams&) const = default;
};

/// Transform parameters of one test case; monostate marks the untransformed
/// baseline.
using TransformParams = std::variant<std::monostate, OcclusionParams, ExposureParams, BlurParams>;

/// One follow-up (or baseline) case: which canonical test case, which MR,
/// which parameters, and which source sample it was derived from.
struct TestCaseDescriptor {
    std::string tc_id;   // "BASELINE", "TC1_L1".."TC1_L21", "TC2".."TC13"
    MrId mr = MrId::None;
    TransformParams params;
    std::string source_id;

    bool operator==(const TestCaseDescriptor&) const = default;
};

/// The MR each canonical tc id verifies. TC1_* -> MR1, TC2-TC6 -> MR2,
/// TC7-TC10 -> MR3, TC11-TC13 -> MR4, BASELINE -> none.
namespace detail {

inline std::optional<int> parse_int(const std::string& s) {
    if (s.empty()) return std::nullopt;
    int value = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + (c - '0');
    }
    return value;
}

}  // namespace detail

inline std::optional<int> tc1_level(const std::string& tc_id);

inline MrId mr_of_tc(const std::string& tc_id) {
    if (tc_id == "BASELINE") return MrId::None;
    if (tc_id.rfind("TC1_L", 0) == 0) {
        tc1_level(tc_id);  // throws on an out-of-range level
        return MrId::MR1;
    }
    if (tc_id.rfind("TC", 0) == 0) {
        if (const auto n = detail::parse_int(tc_id.substr(2))) {
            if (*n >= 2 && *n <= 6) return MrId::MR2;
            if (*n >= 7 && *n <= 10) return MrId::MR3;
            if (*n >= 11 && *n <= 13) return MrId::MR4;
        }
    }
    throw ParseError("unknown test case id '" + tc_id + "'");
}

/// Occlusion level of a TC1 sub-case id, when it is one.
inline std::optional<int> tc1_level(const std::string& tc_id) {
    if (tc_id.rfind("TC1_L", 0) != 0) return std::nullopt;
    const auto level = detail::parse_int(tc_id.substr(5));
    if (!level || *level < 1 || *level > 21) {
        throw ParseError("TC1 occlusion level out of range in '" + tc_id + "'");
    }
    return level;
}

inline nlohmann::json params_to_json(const TransformParams& params) {
    nlohmann::json j;
    if (std::holds_alternative<std::monostate>(params)) {
        j["kind"] = "none";
    } else if (const auto* occ = std::get_if<OcclusionParams>(&params)) {
        j["kind"] = "occlusion";
        j["indices"] = occ->indices;
        j["radius"] = occ->radius;
        j["color"] = static_cast<int>(occ->color);
    } else if (const auto* exp = std::get_if<ExposureParams>(&params)) {
        j["kind"] = "exposure";
        j["gamma"] = exp->gamma;
    } else {
        const auto& blur = std::get<BlurParams>(params);
        j["kind"] = "blur";
        j["direction"] = to_string(blur.direction);
        j["size"] = blur.size;
    }
    return j;
}

inline TransformParams params_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") {
        return std::monostate{};
    }
    if (kind == "occlusion") {
        OcclusionParams p;
        p.indices = j.at("indices").get<std::vector<int>>();
        p.radius = j.at("radius").get<double>();
        p.color = static_cast<uint8_t>(j.at("color").get<int>());
        return p;
    }
    if (kind == "exposure") {
        return ExposureParams{j.at("gamma").get<double>()};
    }
    if (kind == "blur") {
        BlurParams p;
        p.direction = blur_direction_from_string(j.at("direction").get<std::string>());
        p.size = j.at("size").get<int>();
        return p;
    }
    throw ParseError("unknown transform kind '" + kind + "'");
}

inline nlohmann::json descriptor_to_json(const TestCaseDescriptor& d) {
    return {{"tc", d.tc_id},
            {"mr", to_string(d.mr)},
            {"params", params_to_json(d.params)},
            {"source", d.source_id}};
}

inline TestCaseDescriptor descriptor_from_json(const nlohmann::json& j) {
    TestCaseDescriptor d;
    d.tc_id = j.at("tc").get<std::string>();
    d.mr = mr_from_string(j.at("mr").get<std::string>());
    d.params = params_from_json(j.at("params"));
    d.source_id = j.at("source").get<std::string>();
    if (d.mr != mr_of_tc(d.tc_id)) {
        throw ValidationError("test case '" + d.tc_id + "' cannot verify " + to_string(d.mr));
    }
    return d;
}

}  // namespace mtpose
