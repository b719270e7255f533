#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtpose/error.hpp"
#include "mtpose/prediction.hpp"
#include "mtpose/rng.hpp"
#include "mtpose/subprocess.hpp"
#include "mtpose/testgen.hpp"

namespace mtpose {

inline constexpr int kProtocolVersion = 1;

enum class AdapterKind { External, Oracle, Degrader };

inline std::string to_string(AdapterKind k) {
    switch (k) {
        case AdapterKind::External: return "external";
        case AdapterKind::Oracle: return "oracle";
        default: return "degrader";
    }
}

inline AdapterKind adapter_kind_from_string(const std::string& s) {
    if (s == "external") return AdapterKind::External;
    if (s == "oracle") return AdapterKind::Oracle;
    if (s == "degrader") return AdapterKind::Degrader;
    throw ParseError("unknown adapter kind '" + s + "'");
}

struct ExternalConfig {
    std::string command;
    std::filesystem::path working_dir;
    int timeout_ms = 30'000;
};

enum class DegraderMode {
    /// Per-case pseudo-random failure draws (seeded, reproducible).
    Probabilistic,
    /// Deterministic stratified failures: in every tc group of size K with
    /// failure probability p, exactly round(p*K) cases fail.
    Expected,
};

/// Synthetic imperfect model: fails to detect with a configurable per-TC
/// probability and jitters keypoints by bounded deterministic noise.
struct DegraderConfig {
    std::map<std::string, double> failure_table;  // tc_id -> probability
    std::optional<double> occlusion_coeff;        // TC1 level n fails with min(1, c*n)
    double noise_px = 0.0;                        // max offset norm per keypoint
    uint64_t seed = 0;
    DegraderMode mode = DegraderMode::Probabilistic;
};

struct AdapterConfig {
    AdapterKind kind = AdapterKind::Oracle;
    ExternalConfig external;
    DegraderConfig degrader;

    void validate() const {
        if (kind == AdapterKind::External) {
            if (external.command.empty()) {
                throw ConfigError("external adapter requires a launch command");
            }
            if (external.timeout_ms <= 0) {
                throw ConfigError("adapter timeout must be positive");
            }
        }
        if (kind == AdapterKind::Degrader) {
            for (const auto& [tc, p] : degrader.failure_table) {
                if (p < 0.0 || p > 1.0) {
                    throw ConfigError("failure probability for " + tc +
                                      " outside [0, 1]: " + std::to_string(p));
                }
            }
            if (degrader.occlusion_coeff && *degrader.occlusion_coeff < 0.0) {
                throw ConfigError("occlusion coefficient must be non-negative");
            }
            if (degrader.noise_px < 0.0) {
                throw ConfigError("keypoint noise magnitude must be non-negative");
            }
        }
    }
};

inline nlohmann::json adapter_config_to_json(const AdapterConfig& c) {
    nlohmann::json j{{"kind", to_string(c.kind)}};
    if (c.kind == AdapterKind::External) {
        j["command"] = c.external.command;
        j["working_dir"] = c.external.working_dir.string();
        j["timeout_ms"] = c.external.timeout_ms;
    }
    if (c.kind == AdapterKind::Degrader) {
        j["failure_table"] = c.degrader.failure_table;
        if (c.degrader.occlusion_coeff) {
            j["occlusion_coeff"] = *c.degrader.occlusion_coeff;
        }
        j["noise_px"] = c.degrader.noise_px;
        j["seed"] = c.degrader.seed;
        j["mode"] = c.degrader.mode == DegraderMode::Expected ? "expected" : "probabilistic";
    }
    return j;
}

inline AdapterConfig adapter_config_from_json(const nlohmann::json& j) {
    AdapterConfig c;
    c.kind = adapter_kind_from_string(j.at("kind").get<std::string>());
    if (c.kind == AdapterKind::External) {
        c.external.command = j.at("command").get<std::string>();
        c.external.working_dir = j.value("working_dir", std::string{});
        c.external.timeout_ms = j.value("timeout_ms", 30'000);
    }
    if (c.kind == AdapterKind::Degrader) {
        c.degrader.failure_table =
            j.value("failure_table", std::map<std::string, double>{});
        if (j.contains("occlusion_coeff")) {
            c.degrader.occlusion_coeff = j.at("occlusion_coeff").get<double>();
        }
        c.degrader.noise_px = j.value("noise_px", 0.0);
        c.degrader.seed = j.value("seed", uint64_t{0});
        c.degrader.mode = j.value("mode", std::string{"probabilistic"}) == "expected"
                              ? DegraderMode::Expected
                              : DegraderMode::Probabilistic;
    }
    c.validate();
    return c;
}

/// predict() result: a prediction, or a per-request timeout. Timeouts are
/// reported separately and never conflated with no-detection.
struct AdapterResult {
    bool timed_out = false;
    Prediction prediction;
};

/// A live model under test. Handles serve requests strictly sequentially;
/// run several instances for parallelism.
class AdapterHandle {
public:
    virtual ~AdapterHandle() = default;
    virtual const std::string& model_name() const = 0;
    virtual AdapterResult predict(const SuiteCase& suite_case) = 0;
};

/// Echoes ground truth: the perfect model.
class OracleAdapter : public AdapterHandle {
public:
    explicit OracleAdapter(const TestSuite& suite) {
        for (const SuiteCase& c : suite.cases) {
            truth_.emplace(c.case_id, c.ground_truth);
        }
    }

    const std::string& model_name() const override { return name_; }

    AdapterResult predict(const SuiteCase& suite_case) override {
        const auto it = truth_.find(suite_case.case_id);
        const HandLandmarks& gt =
            it != truth_.end() ? it->second : suite_case.ground_truth;
        return {false, Detection{tight_bbox(gt), gt, std::nullopt}};
    }

private:
    std::string name_ = "oracle";
    std::unordered_map<std::string, HandLandmarks> truth_;
};

class DegraderAdapter : public AdapterHandle {
public:
    DegraderAdapter(const TestSuite& suite, const DegraderConfig& config) : config_(config) {
        std::map<std::string, int> group_sizes;
        for (const SuiteCase& c : suite.cases) {
            group_sizes[c.desc.tc_id] += 1;
        }
        std::map<std::string, int> next_index;
        for (const SuiteCase& c : suite.cases) {
            const int index = next_index[c.desc.tc_id]++;
            positions_.emplace(c.case_id,
                               GroupPosition{index, group_sizes[c.desc.tc_id]});
        }
    }

    const std::string& model_name() const override { return name_; }

    AdapterResult predict(const SuiteCase& suite_case) override {
        if (fails(suite_case)) {
            return {false, std::nullopt};  // explicit no-detection
        }
        const HandLandmarks noisy = perturb(suite_case);
        return {false, Detection{tight_bbox(noisy), noisy, std::nullopt}};
    }

    /// The failure probability this configuration assigns to a tc id.
    double failure_probability(const std::string& tc_id) const {
        const auto it = config_.failure_table.find(tc_id);
        if (it != config_.failure_table.end()) {
            return it->second;
        }
        if (config_.occlusion_coeff) {
            if (const auto level = tc1_level(tc_id)) {
                return std::min(1.0, *config_.occlusion_coeff * *level);
            }
        }
        return 0.0;
    }

private:
    struct GroupPosition {
        int index = 0;
        int size = 0;
    };

    static constexpr uint64_t kFailSalt = 0x6661696c5f6d7470ULL;
    static constexpr uint64_t kNoiseSalt = 0x6e6f6973655f6d74ULL;

    bool fails(const SuiteCase& c) const {
        const double p = failure_probability(c.desc.tc_id);
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        if (config_.mode == DegraderMode::Expected) {
            const auto it = positions_.find(c.case_id);
            if (it == positions_.end()) return false;
            const long failures = std::llround(p * it->second.size);
            return it->second.index < failures;
        }
        SplitMix64 rng(config_.seed ^ fnv1a64(c.case_id) ^ kFailSalt);
        return rng.next_unit() < p;
    }

    HandLandmarks perturb(const SuiteCase& c) const {
        HandLandmarks out = c.ground_truth;
        if (config_.noise_px <= 0.0) {
            return out;
        }
        // offsets in half-pixel units, rejection-sampled into the disc of
        // radius noise_px, so replays are bit-exact
        const auto half_units = static_cast<int64_t>(std::floor(2.0 * config_.noise_px));
        const double limit = 4.0 * config_.noise_px * config_.noise_px;
        SplitMix64 rng(config_.seed ^ fnv1a64(c.case_id) ^ kNoiseSalt);
        for (std::size_t i = 0; i < HandLandmarks::kCount; ++i) {
            int64_t dx = 0;
            int64_t dy = 0;
            do {
                dx = rng.next_in(-half_units, half_units);
                dy = rng.next_in(-half_units, half_units);
            } while (static_cast<double>(dx * dx + dy * dy) > limit);
            out[i].x += 0.5 * static_cast<double>(dx);
            out[i].y += 0.5 * static_cast<double>(dy);
        }
        return out;
    }

    std::string name_ = "degrader";
    DegraderConfig config_;
    std::unordered_map<std::string, GroupPosition> positions_;
};

/// Drives an out-of-process model over the newline-delimited JSON protocol.
///
/// Handshake:  -> {"type":"hello","version":1}
///             <- {"type":"hello","version":1,"model":"<name>"}
/// Request:    -> {"type":"predict","id":"<case>","image":"<absolute path>"}
/// Response:   <- {"type":"result","id":"<case>","detected":false}
///             <- {"type":"result","id":"<case>","detected":true,
///                 "bbox":[x_min,y_min,x_max,y_max],
///                 "keypoints":[[x,y] x 21], "confidence":0.9}
/// Responses arrive in request order; stale replies from timed-out requests
/// are discarded by id.
class ExternalAdapter : public AdapterHandle {
public:
    ExternalAdapter(const ExternalConfig& config, const std::filesystem::path& suite_dir)
        : timeout_ms_(config.timeout_ms),
          // empty means the current directory; absolute("") would throw
          suite_dir_(std::filesystem::absolute(suite_dir.empty() ? "." : suite_dir)),
          process_(config.command, config.working_dir) {
        nlohmann::json hello{{"type", "hello"}, {"version", kProtocolVersion}};
        try {
            process_.write_line(hello.dump());
        } catch (const IoError& e) {
            throw launch_failure(e.what());
        }
        std::optional<std::string> reply;
        try {
            reply = process_.read_line(timeout_ms_);
        } catch (const ProtocolError& e) {
            throw launch_failure(e.what());
        }
        if (!reply) {
            throw ProtocolError("adapter handshake timed out after " +
                                std::to_string(timeout_ms_) + " ms" + diagnostics());
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(*reply);
        } catch (const nlohmann::json::exception&) {
            throw ProtocolError("adapter handshake reply is not valid JSON: " + *reply +
                                diagnostics());
        }
        if (j.value("type", "") != "hello") {
            throw ProtocolError("adapter handshake reply has type '" + j.value("type", "") +
                                "', expected 'hello'");
        }
        const int version = j.value("version", -1);
        if (version != kProtocolVersion) {
            throw ProtocolError("adapter protocol version mismatch: harness speaks " +
                                std::to_string(kProtocolVersion) + ", adapter speaks " +
                                std::to_string(version));
        }
        model_ = j.value("model", "external");
    }

    const std::string& model_name() const override { return model_; }

    AdapterResult predict(const SuiteCase& suite_case) override {
        const std::string image = (suite_dir_ / suite_case.image_rel).string();
        nlohmann::json request{
            {"type", "predict"}, {"id", suite_case.case_id}, {"image", image}};
        process_.write_line(request.dump());
        const auto deadline =
            std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
        for (;;) {
            const auto now = std::chrono::steady_clock::now();
            if (now >= deadline) {
                return {true, std::nullopt};
            }
            const int remaining = static_cast<int>(
                std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1);
            const auto line = process_.read_line(remaining);
            if (!line) {
                return {true, std::nullopt};
            }
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(*line);
            } catch (const nlohmann::json::exception&) {
                throw ProtocolError("adapter sent malformed JSON: " + *line + diagnostics());
            }
            if (j.value("type", "") != "result") {
                throw ProtocolError("adapter sent unexpected message type '" +
                                    j.value("type", "") + "'");
            }
            if (j.value("id", "") != suite_case.case_id) {
                continue;  // stale reply to an earlier timed-out request
            }
            return {false, parse_prediction(j)};
        }
    }

private:
    IoError launch_failure(const std::string& detail) {
        return IoError("adapter launch failed: " + detail);
    }

    std::string diagnostics() {
        const std::string err = process_.stderr_output();
        return err.empty() ? "" : "; adapter stderr: " + err;
    }

    Prediction parse_prediction(const nlohmann::json& j) {
        if (!j.contains("detected") || !j["detected"].is_boolean()) {
            throw ProtocolError("result message lacks a boolean \"detected\" field");
        }
        if (!j["detected"].get<bool>()) {
            return std::nullopt;
        }
        Detection det;
        const auto& bbox = j.at("bbox");
        if (!bbox.is_array() || bbox.size() != 4) {
            throw ProtocolError("result \"bbox\" must be [x_min, y_min, x_max, y_max]");
        }
        det.bbox = {bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(),
                    bbox[3].get<double>()};
        const auto& kps = j.at("keypoints");
        if (!kps.is_array() || kps.size() != HandLandmarks::kCount) {
            throw ProtocolError("result \"keypoints\" must hold exactly 21 [x, y] pairs");
        }
        std::vector<Point> pts;
        pts.reserve(HandLandmarks::kCount);
        for (const auto& p : kps) {
            if (!p.is_array() || p.size() != 2) {
                throw ProtocolError("result keypoints must be [x, y] pairs");
            }
            pts.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        det.keypoints = HandLandmarks::from_points(pts);
        if (j.contains("confidence")) {
            det.confidence = j["confidence"].get<double>();
        }
        return det;
    }

    int timeout_ms_;
    std::filesystem::path suite_dir_;
    LineProcess process_;
    std::string model_;
};

/// Instantiate the adapter a config describes, ready to serve predictions
/// for the given suite.
inline std::unique_ptr<AdapterHandle> spawn_adapter(const AdapterConfig& config,
                                                    const TestSuite& suite) {
    config.validate();
    switch (config.kind) {
        case AdapterKind::Oracle:
            return std::make_unique<OracleAdapter>(suite);
        case AdapterKind::Degrader:
            return std::make_unique<DegraderAdapter>(suite, config.degrader);
        case AdapterKind::External:
            return std::make_unique<ExternalAdapter>(config.external, suite.dir);
    }
    throw ConfigError("unreachable adapter kind");
}

inline std::unique_ptr<AdapterHandle> oracle_adapter(const TestSuite& suite) {
    return std::make_unique<OracleAdapter>(suite);
}

inline std::unique_ptr<AdapterHandle> degrader_adapter(const TestSuite& suite,
                                                       const DegraderConfig& config) {
    AdapterConfig ac;
    ac.kind = AdapterKind::Degrader;
    ac.degrader = config;
    ac.validate();
    return std::make_unique<DegraderAdapter>(suite, config);
}

}  // namespace mtpose
