#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtpose/adapter.hpp"
#include "mtpose/error.hpp"
#include "mtpose/metrics.hpp"
#include "mtpose/rng.hpp"
#include "mtpose/testgen.hpp"
#include "mtpose/verifier.hpp"

namespace mtpose {

enum class CaseStatus { Detection, NoDetection, Timeout };

inline std::string to_string(CaseStatus s) {
    switch (s) {
        case CaseStatus::Detection: return "detection";
        case CaseStatus::NoDetection: return "no_detection";
        default: return "timeout";
    }
}

inline CaseStatus case_status_from_string(const std::string& s) {
    if (s == "detection") return CaseStatus::Detection;
    if (s == "no_detection") return CaseStatus::NoDetection;
    if (s == "timeout") return CaseStatus::Timeout;
    throw ParseError("unknown case status '" + s + "'");
}

/// Everything recorded about one suite case after prediction and scoring.
/// Timed-out cases carry no outcomes and are excluded from the confusion
/// counts but stay in the log so requests always reconcile with outcomes.
struct CaseOutcome {
    std::string case_id;
    std::string tc_id;
    MrId mr = MrId::None;
    std::string source_id;
    CaseStatus status = CaseStatus::NoDetection;
    Prediction prediction;
    std::optional<double> overlap;   // IoU vs the tightest gt box
    std::optional<double> distance;  // mean keypoint distance vs gt
    std::optional<Outcome> segmentation;
    std::optional<Outcome> localisation;
};

struct RunConfig {
    GenerationConfig generation;
    AdapterConfig adapter;
    double iou_threshold = 0.5;
    double ed_threshold = 10.0;
    VerifyConfig verify;
    int workers = 1;

    void validate() const {
        if (workers < 1) {
            throw ConfigError("worker count must be at least 1");
        }
        if (!(iou_threshold > 0) || !(ed_threshold > 0)) {
            throw ConfigError("classification thresholds must be positive");
        }
        adapter.validate();
    }
};

inline nlohmann::json run_config_to_json(const RunConfig& c) {
    return {{"generation", generation_config_to_json(c.generation)},
            {"adapter", adapter_config_to_json(c.adapter)},
            {"iou_threshold", c.iou_threshold},
            {"ed_threshold", c.ed_threshold},
            {"verify", verify_config_to_json(c.verify)},
            {"workers", c.workers}};
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.generation = generation_config_from_json(j.at("generation"));
    c.adapter = adapter_config_from_json(j.at("adapter"));
    c.iou_threshold = j.at("iou_threshold").get<double>();
    c.ed_threshold = j.at("ed_threshold").get<double>();
    c.verify = verify_config_from_json(j.at("verify"));
    c.workers = j.at("workers").get<int>();
    return c;
}

/// The self-describing record of one run: config snapshot, per-case raw
/// outcomes, derived metric cells, and verdicts. Re-running the verifier on
/// the stored records reproduces the stored verdicts exactly.
struct RunRecord {
    std::string run_id;
    std::string model;
    RunConfig config;
    std::filesystem::path suite_dir;
    std::size_t case_count = 0;
    std::vector<CaseOutcome> outcomes;
    std::vector<MetricRecord> records;
    std::vector<MRVerdict> verdicts;
    /// Timing metadata; never part of the run id or of determinism checks.
    std::string started_at;
    double wall_ms = 0.0;
    bool complete = false;
};

namespace detail {

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

/// Canonical report ordering: BASELINE, TC1_L1..TC1_L21, TC2..TC13.
inline int tc_order_key(const std::string& tc_id) {
    if (tc_id == kBaselineTcId) return 0;
    if (const auto level = tc1_level(tc_id)) return *level;
    if (tc_id.rfind("TC", 0) == 0) {
        if (const auto n = parse_int(tc_id.substr(2))) {
            return static_cast<int>(HandLandmarks::kCount) + *n - 1;
        }
    }
    throw ParseError("unknown test case id '" + tc_id + "'");
}

inline nlohmann::json prediction_to_json(const Prediction& p) {
    if (!p.has_value()) {
        return {{"detected", false}};
    }
    nlohmann::json j{{"detected", true},
                     {"bbox", {p->bbox.x_min, p->bbox.y_min, p->bbox.x_max, p->bbox.y_max}},
                     {"keypoints", keypoints_to_json(p->keypoints)}};
    if (p->confidence) {
        j["confidence"] = *p->confidence;
    }
    return j;
}

inline Prediction prediction_from_json(const nlohmann::json& j) {
    if (!j.at("detected").get<bool>()) {
        return std::nullopt;
    }
    Detection det;
    const auto& bbox = j.at("bbox");
    det.bbox = {bbox.at(0).get<double>(), bbox.at(1).get<double>(), bbox.at(2).get<double>(),
                bbox.at(3).get<double>()};
    det.keypoints = keypoints_from_json(j.at("keypoints"), "prediction");
    if (j.contains("confidence")) {
        det.confidence = j.at("confidence").get<double>();
    }
    return det;
}

inline nlohmann::json case_outcome_to_json(const CaseOutcome& o) {
    nlohmann::json j{{"case_id", o.case_id},
                     {"tc_id", o.tc_id},
                     {"mr", to_string(o.mr)},
                     {"source_id", o.source_id},
                     {"status", to_string(o.status)},
                     {"prediction", prediction_to_json(o.prediction)}};
    if (o.overlap) j["iou"] = *o.overlap;
    if (o.distance) j["mean_ed"] = *o.distance;
    if (o.segmentation) j["segmentation"] = to_string(*o.segmentation);
    if (o.localisation) j["localisation"] = to_string(*o.localisation);
    return j;
}

inline CaseOutcome case_outcome_from_json(const nlohmann::json& j) {
    CaseOutcome o;
    o.case_id = j.at("case_id").get<std::string>();
    o.tc_id = j.at("tc_id").get<std::string>();
    o.mr = mr_from_string(j.at("mr").get<std::string>());
    o.source_id = j.at("source_id").get<std::string>();
    o.status = case_status_from_string(j.at("status").get<std::string>());
    o.prediction = prediction_from_json(j.at("prediction"));
    if (j.contains("iou")) o.overlap = j.at("iou").get<double>();
    if (j.contains("mean_ed")) o.distance = j.at("mean_ed").get<double>();
    if (j.contains("segmentation")) {
        o.segmentation = outcome_from_string(j.at("segmentation").get<std::string>());
    }
    if (j.contains("localisation")) {
        o.localisation = outcome_from_string(j.at("localisation").get<std::string>());
    }
    return o;
}

inline nlohmann::json metric_record_to_json(const MetricRecord& r) {
    return {{"model", r.model},
            {"tc_id", r.tc_id},
            {"task", to_string(r.task)},
            {"tp", r.counts.tp},
            {"fp", r.counts.fp},
            {"fn", r.counts.fn},
            {"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1}};
}

inline MetricRecord metric_record_from_json(const nlohmann::json& j) {
    ConfusionCounts counts{j.at("tp").get<long>(), j.at("fp").get<long>(),
                           j.at("fn").get<long>()};
    return derive(j.at("model").get<std::string>(), j.at("tc_id").get<std::string>(),
                  task_from_string(j.at("task").get<std::string>()), counts);
}

inline std::string iso_utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);  // LF endings on every platform
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << content;
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

}  // namespace detail

inline nlohmann::json run_record_to_json(const RunRecord& r) {
    nlohmann::json outcomes = nlohmann::json::array();
    for (const CaseOutcome& o : r.outcomes) {
        outcomes.push_back(detail::case_outcome_to_json(o));
    }
    nlohmann::json records = nlohmann::json::array();
    for (const MetricRecord& m : r.records) {
        records.push_back(detail::metric_record_to_json(m));
    }
    nlohmann::json verdicts = nlohmann::json::array();
    for (const MRVerdict& v : r.verdicts) {
        verdicts.push_back(verdict_to_json(v));
    }
    return {{"run_id", r.run_id},
            {"model", r.model},
            {"config", run_config_to_json(r.config)},
            {"suite_dir", r.suite_dir.string()},
            {"case_count", r.case_count},
            {"outcomes", outcomes},
            {"records", records},
            {"verdicts", verdicts},
            {"timing", {{"started_at", r.started_at}, {"wall_ms", r.wall_ms}}},
            {"complete", r.complete}};
}

inline RunRecord run_record_from_json(const nlohmann::json& j) {
    RunRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.config = run_config_from_json(j.at("config"));
    r.suite_dir = j.at("suite_dir").get<std::string>();
    r.case_count = j.at("case_count").get<std::size_t>();
    for (const auto& o : j.at("outcomes")) {
        r.outcomes.push_back(detail::case_outcome_from_json(o));
    }
    for (const auto& m : j.at("records")) {
        r.records.push_back(detail::metric_record_from_json(m));
    }
    for (const auto& v : j.at("verdicts")) {
        r.verdicts.push_back(verdict_from_json(v));
    }
    r.started_at = j.at("timing").at("started_at").get<std::string>();
    r.wall_ms = j.at("timing").at("wall_ms").get<double>();
    r.complete = j.at("complete").get<bool>();
    return r;
}

/// Identifies the logical experiment: model, suite content and shape, and
/// every behavioral knob. Transport details (external command line, worker
/// count) and timing are excluded, so an external adapter that reproduces a
/// built-in one bit for bit shares its run id.
inline std::string derive_run_id(const RunRecord& record, const TestSuite& suite) {
    uint64_t h = fnv1a64(record.model);
    h ^= fnv1a64(generation_config_to_json(suite.config).dump());
    std::string ids;
    for (const SuiteCase& c : suite.cases) {
        ids += c.case_id;
        ids += '\n';
    }
    h ^= fnv1a64(ids);
    nlohmann::json knobs{{"iou_threshold", record.config.iou_threshold},
                         {"ed_threshold", record.config.ed_threshold},
                         {"verify", verify_config_to_json(record.config.verify)}};
    if (record.config.adapter.kind == AdapterKind::Degrader) {
        knobs["degrader"] = adapter_config_to_json(record.config.adapter);
    }
    h ^= fnv1a64(knobs.dump());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Classify one adapter result against its suite case.
inline CaseOutcome classify_case(const SuiteCase& c, const AdapterResult& result,
                                 const RunConfig& config) {
    CaseOutcome o;
    o.case_id = c.case_id;
    o.tc_id = c.desc.tc_id;
    o.mr = c.desc.mr;
    o.source_id = c.desc.source_id;
    if (result.timed_out) {
        o.status = CaseStatus::Timeout;
        return o;
    }
    o.prediction = result.prediction;
    o.status = result.prediction.has_value() ? CaseStatus::Detection : CaseStatus::NoDetection;
    if (result.prediction.has_value()) {
        o.overlap = iou(result.prediction->bbox, tight_bbox(c.ground_truth));
        o.distance = mean_ed(result.prediction->keypoints, c.ground_truth);
    }
    const ClassifyResult cls =
        classify(result.prediction, c.ground_truth, config.iou_threshold, config.ed_threshold);
    o.segmentation = cls.segmentation;
    o.localisation = cls.localisation;
    return o;
}

/// Aggregate scored outcomes into one MetricRecord per (tc_id, task), in
/// canonical tc order. Timed-out cases contribute to no cell.
inline std::vector<MetricRecord> score_outcomes(const std::string& model,
                                                const std::vector<CaseOutcome>& outcomes) {
    std::map<int, std::pair<std::string, std::array<ConfusionCounts, 2>>> cells;
    for (const CaseOutcome& o : outcomes) {
        if (o.status == CaseStatus::Timeout) continue;
        auto& cell = cells[detail::tc_order_key(o.tc_id)];
        cell.first = o.tc_id;
        auto bump = [](ConfusionCounts& counts, Outcome out) {
            switch (out) {
                case Outcome::TP: ++counts.tp; break;
                case Outcome::FP: ++counts.fp; break;
                case Outcome::FN: ++counts.fn; break;
            }
        };
        bump(cell.second[0], *o.segmentation);
        bump(cell.second[1], *o.localisation);
    }
    std::vector<MetricRecord> records;
    for (const auto& [key, cell] : cells) {
        records.push_back(derive(model, cell.first, Task::Segmentation, cell.second[0]));
        records.push_back(derive(model, cell.first, Task::Localisation, cell.second[1]));
    }
    return records;
}

inline constexpr const char* kMetricsCsvHeader = "model,tc_id,task,tp,fp,fn,precision,recall,f1";

inline std::string metrics_to_csv(const std::vector<MetricRecord>& records) {
    std::string csv = kMetricsCsvHeader;
    csv += '\n';
    for (const MetricRecord& r : records) {
        csv += r.model + ',' + r.tc_id + ',' + to_string(r.task) + ',' +
               std::to_string(r.counts.tp) + ',' + std::to_string(r.counts.fp) + ',' +
               std::to_string(r.counts.fn) + ',' + detail::fmt6(r.precision) + ',' +
               detail::fmt6(r.recall) + ',' + detail::fmt6(r.f1) + '\n';
    }
    return csv;
}

inline std::vector<MetricRecord> metrics_from_csv(const std::string& csv,
                                                  const std::string& origin = "metrics csv") {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != kMetricsCsvHeader) {
        throw ParseError(origin + ": expected header '" + kMetricsCsvHeader + "'");
    }
    std::vector<MetricRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream row(line);
        while (std::getline(row, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 9) {
            throw ParseError(origin + " line " + std::to_string(line_no) + ": expected 9 fields, got " +
                             std::to_string(fields.size()));
        }
        try {
            ConfusionCounts counts{std::stol(fields[3]), std::stol(fields[4]), std::stol(fields[5])};
            records.push_back(derive(fields[0], fields[1], task_from_string(fields[2]), counts));
        } catch (const std::logic_error&) {
            throw ParseError(origin + " line " + std::to_string(line_no) + ": malformed counts");
        }
    }
    return records;
}

inline std::vector<MetricRecord> load_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return metrics_from_csv(buf.str(), path.string());
}

inline nlohmann::json verdicts_to_json(const std::vector<MRVerdict>& verdicts) {
    nlohmann::json arr = nlohmann::json::array();
    for (const MRVerdict& v : verdicts) {
        arr.push_back(verdict_to_json(v));
    }
    return {{"verdicts", arr}, {"all_satisfied", all_primary_satisfied(verdicts)}};
}

inline std::vector<MRVerdict> verdicts_from_json(const nlohmann::json& j) {
    std::vector<MRVerdict> verdicts;
    for (const auto& v : j.at("verdicts")) {
        verdicts.push_back(verdict_from_json(v));
    }
    return verdicts;
}

namespace detail {

/// One plot-ready series row per tc cell: both tasks side by side.
inline std::string series_csv(const std::vector<MetricRecord>& records, MrId mr,
                              bool include_baseline) {
    std::map<std::string, std::map<int, std::pair<const MetricRecord*, const MetricRecord*>>> rows;
    std::vector<std::string> models;
    for (const MetricRecord& r : records) {
        const bool wanted =
            (include_baseline && r.tc_id == kBaselineTcId) ||
            (r.tc_id != kBaselineTcId && mr_of_tc(r.tc_id) == mr);
        if (!wanted) continue;
        if (rows.find(r.model) == rows.end()) {
            models.push_back(r.model);
        }
        auto& slot = rows[r.model][tc_order_key(r.tc_id)];
        (r.task == Task::Segmentation ? slot.first : slot.second) = &r;
    }
    std::string csv = mr == MrId::MR1
                          ? "model,level,seg_precision,seg_recall,seg_f1,loc_precision,loc_recall,loc_f1"
                          : "model,tc_id,seg_precision,seg_recall,seg_f1,loc_precision,loc_recall,loc_f1";
    csv += '\n';
    for (const std::string& model : models) {
        for (const auto& [key, slot] : rows[model]) {
            const MetricRecord* seg = slot.first;
            const MetricRecord* loc = slot.second;
            const MetricRecord* any = seg != nullptr ? seg : loc;
            if (any == nullptr) continue;
            const std::string label =
                mr == MrId::MR1 ? std::to_string(*tc1_level(any->tc_id)) : any->tc_id;
            auto cell = [](const MetricRecord* r, double MetricRecord::* field) {
                return r != nullptr ? fmt6(r->*field) : std::string{};
            };
            csv += model + ',' + label + ',' + cell(seg, &MetricRecord::precision) + ',' +
                   cell(seg, &MetricRecord::recall) + ',' + cell(seg, &MetricRecord::f1) + ',' +
                   cell(loc, &MetricRecord::precision) + ',' + cell(loc, &MetricRecord::recall) +
                   ',' + cell(loc, &MetricRecord::f1) + '\n';
        }
    }
    return csv;
}

}  // namespace detail

/// Write metrics.csv, verdicts.json, series/<mr>.csv and run.json under
/// out_dir. Only series files whose MR has scored cells are produced.
inline void emit_reports(const RunRecord& record, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir / "series");
    detail::write_text_file(out_dir / "metrics.csv", metrics_to_csv(record.records));
    detail::write_text_file(out_dir / "verdicts.json",
                            verdicts_to_json(record.verdicts).dump(2) + "\n");
    const std::map<MrId, std::pair<const char*, bool>> series_specs{
        {MrId::MR1, {"mr1.csv", false}},
        {MrId::MR2, {"mr2.csv", true}},
        {MrId::MR3, {"mr3.csv", true}},
        {MrId::MR4, {"mr4.csv", true}}};
    for (const auto& [mr, spec] : series_specs) {
        const bool any = std::any_of(record.records.begin(), record.records.end(),
                                     [&](const MetricRecord& r) {
                                         return r.tc_id != kBaselineTcId && mr_of_tc(r.tc_id) == mr;
                                     });
        if (!any) continue;
        detail::write_text_file(out_dir / "series" / spec.first,
                                detail::series_csv(record.records, mr, spec.second));
    }
    detail::write_text_file(out_dir / "run.json", run_record_to_json(record).dump(2) + "\n");
}

/// Raw prediction log, persisted before any scoring so that score and
/// verify can be replayed offline without re-running the model.
inline void write_predictions(const std::filesystem::path& path, const std::string& model,
                              const std::vector<std::pair<std::string, AdapterResult>>& results) {
    nlohmann::json preds = nlohmann::json::array();
    for (const auto& [case_id, result] : results) {
        nlohmann::json j = detail::prediction_to_json(result.prediction);
        j["id"] = case_id;
        j["timed_out"] = result.timed_out;
        preds.push_back(std::move(j));
    }
    detail::write_text_file(path, nlohmann::json{{"model", model}, {"predictions", preds}}.dump(2) + "\n");
}

inline std::pair<std::string, std::vector<std::pair<std::string, AdapterResult>>> load_predictions(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open predictions file '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("predictions file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    std::vector<std::pair<std::string, AdapterResult>> results;
    for (const auto& p : j.at("predictions")) {
        AdapterResult r;
        r.timed_out = p.value("timed_out", false);
        r.prediction = r.timed_out ? std::nullopt : detail::prediction_from_json(p);
        results.emplace_back(p.at("id").get<std::string>(), std::move(r));
    }
    return {j.at("model").get<std::string>(), std::move(results)};
}

namespace detail {

struct PredictPhase {
    std::string model;
    std::vector<std::optional<AdapterResult>> results;
    std::exception_ptr failure;
};

/// Fan the suite out to `workers` adapter instances. Each worker owns one
/// handle and serves it sequentially; results land by case index so worker
/// scheduling never affects the record. Failures stop the fan-out and are
/// reported after all workers drain.
inline PredictPhase predict_suite(const TestSuite& suite, const RunConfig& config) {
    PredictPhase phase;
    phase.results.resize(suite.cases.size());
    const int workers =
        std::max(1, std::min<int>(config.workers, static_cast<int>(suite.cases.size())));
    std::vector<std::unique_ptr<AdapterHandle>> handles;
    try {
        for (int w = 0; w < workers; ++w) {
            handles.push_back(spawn_adapter(config.adapter, suite));
        }
        phase.model = handles.front()->model_name();
        for (const auto& h : handles) {
            if (h->model_name() != phase.model) {
                throw ProtocolError("adapter instances disagree on the model name: '" +
                                    phase.model + "' vs '" + h->model_name() + "'");
            }
        }
    } catch (...) {
        phase.failure = std::current_exception();
        return phase;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex failure_mutex;
    auto worker = [&](AdapterHandle* handle) {
        for (;;) {
            if (stop.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= suite.cases.size()) return;
            try {
                phase.results[i] = handle->predict(suite.cases[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!phase.failure) {
                    phase.failure = std::current_exception();
                }
                stop.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(handles.size());
    for (auto& h : handles) {
        threads.emplace_back(worker, h.get());
    }
    for (std::thread& t : threads) {
        t.join();
    }
    return phase;
}

}  // namespace detail

/// Predict, score and verify a materialized suite, persisting predictions,
/// reports and the run record under out_dir. An adapter failure still
/// leaves a partial run.json (complete = false) before the error resurfaces.
inline RunRecord run_on_suite(const TestSuite& suite, const RunConfig& config,
                              const std::filesystem::path& out_dir) {
    config.validate();
    std::filesystem::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    RunRecord record;
    record.config = config;
    record.suite_dir = suite.dir;
    record.case_count = suite.cases.size();
    record.started_at = detail::iso_utc_now();

    detail::PredictPhase phase = detail::predict_suite(suite, config);
    record.model = phase.model;

    std::vector<std::pair<std::string, AdapterResult>> raw;
    for (std::size_t i = 0; i < suite.cases.size(); ++i) {
        if (!phase.results[i].has_value()) continue;
        raw.emplace_back(suite.cases[i].case_id, *phase.results[i]);
        record.outcomes.push_back(classify_case(suite.cases[i], *phase.results[i], config));
    }
    write_predictions(out_dir / "predictions.json", record.model, raw);

    const auto elapsed = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };
    if (phase.failure) {
        record.complete = false;
        record.run_id = derive_run_id(record, suite);
        record.wall_ms = elapsed();
        detail::write_text_file(out_dir / "run.json", run_record_to_json(record).dump(2) + "\n");
        std::rethrow_exception(phase.failure);
    }

    record.records = score_outcomes(record.model, record.outcomes);
    record.verdicts = verify_all(record.records, config.verify);
    record.complete = true;
    record.run_id = derive_run_id(record, suite);
    record.wall_ms = elapsed();
    emit_reports(record, out_dir);
    return record;
}

/// Full pipeline: generate the suite under <out_dir>/suite (reusing it when
/// one produced with an identical config is already there), then predict,
/// score, verify and report.
inline RunRecord run(const DatasetManifest& manifest, const RunConfig& config,
                     const std::filesystem::path& out_dir) {
    config.validate();
    const std::filesystem::path suite_dir = out_dir / "suite";
    const TestSuite suite = suite_reusable(suite_dir, config.generation)
                                ? load_suite(suite_dir)
                                : write_suite(manifest, config.generation, suite_dir);
    return run_on_suite(suite, config, out_dir);
}

/// Offline scoring: classify recorded predictions against a suite.
inline std::pair<std::vector<CaseOutcome>, std::vector<MetricRecord>> score_predictions(
    const TestSuite& suite, const std::string& model,
    const std::vector<std::pair<std::string, AdapterResult>>& predictions,
    const RunConfig& config) {
    std::vector<CaseOutcome> outcomes;
    outcomes.reserve(predictions.size());
    for (const auto& [case_id, result] : predictions) {
        const SuiteCase* c = suite.find(case_id);
        if (c == nullptr) {
            throw ValidationError("prediction for unknown case '" + case_id + "'");
        }
        outcomes.push_back(classify_case(*c, result, config));
    }
    std::vector<MetricRecord> records = score_outcomes(model, outcomes);
    return {std::move(outcomes), std::move(records)};
}

}  // namespace mtpose
