#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtpose/error.hpp"
#include "mtpose/metrics.hpp"
#include "mtpose/testcase.hpp"

namespace mtpose {

/// Fractional ranks (1-based); tied values share the average of the ranks
/// they span.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        const double shared = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = shared;
        }
        i = j + 1;
    }
    return ranks;
}

/// Spearman rank correlation with average ranks for ties. A series with no
/// order (all values tied) correlates with nothing; by convention that is 0.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw ValidationError("rank correlation needs series of equal length, got " +
                              std::to_string(x.size()) + " and " + std::to_string(y.size()));
    }
    if (x.size() < 3) {
        throw InsufficientDataError("rank correlation needs at least 3 points, got " +
                                    std::to_string(x.size()));
    }
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double cov = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if (var_x == 0.0 || var_y == 0.0) {
        return 0.0;
    }
    return cov / std::sqrt(var_x * var_y);
}

enum class MetricKind { F1, Precision, Recall };

inline std::string to_string(MetricKind m) {
    switch (m) {
        case MetricKind::F1: return "f1";
        case MetricKind::Precision: return "precision";
        default: return "recall";
    }
}

inline MetricKind metric_kind_from_string(const std::string& s) {
    if (s == "f1") return MetricKind::F1;
    if (s == "precision") return MetricKind::Precision;
    if (s == "recall") return MetricKind::Recall;
    throw ParseError("unknown metric '" + s + "'");
}

inline double metric_value(const MetricRecord& r, MetricKind m) {
    switch (m) {
        case MetricKind::F1: return r.f1;
        case MetricKind::Precision: return r.precision;
        default: return r.recall;
    }
}

/// Outcome of checking one metamorphic relation for one model, task and
/// metric. F1 verdicts are the primary ones; precision and recall verdicts
/// are supplementary context and never fail a run on their own.
struct MRVerdict {
    MrId mr = MrId::None;
    std::string model;
    Task task = Task::Segmentation;
    MetricKind metric = MetricKind::F1;
    bool satisfied = false;
    /// The data could not distinguish satisfied from violated (e.g. the
    /// metric is constant or the baseline is zero); reported as satisfied.
    bool vacuous = false;
    double statistic = 0.0;
    double threshold = 0.0;
    std::string method;
    std::vector<std::string> tc_ids;
};

inline nlohmann::json verdict_to_json(const MRVerdict& v) {
    return nlohmann::json{{"mr", to_string(v.mr)},
                          {"model", v.model},
                          {"task", to_string(v.task)},
                          {"metric", to_string(v.metric)},
                          {"satisfied", v.satisfied},
                          {"vacuous", v.vacuous},
                          {"statistic", v.statistic},
                          {"threshold", v.threshold},
                          {"method", v.method},
                          {"tc_ids", v.tc_ids}};
}

inline MRVerdict verdict_from_json(const nlohmann::json& j) {
    MRVerdict v;
    v.mr = mr_from_string(j.at("mr").get<std::string>());
    v.model = j.at("model").get<std::string>();
    v.task = task_from_string(j.at("task").get<std::string>());
    v.metric = metric_kind_from_string(j.at("metric").get<std::string>());
    v.satisfied = j.at("satisfied").get<bool>();
    v.vacuous = j.at("vacuous").get<bool>();
    v.statistic = j.at("statistic").get<double>();
    v.threshold = j.at("threshold").get<double>();
    v.method = j.at("method").get<std::string>();
    v.tc_ids = j.at("tc_ids").get<std::vector<std::string>>();
    return v;
}

/// Performance must fall monotonically as more keypoints are occluded:
/// satisfied iff spearman(level, metric) <= -min_abs_rho over the complete
/// occlusion ladder. Records must be the TC1 series of a single model and
/// task, one record per level 1..21.
inline MRVerdict verify_mr1(const std::vector<MetricRecord>& records, double min_abs_rho = 0.8,
                            MetricKind metric = MetricKind::F1) {
    if (min_abs_rho <= 0.0 || min_abs_rho > 1.0) {
        throw ConfigError("correlation threshold must lie in (0, 1]");
    }
    std::map<int, const MetricRecord*> by_level;
    for (const MetricRecord& r : records) {
        const auto level = tc1_level(r.tc_id);
        if (!level) {
            throw ValidationError("record " + r.tc_id + " is not part of the occlusion ladder");
        }
        if (!records.empty() &&
            (r.model != records.front().model || r.task != records.front().task)) {
            throw ValidationError("occlusion series mixes models or tasks");
        }
        if (!by_level.emplace(*level, &r).second) {
            throw ValidationError("duplicate occlusion level " + std::to_string(*level));
        }
    }
    std::vector<double> levels;
    std::vector<double> values;
    std::vector<std::string> tc_ids;
    for (int level = 1; level <= static_cast<int>(HandLandmarks::kCount); ++level) {
        const auto it = by_level.find(level);
        if (it == by_level.end()) {
            throw InsufficientDataError("occlusion series incomplete: no record for level " +
                                        std::to_string(level));
        }
        levels.push_back(static_cast<double>(level));
        values.push_back(metric_value(*it->second, metric));
        tc_ids.push_back(it->second->tc_id);
    }
    MRVerdict v;
    v.mr = MrId::MR1;
    v.model = records.front().model;
    v.task = records.front().task;
    v.metric = metric;
    v.statistic = spearman(levels, values);
    v.threshold = min_abs_rho;
    v.satisfied = v.statistic <= -min_abs_rho;
    v.method = "spearman rank correlation over occlusion levels; satisfied iff rho <= -" +
               std::to_string(min_abs_rho);
    v.tc_ids = std::move(tc_ids);
    return v;
}

/// Follow-up performance must stay within a relative tolerance of baseline:
/// satisfied iff max over follow-ups of (baseline - followup) / baseline is
/// at most epsilon. A zero baseline cannot degrade; that verdict is vacuous.
inline MRVerdict verify_non_degradation(const MetricRecord& baseline,
                                        const std::vector<MetricRecord>& followups, MrId mr,
                                        double epsilon = 0.05,
                                        MetricKind metric = MetricKind::F1) {
    if (epsilon < 0.0) {
        throw ConfigError("degradation tolerance must be non-negative");
    }
    if (followups.empty()) {
        throw InsufficientDataError("no follow-up records to compare against baseline");
    }
    for (const MetricRecord& f : followups) {
        if (f.model != baseline.model || f.task != baseline.task) {
            throw ValidationError("follow-up " + f.tc_id +
                                  " does not match the baseline model and task");
        }
    }
    MRVerdict v;
    v.mr = mr;
    v.model = baseline.model;
    v.task = baseline.task;
    v.metric = metric;
    v.threshold = epsilon;
    v.method = "max relative degradation vs baseline; satisfied iff <= " + std::to_string(epsilon);
    for (const MetricRecord& f : followups) {
        v.tc_ids.push_back(f.tc_id);
    }
    const double base = metric_value(baseline, metric);
    if (base == 0.0) {
        v.satisfied = true;
        v.vacuous = true;
        v.statistic = 0.0;
        return v;
    }
    double worst = std::numeric_limits<double>::lowest();
    for (const MetricRecord& f : followups) {
        worst = std::max(worst, (base - metric_value(f, metric)) / base);
    }
    v.statistic = worst;
    v.satisfied = worst <= epsilon;
    return v;
}

struct VerifyConfig {
    double min_abs_rho = 0.8;
    double epsilon_mr2 = 0.05;
    double epsilon_mr3 = 0.05;
    double epsilon_mr4 = 0.05;
    /// Also emit precision and recall verdicts alongside the f1 ones.
    bool supplementary = true;

    void set_epsilon(double e) { epsilon_mr2 = epsilon_mr3 = epsilon_mr4 = e; }

    double epsilon_for(MrId mr) const {
        switch (mr) {
            case MrId::MR2: return epsilon_mr2;
            case MrId::MR3: return epsilon_mr3;
            default: return epsilon_mr4;
        }
    }
};

inline nlohmann::json verify_config_to_json(const VerifyConfig& c) {
    return {{"min_abs_rho", c.min_abs_rho},
            {"epsilon_mr2", c.epsilon_mr2},
            {"epsilon_mr3", c.epsilon_mr3},
            {"epsilon_mr4", c.epsilon_mr4},
            {"supplementary", c.supplementary}};
}

inline VerifyConfig verify_config_from_json(const nlohmann::json& j) {
    VerifyConfig c;
    c.min_abs_rho = j.at("min_abs_rho").get<double>();
    c.epsilon_mr2 = j.at("epsilon_mr2").get<double>();
    c.epsilon_mr3 = j.at("epsilon_mr3").get<double>();
    c.epsilon_mr4 = j.at("epsilon_mr4").get<double>();
    c.supplementary = j.at("supplementary").get<bool>();
    return c;
}

namespace detail {

/// A perfectly flat occlusion series cannot exhibit the required downward
/// trend, but neither does it show robustness decay; treat it as vacuously
/// satisfied rather than failing on an undefined correlation.
inline MRVerdict verify_mr1_or_vacuous(const std::vector<MetricRecord>& series,
                                       double min_abs_rho, MetricKind metric) {
    MRVerdict v = verify_mr1(series, min_abs_rho, metric);
    const double first = metric_value(*std::min_element(series.begin(), series.end(),
                                                        [&](const MetricRecord& a,
                                                            const MetricRecord& b) {
                                                            return metric_value(a, metric) <
                                                                   metric_value(b, metric);
                                                        }),
                                      metric);
    const bool constant = std::all_of(series.begin(), series.end(), [&](const MetricRecord& r) {
        return metric_value(r, metric) == first;
    });
    if (constant) {
        v.satisfied = true;
        v.vacuous = true;
        v.statistic = 0.0;
        v.method += "; series constant, no trend to test";
    }
    return v;
}

}  // namespace detail

/// Check every metamorphic relation the records cover, per model and task.
/// Missing relations are skipped; a present relation with broken inputs
/// (incomplete ladder, absent baseline) is an error, not a silent pass.
inline std::vector<MRVerdict> verify_all(const std::vector<MetricRecord>& records,
                                         const VerifyConfig& config = {}) {
    std::vector<std::string> models;
    for (const MetricRecord& r : records) {
        if (std::find(models.begin(), models.end(), r.model) == models.end()) {
            models.push_back(r.model);
        }
    }
    std::vector<MetricKind> metrics{MetricKind::F1};
    if (config.supplementary) {
        metrics.push_back(MetricKind::Precision);
        metrics.push_back(MetricKind::Recall);
    }
    std::vector<MRVerdict> verdicts;
    for (const std::string& model : models) {
        for (const Task task : {Task::Segmentation, Task::Localisation}) {
            std::vector<MetricRecord> ladder;
            const MetricRecord* baseline = nullptr;
            std::map<MrId, std::vector<MetricRecord>> followups;
            for (const MetricRecord& r : records) {
                if (r.model != model || r.task != task) continue;
                if (r.tc_id == kBaselineTcId) {
                    baseline = &r;
                    continue;
                }
                const MrId mr = mr_of_tc(r.tc_id);
                if (mr == MrId::MR1) {
                    ladder.push_back(r);
                } else {
                    followups[mr].push_back(r);
                }
            }
            for (const MetricKind metric : metrics) {
                if (!ladder.empty()) {
                    verdicts.push_back(
                        detail::verify_mr1_or_vacuous(ladder, config.min_abs_rho, metric));
                }
                for (const MrId mr : {MrId::MR2, MrId::MR3, MrId::MR4}) {
                    const auto it = followups.find(mr);
                    if (it == followups.end()) continue;
                    if (baseline == nullptr) {
                        throw ValidationError("records for " + model + " include " +
                                              to_string(mr) + " follow-ups but no " +
                                              std::string(kBaselineTcId) + " row");
                    }
                    verdicts.push_back(verify_non_degradation(
                        *baseline, it->second, mr, config.epsilon_for(mr), metric));
                }
            }
        }
    }
    return verdicts;
}

/// Primary (f1) verdicts decide the overall outcome; supplementary metrics
/// never veto it.
inline bool all_primary_satisfied(const std::vector<MRVerdict>& verdicts) {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const MRVerdict& v) {
        return v.metric != MetricKind::F1 || v.satisfied;
    });
}

}  // namespace mtpose
