#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "capkit/caption_io.hpp"
#include "capkit/error.hpp"

namespace capkit {

enum class Verdict { candidate, baseline, tie };

/// One pairwise human judgment: which model's image is closer to the
/// original for this item.
struct PreferenceRecord {
    std::string item_id;
    std::string candidate;
    std::string baseline;
    Verdict verdict = Verdict::tie;
};

struct WinRateReport {
    std::string candidate;
    std::string baseline;
    long wins = 0;    // candidate preferred
    long losses = 0;  // baseline preferred
    long ties = 0;
    double win_rate = 0.0;  // wins / (wins + losses); ties ignored
    double ci_low = 0.0;
    double ci_high = 0.0;
};

namespace detail {

/// Acklam's rational approximation of the inverse normal CDF, sharpened
/// by one Halley step; accurate to ~1e-15 over (0,1).
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error("inverse_normal_cdf: p must be in (0,1)");

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x = 0.0;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    constexpr double sqrt_two = 1.4142135623730951;
    constexpr double sqrt_two_pi = 2.5066282746310002;
    const double e = 0.5 * std::erfc(-x / sqrt_two) - p;
    const double u = e * sqrt_two_pi * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

/// Half-up rounding to the given number of decimals (for non-negative v).
inline double round_half_up(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::floor(v * scale + 0.5) / scale;
}

}  // namespace detail

/// Two-sided normal quantile for a confidence level, e.g. 1.959964 at 0.95.
inline double two_sided_z(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw Error("two_sided_z: confidence must be in (0,1)");
    }
    return detail::inverse_normal_cdf(0.5 + 0.5 * confidence);
}

/// Wilson score interval for a binomial proportion. Exact 0 / 1 at the
/// wins = 0 / wins = n boundaries.
inline std::pair<double, double> wilson_interval(long wins, long n, double confidence = 0.95) {
    if (n < 1) throw Error("wilson_interval: n must be >= 1");
    if (wins < 0 || wins > n) throw Error("wilson_interval: wins must be in [0, n]");

    const double z = two_sided_z(confidence);
    const double nn = static_cast<double>(n);
    const double p_hat = static_cast<double>(wins) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p_hat + z2 / (2.0 * nn)) / denom;
    const double half =
        z * std::sqrt(p_hat * (1.0 - p_hat) / nn + z2 / (4.0 * nn * nn)) / denom;

    double low = center - half;
    double high = center + half;
    if (wins == 0) low = 0.0;
    if (wins == n) high = 1.0;
    return {std::clamp(low, 0.0, 1.0), std::clamp(high, 0.0, 1.0)};
}

/// Win rate for one (candidate, baseline) pair; ties are ignored, and a
/// pair with no decisive outcome is an error.
inline WinRateReport win_rate(const std::vector<PreferenceRecord>& records,
                              double confidence = 0.95) {
    if (records.empty()) throw Error("win_rate: no records");
    WinRateReport report;
    report.candidate = records.front().candidate;
    report.baseline = records.front().baseline;
    for (const PreferenceRecord& r : records) {
        if (r.candidate != report.candidate || r.baseline != report.baseline) {
            throw Error("win_rate: records span more than one model pair");
        }
        switch (r.verdict) {
            case Verdict::candidate: report.wins++; break;
            case Verdict::baseline: report.losses++; break;
            case Verdict::tie: report.ties++; break;
        }
    }
    const long decisive = report.wins + report.losses;
    if (decisive == 0) {
        throw Error("win_rate: no decisive comparisons for " + report.candidate + " vs " +
                    report.baseline);
    }
    report.win_rate = static_cast<double>(report.wins) / static_cast<double>(decisive);
    std::tie(report.ci_low, report.ci_high) =
        wilson_interval(report.wins, decisive, confidence);
    return report;
}

/// Groups records by (candidate, baseline) and reports each pair, sorted
/// for byte-stable output.
inline std::vector<WinRateReport> win_rate_reports(const std::vector<PreferenceRecord>& records,
                                                   double confidence = 0.95) {
    std::map<std::pair<std::string, std::string>, std::vector<PreferenceRecord>> groups;
    for (const PreferenceRecord& r : records) {
        groups[{r.candidate, r.baseline}].push_back(r);
    }
    std::vector<WinRateReport> reports;
    reports.reserve(groups.size());
    for (const auto& [key, group] : groups) {
        reports.push_back(win_rate(group, confidence));
    }
    return reports;
}

inline Verdict parse_verdict(std::string_view s) {
    if (s == "candidate") return Verdict::candidate;
    if (s == "baseline") return Verdict::baseline;
    if (s == "tie") return Verdict::tie;
    throw Error("verdict must be candidate, baseline, or tie; got \"" + std::string(s) + "\"");
}

/// CSV with header item_id,candidate,baseline,verdict.
inline std::vector<PreferenceRecord> parse_preference_csv(std::string_view text) {
    std::vector<PreferenceRecord> records;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        line_no++;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::size_t f = 0;
        while (true) {
            const std::size_t comma = line.find(',', f);
            std::string_view field =
                line.substr(f, comma == std::string_view::npos ? comma : comma - f);
            while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
            while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
            fields.emplace_back(field);
            if (comma == std::string_view::npos) break;
            f = comma + 1;
        }
        if (fields.size() != 4) {
            throw Error("records line " + std::to_string(line_no) + ": expected 4 fields");
        }
        if (line_no == 1) {
            if (fields != std::vector<std::string>{"item_id", "candidate", "baseline", "verdict"}) {
                throw Error("records: expected header item_id,candidate,baseline,verdict");
            }
            continue;
        }
        records.push_back({fields[0], fields[1], fields[2], parse_verdict(fields[3])});
    }
    return records;
}

/// JSON array of {item_id, candidate, baseline, verdict}.
inline std::vector<PreferenceRecord> parse_preference_json(std::string_view text) {
    using detail::json;
    const json doc = detail::parse_json(text, "records file");
    if (!doc.is_array()) throw Error("records file: expected a JSON array");
    std::vector<PreferenceRecord> records;
    records.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string p = "records[" + std::to_string(i) + "]";
        const json& node = doc[i];
        if (!node.is_object()) throw Error(p + ": expected an object");
        records.push_back(
            {detail::get_string(detail::require_key(node, "item_id", p), p + ".item_id"),
             detail::get_string(detail::require_key(node, "candidate", p), p + ".candidate"),
             detail::get_string(detail::require_key(node, "baseline", p), p + ".baseline"),
             parse_verdict(
                 detail::get_string(detail::require_key(node, "verdict", p), p + ".verdict"))});
    }
    return records;
}

/// Machine report: full-precision JSON array, one entry per model pair.
inline std::string win_rate_reports_to_json(const std::vector<WinRateReport>& reports) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const WinRateReport& r : reports) {
        nlohmann::ordered_json entry;
        entry["candidate"] = r.candidate;
        entry["baseline"] = r.baseline;
        entry["wins"] = r.wins;
        entry["losses"] = r.losses;
        entry["ties"] = r.ties;
        entry["win_rate"] = r.win_rate;
        entry["ci_low"] = r.ci_low;
        entry["ci_high"] = r.ci_high;
        doc.push_back(entry);
    }
    return doc.dump(2) + "\n";
}

/// Human-facing table with percents rounded half-up to one decimal.
inline std::string win_rate_table(const std::vector<WinRateReport>& reports) {
    std::string out = "baseline            win_rate   95% CI\n";
    for (const WinRateReport& r : reports) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-18s  %5.1f%%    [%.1f, %.1f]\n", r.baseline.c_str(),
                      detail::round_half_up(r.win_rate * 100.0, 1),
                      detail::round_half_up(r.ci_low * 100.0, 1),
                      detail::round_half_up(r.ci_high * 100.0, 1));
        out += buf;
    }
    return out;
}

}  // namespace capkit
