#include "tomsim/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tomsim/errors.hpp"
#include "tomsim/render.hpp"

namespace tomsim {

using ordered_json = nlohmann::ordered_json;

const char* to_string(FinishReason reason) {
    switch (reason) {
        case FinishReason::completed: return "completed";
        case FinishReason::length_capped: return "length_capped";
        case FinishReason::transport_error: return "transport_error";
    }
    return "completed";
}

FinishReason finish_reason_from_string(const std::string& s) {
    if (s == "completed") return FinishReason::completed;
    if (s == "length_capped") return FinishReason::length_capped;
    if (s == "transport_error") return FinishReason::transport_error;
    throw ParseError("unknown finish reason '" + s + "'", "field: finish_reason");
}

const char* to_string(Label label) {
    switch (label) {
        case Label::Correct: return "correct";
        case Label::FirstCommonLocation: return "first_common_location";
        case Label::PromptRefusal: return "prompt_refusal";
        case Label::InsufficientContext: return "insufficient_context";
        case Label::OtherWrongLocation: return "other_wrong_location";
    }
    return "other_wrong_location";
}

Label label_from_string(const std::string& s) {
    if (s == "correct") return Label::Correct;
    if (s == "first_common_location") return Label::FirstCommonLocation;
    if (s == "prompt_refusal") return Label::PromptRefusal;
    if (s == "insufficient_context") return Label::InsufficientContext;
    if (s == "other_wrong_location") return Label::OtherWrongLocation;
    throw ParseError("unknown label '" + s + "'", "field: label");
}

namespace {

// Lowercase; '_' and whitespace runs collapse to a single space.
std::string normalize(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (unsigned char c : s) {
        if (c == '_' || std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

bool boundary_ok(const std::string& haystack, std::size_t pos, std::size_t len) {
    auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    if (pos > 0 && alnum(haystack[pos - 1])) return false;
    if (pos + len < haystack.size() && alnum(haystack[pos + len])) return false;
    return true;
}

std::optional<std::string> extract_impl(const std::string& raw_text,
                                        const std::vector<std::string>& known_locations,
                                        bool last_mention) {
    if (known_locations.empty()) {
        throw InvalidParams("extract_answer requires a non-empty location pool");
    }
    const std::string haystack = normalize(raw_text);
    bool found = false;
    std::size_t best_pos = 0;
    std::size_t best_len = 0;
    std::string best_form;
    for (const auto& form : known_locations) {
        const std::string needle = normalize(form);
        if (needle.empty()) continue;
        std::size_t from = 0;
        while (true) {
            const std::size_t pos = haystack.find(needle, from);
            if (pos == std::string::npos) break;
            from = pos + 1;
            if (!boundary_ok(haystack, pos, needle.size())) continue;
            const bool better =
                !found ||
                (last_mention ? (pos > best_pos || (pos == best_pos && needle.size() > best_len))
                              : (pos < best_pos || (pos == best_pos && needle.size() > best_len)));
            if (better) {
                found = true;
                best_pos = pos;
                best_len = needle.size();
                best_form = form;
            }
        }
    }
    if (!found) return std::nullopt;
    return best_form;
}

bool contains_refusal(const std::string& raw_text, const std::vector<std::string>& phrases) {
    const std::string haystack = normalize(raw_text);
    for (const auto& phrase : phrases) {
        if (haystack.find(normalize(phrase)) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

std::optional<std::string> extract_answer(const std::string& raw_text,
                                          const std::vector<std::string>& known) {
    return extract_impl(raw_text, known, /*last_mention=*/true);
}

ClassifierConfig ClassifierConfig::defaults() {
    return ClassifierConfig{
        {"not enough information", "cannot determine", "unable to answer"},
        /*last_mention=*/true,
    };
}

std::vector<std::string> known_locations(const QARecord& record) {
    std::set<std::string> pool;
    for (const auto& e : record.events) {
        pool.insert(location_surface(e.location, record.environment));
    }
    if (!record.ground_truth.empty()) pool.insert(record.ground_truth);
    if (!record.distractors.first_common_location.empty()) {
        pool.insert(record.distractors.first_common_location);
    }
    if (!record.distractors.true_final_location.empty()) {
        pool.insert(record.distractors.true_final_location);
    }
    return {pool.begin(), pool.end()};
}

Label classify(const QARecord& record, const ModelResponse& response,
               const ClassifierConfig& config) {
    if (response.record_id != record.id) {
        throw RecordMismatch("response for '" + response.record_id +
                             "' classified against record '" + record.id + "'");
    }
    const auto extracted =
        extract_impl(response.raw_text, known_locations(record), config.last_mention);
    if (response.finish_reason == FinishReason::length_capped && !extracted.has_value()) {
        return Label::InsufficientContext;
    }
    if (!extracted.has_value() || contains_refusal(response.raw_text, config.refusal_phrases)) {
        return Label::PromptRefusal;
    }
    if (*extracted == record.ground_truth) return Label::Correct;
    if (*extracted == record.distractors.first_common_location) {
        return Label::FirstCommonLocation;
    }
    return Label::OtherWrongLocation;
}

ScoreOutput score_dataset(const Dataset& ds, const std::vector<ModelResponse>& responses,
                          const ClassifierConfig& config) {
    std::map<std::string, const QARecord*> by_id;
    for (const auto& rec : ds.records) by_id[rec.id] = &rec;

    ScoreOutput out;
    std::set<std::string> answered;
    for (const auto& resp : responses) {
        auto it = by_id.find(resp.record_id);
        if (it == by_id.end()) {
            throw RecordMismatch("response for unknown record id '" + resp.record_id + "'");
        }
        if (!answered.insert(resp.record_id).second) {
            throw DuplicateResponse("record '" + resp.record_id + "' has multiple responses");
        }
        const QARecord& rec = *it->second;
        ScoredResult result;
        result.record_id = rec.id;
        result.extracted =
            extract_impl(resp.raw_text, known_locations(rec), config.last_mention);
        result.label = classify(rec, resp, config);
        result.hedged = result.extracted.has_value() &&
                        contains_refusal(resp.raw_text, config.refusal_phrases);
        result.group = {
            {"suite", rec.meta.count("suite") ? rec.meta.at("suite") : ""},
            {"kind", to_string(rec.question.kind)},
            {"order", std::to_string(rec.order)},
            {"mislead_distance", std::to_string(rec.mislead_distance)},
            {"num_characters", std::to_string(rec.num_characters)},
            {"num_locations", std::to_string(rec.num_locations)},
            {"environment", to_string(rec.environment)},
            {"template_id", std::to_string(rec.prompt_template_id)},
            {"paraphrased", rec.paraphrased ? "true" : "false"},
        };
        out.results.push_back(std::move(result));
    }
    std::sort(out.results.begin(), out.results.end(),
              [](const ScoredResult& a, const ScoredResult& b) {
                  return a.record_id < b.record_id;
              });
    for (const auto& rec : ds.records) {
        if (!answered.count(rec.id)) out.missing_ids.push_back(rec.id);
    }
    return out;
}

WilsonInterval wilson_interval(int n, int k, double z) {
    if (n <= 0) throw InvalidParams("wilson_interval requires n > 0");
    if (k < 0 || k > n) throw InvalidParams("wilson_interval requires 0 <= k <= n");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = p + z2 / (2.0 * nn);
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    WilsonInterval out;
    // At the extremes the endpoints are exactly 0 and 1; avoid rounding one
    // ulp away from them.
    out.low = k == 0 ? 0.0 : std::max(0.0, (center - half) / denom);
    out.high = k == n ? 1.0 : std::min(1.0, (center + half) / denom);
    return out;
}

WilsonInterval normal_interval(int n, int k, double z) {
    if (n <= 0) throw InvalidParams("normal_interval requires n > 0");
    if (k < 0 || k > n) throw InvalidParams("normal_interval requires 0 <= k <= n");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double half = z * std::sqrt(p * (1.0 - p) / nn);
    return WilsonInterval{std::max(0.0, p - half), std::min(1.0, p + half)};
}

namespace {

// Numeric-aware comparison so mislead distances sort 1, 2, ..., 10.
bool value_less(const std::string& a, const std::string& b) {
    auto as_int = [](const std::string& s) -> std::optional<long long> {
        if (s.empty()) return std::nullopt;
        std::size_t i = (s[0] == '-') ? 1 : 0;
        if (i == s.size()) return std::nullopt;
        for (; i < s.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
        }
        return std::stoll(s);
    };
    auto ia = as_int(a);
    auto ib = as_int(b);
    if (ia.has_value() && ib.has_value()) return *ia < *ib;
    return a < b;
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<ScoredResult>& scored,
                                    const std::vector<std::string>& group_by,
                                    bool use_normal_interval) {
    std::map<std::vector<std::string>, std::vector<const ScoredResult*>> groups;
    for (const auto& result : scored) {
        std::vector<std::string> key;
        for (const auto& field : group_by) {
            auto it = result.group.find(field);
            if (it == result.group.end()) {
                throw UnknownField("result '" + result.record_id + "' has no field '" +
                                   field + "'");
            }
            key.push_back(it->second);
        }
        groups[key].push_back(&result);
    }

    std::vector<AggregateRow> rows;
    for (const auto& [key, members] : groups) {
        AggregateRow row;
        for (std::size_t i = 0; i < group_by.size(); ++i) {
            row.group_key.emplace_back(group_by[i], key[i]);
        }
        row.n = static_cast<int>(members.size());
        for (int l = 0; l < kLabelCount; ++l) {
            row.label_counts[static_cast<Label>(l)] = 0;
        }
        for (const ScoredResult* r : members) {
            row.label_counts[r->label] += 1;
        }
        row.n_correct = row.label_counts[Label::Correct];
        row.accuracy = row.n > 0 ? static_cast<double>(row.n_correct) / row.n : 0.0;
        const WilsonInterval ci = use_normal_interval
                                      ? normal_interval(row.n, row.n_correct)
                                      : wilson_interval(row.n, row.n_correct);
        row.ci_low = ci.low;
        row.ci_high = ci.high;
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const AggregateRow& a, const AggregateRow& b) {
        for (std::size_t i = 0; i < a.group_key.size() && i < b.group_key.size(); ++i) {
            if (a.group_key[i].second != b.group_key[i].second) {
                return value_less(a.group_key[i].second, b.group_key[i].second);
            }
        }
        return a.group_key.size() < b.group_key.size();
    });
    return rows;
}

namespace {

std::string format_ratio(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6f", value);
    return buffer;
}

}  // namespace

std::string report_to_csv(const std::vector<AggregateRow>& rows,
                          const std::vector<std::string>& group_by) {
    std::ostringstream os;
    for (const auto& field : group_by) os << field << ",";
    os << "n,n_correct,accuracy,ci_low,ci_high";
    for (int l = 0; l < kLabelCount; ++l) {
        os << "," << to_string(static_cast<Label>(l));
    }
    os << "\n";
    for (const auto& row : rows) {
        for (const auto& [field, value] : row.group_key) {
            (void)field;
            os << value << ",";
        }
        os << row.n << "," << row.n_correct << "," << format_ratio(row.accuracy) << ","
           << format_ratio(row.ci_low) << "," << format_ratio(row.ci_high);
        for (int l = 0; l < kLabelCount; ++l) {
            os << "," << row.label_counts.at(static_cast<Label>(l));
        }
        os << "\n";
    }
    return os.str();
}

void write_report(const std::vector<AggregateRow>& rows,
                  const std::vector<std::string>& group_by,
                  const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open report file for writing: " + path.string());
    }
    out << report_to_csv(rows, group_by);
    if (!out) {
        throw IoError("failed writing report file: " + path.string());
    }
}

std::string response_to_json_line(const ModelResponse& response) {
    ordered_json j;
    j["record_id"] = response.record_id;
    j["raw_text"] = response.raw_text;
    j["finish_reason"] = to_string(response.finish_reason);
    j["latency_ms"] = response.latency_ms;
    if (response.prompt_tokens.has_value()) j["prompt_tokens"] = *response.prompt_tokens;
    if (response.completion_tokens.has_value()) {
        j["completion_tokens"] = *response.completion_tokens;
    }
    j["meta"] = response.meta;
    return j.dump();
}

ModelResponse response_from_json_line(const std::string& line, int line_number) {
    const std::string locus = "line " + std::to_string(line_number);
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), locus);
    }
    ModelResponse out;
    try {
        out.record_id = j.at("record_id").get<std::string>();
        out.raw_text = j.at("raw_text").get<std::string>();
        out.finish_reason = finish_reason_from_string(j.at("finish_reason").get<std::string>());
        out.latency_ms = j.value("latency_ms", 0.0);
        if (j.contains("prompt_tokens")) out.prompt_tokens = j.at("prompt_tokens").get<int>();
        if (j.contains("completion_tokens")) {
            out.completion_tokens = j.at("completion_tokens").get<int>();
        }
        if (j.contains("meta")) {
            out.meta = j.at("meta").get<std::map<std::string, std::string>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what(), locus);
    }
    return out;
}

void write_responses(const std::vector<ModelResponse>& responses,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open responses file for writing: " + path.string());
    }
    for (const auto& r : responses) out << response_to_json_line(r) << "\n";
    if (!out) {
        throw IoError("failed writing responses file: " + path.string());
    }
}

std::vector<ModelResponse> read_responses(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open responses file: " + path.string());
    }
    std::vector<ModelResponse> out;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        out.push_back(response_from_json_line(line, line_number));
    }
    return out;
}

void write_scored(const std::vector<ScoredResult>& results,
                  const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open scored file for writing: " + path.string());
    }
    for (const auto& r : results) {
        ordered_json j;
        j["record_id"] = r.record_id;
        if (r.extracted.has_value()) {
            j["extracted"] = *r.extracted;
        } else {
            j["extracted"] = nullptr;
        }
        j["label"] = to_string(r.label);
        j["hedged"] = r.hedged;
        j["group"] = r.group;
        out << j.dump() << "\n";
    }
    if (!out) {
        throw IoError("failed writing scored file: " + path.string());
    }
}

std::vector<ScoredResult> read_scored(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open scored file: " + path.string());
    }
    std::vector<ScoredResult> out;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const std::string locus = "line " + std::to_string(line_number);
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(e.what(), locus);
        }
        try {
            ScoredResult r;
            r.record_id = j.at("record_id").get<std::string>();
            if (!j.at("extracted").is_null()) {
                r.extracted = j.at("extracted").get<std::string>();
            }
            r.label = label_from_string(j.at("label").get<std::string>());
            r.hedged = j.value("hedged", false);
            r.group = j.at("group").get<std::map<std::string, std::string>>();
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(e.what(), locus);
        }
    }
    return out;
}

}  // namespace tomsim
