#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tomsim/suites.hpp"
#include "tomsim/types.hpp"

namespace tomsim {

enum class FinishReason {
    completed,
    length_capped,
    transport_error,
};

const char* to_string(FinishReason reason);
FinishReason finish_reason_from_string(const std::string& s);

struct ModelResponse {
    std::string record_id;
    std::string raw_text;
    FinishReason finish_reason = FinishReason::completed;
    double latency_ms = 0.0;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
    std::map<std::string, std::string> meta;
};

enum class Label {
    Correct,
    FirstCommonLocation,
    PromptRefusal,
    InsufficientContext,
    OtherWrongLocation,
};

constexpr int kLabelCount = 5;
const char* to_string(Label label);
Label label_from_string(const std::string& s);

struct ScoredResult {
    std::string record_id;
    std::optional<std::string> extracted;
    Label label = Label::OtherWrongLocation;
    // Groupable fields copied from the record at scoring time.
    std::map<std::string, std::string> group;
    // An extractable location coexisted with a refusal phrase.
    bool hedged = false;
};

struct AggregateRow {
    std::vector<std::pair<std::string, std::string>> group_key;  // (field, value)
    int n = 0;
    int n_correct = 0;
    double accuracy = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::map<Label, int> label_counts;
};

// Case-insensitive scan for any known location surface form, with '_' and
// whitespace runs treated as one separator ("room 3" matches "room_3").
// Returns the surface form of the last mention; longest match wins on ties.
std::optional<std::string> extract_answer(const std::string& raw_text,
                                          const std::vector<std::string>& known_locations);

struct ClassifierConfig {
    std::vector<std::string> refusal_phrases;  // case-insensitive substrings
    bool last_mention = true;                  // first-mention extraction for ablation

    static ClassifierConfig defaults();
};

// Decision order: length-capped with no extractable answer ->
// InsufficientContext; no extractable answer or a refusal phrase present ->
// PromptRefusal; then Correct / FirstCommonLocation / OtherWrongLocation by
// comparing the extracted surface form.
Label classify(const QARecord& record, const ModelResponse& response,
               const ClassifierConfig& config = ClassifierConfig::defaults());

// Known location surface pool for a record (every location named by its
// events plus the ground truth and distractors).
std::vector<std::string> known_locations(const QARecord& record);

struct ScoreOutput {
    std::vector<ScoredResult> results;     // ordered by record id
    std::vector<std::string> missing_ids;  // records with no response
};

// Joins responses to records by id. Throws RecordMismatch for unknown ids
// and DuplicateResponse when one record has two responses.
ScoreOutput score_dataset(const Dataset& ds, const std::vector<ModelResponse>& responses,
                          const ClassifierConfig& config = ClassifierConfig::defaults());

struct WilsonInterval {
    double low = 0.0;
    double high = 0.0;
};

// Two-sided 95% score interval at z = 1.959964 by default.
WilsonInterval wilson_interval(int n, int k, double z = 1.959964);

// Normal-approximation interval, for figure matching only.
WilsonInterval normal_interval(int n, int k, double z = 1.959964);

// Groups by the named fields (empty list = one global row). Rows are sorted
// by group key. Throws UnknownField when a field is absent from a result.
std::vector<AggregateRow> aggregate(const std::vector<ScoredResult>& scored,
                                    const std::vector<std::string>& group_by,
                                    bool use_normal_interval = false);

// Comma-separated table: group keys, n, n_correct, accuracy, ci_low,
// ci_high, then one column per label.
std::string report_to_csv(const std::vector<AggregateRow>& rows,
                          const std::vector<std::string>& group_by);
void write_report(const std::vector<AggregateRow>& rows,
                  const std::vector<std::string>& group_by,
                  const std::filesystem::path& path);

// Responses files are line-delimited JSON records.
std::string response_to_json_line(const ModelResponse& response);
ModelResponse response_from_json_line(const std::string& line, int line_number);
void write_responses(const std::vector<ModelResponse>& responses,
                     const std::filesystem::path& path);
std::vector<ModelResponse> read_responses(const std::filesystem::path& path);

// Scored-result files are line-delimited JSON records.
void write_scored(const std::vector<ScoredResult>& results, const std::filesystem::path& path);
std::vector<ScoredResult> read_scored(const std::filesystem::path& path);

}  // namespace tomsim
