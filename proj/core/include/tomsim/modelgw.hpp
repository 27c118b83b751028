#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tomsim/eval.hpp"
#include "tomsim/render.hpp"
#include "tomsim/suites.hpp"

namespace tomsim {

struct EndpointConfig {
    std::string base_url;           // e.g. "https://api.example.com/v1"
    std::string model_name;
    std::string api_key_env_var;    // empty = no auth header
    double temperature = 0.0;
    int max_output_tokens = 4096;
    int request_timeout_ms = 60000;
    int max_retries = 3;
    int max_in_flight = 4;
    int retry_backoff_ms = 250;     // doubled per retry
};

EndpointConfig load_endpoint_config(const std::filesystem::path& path);

struct HttpReply {
    int status = 0;
    std::string body;
};

// Thin transport seam so tests can stand in for the network.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    // Throws TransportError on connection-level failure.
    virtual HttpReply post(const std::string& base_url, const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& headers,
                           const std::string& body, int timeout_ms) = 0;
};

// Real client backed by cpp-httplib.
std::shared_ptr<HttpTransport> make_httplib_transport();

// One chat-completion request (single user message). Retries transient
// transport failures and 429/5xx replies with exponential backoff. The
// provider's "length" stop reason maps to FinishReason::length_capped.
ModelResponse complete(const EndpointConfig& cfg, const std::string& prompt,
                       HttpTransport& transport, const std::string& record_id = "");

enum class BotKind {
    oracle,
    last_location,
    first_common_location,
    refusal,
    truncator,
};

BotKind bot_kind_from_string(const std::string& s);

using Responder = std::function<ModelResponse(const QARecord&)>;

// Deterministic responders embodying perfect recall or a named heuristic,
// used to calibrate the scorer and classifier.
Responder make_bot(BotKind kind);

// Responder that assembles the full prompt for a record and queries the
// endpoint through the given transport.
Responder make_endpoint_responder(const EndpointConfig& cfg,
                                  std::shared_ptr<HttpTransport> transport);

struct RunOptions {
    int concurrency = 1;
    // Append-only response log. With resume=true, ids already present are
    // not re-queried; without it an existing log is overwritten.
    std::optional<std::filesystem::path> log_path;
    bool resume = false;
};

// One response per record, canonically ordered by record id. Per-record
// failures become transport_error responses; the run itself never aborts.
// At most `concurrency` responder calls are in flight at once, and
// completed responses are flushed to the log in dataset order.
std::vector<ModelResponse> run_dataset(const Responder& responder, const Dataset& ds,
                                       const RunOptions& options = {});

// Per-line paraphraser backed by a chat endpoint.
class ChatTransformer final : public TextTransformer {
public:
    ChatTransformer(EndpointConfig cfg, std::shared_ptr<HttpTransport> transport,
                    std::string instruction);
    std::string transform(const std::string& sentence, double temperature) override;

private:
    EndpointConfig cfg_;
    std::shared_ptr<HttpTransport> transport_;
    std::string instruction_;
};

// Transformer factory for CLI use: "identity", or a JSON config file with
// kind identity | replay | endpoint.
std::unique_ptr<TextTransformer> load_transformer(const std::string& spec);

}  // namespace tomsim
