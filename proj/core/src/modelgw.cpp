#include "tomsim/modelgw.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "tomsim/errors.hpp"

namespace tomsim {

using ordered_json = nlohmann::ordered_json;

EndpointConfig load_endpoint_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open endpoint config: " + path.string());
    }
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), path.string());
    }
    EndpointConfig cfg;
    try {
        cfg.base_url = j.at("base_url").get<std::string>();
        cfg.model_name = j.at("model_name").get<std::string>();
        cfg.api_key_env_var = j.value("api_key_env_var", std::string{});
        cfg.temperature = j.value("temperature", 0.0);
        cfg.max_output_tokens = j.value("max_output_tokens", 4096);
        cfg.request_timeout_ms = j.value("request_timeout_ms", 60000);
        cfg.max_retries = j.value("max_retries", 3);
        cfg.max_in_flight = j.value("max_in_flight", 4);
        cfg.retry_backoff_ms = j.value("retry_backoff_ms", 250);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what(), path.string());
    }
    if (cfg.max_in_flight < 1 || cfg.max_retries < 0 || cfg.temperature < 0.0) {
        throw InvalidParams("endpoint config out of range: " + path.string());
    }
    return cfg;
}

namespace {

class HttplibTransport final : public HttpTransport {
public:
    HttpReply post(const std::string& base_url, const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& headers,
                   const std::string& body, int timeout_ms) override {
        httplib::Client client(base_url);
        client.set_connection_timeout(0, timeout_ms * 1000LL);
        client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        httplib::Headers hdrs;
        for (const auto& [k, v] : headers) hdrs.emplace(k, v);
        auto result = client.Post(path, hdrs, body, "application/json");
        if (!result) {
            throw TransportError("POST " + base_url + path + ": " +
                                 httplib::to_string(result.error()));
        }
        return HttpReply{result->status, result->body};
    }
};

}  // namespace

std::shared_ptr<HttpTransport> make_httplib_transport() {
    return std::make_shared<HttplibTransport>();
}

ModelResponse complete(const EndpointConfig& cfg, const std::string& prompt,
                       HttpTransport& transport, const std::string& record_id) {
    std::vector<std::pair<std::string, std::string>> headers;
    if (!cfg.api_key_env_var.empty()) {
        const char* key = std::getenv(cfg.api_key_env_var.c_str());
        if (key == nullptr) {
            throw AuthError("environment variable '" + cfg.api_key_env_var + "' is not set");
        }
        headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }

    ordered_json body;
    body["model"] = cfg.model_name;
    body["messages"] = ordered_json::array(
        {ordered_json{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = cfg.temperature;
    body["max_tokens"] = cfg.max_output_tokens;
    const std::string payload = body.dump();

    int retries = 0;
    std::string last_error;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0) {
            retries = attempt;
            const auto backoff =
                std::chrono::milliseconds(cfg.retry_backoff_ms) * (1LL << (attempt - 1));
            std::this_thread::sleep_for(backoff);
        }
        HttpReply reply;
        const auto started = std::chrono::steady_clock::now();
        try {
            reply = transport.post(cfg.base_url, "/chat/completions", headers, payload,
                                   cfg.request_timeout_ms);
        } catch (const TransportError& e) {
            last_error = e.what();
            continue;
        }
        const double latency =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                      started)
                .count();
        if (reply.status == 401 || reply.status == 403) {
            throw AuthError("provider rejected the API key (HTTP " +
                            std::to_string(reply.status) + ")");
        }
        if (reply.status == 429 || reply.status >= 500) {
            last_error = "HTTP " + std::to_string(reply.status);
            continue;
        }
        if (reply.status != 200) {
            throw TransportError("provider returned HTTP " + std::to_string(reply.status) +
                                 ": " + reply.body);
        }

        ordered_json parsed;
        try {
            parsed = ordered_json::parse(reply.body);
        } catch (const nlohmann::json::parse_error& e) {
            throw MalformedProviderReply(std::string("reply is not JSON: ") + e.what());
        }
        ModelResponse out;
        out.record_id = record_id;
        out.latency_ms = latency;
        try {
            const auto& choice = parsed.at("choices").at(0);
            out.raw_text = choice.at("message").at("content").get<std::string>();
            const std::string stop = choice.value("finish_reason", "stop");
            out.finish_reason = stop == "length" ? FinishReason::length_capped
                                                 : FinishReason::completed;
            if (parsed.contains("usage")) {
                const auto& usage = parsed.at("usage");
                if (usage.contains("prompt_tokens")) {
                    out.prompt_tokens = usage.at("prompt_tokens").get<int>();
                }
                if (usage.contains("completion_tokens")) {
                    out.completion_tokens = usage.at("completion_tokens").get<int>();
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw MalformedProviderReply(std::string("unexpected reply shape: ") + e.what());
        }
        if (retries > 0) {
            out.meta["retries"] = std::to_string(retries);
        }
        return out;
    }
    throw TransportError("request failed after " + std::to_string(cfg.max_retries) +
                         " retries: " + last_error);
}

BotKind bot_kind_from_string(const std::string& s) {
    if (s == "oracle") return BotKind::oracle;
    if (s == "last_location") return BotKind::last_location;
    if (s == "first_common_location") return BotKind::first_common_location;
    if (s == "refusal") return BotKind::refusal;
    if (s == "truncator") return BotKind::truncator;
    throw InvalidParams("unknown bot kind '" + s + "'");
}

Responder make_bot(BotKind kind) {
    switch (kind) {
        case BotKind::oracle:
            return [](const QARecord& rec) {
                return ModelResponse{rec.id, rec.ground_truth, FinishReason::completed};
            };
        case BotKind::last_location:
            return [](const QARecord& rec) {
                // Reads the symbolic events: the target's final move wins.
                std::string answer = rec.distractors.true_final_location;
                for (auto it = rec.events.rbegin(); it != rec.events.rend(); ++it) {
                    if (it->actor == rec.question.roles.target) {
                        answer = location_surface(it->location, rec.environment);
                        break;
                    }
                }
                return ModelResponse{rec.id, answer, FinishReason::completed};
            };
        case BotKind::first_common_location:
            return [](const QARecord& rec) {
                return ModelResponse{rec.id, rec.distractors.first_common_location,
                                     FinishReason::completed};
            };
        case BotKind::refusal:
            return [](const QARecord& rec) {
                return ModelResponse{rec.id, "There is not enough information.",
                                     FinishReason::completed};
            };
        case BotKind::truncator:
            return [](const QARecord& rec) {
                std::string gibberish;
                for (int i = 0; i < 20; ++i) {
                    gibberish += "lorem ipsum dolor sit amet consectetur ";
                }
                return ModelResponse{rec.id, gibberish, FinishReason::length_capped};
            };
    }
    throw InvalidParams("unhandled bot kind");
}

Responder make_endpoint_responder(const EndpointConfig& cfg,
                                  std::shared_ptr<HttpTransport> transport) {
    // Fail fast on a missing key instead of producing one transport_error
    // response per record.
    if (!cfg.api_key_env_var.empty() && std::getenv(cfg.api_key_env_var.c_str()) == nullptr) {
        throw AuthError("environment variable '" + cfg.api_key_env_var + "' is not set");
    }
    return [cfg, transport](const QARecord& rec) {
        const std::string prompt =
            build_prompt(rec.prompt_template_id, rec.story_text, rec.question_text);
        return complete(cfg, prompt, *transport, rec.id);
    };
}

std::vector<ModelResponse> run_dataset(const Responder& responder, const Dataset& ds,
                                       const RunOptions& options) {
    if (options.concurrency < 1) {
        throw InvalidParams("concurrency must be >= 1");
    }

    std::map<std::string, ModelResponse> collected;
    if (options.resume && options.log_path.has_value() &&
        std::filesystem::exists(*options.log_path)) {
        for (auto& response : read_responses(*options.log_path)) {
            collected.emplace(response.record_id, std::move(response));
        }
    }

    std::vector<const QARecord*> todo;
    for (const auto& rec : ds.records) {
        if (!collected.count(rec.id)) todo.push_back(&rec);
    }

    std::ofstream log;
    if (options.log_path.has_value()) {
        log.open(*options.log_path,
                 std::ios::binary | (options.resume ? std::ios::app : std::ios::trunc));
        if (!log) {
            throw IoError("cannot open response log: " + options.log_path->string());
        }
    }

    std::vector<std::optional<ModelResponse>> slots(todo.size());
    std::mutex mu;
    std::size_t flushed = 0;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            const QARecord& rec = *todo[i];
            ModelResponse response;
            try {
                response = responder(rec);
                response.record_id = rec.id;
            } catch (const std::exception& e) {
                response = ModelResponse{rec.id, "", FinishReason::transport_error};
                response.meta["error"] = e.what();
            }
            std::lock_guard<std::mutex> lock(mu);
            slots[i] = std::move(response);
            // Flush the contiguous completed prefix so interrupted runs can
            // resume from the log.
            while (flushed < slots.size() && slots[flushed].has_value()) {
                if (log.is_open()) {
                    log << response_to_json_line(*slots[flushed]) << "\n";
                    log.flush();
                }
                ++flushed;
            }
        }
    };

    const std::size_t threads =
        std::min<std::size_t>(static_cast<std::size_t>(options.concurrency), todo.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (auto& slot : slots) {
        collected.emplace(slot->record_id, std::move(*slot));
    }

    std::vector<ModelResponse> out;
    out.reserve(ds.records.size());
    std::vector<std::string> ids;
    for (const auto& rec : ds.records) ids.push_back(rec.id);
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
        auto it = collected.find(id);
        if (it != collected.end()) out.push_back(std::move(it->second));
    }
    return out;
}

ChatTransformer::ChatTransformer(EndpointConfig cfg, std::shared_ptr<HttpTransport> transport,
                                 std::string instruction)
    : cfg_(std::move(cfg)), transport_(std::move(transport)),
      instruction_(std::move(instruction)) {}

std::string ChatTransformer::transform(const std::string& sentence, double temperature) {
    EndpointConfig cfg = cfg_;
    cfg.temperature = temperature;
    try {
        return complete(cfg, instruction_ + "\n\n" + sentence, *transport_).raw_text;
    } catch (const Error& e) {
        throw TransformerUnavailable(e.what());
    }
}

std::unique_ptr<TextTransformer> load_transformer(const std::string& spec) {
    if (spec.empty() || spec == "identity") {
        return std::make_unique<IdentityTransformer>();
    }
    std::ifstream in(spec, std::ios::binary);
    if (!in) {
        throw IoError("cannot open transformer config: " + spec);
    }
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), spec);
    }
    const std::string kind = j.value("kind", "identity");
    if (kind == "identity") {
        return std::make_unique<IdentityTransformer>();
    }
    if (kind == "replay") {
        return std::make_unique<ReplayTransformer>(
            j.at("lines").get<std::vector<std::string>>());
    }
    if (kind == "endpoint") {
        EndpointConfig cfg;
        const auto& e = j.at("endpoint");
        cfg.base_url = e.at("base_url").get<std::string>();
        cfg.model_name = e.at("model_name").get<std::string>();
        cfg.api_key_env_var = e.value("api_key_env_var", std::string{});
        cfg.temperature = e.value("temperature", 1.3);
        cfg.max_output_tokens = e.value("max_output_tokens", 256);
        cfg.request_timeout_ms = e.value("request_timeout_ms", 60000);
        cfg.max_retries = e.value("max_retries", 3);
        const std::string instruction = j.value(
            "instruction",
            std::string("Paraphrase the following sentence, keeping every name and location "
                        "exactly as written. Reply with the paraphrased sentence only."));
        return std::make_unique<ChatTransformer>(cfg, make_httplib_transport(), instruction);
    }
    throw ParseError("unknown transformer kind '" + kind + "'", spec);
}

}  // namespace tomsim
