#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <semaphore>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sqleval/error.hpp"
#include "sqleval/http_util.hpp"
#include "sqleval/json.hpp"
#include "sqleval/log.hpp"

namespace sqleval {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 4096;
    std::string model;  // empty means: use the provider's configured model
};

struct TokenUsage {
    int64_t prompt_tokens = 0;
    int64_t completion_tokens = 0;
    int64_t total_tokens = 0;
};

struct ChatResult {
    std::string content;
    TokenUsage usage;
    int retries = 0;
};

struct ProviderConfig {
    std::string base_url;     // https://... or mock:<directory>
    std::string model;
    std::string api_key_env;  // name of the env var holding the key; never the key itself
    int max_retries = 4;
    int requests_per_minute = 120;
    int max_parallel = 4;
    double backoff_base_seconds = 1.0;  // tests shrink this
};

// Continuous-refill token bucket; capacity is one second's worth of requests.
// Pure state machine over caller-supplied timestamps so it can be unit tested
// without sleeping.
class TokenBucket {
public:
    TokenBucket(double rate_per_second, double capacity)
        : rate_(rate_per_second), capacity_(std::max(capacity, 1.0)), tokens_(capacity_) {}

    static TokenBucket per_minute(int requests_per_minute) {
        const double rate = static_cast<double>(requests_per_minute) / 60.0;
        return TokenBucket(rate, std::max(1.0, rate));
    }

    // Books one request and returns how long the caller must wait before
    // issuing it.
    std::chrono::milliseconds take(std::chrono::steady_clock::time_point now) {
        if (last_ == std::chrono::steady_clock::time_point{}) last_ = now;
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
        last_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return std::chrono::milliseconds(0);
        }
        const double wait_s = (1.0 - tokens_) / rate_;
        tokens_ = 0.0;
        last_ = now + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(wait_s));
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::duration<double>(wait_s)) +
               std::chrono::milliseconds(1);
    }

private:
    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_{};
};

namespace detail {

struct TransportResult {
    int status = 0;          // HTTP status; 0 means transport failure/timeout
    std::string content;     // assistant content on success
    TokenUsage usage;
    std::string error_text;  // diagnostic for failures
};

inline bool retryable(const TransportResult& r) {
    return r.status == 0 || r.status == 429 || (r.status >= 500 && r.status <= 599);
}

}  // namespace detail

// Provider-agnostic chat-completions client with retry, backoff, rate
// limiting and bounded parallelism. A base_url of the form mock:<dir> serves
// canned responses from that directory (files in name order, one per
// transport attempt) instead of going over the network.
class ChatClient {
public:
    explicit ChatClient(ProviderConfig cfg)
        : cfg_(std::move(cfg)),
          bucket_(TokenBucket::per_minute(std::max(1, cfg_.requests_per_minute))),
          inflight_(std::max(1, cfg_.max_parallel)) {
        if (is_mock_url(cfg_.base_url)) load_mock_dir();
        sleep_hook = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }

    const ProviderConfig& config() const { return cfg_; }

    ChatResult chat(const ChatRequest& req) {
        validate(req);
        inflight_.acquire();
        struct Release {
            std::counting_semaphore<>& sem;
            ~Release() { sem.release(); }
        } release{inflight_};

        int attempts = 0;
        while (true) {
            pace();
            detail::TransportResult r = is_mock_url(cfg_.base_url) ? mock_transport() : http_transport(req);
            if (r.status == 200) return {r.content, r.usage, attempts};
            if (!detail::retryable(r))
                raise(Errc::provider_rejected,
                      "provider rejected request (HTTP " + std::to_string(r.status) + "): " + r.error_text);
            if (attempts >= cfg_.max_retries)
                raise(Errc::provider_unavailable,
                      "provider unavailable after " + std::to_string(attempts) + " retries: " + r.error_text);
            sleep_hook(backoff_delay(attempts));
            ++attempts;
        }
    }

    // Test hook; defaults to a real sleep.
    std::function<void(std::chrono::milliseconds)> sleep_hook;

private:
    void validate(const ChatRequest& req) const {
        bool has_user = false;
        for (const auto& m : req.messages)
            if (m.role == "user") has_user = true;
        if (!has_user) raise(Errc::usage, "chat request needs at least one user message");
        if (req.temperature < 0.0 || req.temperature > 2.0)
            raise(Errc::usage, "temperature must be within [0, 2]");
    }

    void pace() {
        std::chrono::milliseconds wait{0};
        {
            std::lock_guard<std::mutex> lock(bucket_mutex_);
            wait = bucket_.take(std::chrono::steady_clock::now());
        }
        if (wait.count() > 0) sleep_hook(wait);
    }

    std::chrono::milliseconds backoff_delay(int attempt) {
        // full jitter: uniform over [0, base * 2^attempt]
        const double cap = cfg_.backoff_base_seconds * static_cast<double>(1ULL << std::min(attempt, 16));
        std::uniform_real_distribution<double> dist(0.0, cap);
        double secs = 0.0;
        {
            std::lock_guard<std::mutex> lock(jitter_mutex_);
            secs = dist(jitter_);
        }
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::duration<double>(secs));
    }

    detail::TransportResult http_transport(const ChatRequest& req) {
        const SplitUrl url = split_url(cfg_.base_url);
        httplib::Client client(url.origin);
        client.set_connection_timeout(15, 0);
        client.set_read_timeout(180, 0);

        httplib::Headers headers;
        if (!cfg_.api_key_env.empty()) {
            const char* key = std::getenv(cfg_.api_key_env.c_str());
            if (!key || !*key)
                raise(Errc::config, "API key environment variable " + cfg_.api_key_env + " is not set");
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }

        Json body;
        body["model"] = req.model.empty() ? cfg_.model : req.model;
        Json messages = Json::array();
        for (const auto& m : req.messages) messages.push_back(Json{{"role", m.role}, {"content", m.content}});
        body["messages"] = std::move(messages);
        body["temperature"] = req.temperature;
        body["max_tokens"] = req.max_tokens;

        auto res = client.Post(url.path_prefix + "/chat/completions", headers, body.dump(), "application/json");
        detail::TransportResult out;
        if (!res) {
            out.status = 0;
            out.error_text = httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        if (res->status != 200) {
            out.error_text = res->body.substr(0, 512);
            return out;
        }
        const Json j = Json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
            out.status = 0;
            out.error_text = "malformed provider response body";
            return out;
        }
        out.content = j["choices"][0].value("message", Json::object()).value("content", "");
        if (j.contains("usage")) {
            out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
            out.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
            out.usage.total_tokens = j["usage"].value("total_tokens", 0);
        }
        return out;
    }

    void load_mock_dir() {
        const std::filesystem::path dir = mock_url_path(cfg_.base_url);
        if (!std::filesystem::is_directory(dir))
            raise(Errc::config, "mock provider directory does not exist: " + dir.string());
        for (const auto& entry : std::filesystem::directory_iterator(dir))
            if (entry.is_regular_file()) mock_files_.push_back(entry.path());
        std::sort(mock_files_.begin(), mock_files_.end());
    }

    // One canned file per transport attempt. A JSON object {"status": s,
    // "content": "..."} simulates that HTTP status (0 = timeout); any other
    // file body is a 200 with the body as assistant content.
    detail::TransportResult mock_transport() {
        std::filesystem::path file;
        {
            std::lock_guard<std::mutex> lock(mock_mutex_);
            if (mock_next_ >= mock_files_.size())
                return {599, "", {}, "mock provider exhausted after " + std::to_string(mock_next_) + " responses"};
            file = mock_files_[mock_next_++];
        }
        std::ifstream in(file, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string body = buf.str();

        const Json j = Json::parse(body, nullptr, false);
        if (!j.is_discarded() && j.is_object() && j.contains("status")) {
            detail::TransportResult r;
            r.status = j.value("status", 200);
            r.content = j.value("content", "");
            r.error_text = j.value("error", "scripted failure");
            return r;
        }
        return {200, body, {}, ""};
    }

    ProviderConfig cfg_;
    TokenBucket bucket_;
    std::mutex bucket_mutex_;
    std::counting_semaphore<> inflight_;
    std::mt19937_64 jitter_{std::random_device{}()};
    std::mutex jitter_mutex_;
    std::vector<std::filesystem::path> mock_files_;
    size_t mock_next_ = 0;
    std::mutex mock_mutex_;
};

// Pulls the last top-level JSON array or object out of model output that may
// wrap it in reasoning prose and code fences. Balanced-bracket scan that
// respects string literals; every balanced region is tried with the parser
// and the last one that parses wins.
inline Json extract_json_payload(const std::string& text) {
    Json best;
    bool found = false;
    std::pair<size_t, size_t> last_balanced{0, 0};
    bool saw_balanced = false;

    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (c != '{' && c != '[') {
            ++i;
            continue;
        }
        // try to find the balanced end of the region starting at i
        size_t depth = 0;
        bool in_string = false;
        bool escaped = false;
        size_t end = std::string::npos;
        for (size_t j = i; j < n; ++j) {
            const char d = text[j];
            if (in_string) {
                if (escaped) escaped = false;
                else if (d == '\\') escaped = true;
                else if (d == '"') in_string = false;
                continue;
            }
            if (d == '"') in_string = true;
            else if (d == '{' || d == '[') ++depth;
            else if (d == '}' || d == ']') {
                if (depth == 0) break;  // stray closer; region is unbalanced
                if (--depth == 0) {
                    end = j;
                    break;
                }
            }
        }
        if (end == std::string::npos) {
            ++i;
            continue;
        }
        saw_balanced = true;
        last_balanced = {i, end + 1};
        const Json parsed = Json::parse(text.substr(i, end - i + 1), nullptr, false);
        if (!parsed.is_discarded() && (parsed.is_object() || parsed.is_array())) {
            best = parsed;
            found = true;
            i = end + 1;  // regions never overlap once one parses
        } else {
            ++i;  // scan inside the failed region
        }
    }

    if (found) return best;
    if (saw_balanced)
        raise(Errc::unparseable, "no parseable JSON region; last balanced span was [" +
                                     std::to_string(last_balanced.first) + ", " +
                                     std::to_string(last_balanced.second) + ")");
    raise(Errc::unparseable, "no balanced JSON region in model output");
}

}  // namespace sqleval
