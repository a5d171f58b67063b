#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include "sqleval/diversity.hpp"
#include "sqleval/error.hpp"
#include "sqleval/http_util.hpp"
#include "sqleval/json.hpp"

namespace sqleval {

struct EmbeddingConfig {
    // Empty or "fallback:" selects the deterministic offline embedder.
    std::string base_url;
    std::string model;
    std::string api_key_env;
    size_t fallback_dim = 256;
    uint64_t fallback_seed = 0;
};

// Batch embedding via an OpenAI-style endpoint, with the hashed bag-of-tokens
// embedder as the offline path.
class EmbeddingClient {
public:
    explicit EmbeddingClient(EmbeddingConfig cfg) : cfg_(std::move(cfg)) {}

    bool offline() const { return cfg_.base_url.empty() || cfg_.base_url.rfind("fallback:", 0) == 0; }

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const {
        if (texts.empty()) return {};
        if (offline()) {
            std::vector<EmbeddingVector> out;
            out.reserve(texts.size());
            for (const auto& t : texts) out.push_back(fallback_embed(t, cfg_.fallback_dim, cfg_.fallback_seed));
            return out;
        }
        return remote_embed(texts);
    }

private:
    std::vector<EmbeddingVector> remote_embed(const std::vector<std::string>& texts) const {
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
        body["input"] = texts;
        body["model"] = cfg_.model;
        auto res = client.Post(url.path_prefix + "/embeddings", headers, body.dump(), "application/json");
        if (!res)
            raise(Errc::provider_unavailable, "embedding endpoint unreachable: " + httplib::to_string(res.error()));
        if (res->status != 200)
            raise(Errc::provider_rejected,
                  "embedding endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 256));

        const Json j = Json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("data") || !j["data"].is_array() || j["data"].size() != texts.size())
            raise(Errc::unparseable, "malformed embedding response");

        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& item : j["data"]) {
            EmbeddingVector v;
            for (const auto& x : item.at("embedding")) v.push_back(x.get<double>());
            if (v.empty()) raise(Errc::degenerate_embedding, "embedding endpoint returned an empty vector");
            out.push_back(std::move(v));
        }
        return out;
    }

    EmbeddingConfig cfg_;
};

}  // namespace sqleval
