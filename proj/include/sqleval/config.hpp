#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "sqleval/datagen.hpp"
#include "sqleval/embedding.hpp"
#include "sqleval/error.hpp"
#include "sqleval/exec.hpp"
#include "sqleval/gateway.hpp"
#include "sqleval/json.hpp"
#include "sqleval/schema.hpp"

namespace sqleval {

struct AppConfig {
    std::filesystem::path database;
    std::filesystem::path schema_descriptions;
    std::filesystem::path few_shot_examples;  // optional; required for few-shot runs
    std::filesystem::path output_dir = "out";
    ProviderConfig generation_provider;
    std::map<std::string, ProviderConfig> evaluation_providers;
    EmbeddingConfig embedding;
    DatagenConfig datagen;
    ExecLimits limits;
};

namespace detail {

inline ProviderConfig provider_from_json(const Json& j, const std::string& where) {
    ProviderConfig p;
    p.base_url = j.value("base_url", "");
    if (p.base_url.empty()) raise(Errc::config, where + ": provider base_url is required");
    p.model = j.value("model", "");
    p.api_key_env = j.value("api_key_env", "");
    p.max_retries = j.value("max_retries", p.max_retries);
    p.requests_per_minute = j.value("requests_per_minute", p.requests_per_minute);
    p.max_parallel = j.value("max_parallel", p.max_parallel);
    p.backoff_base_seconds = j.value("backoff_base_seconds", p.backoff_base_seconds);
    if (p.max_retries < 0 || p.requests_per_minute <= 0 || p.max_parallel <= 0)
        raise(Errc::config, where + ": invalid retry/rate/parallelism settings");
    return p;
}

}  // namespace detail

// Loads and validates the single JSON config file. Secrets never live in the
// file, only the names of the environment variables that hold them.
inline AppConfig load_app_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) raise(Errc::config, "config file not found: " + path.string());
    const Json j = load_json_file(path);

    AppConfig cfg;
    const std::filesystem::path base = path.parent_path();
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
        std::filesystem::path fp = p;
        return fp.is_absolute() ? fp : base / fp;
    };

    if (!j.contains("database")) raise(Errc::config, path.string() + ": \"database\" is required");
    cfg.database = resolve(j["database"].get<std::string>());
    if (!j.contains("schema_descriptions"))
        raise(Errc::config, path.string() + ": \"schema_descriptions\" is required");
    cfg.schema_descriptions = resolve(j["schema_descriptions"].get<std::string>());
    if (j.contains("few_shot_examples")) cfg.few_shot_examples = resolve(j["few_shot_examples"].get<std::string>());
    if (j.contains("output_dir")) cfg.output_dir = resolve(j["output_dir"].get<std::string>());

    if (j.contains("generation_provider"))
        cfg.generation_provider = detail::provider_from_json(j["generation_provider"], "generation_provider");
    if (j.contains("evaluation_providers")) {
        for (const auto& [name, pj] : j["evaluation_providers"].items())
            cfg.evaluation_providers.emplace(name,
                                             detail::provider_from_json(pj, "evaluation_providers." + name));
    }

    if (j.contains("embedding")) {
        const Json& e = j["embedding"];
        cfg.embedding.base_url = e.value("base_url", "");
        cfg.embedding.model = e.value("model", "");
        cfg.embedding.api_key_env = e.value("api_key_env", "");
        cfg.embedding.fallback_dim = e.value("fallback_dim", cfg.embedding.fallback_dim);
        cfg.embedding.fallback_seed = e.value("fallback_seed", cfg.embedding.fallback_seed);
    }

    if (j.contains("datagen")) cfg.datagen = datagen_config_from_json(j["datagen"]);

    if (j.contains("exec_limits")) {
        const Json& l = j["exec_limits"];
        cfg.limits.timeout = std::chrono::milliseconds(l.value("timeout_ms", int64_t{5000}));
        cfg.limits.row_cap = l.value("row_cap", cfg.limits.row_cap);
        if (cfg.limits.timeout.count() <= 0 || cfg.limits.row_cap < 1)
            raise(Errc::config, path.string() + ": exec_limits must be positive");
    }

    // mock: URLs are resolved against the config location too
    auto resolve_mock = [&](std::string& url) {
        if (is_mock_url(url)) {
            std::filesystem::path p = mock_url_path(url);
            if (!p.is_absolute() && p != "echo") url = "mock:" + (base / p).string();
        }
    };
    resolve_mock(cfg.generation_provider.base_url);
    for (auto& [name, p] : cfg.evaluation_providers) resolve_mock(p.base_url);

    if (!std::filesystem::exists(cfg.database))
        raise(Errc::config, "database file not found: " + cfg.database.string());
    if (!std::filesystem::exists(cfg.schema_descriptions))
        raise(Errc::config, "schema description file not found: " + cfg.schema_descriptions.string());
    if (!cfg.few_shot_examples.empty() && !std::filesystem::exists(cfg.few_shot_examples))
        raise(Errc::config, "few-shot examples file not found: " + cfg.few_shot_examples.string());

    return cfg;
}

}  // namespace sqleval
