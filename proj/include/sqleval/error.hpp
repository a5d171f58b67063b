#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sqleval {

// Failure categories surfaced to callers. Execution failures of candidate SQL
// are NOT errors in this sense; those travel as ExecOutcome values (grid.hpp).
enum class Errc {
    usage,
    config,
    io,
    lex,
    schema,
    corrupt_dataset,
    provider_unavailable,
    provider_rejected,
    unparseable,
    empty_generation,
    judgment_failed,
    no_sql,
    degenerate_embedding,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::usage: return "usage";
        case Errc::config: return "config";
        case Errc::io: return "io";
        case Errc::lex: return "lex";
        case Errc::schema: return "schema";
        case Errc::corrupt_dataset: return "corrupt_dataset";
        case Errc::provider_unavailable: return "provider_unavailable";
        case Errc::provider_rejected: return "provider_rejected";
        case Errc::unparseable: return "unparseable";
        case Errc::empty_generation: return "empty_generation";
        case Errc::judgment_failed: return "judgment_failed";
        case Errc::no_sql: return "no_sql";
        case Errc::degenerate_embedding: return "degenerate_embedding";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace sqleval
