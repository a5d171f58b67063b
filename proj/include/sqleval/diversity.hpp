#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqleval/error.hpp"
#include "sqleval/hash.hpp"

namespace sqleval {

namespace detail {

// Decodes one UTF-8 codepoint starting at i; advances i. Malformed bytes pass
// through as Latin-1 so normalization never fails on dirty input.
inline uint32_t utf8_next(std::string_view s, size_t& i) {
    const unsigned char c0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](size_t k) {
        return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xc0) == 0x80;
    };
    if (c0 < 0x80) {
        ++i;
        return c0;
    }
    if ((c0 & 0xe0) == 0xc0 && cont(1)) {
        uint32_t cp = (c0 & 0x1fu) << 6 | (static_cast<unsigned char>(s[i + 1]) & 0x3fu);
        i += 2;
        return cp;
    }
    if ((c0 & 0xf0) == 0xe0 && cont(1) && cont(2)) {
        uint32_t cp = (c0 & 0x0fu) << 12 | (static_cast<unsigned char>(s[i + 1]) & 0x3fu) << 6 |
                      (static_cast<unsigned char>(s[i + 2]) & 0x3fu);
        i += 3;
        return cp;
    }
    if ((c0 & 0xf8) == 0xf0 && cont(1) && cont(2) && cont(3)) {
        uint32_t cp = (c0 & 0x07u) << 18 | (static_cast<unsigned char>(s[i + 1]) & 0x3fu) << 12 |
                      (static_cast<unsigned char>(s[i + 2]) & 0x3fu) << 6 |
                      (static_cast<unsigned char>(s[i + 3]) & 0x3fu);
        i += 4;
        return cp;
    }
    ++i;
    return c0;
}

inline void utf8_append(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

// Lowercase for ASCII, Latin-1/Extended-A, Greek and Cyrillic. Codepoints
// outside these ranges pass through unchanged.
inline uint32_t lower_codepoint(uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) return cp + 0x20;  // Latin-1, skip multiplication sign
    if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14a && cp <= 0x177)) return (cp % 2 == 0) ? cp + 1 : cp;
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17e)) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x178) return 0xff;
    if (cp >= 0x391 && cp <= 0x3ab && cp != 0x3a2) return cp + 0x20;  // Greek capitals
    if (cp >= 0x410 && cp <= 0x42f) return cp + 0x20;                 // Cyrillic
    if (cp >= 0x400 && cp <= 0x40f) return cp + 0x50;
    return cp;
}

inline bool is_ascii_space(uint32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v';
}

}  // namespace detail

// Lowercases (UTF-8 aware) and trims surrounding whitespace; interior bytes
// are otherwise untouched.
inline std::string normalize_text(std::string_view s) {
    std::string lowered;
    lowered.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) detail::utf8_append(lowered, detail::lower_codepoint(detail::utf8_next(s, i)));

    size_t begin = 0;
    size_t end = lowered.size();
    while (begin < end && detail::is_ascii_space(static_cast<unsigned char>(lowered[begin]))) ++begin;
    while (end > begin && detail::is_ascii_space(static_cast<unsigned char>(lowered[end - 1]))) --end;
    return lowered.substr(begin, end - begin);
}

struct MatchStats {
    size_t duplicate_count = 0;  // members of any group of size >= 2
    double duplicate_pct = 0.0;
};

inline MatchStats exact_match_stats(std::span<const std::string> items) {
    if (items.empty()) raise(Errc::usage, "exact_match_stats requires a non-empty corpus");
    std::map<std::string, size_t> counts;
    for (const auto& s : items) ++counts[normalize_text(s)];
    MatchStats stats;
    for (const auto& [key, n] : counts)
        if (n >= 2) stats.duplicate_count += n;
    stats.duplicate_pct = 100.0 * static_cast<double>(stats.duplicate_count) / static_cast<double>(items.size());
    return stats;
}

using EmbeddingVector = std::vector<double>;

inline double cosine_similarity(const EmbeddingVector& x, const EmbeddingVector& y) {
    if (x.size() != y.size()) raise(Errc::usage, "cosine_similarity: dimension mismatch");
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    if (nx == 0.0 || ny == 0.0) raise(Errc::degenerate_embedding, "cosine_similarity: zero vector");
    return dot / (std::sqrt(nx) * std::sqrt(ny));
}

struct SimilaritySummary {
    double mean_max_sim = 0.0;
    double std_max_sim = 0.0;  // population standard deviation
};

// For each vector, the best cosine similarity to any other vector; summarizes
// those per-item maxima.
inline SimilaritySummary avg_max_similarity(const std::vector<EmbeddingVector>& vectors) {
    if (vectors.size() < 2) raise(Errc::usage, "avg_max_similarity requires at least two vectors");
    const size_t n = vectors.size();
    std::vector<double> maxima(n, -1.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const double s = cosine_similarity(vectors[i], vectors[j]);
            maxima[i] = std::max(maxima[i], s);
            maxima[j] = std::max(maxima[j], s);
        }
    }
    double mean = 0.0;
    for (double m : maxima) mean += m;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double m : maxima) var += (m - mean) * (m - mean);
    var /= static_cast<double>(n);
    return {mean, std::sqrt(var)};
}

// Deterministic offline stand-in for a hosted sentence embedder: lowercase
// whitespace tokens hashed into dim buckets, L2-normalized. Identical texts
// give identical vectors on every platform.
inline EmbeddingVector fallback_embed(std::string_view text, size_t dim, uint64_t seed) {
    if (dim < 8) raise(Errc::usage, "fallback_embed: dim must be >= 8");
    const std::string norm = normalize_text(text);

    EmbeddingVector v(dim, 0.0);
    size_t tokens = 0;
    size_t i = 0;
    while (i < norm.size()) {
        while (i < norm.size() && detail::is_ascii_space(static_cast<unsigned char>(norm[i]))) ++i;
        size_t start = i;
        while (i < norm.size() && !detail::is_ascii_space(static_cast<unsigned char>(norm[i]))) ++i;
        if (i == start) continue;
        const std::string_view token(norm.data() + start, i - start);
        const uint64_t bucket = splitmix64(fnv1a64(token) ^ seed) % dim;
        v[bucket] += 1.0;
        ++tokens;
    }
    if (tokens == 0) raise(Errc::degenerate_embedding, "fallback_embed: text has no tokens");

    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    return v;
}

}  // namespace sqleval
