#include "intake/embedding.hpp"

#include <cmath>

#include "intake/errors.hpp"
#include "intake/rng.hpp"
#include "intake/text.hpp"

namespace intake {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw ContractViolation("cosine: dimension mismatch");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na < 1e-24 || nb < 1e-24) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

LexicalEmbedder::LexicalEmbedder(std::size_t dim) : dim_(dim) {
    if (dim < 64) {
        throw ConfigError("embedding dimension must be at least 64, got " +
                          std::to_string(dim));
    }
}

std::vector<double> LexicalEmbedder::embed(const std::string& textin) const {
    std::vector<double> v(dim_, 0.0);
    const auto tokens = text::tokenize(textin);
    if (tokens.empty()) return v; // zero vector: flagged non-embeddable

    auto bump = [&](std::string_view feature, std::uint64_t salt) {
        const std::uint64_t h = fnv1a(feature.data(), feature.size(), salt);
        v[h % dim_] += 1.0;
    };

    // Word unigrams, then character trigrams over the space-joined token
    // string so trigrams see word boundaries but not raw punctuation.
    std::string joined;
    for (const auto& tok : tokens) {
        bump(tok, 0xB11DF00D5EEDULL);
        if (!joined.empty()) joined.push_back(' ');
        joined += tok;
    }
    if (joined.size() < 3) {
        bump(joined, 0x7121C4A3ULL);
    } else {
        for (std::size_t i = 0; i + 3 <= joined.size(); ++i) {
            bump(std::string_view(joined).substr(i, 3), 0x7121C4A3ULL);
        }
    }

    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

CachingProvider::CachingProvider(std::shared_ptr<const EmbeddingProvider> inner)
    : inner_(std::move(inner)) {
    if (!inner_) throw ContractViolation("CachingProvider: null inner provider");
}

std::vector<double> CachingProvider::embed(const std::string& textin) const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(textin);
        if (it != cache_.end()) return it->second;
    }
    auto vec = inner_->embed(textin);
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(textin, std::move(vec)).first->second;
}

} // namespace intake
