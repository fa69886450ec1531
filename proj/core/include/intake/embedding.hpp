#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace intake {

// Maps text to a unit-norm vector. Implementations must be deterministic
// (equal input, equal vector) and safe for concurrent embed() calls.
// Empty or content-free input yields the zero vector; cosine against a zero
// vector is defined as 0.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<double> embed(const std::string& text) const = 0;
    virtual std::size_t dim() const = 0;
};

// Cosine similarity; 0 when either vector has (near-)zero norm.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Default provider: hashed character-trigram plus word-unigram term
// frequencies, L2-normalized. A cheap, deterministic stand-in for a real
// sentence encoder; good enough to order "related" above "unrelated".
class LexicalEmbedder : public EmbeddingProvider {
public:
    explicit LexicalEmbedder(std::size_t dim = 256);
    std::vector<double> embed(const std::string& text) const override;
    std::size_t dim() const override { return dim_; }

private:
    std::size_t dim_;
};

// Memoizing wrapper. Embedding the same surfaces and questions repeatedly
// dominates a training run without this.
class CachingProvider : public EmbeddingProvider {
public:
    explicit CachingProvider(std::shared_ptr<const EmbeddingProvider> inner);
    std::vector<double> embed(const std::string& text) const override;
    std::size_t dim() const override { return inner_->dim(); }

private:
    std::shared_ptr<const EmbeddingProvider> inner_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<std::string, std::vector<double>> cache_;
};

} // namespace intake
