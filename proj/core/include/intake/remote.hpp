#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "intake/dialogue.hpp"
#include "intake/embedding.hpp"
#include "intake/hpi_eval.hpp"
#include "intake/quality.hpp"

namespace intake {

struct RemoteSettings {
    std::string endpoint;   // scheme://host:port, no trailing slash
    std::string auth_token; // sent as "Authorization: Bearer <token>" when set
    std::string model = "desk-judge";
    std::string chat_path = "/v1/chat/completions";
    std::string embed_path = "/embed";
    int connect_timeout_ms = 2000;
    int read_timeout_ms = 15000;
    int max_attempts = 3;    // total tries per request
    int backoff_base_ms = 100; // doubles after each failed try
    int max_in_flight = 4;   // concurrent requests across all callers
    bool fallback_to_heuristic = true;

    void validate() const;
};

struct ChatMessage {
    std::string role; // "system" or "user"
    std::string content;
};

// Minimal chat-completion client. Each call is a synchronous POST; the
// response pairs with its request on the connection, and a shared semaphore
// bounds how many requests the process keeps in flight. Transport failures
// retry with exponential backoff before surfacing as RemoteError.
class ChatClient {
public:
    explicit ChatClient(RemoteSettings settings);
    ~ChatClient();

    ChatClient(const ChatClient&) = delete;
    ChatClient& operator=(const ChatClient&) = delete;

    // Returns choices[0].message.content of the reply.
    std::string complete(const std::vector<ChatMessage>& messages) const;

    // POSTs {"texts": [...]} to embed_path and returns the vectors.
    std::vector<std::vector<double>> embed_batch(
        const std::vector<std::string>& texts) const;

    const RemoteSettings& settings() const { return settings_; }

private:
    struct Impl;
    RemoteSettings settings_;
    std::unique_ptr<Impl> impl_;

    std::string post_json(const std::string& path, const std::string& body) const;
};

// EmbeddingProvider that defers to the embedding endpoint one text at a
// time. Wrap it in CachingProvider to avoid repeat traffic.
class RemoteEmbeddingProvider : public EmbeddingProvider {
public:
    RemoteEmbeddingProvider(std::shared_ptr<const ChatClient> client,
                            std::size_t dimension);

    std::vector<double> embed(const std::string& text) const override;
    std::size_t dim() const override { return dim_; }

private:
    std::shared_ptr<const ChatClient> client_;
    std::size_t dim_;
};

// Replaces each {name} placeholder with its value; unknown placeholders
// pass through untouched.
std::string render_prompt(
    const std::string& prompt_template,
    const std::vector<std::pair<std::string, std::string>>& substitutions);

// Pulls the first balanced {...} object out of a chat reply; models tend to
// wrap JSON in prose or code fences.
std::string extract_json_object(const std::string& reply);
std::string extract_json_array(const std::string& reply);

// Scores questions by asking the chat endpoint for a five-field JSON object.
// Out-of-range scores clamp with a warning. When the endpoint stays
// unusable past the retry budget: falls back to `local` (provenance
// "fallback") when settings.fallback_to_heuristic is set, otherwise
// rethrows. Per-entity relevance always comes from `local`; it sits on the
// gain-estimation hot path where a network round trip per entity would be
// absurd.
class RemoteAssessor : public QualityAssessor {
public:
    RemoteAssessor(std::shared_ptr<const ChatClient> client,
                   std::string prompt_template,
                   std::shared_ptr<const QualityAssessor> local,
                   std::ostream* warnings = nullptr);

    QualityScores assess(const std::string& question,
                         const std::string& conversation_summary,
                         const CoverageState& state) const override;
    double relevance(const ClinicalEntity& entity,
                     const std::string& question) const override;

private:
    std::shared_ptr<const ChatClient> client_;
    std::string template_;
    std::shared_ptr<const QualityAssessor> local_;
    std::ostream* warnings_;

    void warn(const std::string& message) const;
};

// Patient whose answer text comes from the chat endpoint. Entity detection
// still runs locally on whatever text comes back, so a chatty model cannot
// corrupt coverage accounting.
class RemotePatient : public Patient {
public:
    RemotePatient(std::shared_ptr<const ChatClient> client,
                  std::string prompt_template, VignetteCase kase);

    PatientReply answer(const std::string& question,
                        const CoverageState& state) override;

private:
    std::shared_ptr<const ChatClient> client_;
    std::string template_;
    VignetteCase case_;
};

// Statement extractor that asks the chat endpoint for a JSON array of
// strings. A reply that fails to parse is kept verbatim in the error.
class RemoteStatementExtractor : public StatementExtractor {
public:
    RemoteStatementExtractor(std::shared_ptr<const ChatClient> client,
                             std::string prompt_template);

    std::vector<AtomicStatement> extract(const std::string& hpi,
                                         AtomicStatement::Source tag) const override;

private:
    std::shared_ptr<const ChatClient> client_;
    std::string template_;
};

} // namespace intake
