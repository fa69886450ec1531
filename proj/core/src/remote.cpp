#include "intake/remote.hpp"

#include <chrono>
#include <condition_variable>
#include <iostream>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "intake/errors.hpp"

namespace intake {

using nlohmann::json;

void RemoteSettings::validate() const {
    if (endpoint.empty()) throw ConfigError("remote endpoint is empty");
    if (max_attempts < 1) throw ConfigError("remote max_attempts must be >= 1");
    if (backoff_base_ms < 0) throw ConfigError("remote backoff_base_ms must be >= 0");
    if (max_in_flight < 1) throw ConfigError("remote max_in_flight must be >= 1");
    if (connect_timeout_ms <= 0 || read_timeout_ms <= 0) {
        throw ConfigError("remote timeouts must be positive");
    }
}

namespace {

std::string truncate_for_error(const std::string& s) {
    constexpr std::size_t kMax = 2000;
    if (s.size() <= kMax) return s;
    return s.substr(0, kMax) + "...(truncated)";
}

} // namespace

struct ChatClient::Impl {
    std::mutex mutex;
    std::condition_variable slot_free;
    int in_flight = 0;

    struct Slot {
        Impl& impl;
        explicit Slot(Impl& i, int limit) : impl(i) {
            std::unique_lock lock(impl.mutex);
            impl.slot_free.wait(lock, [&] { return impl.in_flight < limit; });
            ++impl.in_flight;
        }
        ~Slot() {
            {
                std::lock_guard lock(impl.mutex);
                --impl.in_flight;
            }
            impl.slot_free.notify_one();
        }
    };
};

ChatClient::ChatClient(RemoteSettings settings)
    : settings_(std::move(settings)), impl_(std::make_unique<Impl>()) {
    settings_.validate();
}

ChatClient::~ChatClient() = default;

std::string ChatClient::post_json(const std::string& path,
                                  const std::string& body) const {
    Impl::Slot slot(*impl_, settings_.max_in_flight);

    httplib::Headers headers;
    if (!settings_.auth_token.empty()) {
        headers.emplace("Authorization", "Bearer " + settings_.auth_token);
    }

    std::string last_failure;
    for (int attempt = 0; attempt < settings_.max_attempts; ++attempt) {
        if (attempt > 0) {
            const auto delay = settings_.backoff_base_ms * (1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        httplib::Client client(settings_.endpoint);
        client.set_connection_timeout(
            std::chrono::milliseconds(settings_.connect_timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(settings_.read_timeout_ms));

        auto res = client.Post(path, headers, body, "application/json");
        if (res && res->status == 200) return res->body;
        if (res) {
            last_failure = "HTTP " + std::to_string(res->status) + " from " + path;
        } else {
            last_failure = "transport error " + httplib::to_string(res.error()) +
                           " on " + path;
        }
    }
    throw RemoteError(last_failure + " after " +
                      std::to_string(settings_.max_attempts) + " attempts");
}

std::string ChatClient::complete(const std::vector<ChatMessage>& messages) const {
    if (messages.empty()) throw ContractViolation("chat request with no messages");
    json body;
    body["model"] = settings_.model;
    body["messages"] = json::array();
    for (const auto& m : messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }

    const auto raw = post_json(settings_.chat_path, body.dump());
    json reply;
    try {
        reply = json::parse(raw);
    } catch (const json::exception& e) {
        throw RemoteError(std::string("chat reply is not JSON: ") + e.what() +
                          "; reply was: " + truncate_for_error(raw));
    }
    if (!reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty() || !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content") ||
        !reply["choices"][0]["message"]["content"].is_string()) {
        throw RemoteError("chat reply missing choices[0].message.content; reply was: " +
                          truncate_for_error(raw));
    }
    return reply["choices"][0]["message"]["content"].get<std::string>();
}

std::vector<std::vector<double>> ChatClient::embed_batch(
    const std::vector<std::string>& texts) const {
    json body;
    body["texts"] = texts;
    const auto raw = post_json(settings_.embed_path, body.dump());
    json reply;
    try {
        reply = json::parse(raw);
    } catch (const json::exception& e) {
        throw RemoteError(std::string("embed reply is not JSON: ") + e.what() +
                          "; reply was: " + truncate_for_error(raw));
    }
    if (!reply.contains("vectors") || !reply["vectors"].is_array()) {
        throw RemoteError("embed reply has no vectors array; reply was: " +
                          truncate_for_error(raw));
    }
    std::vector<std::vector<double>> out;
    for (const auto& row : reply["vectors"]) {
        if (!row.is_array()) {
            throw RemoteError("embed reply vector row is not an array");
        }
        std::vector<double> v;
        v.reserve(row.size());
        for (const auto& x : row) {
            if (!x.is_number()) {
                throw RemoteError("embed reply contains a non-numeric component");
            }
            v.push_back(x.get<double>());
        }
        out.push_back(std::move(v));
    }
    if (out.size() != texts.size()) {
        throw RemoteError("embed reply has " + std::to_string(out.size()) +
                          " vectors for " + std::to_string(texts.size()) + " texts");
    }
    return out;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(
    std::shared_ptr<const ChatClient> client, std::size_t dimension)
    : client_(std::move(client)), dim_(dimension) {
    if (!client_) throw ContractViolation("RemoteEmbeddingProvider: null client");
    if (dim_ == 0) throw ConfigError("remote embedding dimension must be positive");
}

std::vector<double> RemoteEmbeddingProvider::embed(const std::string& text) const {
    auto vectors = client_->embed_batch({text});
    if (vectors[0].size() != dim_) {
        throw RemoteError("embed endpoint returned dimension " +
                          std::to_string(vectors[0].size()) + ", expected " +
                          std::to_string(dim_));
    }
    return std::move(vectors[0]);
}

std::string render_prompt(
    const std::string& prompt_template,
    const std::vector<std::pair<std::string, std::string>>& substitutions) {
    std::string out = prompt_template;
    for (const auto& [name, value] : substitutions) {
        const std::string needle = "{" + name + "}";
        for (auto pos = out.find(needle); pos != std::string::npos;
             pos = out.find(needle, pos + value.size())) {
            out.replace(pos, needle.size(), value);
        }
    }
    return out;
}

namespace {

std::string extract_balanced(const std::string& reply, char open, char close,
                             const char* what) {
    const auto start = reply.find(open);
    if (start == std::string::npos) {
        throw RemoteError(std::string("no JSON ") + what +
                          " in reply: " + truncate_for_error(reply));
    }
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < reply.size(); ++i) {
        const char c = reply[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == open) {
            ++depth;
        } else if (c == close) {
            if (--depth == 0) return reply.substr(start, i - start + 1);
        }
    }
    throw RemoteError(std::string("unterminated JSON ") + what +
                      " in reply: " + truncate_for_error(reply));
}

} // namespace

std::string extract_json_object(const std::string& reply) {
    return extract_balanced(reply, '{', '}', "object");
}

std::string extract_json_array(const std::string& reply) {
    return extract_balanced(reply, '[', ']', "array");
}

RemoteAssessor::RemoteAssessor(std::shared_ptr<const ChatClient> client,
                               std::string prompt_template,
                               std::shared_ptr<const QualityAssessor> local,
                               std::ostream* warnings)
    : client_(std::move(client)),
      template_(std::move(prompt_template)),
      local_(std::move(local)),
      warnings_(warnings) {
    if (!client_) throw ContractViolation("RemoteAssessor: null client");
    if (!local_) throw ContractViolation("RemoteAssessor: null local assessor");
    if (template_.empty()) throw ConfigError("RemoteAssessor: empty prompt template");
}

void RemoteAssessor::warn(const std::string& message) const {
    std::ostream& out = warnings_ ? *warnings_ : std::cerr;
    out << "warning: " << message << "\n";
}

double RemoteAssessor::relevance(const ClinicalEntity& entity,
                                 const std::string& question) const {
    return local_->relevance(entity, question);
}

QualityScores RemoteAssessor::assess(const std::string& question,
                                     const std::string& conversation_summary,
                                     const CoverageState& state) const {
    const auto prompt =
        render_prompt(template_, {{"question", question},
                                  {"conversation", conversation_summary},
                                  {"uncovered", uncovered_digest(state)}});
    const std::vector<ChatMessage> messages = {
        {"system", "You are a strict clinical interview grader. Reply with JSON only."},
        {"user", prompt}};

    static const char* kDims[] = {"information_gathering", "specificity",
                                  "patient_engagement", "clinical_relevance",
                                  "comprehensiveness"};

    std::string failure;
    // complete() retries transport failures internally; this loop retries
    // replies that arrive but do not parse into the expected shape.
    for (int attempt = 0; attempt < client_->settings().max_attempts; ++attempt) {
        std::string reply;
        try {
            reply = client_->complete(messages);
        } catch (const RemoteError& e) {
            failure = e.what();
            break;
        }
        try {
            const auto obj = json::parse(extract_json_object(reply));
            double scores[5];
            for (int i = 0; i < 5; ++i) {
                if (!obj.contains(kDims[i]) || !obj[kDims[i]].is_number()) {
                    throw RemoteError(std::string("assessor reply missing numeric '") +
                                      kDims[i] +
                                      "'; reply was: " + truncate_for_error(reply));
                }
                scores[i] = obj[kDims[i]].get<double>();
                if (scores[i] < 0.0 || scores[i] > 1.0) {
                    warn(std::string(kDims[i]) + " score " +
                         std::to_string(scores[i]) + " outside [0,1], clamping");
                }
            }
            return make_quality_scores(scores[0], scores[1], scores[2], scores[3],
                                       scores[4], "remote");
        } catch (const json::exception& e) {
            failure = std::string("assessor reply unparseable: ") + e.what() +
                      "; reply was: " + truncate_for_error(reply);
        } catch (const RemoteError& e) {
            failure = e.what();
        }
    }

    if (client_->settings().fallback_to_heuristic) {
        warn("remote assessor unavailable (" + failure + "); using heuristic scores");
        auto scores = local_->assess(question, conversation_summary, state);
        scores.provenance = "fallback";
        return scores;
    }
    throw RemoteError(failure);
}

RemotePatient::RemotePatient(std::shared_ptr<const ChatClient> client,
                             std::string prompt_template, VignetteCase kase)
    : client_(std::move(client)),
      template_(std::move(prompt_template)),
      case_(std::move(kase)) {
    if (!client_) throw ContractViolation("RemotePatient: null client");
    if (template_.empty()) throw ConfigError("RemotePatient: empty prompt template");
}

PatientReply RemotePatient::answer(const std::string& question,
                                   const CoverageState& state) {
    if (question.empty()) throw ContractViolation("patient asked an empty question");
    std::string hidden;
    for (const auto& e : state.uncovered()) {
        if (!hidden.empty()) hidden += "; ";
        hidden += e.surface + " (" + e.category + ")";
    }
    const auto prompt = render_prompt(template_, {{"question", question},
                                                  {"case", case_.hpi_text},
                                                  {"hidden", hidden}});
    const std::vector<ChatMessage> messages = {
        {"system",
         "You are a patient in a medical interview. Answer briefly and only with "
         "details the question asks about."},
        {"user", prompt}};
    PatientReply reply;
    reply.text = client_->complete(messages);
    // disclosed_ids stays empty: detection over the text is the source of
    // truth, and a free-form model gives no reliable intent signal.
    return reply;
}

RemoteStatementExtractor::RemoteStatementExtractor(
    std::shared_ptr<const ChatClient> client, std::string prompt_template)
    : client_(std::move(client)), template_(std::move(prompt_template)) {
    if (!client_) throw ContractViolation("RemoteStatementExtractor: null client");
    if (template_.empty()) {
        throw ConfigError("RemoteStatementExtractor: empty prompt template");
    }
}

std::vector<AtomicStatement> RemoteStatementExtractor::extract(
    const std::string& hpi, AtomicStatement::Source tag) const {
    const auto prompt = render_prompt(template_, {{"hpi", hpi}});
    const std::vector<ChatMessage> messages = {
        {"system",
         "You split clinical narratives into atomic factual statements. Reply with "
         "a JSON array of strings only."},
        {"user", prompt}};
    const auto reply = client_->complete(messages);
    json arr;
    try {
        arr = json::parse(extract_json_array(reply));
    } catch (const json::exception& e) {
        throw RemoteError(std::string("extractor reply unparseable: ") + e.what() +
                          "; reply was: " + truncate_for_error(reply));
    }
    std::vector<AtomicStatement> out;
    for (const auto& item : arr) {
        if (!item.is_string()) {
            throw RemoteError("extractor reply array holds a non-string; reply was: " +
                              truncate_for_error(reply));
        }
        out.push_back({item.get<std::string>(), tag});
    }
    return out;
}

} // namespace intake
