#pragma once
// Chat-completion client for an OpenAI-compatible endpoint, used when a
// live model should replace the deterministic providers. Configured from
// the environment:
//   GRAGLAB_ENDPOINT  base URL, e.g. http://localhost:8000
//   GRAGLAB_API_KEY   bearer token (optional)
//   GRAGLAB_MODEL     model name
// Retries transient failures with exponential backoff and caps concurrent
// in-flight requests with a counting semaphore.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace graglab {

struct ChatConfig {
    std::string endpoint;
    std::string api_key;
    std::string model = "default";
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{250};
    double temperature = 0.0;

    static ChatConfig from_env() {
        ChatConfig cfg;
        if (const char* e = std::getenv("GRAGLAB_ENDPOINT")) cfg.endpoint = e;
        if (const char* k = std::getenv("GRAGLAB_API_KEY")) cfg.api_key = k;
        if (const char* m = std::getenv("GRAGLAB_MODEL")) cfg.model = m;
        return cfg;
    }

    bool configured() const { return !endpoint.empty(); }
};

class ChatClient {
public:
    explicit ChatClient(ChatConfig cfg, std::ptrdiff_t max_in_flight = 4)
        : cfg_(std::move(cfg)), slots_(max_in_flight) {
        if (!cfg_.configured())
            throw std::runtime_error("chat endpoint not configured (set GRAGLAB_ENDPOINT)");
    }

    // One-shot completion: system + user message, returns assistant text.
    std::string complete(const std::string& system, const std::string& user) {
        nlohmann::json body = {
            {"model", cfg_.model},
            {"temperature", cfg_.temperature},
            {"messages",
             {{{"role", "system"}, {"content", system}}, {{"role", "user"}, {"content", user}}}},
        };
        slots_.acquire();
        struct Release {
            std::counting_semaphore<>* s;
            ~Release() { s->release(); }
        } release{&slots_};

        std::chrono::milliseconds backoff = cfg_.initial_backoff;
        std::string last_error;
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
            httplib::Client client(cfg_.endpoint);
            client.set_read_timeout(120, 0);
            httplib::Headers headers;
            if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
            auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw std::runtime_error("chat request failed: HTTP " + std::to_string(res->status) +
                                         ": " + res->body);
            try {
                nlohmann::json reply = nlohmann::json::parse(res->body);
                return reply.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const std::exception& e) {
                throw std::runtime_error(std::string("malformed chat response: ") + e.what());
            }
        }
        throw std::runtime_error("chat request failed after retries: " + last_error);
    }

private:
    ChatConfig cfg_;
    std::counting_semaphore<> slots_;
};

}  // namespace graglab
