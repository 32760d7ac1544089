#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "xtract/config.hpp"
#include "xtract/pipeline.hpp"

namespace httplib {
class Server;
}

namespace xtract {

/// Immutable snapshot of one /suggest answer.
struct SuggestSession {
    std::string id;
    std::filesystem::path path;  // canonical
    std::string display_path;    // as requested, relative to the root
    std::string unit_digest;
    MethodLocator locator;
    SuggestResult result;
    std::chrono::system_clock::time_point created;
};

[[nodiscard]] std::string session_json(const SuggestSession& session);

/// `requested` resolved below `root`, or nullopt when it escapes the root
/// (after following symlinks).
[[nodiscard]] std::optional<std::filesystem::path> confine(const std::filesystem::path& root,
                                                           const std::string& requested);

/// Local JSON-over-HTTP front end; see docs/api.md.
class Service {
public:
    Service(AppConfig config, Provider& provider);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds config.host:config.port (0 picks a free port) and returns the port.
    int bind();
    /// Serves until stop(); call bind() first.
    void listen();
    void stop();

    [[nodiscard]] httplib::Server& server() { return *server_; }

private:
    void routes();
    std::shared_ptr<const SuggestSession> find_session(const std::string& id) const;
    std::mutex& file_lock(const std::filesystem::path& path);

    AppConfig config_;
    Provider& provider_;
    PromptTemplate template_;
    std::filesystem::path root_;
    std::unique_ptr<httplib::Server> server_;

    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<const SuggestSession>> sessions_;
    std::mutex locks_mutex_;
    std::map<std::filesystem::path, std::unique_ptr<std::mutex>> file_locks_;
};

}  // namespace xtract
