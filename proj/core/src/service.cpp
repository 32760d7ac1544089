#include "xtract/service.hpp"

#include <cctype>
#include <iomanip>
#include <random>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "xtract/atomic_write.hpp"
#include "xtract/error.hpp"

namespace xtract {

using nlohmann::json;

namespace {

void send(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

void fail(httplib::Response& res, int status, const std::string& code, const std::string& message)
{
    send(res, status, json{{"error", code}, {"message", message}});
}

int status_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::io_error:
    case ErrorCode::method_not_found: return 404;
    case ErrorCode::stale_unit: return 409;
    case ErrorCode::provider_unreachable: return 502;
    case ErrorCode::empty_range:
    case ErrorCode::not_aligned:
    case ErrorCode::plan_conflict:
    case ErrorCode::parse_error:
    case ErrorCode::ambiguous_method:
    case ErrorCode::method_too_large:
    case ErrorCode::render_error: return 422;
    default: return 500;
    }
}

// "MethodNotFound" -> "method_not_found"
std::string api_code(ErrorCode code)
{
    std::string out;
    for (char c : to_string(code)) {
        if (std::isupper(static_cast<unsigned char>(c))) {
            if (!out.empty()) out += '_';
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else {
            out += c;
        }
    }
    return out;
}

std::string new_session_id()
{
    static std::mutex m;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(m);
    std::ostringstream out;
    out << std::hex << std::setfill('0') << std::setw(16) << rng();
    return out.str();
}

std::string iso_time(std::chrono::system_clock::time_point t)
{
    std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res)
{
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        fail(res, 400, "bad_request", "the body must be a JSON object");
        return std::nullopt;
    }
    return j;
}

}  // namespace

std::optional<std::filesystem::path> confine(const std::filesystem::path& root, const std::string& requested)
{
    if (requested.empty() || requested.find('\0') != std::string::npos) return std::nullopt;
    std::error_code ec;
    auto base = std::filesystem::weakly_canonical(root, ec);
    if (ec) return std::nullopt;
    std::filesystem::path p(requested);
    auto resolved = std::filesystem::weakly_canonical(p.is_absolute() ? p : base / p, ec);
    if (ec) return std::nullopt;
    auto rel = resolved.lexically_relative(base);
    if (rel.empty() || *rel.begin() == "..") return std::nullopt;
    return resolved;
}

std::string session_json(const SuggestSession& s)
{
    json groups = json::array();
    int index = 0;
    for (const auto& p : s.result.ranked) {
        json g{{"index", index++},
               {"name", p.group.representative_name},
               {"range", {{"first", p.group.canonical_range.first}, {"last", p.group.canonical_range.last}}},
               {"lines", p.group.canonical_range.size()},
               {"frequency", p.group.frequency},
               {"names", p.group.names},
               {"signature", p.signature},
               {"call", p.call}};
        if (p.plan_error) g["plan_error"] = *p.plan_error;
        groups.push_back(std::move(g));
    }
    json rejected = json::array();
    for (const auto& sug : s.result.suggestions) {
        if (!sug.reason) continue;
        rejected.push_back({{"name", sug.proposed_name},
                            {"raw_range", {{"first", sug.raw_range.first}, {"last", sug.raw_range.last}}},
                            {"category", std::string(to_string(sug.reason->category))},
                            {"detail", sug.reason->detail}});
    }
    return json{{"id", s.id},
                {"path", s.display_path},
                {"unit_digest", s.unit_digest},
                {"method", s.result.method},
                {"method_range", {{"first", s.result.method_lines.first}, {"last", s.result.method_lines.last}}},
                {"created", iso_time(s.created)},
                {"groups", std::move(groups)},
                {"rejected", std::move(rejected)}}
        .dump(2);
}

Service::Service(AppConfig config, Provider& provider)
    : config_(std::move(config)), provider_(provider), template_(prompt_template(config_)),
      root_(std::filesystem::weakly_canonical(config_.root)), server_(std::make_unique<httplib::Server>())
{
    routes();
}

Service::~Service() { stop(); }

int Service::bind()
{
    int port = config_.port == 0 ? server_->bind_to_any_port(config_.host)
                                 : (server_->bind_to_port(config_.host, config_.port) ? config_.port : -1);
    if (port < 0) {
        throw Error(ErrorCode::io_error, "cannot listen on " + config_.host + ":" + std::to_string(config_.port));
    }
    return port;
}

void Service::listen() { server_->listen_after_bind(); }

void Service::stop() { server_->stop(); }

std::shared_ptr<const SuggestSession> Service::find_session(const std::string& id) const
{
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::mutex& Service::file_lock(const std::filesystem::path& path)
{
    std::lock_guard lock(locks_mutex_);
    auto& m = file_locks_[path];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
}

void Service::routes()
{
    server_->Get("/health", [](const httplib::Request&, httplib::Response& res) {
        send(res, 200, json{{"status", "ok"}});
    });

    server_->Get("/source", [this](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("path")) return fail(res, 400, "bad_request", "missing path parameter");
        auto path = confine(root_, req.get_param_value("path"));
        if (!path) return fail(res, 403, "forbidden", "the path is outside the served root");
        try {
            auto unit = load_unit(*path);
            res.status = 200;
            res.set_content(std::string(unit.text()), "text/plain; charset=utf-8");
        } catch (const ParseError&) {
            fail(res, 422, "parse_error", "the file does not parse as Java");
        } catch (const Error& e) {
            fail(res, 404, api_code(e.code()), "no such file");
        }
    });

    server_->Post("/suggest", [this](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        auto path_field = body->find("path");
        auto locator_field = body->find("method_locator");
        if (path_field == body->end() || !path_field->is_string() || locator_field == body->end()
            || !(locator_field->is_string() || locator_field->is_number_integer())) {
            return fail(res, 400, "bad_request", "expected {path: string, method_locator: string or line}");
        }
        auto path = confine(root_, path_field->get<std::string>());
        if (!path) return fail(res, 403, "forbidden", "the path is outside the served root");
        try {
            MethodLocator locator = locator_field->is_string()
                                        ? MethodLocator::parse(locator_field->get<std::string>())
                                        : MethodLocator{locator_field->get<int>()};
            auto unit = load_unit(*path);
            auto model = locate_method(unit, locator);
            PipelineOptions options;
            options.top_n = config_.top_n;
            auto session = std::make_shared<SuggestSession>();
            session->result = suggest(model, provider_, config_.provider, template_, options);
            session->id = new_session_id();
            session->path = *path;
            session->display_path = path_field->get<std::string>();
            session->unit_digest = unit.digest();
            session->locator = locator;
            session->created = std::chrono::system_clock::now();
            std::string text = session_json(*session);
            {
                std::lock_guard lock(sessions_mutex_);
                sessions_[session->id] = std::move(session);
            }
            res.status = 200;
            res.set_content(text + "\n", "application/json");
        } catch (const Error& e) {
            fail(res, status_for(e.code()), api_code(e.code()), e.what());
        }
    });

    server_->Get(R"(/session/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
        auto session = find_session(req.matches[1]);
        if (!session) return fail(res, 404, "unknown_session", "no session " + std::string(req.matches[1]));
        res.status = 200;
        res.set_content(session_json(*session) + "\n", "application/json");
    });

    server_->Post("/apply", [this](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) return;
        auto id = body->find("session_id");
        auto index = body->find("group_index");
        if (id == body->end() || !id->is_string() || index == body->end() || !index->is_number_integer()) {
            return fail(res, 400, "bad_request", "expected {session_id: string, group_index: integer}");
        }
        auto session = find_session(id->get<std::string>());
        if (!session) return fail(res, 404, "unknown_session", "no session " + id->get<std::string>());
        int i = index->get<int>();
        if (i < 0 || i >= static_cast<int>(session->result.ranked.size())) {
            return fail(res, 422, "invalid_range", "group_index " + std::to_string(i) + " is out of range");
        }
        const RankedGroup& group = session->result.ranked[static_cast<std::size_t>(i)].group;
        std::lock_guard lock(file_lock(session->path));
        try {
            auto unit = load_unit(session->path);
            if (unit.digest() != session->unit_digest) {
                return fail(res, 409, "stale_unit", session->display_path + " changed since the session was created");
            }
            auto model = locate_method(unit, session->locator);
            MethodAnalysis analysis(model);
            auto plan_ = plan(model, analysis.cfg, analysis.live, group);
            auto result = apply(unit, model, plan_);
            write_file_atomically(session->path, result.new_text);
            send(res, 200,
                 json{{"diff", result.script.diff},
                      {"new_text", result.new_text},
                      {"call_line", result.call_line.first},
                      {"new_method_range",
                       {{"first", result.new_method_lines.first}, {"last", result.new_method_lines.last}}}});
        } catch (const Error& e) {
            fail(res, status_for(e.code()), api_code(e.code()), e.what());
        }
    });

    server_->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
        fail(res, 500, "internal", "internal error");
    });
}

}  // namespace xtract
