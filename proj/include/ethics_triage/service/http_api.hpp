#ifndef ETHICS_TRIAGE_SERVICE_HTTP_API_HPP
#define ETHICS_TRIAGE_SERVICE_HTTP_API_HPP

#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "../detail/csv.hpp"
#include "../guideline.hpp"
#include "session_store.hpp"

namespace ethics_triage::service {

inline constexpr const char* kDefaultAddress = "127.0.0.1:8080";
inline constexpr const char* kAddressEnv = "ETHICS_TRIAGE_ADDR";

struct Response {
    int status = 200;
    nlohmann::json body;
};

/// JSON API over guideline sessions. Transport independent: handle() takes a
/// method, path and body; bind() wires it into an httplib server.
class Api {
public:
    explicit Api(std::vector<guideline::GuidelineTree> trees, std::chrono::seconds ttl = std::chrono::hours(24))
        : store_(ttl) {
        for (auto& t : trees) {
            trees_.push_back(std::make_shared<const guideline::GuidelineTree>(std::move(t)));
        }
    }

    SessionStore& store() noexcept { return store_; }

    Response handle(std::string_view method,
                    std::string_view path,
                    std::string_view body = {},
                    const std::multimap<std::string, std::string>& query = {}) {
        try {
            return route(method, path, body, query);
        } catch (const SessionNotFound& e) {
            return error(404, e.what());
        } catch (const guideline::UnknownAnswerError& e) {
            Response r = error(422, e.what());
            r.body["labels"] = e.valid_labels();
            return r;
        } catch (const guideline::SessionStateError& e) {
            return error(409, e.what());
        } catch (const Error& e) {
            return error(422, e.what());
        }
    }

    void bind(httplib::Server& server) {
        auto forward = [this](const httplib::Request& req, httplib::Response& res) {
            Response r = handle(req.method, req.path, req.body, req.params);
            res.status = r.status;
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_content(r.body.dump(), "application/json");
        };
        server.Get(".*", forward);
        server.Post(".*", forward);
        server.Delete(".*", forward);
        server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
            res.status = 204;
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        });
    }

private:
    static Response error(int status, const std::string& message) {
        return {status, {{"version", 1}, {"error", message}}};
    }

    static Response state(int status, const std::string& id, const guideline::Session& s) {
        nlohmann::json j = guideline::to_json(s);
        j["id"] = id;
        return {status, std::move(j)};
    }

    static std::vector<std::string_view> segments(std::string_view path) {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < path.size()) {
            while (i < path.size() && path[i] == '/') {
                ++i;
            }
            const std::size_t start = i;
            while (i < path.size() && path[i] != '/') {
                ++i;
            }
            if (i > start) {
                out.push_back(path.substr(start, i - start));
            }
        }
        return out;
    }

    static std::optional<nlohmann::json> object_body(std::string_view body) {
        auto j = nlohmann::json::parse(body.begin(), body.end(), nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            return std::nullopt;
        }
        return j;
    }

    std::shared_ptr<const guideline::GuidelineTree> tree_named(const std::string& name) const {
        for (const auto& t : trees_) {
            if (t->name == name) {
                return t;
            }
        }
        return nullptr;
    }

    Response route(std::string_view method,
                   std::string_view path,
                   std::string_view body,
                   const std::multimap<std::string, std::string>& query) {
        const auto seg = segments(path);
        const bool get = method == "GET";
        const bool post = method == "POST";

        if (get && seg.size() == 1 && seg[0] == "guidelines") {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& t : trees_) {
                list.push_back({{"name", t->name}, {"subclasses", t->subclasses}});
            }
            return {200, {{"version", 1}, {"guidelines", list}}};
        }

        if (post && seg.size() == 1 && seg[0] == "sessions") {
            auto j = object_body(body);
            if (!j || !j->contains("tree") || !(*j)["tree"].is_string()) {
                return error(400, "expected a JSON object with a string 'tree'");
            }
            auto tree = tree_named((*j)["tree"].get<std::string>());
            if (!tree) {
                Response r = error(404, "unknown guideline \"" + (*j)["tree"].get<std::string>() + "\"");
                r.body["guidelines"] = nlohmann::json::array();
                for (const auto& t : trees_) {
                    r.body["guidelines"].push_back(t->name);
                }
                return r;
            }
            auto session = guideline::start_session(tree);
            const std::string id = store_.create(session);
            return state(201, id, session);
        }

        if (get && seg.size() == 1 && seg[0] == "report") {
            std::vector<guideline::Session> sessions;
            for (auto [it, end] = query.equal_range("sessions"); it != end; ++it) {
                for (const auto& id : detail::split(it->second, ',')) {
                    sessions.push_back(store_.with(id, [](guideline::Session& s) { return s; }));
                }
            }
            return {200, guideline::to_json(guideline::report(sessions))};
        }

        if (seg.size() >= 2 && seg[0] == "sessions") {
            const std::string id(seg[1]);
            if (seg.size() == 2 && get) {
                return store_.with(id, [&](guideline::Session& s) { return state(200, id, s); });
            }
            if (seg.size() == 2 && method == "DELETE") {
                if (!store_.erase(id)) {
                    throw SessionNotFound(id);
                }
                return {200, {{"version", 1}, {"deleted", id}}};
            }
            if (seg.size() == 3 && post && seg[2] == "answer") {
                auto j = object_body(body);
                if (!j || !j->contains("label") || !(*j)["label"].is_string()) {
                    return error(400, "expected a JSON object with a string 'label'");
                }
                const std::string label = (*j)["label"].get<std::string>();
                return store_.with(id, [&](guideline::Session& s) {
                    s = guideline::answer(s, label);
                    return state(200, id, s);
                });
            }
            if (seg.size() == 3 && post && seg[2] == "undo") {
                return store_.with(id, [&](guideline::Session& s) {
                    s = guideline::undo(s);
                    return state(200, id, s);
                });
            }
            if (seg.size() == 3 && get && seg[2] == "report") {
                return store_.with(id, [&](guideline::Session& s) {
                    return Response{200, guideline::to_json(guideline::report({s}))};
                });
            }
        }
        return error(404, "no route for " + std::string(method) + " " + std::string(path));
    }

    std::vector<std::shared_ptr<const guideline::GuidelineTree>> trees_;
    SessionStore store_;
};

struct Address {
    std::string host = "127.0.0.1";
    int port = 8080;
};

inline Address parse_address(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
        throw ValidationError("address must look like host:port, got '" + std::string(text) + "'");
    }
    Address a;
    a.host = std::string(text.substr(0, colon));
    const std::string port(text.substr(colon + 1));
    char* end = nullptr;
    const long p = std::strtol(port.c_str(), &end, 10);
    if (*end != '\0' || p < 0 || p > 65535) {
        throw ValidationError("invalid port '" + port + "'");
    }
    a.port = static_cast<int>(p);
    return a;
}

/// ETHICS_TRIAGE_ADDR, or 127.0.0.1:8080.
inline Address address_from_env() {
    const char* env = std::getenv(kAddressEnv);
    return parse_address(env && *env ? env : kDefaultAddress);
}

} // namespace ethics_triage::service

#endif
