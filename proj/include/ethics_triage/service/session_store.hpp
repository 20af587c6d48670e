#ifndef ETHICS_TRIAGE_SERVICE_SESSION_STORE_HPP
#define ETHICS_TRIAGE_SERVICE_SESSION_STORE_HPP

#include <chrono>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>

#include "../error.hpp"
#include "../guideline/session.hpp"

namespace ethics_triage::service {

class SessionNotFound : public Error {
public:
    explicit SessionNotFound(const std::string& id) : Error("unknown session '" + id + "'") {}
};

/// In-memory sessions keyed by random 128-bit ids. Every operation holds the
/// store lock, so concurrent requests on one session are serialized.
class SessionStore {
public:
    using Clock = std::chrono::steady_clock;

    explicit SessionStore(std::chrono::seconds ttl = std::chrono::hours(24), std::function<Clock::time_point()> now = Clock::now)
        : ttl_(ttl), now_(std::move(now)) {}

    std::string create(guideline::Session session) {
        std::lock_guard lock(mutex_);
        evict_locked();
        std::string id;
        do {
            id = new_id();
        } while (entries_.contains(id));
        entries_.emplace(id, Entry{std::move(session), now_()});
        return id;
    }

    /// Runs `fn(Session&)` under the store lock and refreshes the session's
    /// activity time. Throws SessionNotFound for unknown or expired ids.
    template <typename Fn>
    auto with(const std::string& id, Fn&& fn) -> decltype(fn(std::declval<guideline::Session&>())) {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(id);
        const auto now = now_();
        if (it == entries_.end() || now - it->second.last_active > ttl_) {
            if (it != entries_.end()) {
                entries_.erase(it);
            }
            throw SessionNotFound(id);
        }
        it->second.last_active = now;
        return fn(it->second.session);
    }

    std::optional<guideline::Session> get(const std::string& id) {
        try {
            return with(id, [](guideline::Session& s) { return s; });
        } catch (const SessionNotFound&) {
            return std::nullopt;
        }
    }

    bool erase(const std::string& id) {
        std::lock_guard lock(mutex_);
        return entries_.erase(id) > 0;
    }

    /// Drops sessions idle longer than the TTL; returns how many were removed.
    std::size_t evict_expired() {
        std::lock_guard lock(mutex_);
        return evict_locked();
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

private:
    struct Entry {
        guideline::Session session;
        Clock::time_point last_active;
    };

    std::size_t evict_locked() {
        const auto now = now_();
        return std::erase_if(entries_, [&](const auto& kv) { return now - kv.second.last_active > ttl_; });
    }

    std::string new_id() {
        static constexpr char hex[] = "0123456789abcdef";
        std::string id;
        id.reserve(32);
        for (int i = 0; i < 4; ++i) {
            std::uint32_t word = random_();
            for (int j = 0; j < 8; ++j) {
                id += hex[word & 0xf];
                word >>= 4;
            }
        }
        return id;
    }

    std::chrono::seconds ttl_;
    std::function<Clock::time_point()> now_;
    mutable std::mutex mutex_;
    std::random_device random_;
    std::unordered_map<std::string, Entry> entries_;
};

} // namespace ethics_triage::service

#endif
