#pragma once

#include <atomic>
#include <string>
#include <thread>

#include <doctest.h>
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "bugcast/date.hpp"

namespace testsupport {

using bugcast::Date;

/// Local stand-in for the tracker's bug search endpoint.
class MockTracker {
public:
    explicit MockTracker(std::size_t bug_count) {
        for (std::size_t i = 0; i < bug_count; ++i) {
            const Date day = Date::parse("2015-01-01").plus_days(static_cast<std::int64_t>(i % 120));
            nlohmann::json bug{{"id", 1000 + i}, {"creation_time", day.to_string() + "T12:00:00Z"}};
            bug["cf_last_resolved"] = i % 3 == 0 ? nlohmann::json(nullptr) : nlohmann::json(day.plus_days(5).to_string() + "T08:00:00Z");
            bugs_.push_back(bug);
        }
        server_.Get("/rest/bug", [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockTracker() {
        server_.stop();
        thread_.join();
    }

    [[nodiscard]] std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::atomic<int> requests{0};
    std::atomic<int> fail_next{0};
    std::atomic<bool> malformed{false};
    std::string last_query;

private:
    void handle(const httplib::Request& req, httplib::Response& res) {
        ++requests;
        if (fail_next > 0) {
            --fail_next;
            res.status = 503;
            return;
        }
        if (malformed) {
            res.set_content("<html>gateway timeout</html>", "text/html");
            return;
        }
        last_query = req.target;
        CHECK(req.get_param_value("include_fields") == "id,creation_time,cf_last_resolved");
        CHECK(req.get_param_value("f1") == "creation_ts");
        CHECK(req.get_param_value("o1") == "greaterthaneq");
        CHECK(req.get_param_value("o2") == "lessthan");
        const auto from = Date::parse(req.get_param_value("v1"));
        const auto to = Date::parse(req.get_param_value("v2"));
        const auto limit = std::stoul(req.get_param_value("limit"));
        const auto offset = std::stoul(req.get_param_value("offset"));
        nlohmann::json matching = nlohmann::json::array();
        for (const auto& b : bugs_) {
            const auto created = bugcast::date_of(bugcast::parse_timestamp(b["creation_time"].get<std::string>()));
            if (!(created < from) && created < to) matching.push_back(b);
        }
        nlohmann::json page = nlohmann::json::array();
        for (std::size_t i = offset; i < matching.size() && i < offset + limit; ++i) page.push_back(matching[i]);
        res.set_content(nlohmann::json{{"bugs", page}}.dump(), "application/json");
    }

    nlohmann::json bugs_ = nlohmann::json::array();
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace testsupport
