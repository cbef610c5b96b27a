#include "bugcast/fetch.hpp"

#include <cstdio>
#include <cstdlib>
#include <memory>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "bugcast/error.hpp"
#include "bugcast/io.hpp"

namespace bugcast {

namespace {

using nlohmann::json;

std::string excerpt(const std::string& body) { return body.substr(0, 200); }

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::filesystem::path cache_path(const FetchOptions& options, Date start, Date end) {
    const auto key = options.endpoint + "|" + start.to_string() + "|" + end.to_string();
    char name[64];
    std::snprintf(name, sizeof name, "bugs_%016llx.json", static_cast<unsigned long long>(fnv1a(key)));
    return options.cache_dir / name;
}

std::string page_query(Date start, Date end, std::size_t limit, std::size_t offset) {
    return "/rest/bug?include_fields=id,creation_time,cf_last_resolved"
           "&f1=creation_ts&o1=greaterthaneq&v1=" +
           start.to_string() + "&f2=creation_ts&o2=lessthan&v2=" + end.to_string() +
           "&order=bug_id&limit=" + std::to_string(limit) + "&offset=" + std::to_string(offset);
}

}  // namespace

FetchOptions fetch_options_from_env(FetchOptions base) {
    if (const char* endpoint = std::getenv("BUGCAST_ENDPOINT"); endpoint && *endpoint) base.endpoint = endpoint;
    if (const char* dir = std::getenv("BUGCAST_CACHE_DIR"); dir && *dir) base.cache_dir = dir;
    return base;
}

HttpGet default_http_get() {
    return [](const std::string& endpoint, const std::string& path_and_query) {
        httplib::Client client(endpoint);
        client.set_connection_timeout(10);
        client.set_read_timeout(60);
        client.set_follow_location(true);
        auto res = client.Get(path_and_query);
        if (!res) {
            throw NetworkError("GET " + endpoint + path_and_query + " failed: " + httplib::to_string(res.error()), 1);
        }
        if (res->status >= 500 || res->status == 429) {
            throw NetworkError("GET " + endpoint + " returned HTTP " + std::to_string(res->status), 1);
        }
        if (res->status != 200) {
            throw ParseError("unexpected HTTP " + std::to_string(res->status) + " from " + endpoint, excerpt(res->body));
        }
        return res->body;
    };
}

RawBugRecords parse_bug_page(const std::string& body) {
    std::vector<BugRecord> records;
    try {
        const auto doc = json::parse(body);
        if (doc.contains("error") && doc["error"].is_boolean() && doc["error"].get<bool>()) {
            throw ParseError("tracker returned an error", excerpt(body));
        }
        for (const auto& bug : doc.at("bugs")) {
            BugRecord r;
            r.id = bug.at("id").get<std::uint64_t>();
            r.created = parse_timestamp(bug.at("creation_time").get<std::string>());
            if (auto it = bug.find("cf_last_resolved"); it != bug.end() && it->is_string()) {
                r.resolved = parse_timestamp(it->get<std::string>());
            }
            records.push_back(r);
        }
    } catch (const json::exception&) {
        throw ParseError("malformed bug list response", excerpt(body));
    } catch (const ParseError&) {
        throw ParseError("malformed bug list response", excerpt(body));
    }
    return RawBugRecords(std::move(records));
}

std::string records_to_json(const RawBugRecords& records) {
    json arr = json::array();
    for (const auto& r : records.records()) {
        arr.push_back({{"id", r.id},
                       {"creation_time", format_timestamp(r.created)},
                       {"resolution_time", r.resolved ? json(format_timestamp(*r.resolved)) : json(nullptr)}});
    }
    return json{{"records", arr}}.dump() + "\n";
}

RawBugRecords records_from_json(const std::string& text) {
    std::vector<BugRecord> records;
    try {
        const auto doc = json::parse(text);
        for (const auto& item : doc.at("records")) {
            BugRecord r;
            r.id = item.at("id").get<std::uint64_t>();
            r.created = parse_timestamp(item.at("creation_time").get<std::string>());
            if (const auto& res = item.at("resolution_time"); !res.is_null()) {
                r.resolved = parse_timestamp(res.get<std::string>());
            }
            records.push_back(r);
        }
    } catch (const json::exception& e) {
        throw ParseError("malformed record cache", e.what());
    }
    return RawBugRecords(std::move(records));
}

RawBugRecords fetch_bug_counts(Date start, Date end, const FetchOptions& options, const HttpGet& http,
                               FetchStats* stats) {
    FetchStats local;
    FetchStats& st = stats ? *stats : local;
    st = {};
    if (options.page_size == 0) throw Error(ErrorKind::Validation, "page size must be positive");
    if (end < start) throw Error(ErrorKind::InvalidRange, "fetch range end precedes start");
    if (end == start) return {};

    std::filesystem::path cached;
    if (!options.cache_dir.empty()) {
        cached = cache_path(options, start, end);
        if (std::filesystem::exists(cached)) {
            spdlog::info("cache hit: {}", cached.string());
            st.cache_hit = true;
            return records_from_json(read_file(cached));
        }
    }

    std::vector<BugRecord> all;
    for (std::size_t offset = 0;; offset += options.page_size) {
        const auto query = page_query(start, end, options.page_size, offset);
        std::string body;
        for (int attempt = 1;; ++attempt) {
            ++st.requests;
            try {
                body = http(options.endpoint, query);
                break;
            } catch (const NetworkError& e) {
                if (attempt >= options.max_attempts) throw NetworkError(e.what(), attempt);
                spdlog::warn("attempt {} failed: {}", attempt, e.what());
            }
        }
        ++st.pages;
        auto page = parse_bug_page(body);
        all.insert(all.end(), page.records().begin(), page.records().end());
        if (page.size() < options.page_size) break;
    }
    RawBugRecords records(std::move(all));

    if (!cached.empty()) {
        std::filesystem::create_directories(options.cache_dir);
        write_file_atomic(cached, records_to_json(records));
    }
    return records;
}

}  // namespace bugcast
