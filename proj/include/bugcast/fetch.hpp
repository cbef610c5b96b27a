#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "bugcast/date.hpp"
#include "bugcast/ingest.hpp"

namespace bugcast {

inline constexpr const char* kDefaultEndpoint = "https://bugzilla.mozilla.org";

struct FetchOptions {
    std::string endpoint = kDefaultEndpoint;
    std::size_t page_size = 1000;
    int max_attempts = 3;
    /// Cache directory; caching is disabled when empty.
    std::filesystem::path cache_dir;
};

/// Applies BUGCAST_ENDPOINT and BUGCAST_CACHE_DIR when set.
FetchOptions fetch_options_from_env(FetchOptions base = {});

struct FetchStats {
    bool cache_hit = false;
    std::size_t requests = 0;
    std::size_t pages = 0;
};

/// Issues one HTTP GET against `endpoint` + `path_and_query`; returns the body.
/// Throws NetworkError on transport failure.
using HttpGet = std::function<std::string(const std::string& endpoint, const std::string& path_and_query)>;

/// Default transport backed by cpp-httplib.
HttpGet default_http_get();

/// Fetches all public bugs created in [start, end) via the Bugzilla REST API (`/rest/bug`),
/// paging with limit/offset. Results are cached on disk keyed by (endpoint, range).
RawBugRecords fetch_bug_counts(Date start, Date end, const FetchOptions& options,
                               const HttpGet& http = default_http_get(), FetchStats* stats = nullptr);

/// Parses a Bugzilla `/rest/bug` response page.
RawBugRecords parse_bug_page(const std::string& body);

std::string records_to_json(const RawBugRecords& records);
RawBugRecords records_from_json(const std::string& text);

}  // namespace bugcast
