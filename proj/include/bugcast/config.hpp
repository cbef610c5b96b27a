#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bugcast/eval.hpp"
#include "bugcast/fetch.hpp"
#include "bugcast/ingest.hpp"
#include "bugcast/models.hpp"

namespace bugcast {

/// Declarative run description, loaded from a JSON document. Relative paths resolve
/// against the directory holding the config file.
struct RunConfig {
    std::string profile;

    std::optional<std::filesystem::path> series_csv;
    std::string endpoint = kDefaultEndpoint;
    Date fetch_from;
    Date fetch_to;  ///< inclusive
    SeriesLabel which = SeriesLabel::Arrival;

    std::optional<std::filesystem::path> release_calendar;
    std::optional<std::filesystem::path> outlier_spec;

    SplitSpec split;
    HorizonOptions horizon;
    std::vector<ForecasterSpec> models;

    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 42;
};

/// Parses and fully validates; throws ErrorKind::Validation without touching the filesystem
/// beyond reading `path`.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);

/// Applies a seed override: every model seed becomes `seed` + its position.
void apply_seed(RunConfig& config, std::uint64_t seed);

}  // namespace bugcast
