#include "bugcast/config.hpp"

#include <json.hpp>

#include "bugcast/error.hpp"
#include "bugcast/io.hpp"

namespace bugcast {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

Date date_field(const json& doc, const char* key) {
    try {
        return Date::parse(doc.at(key).get<std::string>());
    } catch (const ParseError& e) {
        throw Error(ErrorKind::Validation, std::string("config field '") + key + "': " + e.what());
    }
}

}  // namespace

void apply_seed(RunConfig& config, std::uint64_t seed) {
    config.seed = seed;
    for (std::size_t i = 0; i < config.models.size(); ++i) config.models[i].seed = seed + i;
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    try {
        const auto doc = json::parse(json_text);
        cfg.profile = doc.value("profile", std::string());

        const auto& data = doc.at("data");
        if (data.contains("series_csv") && !data["series_csv"].is_null()) {
            cfg.series_csv = resolve(base_dir, data["series_csv"].get<std::string>());
        }
        cfg.endpoint = data.value("endpoint", std::string(kDefaultEndpoint));
        cfg.fetch_from = date_field(data, "from");
        cfg.fetch_to = date_field(data, "to");
        if (!(cfg.fetch_from < cfg.fetch_to)) throw Error(ErrorKind::Validation, "data.from must precede data.to");
        cfg.which = parse_series_label(data.value("which", std::string("arrival")));

        if (doc.contains("release_calendar") && !doc["release_calendar"].is_null()) {
            cfg.release_calendar = resolve(base_dir, doc["release_calendar"].get<std::string>());
        }
        if (doc.contains("outliers") && !doc["outliers"].is_null()) {
            cfg.outlier_spec = resolve(base_dir, doc["outliers"].get<std::string>());
        }

        const auto& split = doc.at("split");
        cfg.split.train_end = date_field(split, "train_end");
        cfg.split.test_end = date_field(split, "test_end");
        cfg.split.refit_interval = split.value("refit_interval", std::size_t{1});
        if (!(cfg.split.train_end < cfg.split.test_end)) {
            throw Error(ErrorKind::Validation, "split.train_end must precede split.test_end");
        }
        if (!cfg.split.train_end.is_monday() || !cfg.split.test_end.is_monday()) {
            throw Error(ErrorKind::Validation, "split dates must be week starts (Mondays)");
        }
        if (cfg.split.refit_interval == 0) throw Error(ErrorKind::Validation, "split.refit_interval must be positive");

        if (doc.contains("horizon")) {
            cfg.horizon.horizon = doc["horizon"].value("steps", cfg.horizon.horizon);
            cfg.horizon.stride = doc["horizon"].value("stride", cfg.horizon.stride);
        }
        if (cfg.horizon.horizon == 0 || cfg.horizon.stride == 0) {
            throw Error(ErrorKind::Validation, "horizon.steps and horizon.stride must be positive");
        }

        cfg.seed = doc.value("seed", std::uint64_t{42});
        for (const auto& m : doc.at("models")) {
            auto spec = spec_from_json(m);
            if (!m.contains("seed")) spec.seed = cfg.seed + cfg.models.size();
            cfg.models.push_back(std::move(spec));
        }
        if (cfg.models.empty()) throw Error(ErrorKind::Validation, "config lists no models");
        cfg.out_dir = resolve(std::filesystem::current_path(), doc.value("out_dir", std::string("out")));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Validation, std::string("invalid config: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    const auto text = read_file(path);
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return parse_run_config(text, base);
}

}  // namespace bugcast
