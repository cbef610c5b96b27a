#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "bugcast/error.hpp"
#include "bugcast/io.hpp"

namespace bugcast::detail {

inline nlohmann::json to_decimal_array(std::span<const double> values) {
    auto arr = nlohmann::json::array();
    for (double v : values) arr.push_back(format_double(v));
    return arr;
}

inline std::vector<double> from_decimal_array(const nlohmann::json& arr) {
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(parse_double(v.get<std::string>()));
    return out;
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    return {{"rows", m.rows()},
            {"cols", m.cols()},
            {"data", to_decimal_array(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())))}};
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& doc) {
    const auto rows = doc.at("rows").get<Eigen::Index>();
    const auto cols = doc.at("cols").get<Eigen::Index>();
    const auto data = from_decimal_array(doc.at("data"));
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw ParseError("matrix payload size does not match its shape");
    }
    return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
    const auto data = from_decimal_array(arr);
    return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
}

}  // namespace bugcast::detail
