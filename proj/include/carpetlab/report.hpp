#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "carpetlab/dynamics.hpp"

namespace carpetlab {

using Json = nlohmann::ordered_json;

/// Serializes with every floating-point value written to 17 significant
/// digits; non-finite values become null.
std::string dump_json(const Json& doc);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Report envelope {input_digest, parameters, <payload_key>: payload, warnings}.
Json make_report(std::string_view input_digest, Json parameters, std::string_view payload_key, Json payload);

/// Classification report shared by the CLI and the service:
/// tag, k, label, escape_index, min_central_index, R, rho, N_max, stability.
Json classification_json(int n, ComplexPoint lambda, const Classification& c);

}  // namespace carpetlab
