#include "carpetlab/report.hpp"

#include <cmath>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace carpetlab {

namespace {

std::string format_float(double v) {
    if (!std::isfinite(v)) return "null";
    std::string s = fmt::format("{:.17g}", v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void write(const Json& j, std::string& out) {
    switch (j.type()) {
    case Json::value_t::object: {
        out += '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ',';
            first = false;
            out += Json(it.key()).dump();
            out += ':';
            write(it.value(), out);
        }
        out += '}';
        break;
    }
    case Json::value_t::array: {
        out += '[';
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += ',';
            first = false;
            write(v, out);
        }
        out += ']';
        break;
    }
    case Json::value_t::number_float:
        out += format_float(j.get<double>());
        break;
    default:
        out += j.dump();
    }
}

}  // namespace

std::string dump_json(const Json& doc) {
    std::string out;
    write(doc, out);
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

Json make_report(std::string_view input_digest, Json parameters, std::string_view payload_key, Json payload) {
    Json doc;
    doc["input_digest"] = std::string(input_digest);
    doc["parameters"] = std::move(parameters);
    doc[std::string(payload_key)] = std::move(payload);
    doc["warnings"] = Json::array();
    return doc;
}

Json classification_json(int n, ComplexPoint lambda, const Classification& c) {
    auto opt = [](const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); };
    Json doc;
    doc["n"] = n;
    doc["lambda"] = {{"re", lambda.re}, {"im", lambda.im}};
    doc["tag"] = std::string(tag_name(c.tag));
    doc["k"] = c.k >= 0 ? Json(c.k) : Json(nullptr);
    doc["label"] = c.label();
    doc["escape_index"] = opt(c.orbit.escape_index);
    doc["min_central_index"] = opt(c.orbit.min_central_index);
    doc["steps_computed"] = c.orbit.steps_computed;
    doc["R"] = c.escape_r;
    doc["rho"] = c.central_r;
    doc["N_max"] = c.max_steps;
    Json stab;
    stab["checked"] = c.stability.checked;
    stab["stable"] = c.stability.stable;
    if (c.stability.checked) {
        auto variant = [](Tag t, int k) {
            Json v;
            v["tag"] = std::string(tag_name(t));
            v["k"] = k >= 0 ? Json(k) : Json(nullptr);
            return v;
        };
        stab["half_rho"] = variant(c.stability.half_rho, c.stability.half_rho_k);
        stab["double_rho"] = variant(c.stability.double_rho, c.stability.double_rho_k);
        stab["double_n_max"] = variant(c.stability.double_steps, c.stability.double_steps_k);
    }
    doc["stability"] = std::move(stab);
    return doc;
}

}  // namespace carpetlab
