#include "tandem/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tandem {

namespace {

using json = nlohmann::json;

json parse_document(std::string_view document) {
    try {
        json doc = json::parse(document.begin(), document.end());
        if (!doc.is_object()) {
            throw ValidationError("document", "expected a JSON object");
        }
        return doc;
    } catch (const json::parse_error& e) {
        throw ValidationError("document", e.what());
    }
}

const json& require(const json& doc, const char* field) {
    const auto it = doc.find(field);
    if (it == doc.end()) {
        throw ValidationError(field, "missing field");
    }
    return *it;
}

double number(const json& v, const char* field) {
    if (!v.is_number()) {
        throw ValidationError(field, "expected a number");
    }
    return v.get<double>();
}

Vector numbers(const json& v, const char* field) {
    if (!v.is_array()) {
        throw ValidationError(field, "expected an array of numbers");
    }
    Vector out;
    out.reserve(v.size());
    for (const json& item : v) {
        out.push_back(number(item, field));
    }
    return out;
}

std::uint64_t count(const json& v, const char* field) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ValidationError(field, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

template <typename T>
std::optional<T> optional_count(const json& doc, const char* field) {
    const auto it = doc.find(field);
    if (it == doc.end()) {
        return std::nullopt;
    }
    return static_cast<T>(count(*it, field));
}

}  // namespace

RunConfig parse_config(std::string_view document) {
    const json doc = parse_document(document);
    RunConfig cfg;
    const std::uint64_t J = count(require(doc, "J"), "J");
    if (J == 0) {
        throw ValidationError("J", "must be at least 1");
    }
    cfg.params.J = static_cast<std::size_t>(J);
    cfg.params.lambda = number(require(doc, "lambda"), "lambda");
    cfg.params.mu = numbers(require(doc, "mu"), "mu");
    cfg.params.z = numbers(require(doc, "z"), "z");
    cfg.params.c = number(require(doc, "c"), "c");
    cfg.params.validate();

    cfg.n = optional_count<std::size_t>(doc, "n");
    cfg.resolution = optional_count<std::size_t>(doc, "resolution");
    cfg.paths = optional_count<std::size_t>(doc, "paths");
    cfg.seed = optional_count<std::uint64_t>(doc, "seed");
    if (const auto it = doc.find("tol"); it != doc.end()) {
        cfg.tol = number(*it, "tol");
        if (!(*cfg.tol > 0.0)) {
            throw ValidationError("tol", "must be positive");
        }
    }
    return cfg;
}

SingleServerParams parse_single_server_config(std::string_view document) {
    const json doc = parse_document(document);
    SingleServerParams params;
    params.lambda = numbers(require(doc, "lambda"), "lambda");
    params.mu = numbers(require(doc, "mu"), "mu");
    params.z = numbers(require(doc, "z"), "z");
    params.c = number(require(doc, "c"), "c");
    if (const auto it = doc.find("J"); it != doc.end() && count(*it, "J") != params.mu.size()) {
        throw ValidationError("mu", "expected " + std::to_string(count(*it, "J")) + " service rates, got " +
                                        std::to_string(params.mu.size()));
    }
    params.validate();
    return params;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("config", "cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace tandem
