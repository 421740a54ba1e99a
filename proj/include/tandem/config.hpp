// Instance documents:
//   {"J": 2, "lambda": 1.0, "mu": [2, 1], "z": [1, 1], "c": 1.0}
// Optional run defaults may ride along in the same document ("n", "seed",
// "paths", "resolution", "tol"); command-line flags override them.
// The single-server variant takes "lambda" as a per-class array.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "tandem/model.hpp"
#include "tandem/value.hpp"

namespace tandem {

struct RunConfig {
    NetworkParams params;
    std::optional<std::size_t> n;
    std::optional<std::size_t> resolution;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
};

/// Parses and validates an instance document. Malformed JSON and invalid
/// values raise ValidationError naming the field ("document" for syntax).
RunConfig parse_config(std::string_view document);

SingleServerParams parse_single_server_config(std::string_view document);

/// Reads a whole file; raises ValidationError("config", ...) when unreadable.
std::string read_text_file(const std::string& path);

}  // namespace tandem
