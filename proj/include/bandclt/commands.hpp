#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bandclt::cli {

inline constexpr const char* kToolVersion = "bandclt 0.1.0";

/// Subcommand names accepted by dispatch, in help order.
const std::vector<std::string>& subcommands();

/// A parsed command line. Flags override the matching config fields.
struct Invocation {
    std::string subcommand;
    std::optional<std::string> config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::size_t> reps;
    std::optional<unsigned> max_order;
};

/// Runs one subcommand and writes its artifacts plus manifest.json into the
/// output directory. Returns 0 on success. On failure, writes a one-line
/// error JSON to `err`, removes the files written so far and returns 1.
int dispatch(const Invocation& inv, std::ostream& err);

/// Error JSON line for failures raised outside dispatch (argument parsing).
std::string error_json(const std::string& kind, const std::string& message,
                       const std::optional<std::string>& field = std::nullopt);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace bandclt::cli
