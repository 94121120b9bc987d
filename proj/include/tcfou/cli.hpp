#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tcfou/bernstein.hpp"

namespace tcfou::cli {

enum class Command { Simulate, Density, Subordinate, Moments, Verify };

std::string to_string(Command command);
Command parse_command(std::string_view name);

/// A fully resolved run: every key of the command is present in canonical
/// text form (shortest round-trip doubles, normalized spec tokens), so the
/// serialized block reproduces the run exactly.
struct RunConfig {
    Command command = Command::Simulate;
    std::map<std::string, std::string> params;

    const std::string& text(const std::string& key) const;
    double number(const std::string& key) const;
    std::uint64_t count(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    BernsteinSpec phi() const;
    bool has_value(const std::string& key) const;

    /// "# key = value" lines, command first.
    std::string metadata_block() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Keys accepted by a command, in serialization order.
std::vector<std::string> known_keys(Command command);

/// args: the subcommand followed by its flags (no program name). A
/// `--config <file>` flag loads `key = value` lines first; flags override
/// file values, which override defaults. Throws ContractError on unknown
/// keys, malformed lines (with the line number) or invalid values.
RunConfig parse_config(const std::vector<std::string>& args);

/// Rebuilds the config from the metadata block of a CSV or JSON artifact.
RunConfig config_from_metadata(std::string_view artifact);

/// Executes the run and writes its artifact (atomically, or to `out` when
/// the path is "-"). Returns 0, or 2 when a verification check fails.
int run(const RunConfig& config, std::ostream& out);

/// Entry point of the tcfou executable: 0 ok, 1 contract/domain/IO error,
/// 2 failed verification.
int main_entry(int argc, const char* const* argv);

}  // namespace tcfou::cli
