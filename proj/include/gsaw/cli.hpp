#ifndef GSAW_CLI_HPP
#define GSAW_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsaw/model.hpp"

namespace gsaw::cli {

/// Exit status contract.
enum ExitCode : int { success = 0, identity_failure = 1, input_error = 2 };

inline constexpr std::uint64_t default_seed = 12345;
inline constexpr std::uint64_t default_samples = 100000;
inline constexpr std::size_t default_maxlen = 20;

/// Input problem (bad flags, bad model file, site out of range).
class InputError : public Error {
public:
    using Error::Error;
};

/// Parsed command line. Sites are stored 0-based; the command line uses 1..M.
struct RunConfig {
    std::string command;
    std::string model_path;
    std::optional<Site> a;
    std::optional<Site> b;
    std::optional<Rational> g;
    Rational lambda{0};
    std::vector<Rational> v;
    std::uint64_t samples = default_samples;
    std::uint64_t seed = default_seed;
    std::size_t maxlen = default_maxlen;
    unsigned order = 2;
    Arithmetic mode = Arithmetic::exact;
    std::string out_path;
};

struct CommandResult {
    nlohmann::json report;
    int exit_code = success;
};

/// One checked identity: both computed sides and a status of pass, fail or skipped.
struct IdentityResult {
    std::string name;
    nlohmann::json lhs;
    nlohmann::json rhs;
    std::string status;
    std::string detail;

    nlohmann::json to_json() const;
};

/// Per-model block of a verification report.
struct SuiteSection {
    std::string label;
    nlohmann::json hypotheses;
    std::vector<IdentityResult> identities;

    nlohmann::json to_json() const;
    std::size_t count(const std::string& status) const;
};

SuiteSection verify_model(const std::string& label, const CouplingModel& model, const RunConfig& config);

CommandResult cmd_verify(const CouplingModel& model, const RunConfig& config);
CommandResult cmd_twopoint(const CouplingModel& model, const RunConfig& config);
CommandResult cmd_simulate(const CouplingModel& model, const RunConfig& config);
CommandResult cmd_moments(const CouplingModel& model, const RunConfig& config);
CommandResult cmd_susy(const CouplingModel& model, const RunConfig& config);

/// Parses the command line, runs the command, writes the JSON report to `out` (or to
/// --out) and diagnostics to `err`. Returns the exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gsaw::cli

#endif
