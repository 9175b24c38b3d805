#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace bimembrane::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitIo = 3,
    kExitCheckFailed = 4,
};

/// Which diagnostics a diagnose-family command runs.
enum class Scope { All, Flatness, Frequency };

int cmd_solve(const Json& config);

/// Fields come from `fields_dir` (u.grid, v.grid), else from the output directory;
/// planted presets are sampled analytically unless `fields_dir` is given.
int cmd_diagnose(const Json& config, const std::optional<std::string>& fields_dir, Scope scope);

int cmd_linearized(const Json& config);

int cmd_preset_list(std::ostream& os);
int cmd_preset_show(const std::string& name, std::ostream& os);

}  // namespace bimembrane::cli
