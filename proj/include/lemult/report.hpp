#pragma once

// Run configuration, dispatch and report files.
//
// Config files are INI text: optional top-level keys, then [sections] of
// key = value lines, ';' comments. Unknown sections or keys are errors.
// Every run writes summary.json (deterministic, hashed config inside),
// config.ini (canonical text that reproduces the run), run_info.json
// (timestamp, wall time; not part of the reproducible payload) and one CSV per
// scan or series.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lemult/evolution.hpp"
#include "lemult/geometry.hpp"
#include "lemult/multiplier.hpp"

namespace lemult {

enum class Mode { verify, budget, hardy, evolve, all };

std::string to_string(Mode m);
std::optional<Mode> mode_from_string(const std::string& s);

struct RunConfig {
    Mode mode = Mode::all;
    std::vector<int> d{1};
    double r_s = 1.0;
    double eps = 0.05;
    double delta = 0.1;
    double delta0 = 0.1;
    std::optional<double> alpha;  // ablation override

    std::size_t grid_points = 1024;  // per scan
    int refine = 1;

    std::size_t hardy_bumps = 24;
    double hardy_width = 0.25;

    std::vector<int> ells{0, 1, 2};
    std::vector<DataKind> kinds{DataKind::time_symmetric, DataKind::outgoing};
    double rstar_lo = -260.0;
    double rstar_hi = 260.0;
    double spacing = 0.05;
    double dt = 0.025;
    double t_final = 100.0;
    double center_r = 5.0;
    double width = 0.5;
    double amplitude = 1.0;
    int cadence = 10;
    bool track_identity = false;
    double drift_tol = 1e-6;

    std::filesystem::path out_dir = "lemult-out";
    std::uint64_t seed = 0;
    int threads = 0;  // 0: hardware concurrency

    /// Throws ConfigError listing every violated precondition.
    void validate() const;

    BackgroundParams background(int d) const;
    MultiplierParams multiplier(const BackgroundParams& bg) const;
    EvolutionConfig evolution(int d, DataKind kind) const;
};

/// Parses and validates. Syntax errors carry the line, value errors the
/// [section] key. Absent keys keep their defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text: parse_config(config_text(c)) reproduces c.
std::string config_text(const RunConfig& c);
/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& c);

/// "1,3,5" and ranges "1-7", mixed.
std::vector<int> parse_int_list(const std::string& s);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitCheckFailed = 4;

struct RunResult {
    int exit_code = kExitOk;
    std::string summary;  // the JSON written to summary.json
    std::vector<std::filesystem::path> files;
    std::vector<std::string> failures;  // one line per failed check
};

/// Runs `c.mode` and writes the reports into c.out_dir. Module errors are
/// mapped to exit codes rather than thrown.
RunResult run(const RunConfig& c);

const char* code_version();

}  // namespace lemult
