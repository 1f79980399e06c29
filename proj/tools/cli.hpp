#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "sks/common.hpp"

namespace sks::cli {

using json = nlohmann::json;

inline constexpr int kReportVersion = 1;

enum ExitCode { ok = 0, check_failed = 1, config_error = 2, precision_error = 3 };

// Settings shared by all subcommands. Resolved from defaults, then the config file,
// then SKS_<KEY> environment variables, then flags.
struct RunConfig {
    i64 level = 1;
    std::string fixture;    // empty: the bundled level-1 table (level 1 only)
    std::string fetch;      // form label to download instead of a local fixture
    std::string fetch_url;
    i64 nmax = 40;
    i64 zeta_t = 10;
    double tol = 1e-12;     // quadrature tolerance
    std::uint64_t seed = 1;
    int threads = 0;        // 0: one per hardware thread
    std::string cache_dir = ".sks-cache";
    std::string out = "json";
    int points = 10;
    std::string constants = "displayed";

    json to_json() const;
    int worker_count() const;
};

// keys as in the config file: level, fixture, fetch, fetch_url, nmax, zeta_t, tol, seed,
// threads, cache_dir, out, points, constants
const std::vector<std::string>& config_keys();
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& origin);
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin);
void apply_environment(RunConfig& cfg);

struct Record {
    std::string name;
    json inputs;
    json value;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct Report {
    std::string command;
    json arguments = json::object();
    RunConfig config;
    std::string checksum;  // fixture checksum, empty when no form is involved
    std::vector<Record> records;

    bool pass() const;
    json to_json() const;
    std::string to_csv() const;
};

json to_json(cplx z);

// Runs one invocation (args excludes the program name). Reports go to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sks::cli
