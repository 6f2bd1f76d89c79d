#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "ergodic.hpp"
#include "identities.hpp"

namespace isokin {

inline constexpr char results_schema[] = "isokin-results/1";
inline constexpr char identities_schema[] = "isokin-identities/1";
inline constexpr char history_schema[] = "isokin-history/1";
inline constexpr char manifest_schema[] = "isokin-manifest/1";

//! Code version recorded in manifests
std::string code_version();

//! One experiment row of results.csv; absent numbers are written empty
struct ResultRow
{
    int row = 0;
    std::string label;
    std::string field_preset;
    double epsilon = 0.0;
    std::string status = "ok";
    std::optional<std::array<double, 3>> lambdas;
    std::optional<std::array<double, 3>> lambda_se;
    std::optional<double> e_lyapunov;
    std::optional<double> e_lyapunov_se;
    std::optional<double> e_birkhoff;
    std::optional<double> e_birkhoff_se;
    std::optional<double> agreement_z;
    std::optional<bool> converged;
    std::optional<double> riccati_gap_min;
    std::size_t n_trajectories = 0;
    double T = 0.0;
    double dt = 0.0;
    std::string error;
    //! Running means of the exponents (not part of the CSV row)
    std::vector<LyapunovHistoryPoint> history;
};

//! Column names of results.csv, in order
std::vector<std::string> result_columns();
std::vector<std::string> identity_columns();

//! Identity row of results.csv for the verify subcommand
struct IdentityRow
{
    std::string config;
    IdentityCheck check;
};

struct RunOptions
{
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    //! Progress messages (may be null)
    std::ostream* log = nullptr;
};

struct RunOutcome
{
    std::filesystem::path directory;
    //! Rows that failed (scan and dichotomy record and continue)
    std::vector<std::string> failures;
    //! Stage of the first failure
    std::string failed_stage;
};

RunOutcome run_verify(ExperimentConfig const& cfg, RunOptions const& opts);
RunOutcome run_dichotomy(ExperimentConfig const& cfg, RunOptions const& opts);
RunOutcome run_scan(ExperimentConfig const& cfg, RunOptions const& opts);
RunOutcome run_lyapunov(ExperimentConfig const& cfg, RunOptions const& opts);

//! Dispatch by subcommand name
RunOutcome run_subcommand(std::string const& name, ExperimentConfig const& cfg,
                          RunOptions const& opts);

//! Ensemble row for one field preset and strength
ResultRow ensemble_row(ExperimentConfig const& cfg,
                       ConformalSurface const& surface, FieldPreset preset,
                       double epsilon, std::string label, unsigned threads);

std::string sha256_hex(std::string const& data);
//! Shortest round-trip formatting used in all outputs
std::string format_number(double v);

}  // namespace isokin
