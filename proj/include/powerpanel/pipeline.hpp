#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "powerpanel/config.hpp"
#include "powerpanel/error.hpp"

namespace powerpanel {

// File names shared by the pipeline and the stage subcommands.
namespace artifacts {
inline constexpr const char* kManifest = "run_manifest.json";
inline constexpr const char* kSynthDir = "synth";
inline constexpr const char* kClusters = "clusters.csv";
inline constexpr const char* kValidity = "validity.json";
inline constexpr const char* kTrajectories = "trajectories.csv";
inline constexpr const char* kTrends = "trends.csv";
inline constexpr const char* kRegional = "regional.csv";
inline constexpr const char* kCountries = "countries.csv";
inline constexpr const char* kLoess = "loess.csv";

// bma_result_<spec>.json; a non-default prior adds _<prior>.
std::string bma_result(FocalSpec spec, GPriorKind prior);
std::string density(FocalSpec spec, GPriorKind prior);
std::string rolling(FocalSpec spec, GPriorKind prior);
}  // namespace artifacts

// A stage failure: the stage name plus the underlying cause.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, std::optional<ErrorKind> kind, const std::string& cause)
        : std::runtime_error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)), kind_(kind) {}
    const std::string& stage() const noexcept { return stage_; }
    std::optional<ErrorKind> kind() const noexcept { return kind_; }

private:
    std::string stage_;
    std::optional<ErrorKind> kind_;
};

std::string sha256_hex(const std::filesystem::path& file);

// One run directory. Every stage reads its inputs from the directory (or
// from the configured raw files) and writes its outputs there, so the full
// pipeline and a chain of subcommands produce the same bytes.
class RunContext {
public:
    using Logger = std::function<void(const std::string&)>;

    RunContext(RunConfig config, std::filesystem::path run_dir, std::string command, Logger log = {});

    const RunConfig& config() const noexcept { return config_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }

    void synth();
    void cluster();
    void bma();
    void rolling();
    void describe();

    // Runs `stage`, timing it and recording success or failure in the
    // manifest, which is rewritten after every stage.
    void run_stage(const std::string& name, const std::function<void()>& stage);

private:
    std::filesystem::path output(const std::string& name) const;
    void record(const std::filesystem::path& file);
    PanelDataset load_dataset() const;
    void write_manifest() const;

    RunConfig config_;
    std::filesystem::path dir_;
    std::string command_;
    Logger log_;
    struct StageRecord {
        std::string name;
        double seconds = 0.0;
        bool ok = true;
        std::string error;
        std::vector<std::string> files;
        std::vector<std::pair<std::string, std::string>> notes;
    };
    std::vector<StageRecord> stages_;
    StageRecord* current_ = nullptr;
    // Manifest content from earlier invocations in the same directory.
    std::string previous_manifest_;
};

// Creates a fresh timestamped directory below `out_root`.
std::filesystem::path make_run_dir(const std::filesystem::path& out_root);

// All stages in order. Returns the run directory.
std::filesystem::path run_pipeline(const RunConfig& config, const std::filesystem::path& out_root,
                                   const RunContext::Logger& log = {});

}  // namespace powerpanel
