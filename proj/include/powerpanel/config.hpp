#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "powerpanel/bma.hpp"
#include "powerpanel/descriptives.hpp"
#include "powerpanel/design.hpp"
#include "powerpanel/dtw.hpp"
#include "powerpanel/gprior.hpp"
#include "powerpanel/panel.hpp"
#include "powerpanel/rolling.hpp"
#include "powerpanel/synth.hpp"

namespace powerpanel {

// Everything a pipeline run needs. Defaults are the published configuration:
// 8 clusters, hyper-g (UIP centred) coefficient prior, beta-binomial model
// prior, 200000 iterations after a 20000 burn-in, 6-year rolling windows.
struct RunConfig {
    // Raw inputs; ignored when `synth` is set.
    PanelFiles inputs;
    std::optional<SynthConfig> synth;

    Outcome outcome = Outcome::roa;
    std::vector<FocalSpec> specs = {FocalSpec::renewable, FocalSpec::fossil};
    std::optional<std::vector<std::string>> macro_controls;
    bool interactions = true;

    std::size_t k = 8;
    std::size_t validity_k_min = 2;
    std::size_t validity_k_max = 12;
    DtwOptions dtw;

    GPriorKind prior = GPriorKind::hyper_uip;
    ModelPriorKind model_prior = ModelPriorKind::beta_binomial;
    bool heredity = true;
    std::size_t iterations = 200000;
    std::size_t burnin = 20000;
    std::uint64_t seed = 1;

    bool rolling_enabled = true;
    RollingOptions rolling;

    std::optional<std::filesystem::path> region_map;
    LoessOptions loess;

    // Resolved settings as ordered key/value pairs, for the manifest.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

// INI-style key/value file. Relative paths resolve against `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

// --seed replaces the master seed and the generator seed.
void override_seed(RunConfig& config, std::uint64_t seed);

}  // namespace powerpanel
