// powerpanel: run the whole analysis from one configuration file, or one
// stage at a time against a run directory.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "powerpanel/config.hpp"
#include "powerpanel/error.hpp"
#include "powerpanel/pipeline.hpp"

namespace pp = powerpanel;

namespace {

struct Flags {
    std::string config;
    std::string out = "powerpanel_out";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> prior;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Flags& f, bool with_prior) {
    cmd->add_option("--config", f.config, "configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", f.seed, "master seed, overrides the configuration");
    cmd->add_flag("--quiet", f.quiet, "suppress progress messages");
    if (with_prior) cmd->add_option("--prior", f.prior, "coefficient prior: uip, bric or hyper_uip");
}

pp::RunConfig resolve(const Flags& f) {
    auto cfg = pp::load_config(f.config);
    if (f.seed) pp::override_seed(cfg, *f.seed);
    if (f.prior) cfg.prior = pp::parse_gprior(*f.prior);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Technology-portfolio clustering and Bayesian model averaging for utility panels"};
    app.require_subcommand(1);
    Flags f;

    auto* run = app.add_subcommand("run", "all stages into a new timestamped directory under --out");
    add_common(run, f, true);
    struct Stage {
        const char* name;
        const char* help;
        bool prior;
        void (pp::RunContext::*fn)();
    };
    const Stage stages[] = {
        {"synth", "generate a synthetic panel into <out>/synth", false, &pp::RunContext::synth},
        {"cluster", "DTW distances, average linkage, validity scores", false, &pp::RunContext::cluster},
        {"bma", "full-sample BMA per specification", true, &pp::RunContext::bma},
        {"rolling", "rolling-window BMA per specification", true, &pp::RunContext::rolling},
        {"describe", "ROA trajectories, trends, regional and country means, LOESS", false,
         &pp::RunContext::describe},
    };
    std::vector<CLI::App*> stage_cmds;
    for (const auto& s : stages) {
        auto* cmd = app.add_subcommand(s.name, std::string(s.help) + "; --out is the run directory");
        add_common(cmd, f, s.prior);
        stage_cmds.push_back(cmd);
    }

    CLI11_PARSE(app, argc, argv);

    pp::RunContext::Logger log;
    if (!f.quiet) log = [](const std::string& m) { std::cerr << m << "\n"; };

    try {
        const auto cfg = resolve(f);
        if (run->parsed()) {
            const auto dir = pp::run_pipeline(cfg, f.out, log);
            if (!f.quiet) std::cerr << "outputs in " << dir.string() << "\n";
            std::cout << dir.string() << "\n";
            return 0;
        }
        for (std::size_t i = 0; i < stage_cmds.size(); ++i) {
            if (!stage_cmds[i]->parsed()) continue;
            pp::RunContext ctx(cfg, f.out, stages[i].name, log);
            ctx.run_stage(stages[i].name, [&] { (ctx.*stages[i].fn)(); });
        }
        return 0;
    } catch (const pp::StageError& e) {
        std::cerr << "powerpanel: " << e.what() << "\n";
        return 1;
    } catch (const pp::Error& e) {
        std::cerr << "powerpanel: " << e.what() << "\n";
        return e.kind() == pp::ErrorKind::config ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "powerpanel: " << e.what() << "\n";
        return 1;
    }
}
