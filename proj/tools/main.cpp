#include "harness.hpp"

#include <rvml/common.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using rvml::harness::json;

namespace {

void print_summary(const rvml::harness::RunReport& r)
{
    for (const auto& c : r.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.value << ' ' << c.relation << ' '
                  << c.threshold << '\n';
    for (const auto& t : r.timings)
        std::cout << (t.pass ? "PASS " : "FAIL ") << t.name << "  " << t.seconds << " s < " << t.limit << " s\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Relativistic Vlasov-Maxwell-Landau numerics and checks"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", rvml::harness::version_stamp());

    std::string config_path, output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool print_config = false;
    app.add_option("--config", config_path, "JSON config file merged over the defaults")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--threads", threads, "Worker budget")->check(CLI::Range(1, 256));
    app.add_option("--output-dir", output_dir, "Directory for report.json and data files");
    app.add_flag("--print-config", print_config, "Print the effective config and exit");

    std::optional<double> tol;
    std::string domain;
    std::optional<std::size_t> particles;
    std::optional<long> reflections;
    std::optional<int> grid_n;

    std::vector<CLI::App*> subs;
    for (const auto& name : rvml::harness::subcommands()) {
        CLI::App* sub = app.add_subcommand(name, "Run the " + name + " suite");
        if (name == "momentfn") sub->add_option("--tol", tol, "Quadrature tolerance");
        if (name == "billiard") {
            sub->add_option("--domain", domain, "disk, ball or both")->check(CLI::IsMember({"disk", "ball", "both"}));
            sub->add_option("--n", particles, "Number of particles");
            sub->add_option("--reflections", reflections, "Reflections per particle");
        }
        if (name == "assemble" || name == "relax" || name == "cavity")
            sub->add_option("--n", grid_n, "Grid points per axis");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    std::string subcommand;
    for (auto* s : subs)
        if (s->parsed()) subcommand = s->get_name();

    try {
        json user = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            try {
                user = json::parse(in);
            } catch (const json::parse_error& e) {
                throw rvml::ConfigError(config_path + ": " + e.what());
            }
        }
        json cfg = rvml::harness::merge_config(user);
        rvml::harness::apply_environment(cfg);
        if (seed) cfg["seed"] = *seed;
        if (threads) cfg["threads"] = *threads;
        if (!output_dir.empty()) cfg["output_dir"] = output_dir;
        if (tol) cfg["momentfn"]["tol"] = *tol;
        if (!domain.empty()) cfg["billiard"]["domain"] = domain;
        if (particles) cfg["billiard"]["particles"] = *particles;
        if (reflections) cfg["billiard"]["reflections"] = *reflections;
        if (grid_n) {
            if (subcommand == "cavity") cfg["cavity"]["n"] = *grid_n;
            else cfg["operator"]["n"] = *grid_n;
        }
        rvml::harness::validate(cfg, rvml::harness::config_schema());
        if (print_config) {
            std::cout << cfg.dump(2) << '\n';
            return 0;
        }

        const auto report = rvml::harness::run(subcommand, cfg);
        print_summary(report);
        std::cout << "report: " << cfg["output_dir"].get<std::string>() << "/report.json\n";
        return rvml::harness::exit_code(report);
    } catch (const rvml::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const rvml::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << " (estimate " << e.estimate() << ", error " << e.error()
                  << ")\n";
        return 3;
    }
}
