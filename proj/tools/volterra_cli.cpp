#include "volterra/config.hpp"
#include "volterra/errors.hpp"
#include "volterra/experiments.hpp"
#include "volterra/kernel_cq.hpp"
#include "volterra/reference.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace volterra;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalError = 3, kInadmissible = 4 };

struct RunOptions {
    std::string config_path;
    std::string preset_name;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string out;
    std::optional<std::size_t> drop_coarse;
    std::string json;
};

void add_run_options(CLI::App* sub, RunOptions& o) {
    auto* cfg = sub->add_option("--config", o.config_path, "Experiment config file");
    auto* pre = sub->add_option("--preset", o.preset_name, "Named preset instead of a config file");
    cfg->excludes(pre);
    sub->add_option("--seed", o.seed, "Master seed (overrides estimator.seed)");
    sub->add_option("--threads", o.threads, "Worker threads (overrides estimator.threads)")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "CSV output path (overrides output.path)");
    sub->add_option("--drop-coarse", o.drop_coarse, "Exclude the first k rows from the slope fits");
    sub->add_option("--json", o.json, "Write metadata, slopes and residuals as JSON");
}

ExperimentConfig resolve(const RunOptions& o) {
    if (o.config_path.empty() && o.preset_name.empty()) throw ConfigError("one of --config or --preset is required");
    ExperimentConfig c = o.config_path.empty() ? preset(o.preset_name) : load_config(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (o.threads) c.threads = *o.threads;
    if (!o.out.empty()) c.output = o.out;
    if (o.drop_coarse) c.drop_coarse = *o.drop_coarse;
    return c;
}

void report(const ConvergenceReport& r, const ExperimentConfig& c, const RunOptions& o) {
    for (const auto& [k, v] : r.metadata) std::cout << k << ": " << v << "\n";
    std::cout << "drop_coarse: " << r.drop_coarse << "\n";
    std::printf("slope_raw: %.6f\nslope_log_corrected: %.6f\n", r.slope_raw(), r.slope_log_corrected());
    if (c.output.empty()) {
        std::cout << to_csv(r);
    } else {
        write_csv(r, c.output);
        std::cout << "csv: " << c.output << "\n";
    }
    if (!o.json.empty()) {
        std::ofstream js(o.json, std::ios::binary);
        if (!js) throw ConfigError("cannot open JSON output '" + o.json + "'");
        js << to_json(r) << "\n";
    }
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InadmissibleNoise& e) {
        std::cerr << "inadmissible noise: " << e.what() << "\n";
        return kInadmissible;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericalError;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convolution-quadrature / finite element solver for stochastic Volterra equations "
                 "with Riesz kernels, and its convergence harness"};
    app.require_subcommand(1);

    // weights
    double w_rho = 1.5, w_dt = 0.1, w_eta = 0.0, w_radius = 0.0;
    std::size_t w_n = 16;
    std::string w_method = "auto", w_variant = "riesz", w_out;
    auto* weights = app.add_subcommand("weights", "Dump convolution quadrature weights as CSV");
    weights->add_option("--rho", w_rho, "Kernel exponent in (1, 2)");
    weights->add_option("--dt", w_dt, "Time step");
    weights->add_option("--n", w_n, "Number of weights")->check(CLI::PositiveNumber);
    weights->add_option("--variant", w_variant)->check(CLI::IsMember({"riesz", "tempered_riesz"}));
    weights->add_option("--eta", w_eta, "Tempering parameter");
    weights->add_option("--method", w_method)->check(CLI::IsMember({"auto", "recurrence", "contour"}));
    weights->add_option("--radius", w_radius, "Contour radius in (0, 1); default balances round-off and aliasing");
    weights->add_option("--out", w_out, "Output path (stdout if omitted)");

    RunOptions det_opts, weak_opts, strong_opts;
    auto* det = app.add_subcommand("det-conv", "Deterministic convergence study");
    add_run_options(det, det_opts);
    auto* weak = app.add_subcommand("weak-conv", "Weak convergence study");
    add_run_options(weak, weak_opts);
    auto* strong = app.add_subcommand("strong-conv", "Strong convergence study (Monte Carlo)");
    add_run_options(strong, strong_opts);

    // ml-eval
    double m_rho = 1.5, m_min = 0.0, m_max = 20.0;
    std::size_t m_count = 21;
    std::string m_out;
    auto* ml = app.add_subcommand("ml-eval", "Tabulate E_rho(-x) on a uniform grid");
    ml->add_option("--rho", m_rho, "Order in (1, 2)");
    ml->add_option("--x-min", m_min);
    ml->add_option("--x-max", m_max);
    ml->add_option("--count", m_count)->check(CLI::Range(std::size_t(2), std::size_t(1000000)));
    ml->add_option("--out", m_out, "Output path (stdout if omitted)");

    // presets
    std::string p_dir;
    auto* pre = app.add_subcommand("presets", "Write the named preset configurations");
    pre->add_option("--out", p_dir, "Directory for <name>.cfg files (list names if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    auto emit = [](const std::string& path, const std::string& text) {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot open output file '" + path + "'");
        out << text;
    };

    if (weights->parsed()) {
        return run_guarded([&] {
            const auto kernel = w_variant == "riesz" ? KernelSpec::riesz(w_rho) : KernelSpec::tempered_riesz(w_rho, w_eta);
            CqWeights w = [&] {
                if (w_method == "recurrence") {
                    if (kernel.variant() != KernelVariant::riesz) {
                        throw ConfigError("the recurrence applies to the Riesz kernel only");
                    }
                    return cq_weights_riesz(w_rho, w_dt, w_n);
                }
                if (w_method == "contour") {
                    return w_radius > 0.0 ? cq_weights_contour(kernel, w_dt, w_n, w_radius)
                                          : cq_weights_contour(kernel, w_dt, w_n);
                }
                return cq_weights(kernel, w_dt, w_n);
            }();
            std::string text = "k,weight\n";
            char buf[64];
            for (std::size_t k = 0; k < w.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k, w[k]);
                text += buf;
            }
            emit(w_out, text);
        });
    }
    if (det->parsed()) {
        return run_guarded([&] {
            const auto c = resolve(det_opts);
            report(deterministic_convergence(c), c, det_opts);
        });
    }
    if (weak->parsed()) {
        return run_guarded([&] {
            const auto c = resolve(weak_opts);
            report(weak_convergence(c), c, weak_opts);
        });
    }
    if (strong->parsed()) {
        return run_guarded([&] {
            const auto c = resolve(strong_opts);
            report(strong_convergence_mc(c), c, strong_opts);
        });
    }
    if (ml->parsed()) {
        return run_guarded([&] {
            std::string text = "x,value\n";
            char buf[96];
            for (std::size_t i = 0; i < m_count; ++i) {
                const double x = m_min + (m_max - m_min) * double(i) / double(m_count - 1);
                std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x, mittag_leffler(m_rho, x));
                text += buf;
            }
            emit(m_out, text);
        });
    }
    if (pre->parsed()) {
        return run_guarded([&] {
            if (!p_dir.empty()) std::filesystem::create_directories(p_dir);
            for (const auto& [name, config] : presets()) {
                if (p_dir.empty()) {
                    std::cout << name << "\n";
                    continue;
                }
                const auto path = (std::filesystem::path(p_dir) / (name + ".cfg")).string();
                emit(path, to_text(config));
                std::cout << path << "\n";
            }
        });
    }
    return kOk;
}
