#include "volterra/experiments.hpp"

#include "volterra/errors.hpp"
#include "volterra/parallel.hpp"
#include "volterra/reference.hpp"
#include "volterra/scheme.hpp"

#include <boost/version.hpp>
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

namespace volterra {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double log_factor(double T, double h, double dt, double rho) {
    return std::log(T / (std::pow(h, 2.0 / rho) + dt));
}

KernelSpec require_riesz(const ExperimentConfig& c, const char* experiment) {
    const auto kernel = c.kernel();
    if (kernel.variant() != KernelVariant::riesz) {
        throw ConfigError(std::string(experiment) +
                          ": no exact reference for the tempered kernel; use a Monte Carlo study");
    }
    return kernel;
}

CqWeightsPtr make_weights(const KernelSpec& kernel, double T, std::size_t N) {
    return std::make_shared<const CqWeights>(cq_weights(kernel, T / double(N), N));
}

void add_common_metadata(ConvergenceReport& r, const ExperimentConfig& c) {
    r.metadata.emplace_back("experiment", r.experiment);
    r.metadata.emplace_back("config_hash", config_hash(c));
    r.metadata.emplace_back("seed", std::to_string(c.seed));
    r.metadata.emplace_back("version", kVersion);
    r.metadata.emplace_back("compiler", __VERSION__);
    r.metadata.emplace_back("boost", BOOST_LIB_VERSION);
    r.metadata.emplace_back("eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                         std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                         std::to_string(EIGEN_MINOR_VERSION));
    r.metadata.emplace_back("kernel", to_string(c.variant));
    r.metadata.emplace_back("rho", format17(c.rho));
    r.metadata.emplace_back("ladder", to_string(c.ladder));
}

void finish(ConvergenceReport& r, const ExperimentConfig& c) {
    r.ladder = c.ladder;
    r.refit(c.drop_coarse);
}

ConvergenceRow make_row(const ExperimentConfig& c, std::size_t n_elem, std::size_t N, double error,
                        double std_error) {
    ConvergenceRow row;
    row.h = c.length / double(n_elem);
    row.N = N;
    row.dt = N == 0 ? 0.0 : c.horizon / double(N);
    row.error = error;
    row.std_error = std_error;
    row.log_factor = log_factor(c.horizon, row.h, row.dt, c.rho);
    if (!(row.log_factor > 0.0)) throw ConfigError("ladder point violates h^{2/rho} + dt < T");
    return row;
}

double m_distance(const FemOperators& ops, std::span<const double> a, std::span<const double> b) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
    return h_norm(ops, d);
}

std::vector<double> exact_interpolant(const ExperimentConfig& c, const Mesh1D& mesh) {
    const auto exact = exact_solution_action(c.rho, SpectralVector{c.length, c.initial}, c.horizon);
    return interpolate_sine_series(mesh, exact.coeffs);
}

SecondMoment continuous_reference(const ExperimentConfig& c, std::string& description) {
    SecondMomentOptions o;
    o.tolerance = c.tolerance;
    const SpectralVector x0{c.length, c.initial};
    if (c.noise == NoiseModel::none) {
        description = "exact, deterministic";
        return exact_second_moment(c.rho, x0, CovarianceSpec::zero(c.length), c.horizon, o);
    }
    if (c.noise == NoiseModel::custom) {
        const std::size_t J = c.noise_modes(0);
        o.modes = J;
        o.include_tail = false;
        description = "exact, " + std::to_string(J) + " noise modes";
        return exact_second_moment(c.rho, x0, c.covariance(J), c.horizon, o);
    }
    o.modes = c.reference_modes;
    o.include_tail = true;
    const auto m = exact_second_moment(c.rho, x0, c.covariance(0), c.horizon, o);
    description = "exact, " + std::to_string(m.modes) + " noise modes plus analytic tail";
    return m;
}

void check_admissible(const ExperimentConfig& c, ConvergenceReport& r) {
    if (c.noise == NoiseModel::none) return;
    const auto adm = admissible_nu(c.covariance(1), c.rho);
    r.metadata.emplace_back("nu_max", format17(adm.nu_max));
    if (adm.user_supplied) {
        r.metadata.emplace_back("nu_admissibility", "user supplied (custom covariance)");
        return;
    }
    constexpr double margin = 0.02;
    if (adm.nu_max < margin) {
        throw InadmissibleNoise("noise too rough for a positive weak rate: nu_max = " + format17(adm.nu_max) +
                                    " < " + format17(margin),
                                adm.nu_max);
    }
}

// Monte Carlo over coupled paths. Every level draws its increments from the
// same standard normals on the reference grid, summed over blocks of
// N_ref / N steps, with J = n_modes noise modes.
struct CoupledLevel {
    FemOperators ops;
    std::size_t N;
    std::size_t block;
    CqWeightsPtr weights;
    std::vector<double> x0;
    std::unique_ptr<IncrementSampler> sampler;
};

class CoupledEnsemble {
public:
    CoupledEnsemble(const ExperimentConfig& c, std::vector<std::pair<std::size_t, std::size_t>> grids,
                    std::pair<std::size_t, std::size_t> reference)
        : seed_(c.seed), n_ref_(reference.second) {
        const KernelSpec kernel = c.kernel();
        const Mesh1D ref_mesh(c.length, reference.first);
        n_modes_ = c.noise_modes(ref_mesh.n_dof());
        cov_ = c.covariance(n_modes_);
        const double dt_ref = c.horizon / double(n_ref_);
        grids.push_back(reference);
        for (const auto& [n_elem, N] : grids) {
            if (n_ref_ % N != 0) throw ConfigError("time ladder must divide the reference step count");
            if (reference.first % n_elem != 0) throw ConfigError("space ladder must nest in the reference mesh");
            CoupledLevel level{assemble(Mesh1D(c.length, n_elem)), N, n_ref_ / N,
                               make_weights(kernel, c.horizon, N), {}, nullptr};
            level.x0 = project_initial(level.ops, c.initial);
            level.sampler = std::make_unique<IncrementSampler>(level.ops.mesh, cov_, dt_ref);
            levels_.push_back(std::move(level));
        }
    }

    std::size_t rows() const noexcept { return levels_.size() - 1; }
    std::size_t n_modes() const noexcept { return n_modes_; }
    const CoupledLevel& level(std::size_t i) const { return levels_[i]; }
    const CoupledLevel& reference() const { return levels_.back(); }

    /// Final states of every level (reference last) for one path.
    std::vector<std::vector<double>> run_path(std::uint64_t path) const {
        std::vector<double> xi(n_ref_ * n_modes_);
        if (!cov_.is_zero()) {
            for (std::size_t s = 0; s < n_ref_; ++s) {
                for (std::size_t j = 0; j < n_modes_; ++j) {
                    xi[s * n_modes_ + j] = seed_.normal(path, std::uint32_t(s + 1), std::uint32_t(j + 1));
                }
            }
        }
        std::vector<std::vector<double>> out;
        out.reserve(levels_.size());
        std::vector<double> sum(n_modes_);
        for (const auto& level : levels_) {
            SchemeState state(level.ops, level.weights, level.x0);
            std::vector<double> load(level.ops.mesh.n_dof());
            for (std::size_t n = 0; n < level.N; ++n) {
                std::fill(sum.begin(), sum.end(), 0.0);
                for (std::size_t s = n * level.block; s < (n + 1) * level.block; ++s) {
                    for (std::size_t j = 0; j < n_modes_; ++j) sum[j] += xi[s * n_modes_ + j];
                }
                level.sampler->combine_into(sum, load);
                state.step(load);
            }
            const auto x = state.current();
            out.emplace_back(x.begin(), x.end());
        }
        return out;
    }

private:
    SeedPolicy seed_;
    std::size_t n_ref_;
    std::size_t n_modes_ = 0;
    CovarianceSpec cov_ = CovarianceSpec::zero(1.0);
    std::vector<CoupledLevel> levels_;
};

struct Moments {
    double mean;
    double std_error;
};

/// values[p * rows + r]; reduced in path order.
std::vector<Moments> reduce_paths(const std::vector<double>& values, std::size_t paths, std::size_t rows) {
    std::vector<Moments> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        // Shifted by the first sample so identical samples give exactly zero variance.
        const double shift = values[r];
        double sum = 0.0;
        for (std::size_t p = 0; p < paths; ++p) sum += values[p * rows + r] - shift;
        const double mean = sum / double(paths);
        double ss = 0.0;
        for (std::size_t p = 0; p < paths; ++p) {
            const double d = values[p * rows + r] - shift - mean;
            ss += d * d;
        }
        const double var = ss / double(paths - 1);
        out[r] = {shift + mean, std::sqrt(var / double(paths))};
    }
    return out;
}

std::pair<std::vector<std::pair<std::size_t, std::size_t>>, std::pair<std::size_t, std::size_t>>
coupled_grids(const ExperimentConfig& c) {
    std::vector<std::pair<std::size_t, std::size_t>> grids;
    std::pair<std::size_t, std::size_t> reference;
    if (c.ladder == LadderKind::time) {
        const std::size_t n_elem = c.finest_elements();
        for (auto N : c.steps) grids.emplace_back(n_elem, N);
        reference = {n_elem, c.finest_steps() * c.reference_factor};
    } else {
        const std::size_t N = c.finest_steps();
        for (auto e : c.elements) grids.emplace_back(e, N);
        reference = {c.finest_elements() * c.reference_factor, N};
    }
    return {grids, reference};
}

void add_reference_metadata(ConvergenceReport& r, const ExperimentConfig& c,
                            const std::pair<std::size_t, std::size_t>& reference, std::size_t n_modes) {
    r.metadata.emplace_back("reference", "coupled fine solution, factor " + std::to_string(c.reference_factor) +
                                             " (elements " + std::to_string(reference.first) + ", steps " +
                                             std::to_string(reference.second) + ")");
    r.metadata.emplace_back("noise_modes", std::to_string(n_modes));
    r.metadata.emplace_back("paths", std::to_string(c.paths));
}

} // namespace

SlopeFit fit_slope(std::span<const ConvergenceRow> rows, bool log_correct, SlopeVariable variable) {
    if (rows.size() < 2) throw std::invalid_argument("fit_slope: need at least two rows");
    if (variable == SlopeVariable::automatic) {
        bool distinct = true;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!(rows[i].dt > 0.0)) distinct = false;
            for (std::size_t k = 0; k < i; ++k) {
                if (rows[k].dt == rows[i].dt) distinct = false;
            }
        }
        variable = distinct ? SlopeVariable::dt : SlopeVariable::h;
    }
    std::vector<double> x(rows.size()), y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const double step = variable == SlopeVariable::dt ? row.dt : row.h;
        if (!(row.error > 0.0) || !std::isfinite(row.error)) {
            throw NumericalError("fit_slope: row " + std::to_string(i) + " has a non-positive error");
        }
        if (!(step > 0.0)) throw std::invalid_argument("fit_slope: non-positive step in row " + std::to_string(i));
        if (log_correct && !(row.log_factor > 0.0)) {
            throw std::invalid_argument("fit_slope: non-positive log factor in row " + std::to_string(i));
        }
        x[i] = std::log(step);
        y[i] = std::log(log_correct ? row.error / row.log_factor : row.error);
    }
    const double n = double(rows.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_slope: all rows share the same step");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) fit.residuals.push_back(y[i] - fit.intercept - fit.slope * x[i]);
    return fit;
}

void ConvergenceReport::refit(std::size_t k) {
    if (k + 2 > rows.size()) throw ConfigError("drop_coarse leaves fewer than two rows for the fit");
    drop_coarse = k;
    const std::span<const ConvergenceRow> used(rows.data() + k, rows.size() - k);
    const auto variable = ladder == LadderKind::time ? SlopeVariable::dt : SlopeVariable::h;
    raw = fit_slope(used, false, variable);
    log_corrected = fit_slope(used, true, variable);
}

std::string to_csv(const ConvergenceReport& report) {
    std::string out = "h,dt,N,error,stderr,log_factor\n";
    for (const auto& r : report.rows) {
        out += format17(r.h) + "," + format17(r.dt) + "," + std::to_string(r.N) + "," + format17(r.error) + "," +
               format17(r.std_error) + "," + format17(r.log_factor) + "\n";
    }
    return out;
}

void write_csv(const ConvergenceReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << to_csv(report);
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

std::string to_json(const ConvergenceReport& report) {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : report.metadata) j["metadata"][k] = v;
    j["drop_coarse"] = report.drop_coarse;
    j["slope_raw"] = report.raw.slope;
    j["slope_log_corrected"] = report.log_corrected.slope;
    j["residuals_raw"] = report.raw.residuals;
    j["residuals_log_corrected"] = report.log_corrected.residuals;
    for (const auto& r : report.rows) {
        j["rows"].push_back({{"h", r.h},
                             {"dt", r.dt},
                             {"N", r.N},
                             {"error", r.error},
                             {"stderr", r.std_error},
                             {"log_factor", r.log_factor}});
    }
    return j.dump(2);
}

std::string config_hash(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : to_text(config)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> project_initial(const FemOperators& ops, std::span<const double> c) {
    std::vector<double> load(ops.mesh.n_dof(), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k] == 0.0) continue;
        const auto b = load_vector_sine(ops.mesh, k + 1);
        for (std::size_t i = 0; i < load.size(); ++i) load[i] += c[k] * b[i];
    }
    return l2_project(ops, load);
}

ConvergenceReport deterministic_convergence(const ExperimentConfig& c) {
    c.validate();
    const KernelSpec kernel = require_riesz(c, "det-conv");
    if (c.noise != NoiseModel::none) throw ConfigError("det-conv requires noise.model = none");
    if (c.initial.empty()) throw ConfigError("det-conv requires nonzero initial data");

    ConvergenceReport r;
    r.experiment = "deterministic_convergence";
    add_common_metadata(r, c);
    if (c.ladder == LadderKind::time) {
        const auto ops = assemble(Mesh1D(c.length, c.finest_elements()));
        const auto x0 = project_initial(ops, c.initial);
        const auto exact = exact_interpolant(c, ops.mesh);
        r.rows.resize(c.steps.size());
        parallel_chunks(c.steps.size(), c.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const std::size_t N = c.steps[i];
                const auto traj = run_homogeneous(ops, make_weights(kernel, c.horizon, N), x0, N);
                r.rows[i] = make_row(c, ops.mesh.n_elem(), N, m_distance(ops, traj.back(), exact), 0.0);
            }
        });
        r.metadata.emplace_back("reference", "exact resolvent, nodal interpolant");
    } else {
        r.rows.resize(c.elements.size());
        parallel_chunks(c.elements.size(), c.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto ops = assemble(Mesh1D(c.length, c.elements[i]));
                const GeneralizedEigenbasis basis(ops);
                const auto x0 = project_initial(ops, c.initial);
                const auto xt = semidiscrete_solution(ops, basis, c.rho, x0, c.horizon);
                r.rows[i] = make_row(c, c.elements[i], 0, m_distance(ops, xt, exact_interpolant(c, ops.mesh)), 0.0);
            }
        });
        r.metadata.emplace_back("reference", "exact resolvent, nodal interpolant");
        r.metadata.emplace_back("space_rows", "time-continuous semidiscrete solution");
    }
    finish(r, c);
    return r;
}

ConvergenceReport weak_convergence_exact(const ExperimentConfig& c) {
    c.validate();
    require_riesz(c, "weak-conv");
    if (c.functional != Functional::norm_sq) {
        throw ConfigError("the exact-covariance estimator supports functional = norm_sq only");
    }
    ConvergenceReport r;
    r.experiment = "weak_convergence_exact";
    add_common_metadata(r, c);
    check_admissible(c, r);

    std::string description;
    const auto reference = continuous_reference(c, description);
    r.metadata.emplace_back("reference", description);
    r.metadata.emplace_back("reference_value", format17(reference.value));
    r.metadata.emplace_back("reference_tail", format17(reference.tail));
    r.metadata.emplace_back("reference_tail_uncertainty", format17(reference.tail_uncertainty));
    const KernelSpec kernel = c.kernel();

    if (c.ladder == LadderKind::time) {
        const auto ops = assemble(Mesh1D(c.length, c.finest_elements()));
        const auto x0 = project_initial(ops, c.initial);
        const std::size_t J = c.noise_modes(ops.mesh.n_dof());
        const auto cov = c.covariance(J);
        r.metadata.emplace_back("noise_modes", std::to_string(J));
        DiscreteMomentOptions options{MomentRoute::modal, c.threads};
        for (auto N : c.steps) {
            const double value =
                exact_discrete_second_moment(ops, make_weights(kernel, c.horizon, N), x0, cov, N, options);
            r.rows.push_back(make_row(c, ops.mesh.n_elem(), N, std::abs(value - reference.value), 0.0));
        }
    } else {
        r.rows.resize(c.elements.size());
        parallel_chunks(c.elements.size(), c.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto ops = assemble(Mesh1D(c.length, c.elements[i]));
                const GeneralizedEigenbasis basis(ops);
                const auto x0 = project_initial(ops, c.initial);
                const auto cov = c.covariance(c.noise_modes(ops.mesh.n_dof()));
                const double value = semidiscrete_second_moment(ops, basis, c.rho, x0, cov, c.horizon, c.tolerance);
                r.rows[i] = make_row(c, c.elements[i], 0, std::abs(value - reference.value), 0.0);
            }
        });
        r.metadata.emplace_back("noise_modes", c.truncation == 0 ? "n_dof per row" : std::to_string(c.truncation));
        r.metadata.emplace_back("space_rows", "time-continuous semidiscrete solution");
    }
    finish(r, c);
    return r;
}

const std::vector<FunctionalInfo>& functional_registry() {
    static const std::vector<FunctionalInfo> registry = {
        {Functional::norm_sq, "norm_sq", "bounded_d2",
         "phi(x) = |x|^2; D phi unbounded, D^2 phi = 2 I bounded"},
        {Functional::exp_neg_norm_sq, "exp_neg_norm_sq", "bounded_d2, bounded_d1",
         "phi(x) = exp(-|x|^2); phi, D phi and D^2 phi bounded"},
        {Functional::linear_sq, "linear_sq", "bounded_d2, bounded_d1 on bounded sets",
         "phi(x) = (x, g)^2 with g = e_mode; D^2 phi = 2 g (x) g bounded"},
    };
    return registry;
}

double evaluate_functional(Functional functional, const FemOperators& ops, std::span<const double> x,
                           std::size_t mode) {
    switch (functional) {
    case Functional::norm_sq:
        return m_inner(ops, x, x);
    case Functional::exp_neg_norm_sq:
        return std::exp(-m_inner(ops, x, x));
    case Functional::linear_sq: {
        const auto g = load_vector_sine(ops.mesh, mode);
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) v += x[i] * g[i];
        return v * v;
    }
    }
    return 0.0;
}

MonteCarloEstimate mc_functional(const FemOperators& ops, CqWeightsPtr weights, std::span<const double> x0,
                                 const CovarianceSpec& cov, std::size_t N, Functional functional,
                                 std::size_t functional_mode, std::size_t paths, std::uint64_t seed,
                                 std::size_t threads) {
    if (paths < 2) throw std::invalid_argument("mc_functional: need at least two paths");
    const IncrementSampler sampler(ops.mesh, cov, weights->dt());
    const SeedPolicy policy(seed);
    std::vector<double> values(paths);
    parallel_chunks(paths, threads, [&](std::size_t b, std::size_t e) {
        std::vector<double> load(ops.mesh.n_dof());
        for (std::size_t p = b; p < e; ++p) {
            SchemeState state(ops, weights, x0);
            for (std::size_t n = 0; n < N; ++n) {
                sampler.sample_into(policy, p, std::uint32_t(n + 1), load);
                state.step(load);
            }
            values[p] = evaluate_functional(functional, ops, state.current(), functional_mode);
        }
    });
    const auto m = reduce_paths(values, paths, 1);
    return {m[0].mean, m[0].std_error, paths};
}

ConvergenceReport weak_convergence_mc(const ExperimentConfig& c) {
    c.validate();
    ConvergenceReport r;
    r.experiment = "weak_convergence_mc";
    add_common_metadata(r, c);
    check_admissible(c, r);
    const auto [grids, reference] = coupled_grids(c);
    const CoupledEnsemble ensemble(c, grids, reference);
    const std::size_t rows = ensemble.rows();
    add_reference_metadata(r, c, reference, ensemble.n_modes());
    for (const auto& info : functional_registry()) {
        if (info.id == c.functional) {
            r.metadata.emplace_back("functional", info.name);
            r.metadata.emplace_back("functional_conditions", info.conditions);
        }
    }

    std::vector<double> values(c.paths * rows);
    parallel_chunks(c.paths, c.threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const auto states = ensemble.run_path(p);
            const double ref = evaluate_functional(c.functional, ensemble.reference().ops, states.back(),
                                                   c.functional_mode);
            for (std::size_t i = 0; i < rows; ++i) {
                values[p * rows + i] =
                    evaluate_functional(c.functional, ensemble.level(i).ops, states[i], c.functional_mode) - ref;
            }
        }
    });
    const auto moments = reduce_paths(values, c.paths, rows);
    for (std::size_t i = 0; i < rows; ++i) {
        r.rows.push_back(make_row(c, grids[i].first, grids[i].second, std::abs(moments[i].mean),
                                  moments[i].std_error));
    }
    finish(r, c);
    return r;
}

ConvergenceReport weak_convergence(const ExperimentConfig& c) {
    return c.estimator == EstimatorKind::exact_cov ? weak_convergence_exact(c) : weak_convergence_mc(c);
}

ConvergenceReport strong_convergence_mc(const ExperimentConfig& c) {
    c.validate();
    ConvergenceReport r;
    r.experiment = "strong_convergence_mc";
    add_common_metadata(r, c);
    check_admissible(c, r);
    const auto [grids, reference] = coupled_grids(c);
    const CoupledEnsemble ensemble(c, grids, reference);
    const std::size_t rows = ensemble.rows();
    add_reference_metadata(r, c, reference, ensemble.n_modes());
    const Mesh1D& ref_mesh = ensemble.reference().ops.mesh;

    std::vector<double> values(c.paths * rows);
    parallel_chunks(c.paths, c.threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const auto states = ensemble.run_path(p);
            for (std::size_t i = 0; i < rows; ++i) {
                const auto& level = ensemble.level(i);
                const auto fine = level.ops.mesh.n_elem() == ref_mesh.n_elem()
                                      ? states[i]
                                      : prolongate(level.ops.mesh, states[i], ref_mesh);
                const double d = m_distance(ensemble.reference().ops, fine, states.back());
                values[p * rows + i] = d * d;
            }
        }
    });
    const auto moments = reduce_paths(values, c.paths, rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const double err = std::sqrt(moments[i].mean);
        // Delta method: sd(sqrt(m)) ~ sd(m) / (2 sqrt(m)).
        const double se = err > 0.0 ? moments[i].std_error / (2.0 * err) : 0.0;
        r.rows.push_back(make_row(c, grids[i].first, grids[i].second, err, se));
    }
    finish(r, c);
    return r;
}

namespace {

std::vector<std::size_t> dyadic(std::size_t from, std::size_t to) {
    std::vector<std::size_t> out;
    for (std::size_t v = from; v <= to; v *= 2) out.push_back(v);
    return out;
}

ExperimentConfig weak_base(double rho, NoiseModel model, double alpha, LadderKind ladder) {
    ExperimentConfig c;
    c.rho = rho;
    c.noise = model;
    c.alpha = alpha;
    c.ladder = ladder;
    c.estimator = EstimatorKind::exact_cov;
    c.functional = Functional::norm_sq;
    if (ladder == LadderKind::time) {
        c.steps = dyadic(128, 2048);
        c.elements = {256};
    } else {
        c.steps = {2048};
        c.elements = dyadic(8, 256);
    }
    return c;
}

} // namespace

std::vector<std::pair<std::string, ExperimentConfig>> presets() {
    std::vector<std::pair<std::string, ExperimentConfig>> out;
    out.emplace_back("white_noise_time", weak_base(1.2, NoiseModel::identity, 0.0, LadderKind::time));
    out.emplace_back("white_noise_space", weak_base(1.2, NoiseModel::identity, 0.0, LadderKind::space));
    out.emplace_back("trace_class_time", weak_base(1.5, NoiseModel::inverse_power, 1.0, LadderKind::time));
    out.emplace_back("trace_class_space", weak_base(1.5, NoiseModel::inverse_power, 1.0, LadderKind::space));
    out.emplace_back("intermediate_time", weak_base(1.5, NoiseModel::inverse_power, 0.25, LadderKind::time));
    out.emplace_back("intermediate_space", weak_base(1.5, NoiseModel::inverse_power, 0.25, LadderKind::space));

    ExperimentConfig det;
    det.rho = 1.5;
    det.initial = {1.0};
    det.noise = NoiseModel::none;
    det.ladder = LadderKind::time;
    det.steps = dyadic(32, 1024);
    det.elements = {512};
    out.emplace_back("deterministic_time", det);
    det.ladder = LadderKind::space;
    det.steps = {256};
    det.elements = dyadic(8, 256);
    out.emplace_back("deterministic_space", det);

    ExperimentConfig strong;
    strong.rho = 1.5;
    strong.noise = NoiseModel::inverse_power;
    strong.alpha = 1.0;
    strong.ladder = LadderKind::time;
    strong.estimator = EstimatorKind::monte_carlo;
    strong.paths = 10000;
    strong.steps = dyadic(8, 128);
    strong.elements = {32};
    strong.reference_factor = 4;
    out.emplace_back("strong_trace_class_time", strong);

    ExperimentConfig weak_mc = strong;
    weak_mc.functional = Functional::norm_sq;
    out.emplace_back("weak_mc_trace_class_time", weak_mc);
    return out;
}

ExperimentConfig preset(const std::string& name) {
    for (auto& [n, c] : presets()) {
        if (n == name) return c;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

} // namespace volterra
