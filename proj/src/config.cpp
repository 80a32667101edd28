#include "volterra/config.hpp"

#include "volterra/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace volterra {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& text, std::size_t line) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) fail(line, "not a finite number: '" + text + "'");
    return v;
}

std::uint64_t parse_unsigned(const std::string& text, std::size_t line) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) fail(line, "not a non-negative integer: '" + text + "'");
    return v;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text, std::size_t line) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(parse_double(item, line));
    return out;
}

std::vector<std::size_t> parse_counts(const std::string& text, std::size_t line) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(text)) out.push_back(std::size_t(parse_unsigned(item, line)));
    return out;
}

template <class E>
E parse_enum(const std::string& text, std::size_t line, std::initializer_list<std::pair<const char*, E>> table) {
    for (const auto& [name, value] : table) {
        if (text == name) return value;
    }
    std::string options;
    for (const auto& [name, value] : table) options += std::string(options.empty() ? "" : "|") + name;
    fail(line, "expected one of " + options + ", got '" + text + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, std::size_t)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"kernel.variant",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) {
             c.variant = parse_enum<KernelVariant>(
                 v, l, {{"riesz", KernelVariant::riesz}, {"tempered_riesz", KernelVariant::tempered_riesz}});
         }},
        {"kernel.rho", [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.rho = parse_double(v, l); }},
        {"kernel.eta", [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.eta = parse_double(v, l); }},
        {"domain.length",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.length = parse_double(v, l); }},
        {"domain.horizon",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.horizon = parse_double(v, l); }},
        {"domain.initial",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) {
             if (v == "zero") c.initial.clear();
             else if (v == "e1") c.initial = {1.0};
             else c.initial = parse_doubles(v, l);
         }},
        {"noise.model",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) {
             c.noise = parse_enum<NoiseModel>(v, l,
                                              {{"none", NoiseModel::none},
                                               {"identity", NoiseModel::identity},
                                               {"inverse_power", NoiseModel::inverse_power},
                                               {"custom", NoiseModel::custom}});
         }},
        {"noise.alpha", [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.alpha = parse_double(v, l); }},
        {"noise.truncation",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.truncation = parse_unsigned(v, l); }},
        {"noise.coefficients",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.custom_q = parse_doubles(v, l); }},
        {"ladder.kind",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) {
             c.ladder = parse_enum<LadderKind>(v, l, {{"time", LadderKind::time}, {"space", LadderKind::space}});
         }},
        {"ladder.steps",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.steps = parse_counts(v, l); }},
        {"ladder.elements",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.elements = parse_counts(v, l); }},
        {"estimator.kind",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) {
             c.estimator = parse_enum<EstimatorKind>(
                 v, l, {{"exact_cov", EstimatorKind::exact_cov}, {"monte_carlo", EstimatorKind::monte_carlo}});
         }},
        {"estimator.paths",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.paths = parse_unsigned(v, l); }},
        {"estimator.functional",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) {
             c.functional = parse_enum<Functional>(v, l,
                                                   {{"norm_sq", Functional::norm_sq},
                                                    {"exp_neg_norm_sq", Functional::exp_neg_norm_sq},
                                                    {"linear_sq", Functional::linear_sq}});
         }},
        {"estimator.functional_mode",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.functional_mode = parse_unsigned(v, l); }},
        {"estimator.seed",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.seed = parse_unsigned(v, l); }},
        {"estimator.reference_factor",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.reference_factor = parse_unsigned(v, l); }},
        {"estimator.tolerance",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.tolerance = parse_double(v, l); }},
        {"estimator.reference_modes",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.reference_modes = parse_unsigned(v, l); }},
        {"estimator.threads",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.threads = parse_unsigned(v, l); }},
        {"output.path", [](ExperimentConfig& c, const std::string& v, std::size_t) { c.output = v; }},
        {"output.drop_coarse",
         [](ExperimentConfig& c, const std::string& v, std::size_t l) { c.drop_coarse = parse_unsigned(v, l); }},
    };
    return table;
}

const std::set<std::string> kSections = {"kernel", "domain", "noise", "ladder", "estimator", "output"};

template <class T>
std::string join(const std::vector<T>& values) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ", " : "") << values[i];
    return os.str();
}

} // namespace

KernelSpec ExperimentConfig::kernel() const {
    try {
        return variant == KernelVariant::riesz ? KernelSpec::riesz(rho) : KernelSpec::tempered_riesz(rho, eta);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::size_t ExperimentConfig::noise_modes(std::size_t n_dof) const {
    if (noise == NoiseModel::none) return 0;
    if (noise == NoiseModel::custom) return custom_q.size();
    return truncation == 0 ? n_dof : truncation;
}

CovarianceSpec ExperimentConfig::covariance(std::size_t modes) const {
    switch (noise) {
    case NoiseModel::none:
        return CovarianceSpec::zero(length);
    case NoiseModel::identity:
        return CovarianceSpec::identity(length, modes);
    case NoiseModel::inverse_power:
        return CovarianceSpec::inverse_power(alpha, length, modes);
    case NoiseModel::custom:
        return CovarianceSpec::custom(custom_q, length).with_truncation(modes);
    }
    return CovarianceSpec::zero(length);
}

std::size_t ExperimentConfig::finest_elements() const {
    if (elements.empty()) throw ConfigError("ladder.elements is empty");
    return *std::max_element(elements.begin(), elements.end());
}

std::size_t ExperimentConfig::finest_steps() const {
    if (steps.empty()) throw ConfigError("ladder.steps is empty");
    return *std::max_element(steps.begin(), steps.end());
}

void ExperimentConfig::validate() const {
    kernel();
    if (!(length > 0.0)) throw ConfigError("domain.length must be positive");
    if (!(horizon > 0.0)) throw ConfigError("domain.horizon must be positive");
    if (steps.empty()) throw ConfigError("ladder.steps is empty");
    if (elements.empty()) throw ConfigError("ladder.elements is empty");
    for (auto n : steps) {
        if (n == 0) throw ConfigError("ladder.steps entries must be positive");
    }
    for (auto n : elements) {
        if (n < 2) throw ConfigError("ladder.elements entries must be at least 2");
    }
    const auto& ladder_values = ladder == LadderKind::time ? steps : elements;
    if (ladder_values.size() < 2) throw ConfigError("a ladder needs at least two rows");
    for (std::size_t i = 1; i < ladder_values.size(); ++i) {
        if (ladder_values[i] <= ladder_values[i - 1]) {
            throw ConfigError("ladder values must be strictly increasing");
        }
    }
    if (drop_coarse + 2 > ladder_values.size()) {
        throw ConfigError("output.drop_coarse leaves fewer than two rows for the fit");
    }
    if (noise == NoiseModel::inverse_power && !(alpha >= 0.0)) throw ConfigError("noise.alpha must be >= 0");
    if (noise == NoiseModel::custom) {
        if (custom_q.empty()) throw ConfigError("noise.coefficients is empty for the custom model");
        for (double q : custom_q) {
            if (!(q >= 0.0)) throw ConfigError("noise.coefficients must be >= 0");
        }
    }
    if (estimator == EstimatorKind::monte_carlo && paths < 2) throw ConfigError("estimator.paths must be >= 2");
    if (functional == Functional::linear_sq && functional_mode == 0) {
        throw ConfigError("estimator.functional_mode starts at 1");
    }
    if (reference_factor < 2 || (reference_factor & (reference_factor - 1)) != 0) {
        throw ConfigError("estimator.reference_factor must be a power of two >= 2");
    }
    if (!(tolerance > 0.0)) throw ConfigError("estimator.tolerance must be positive");
    if (threads == 0) throw ConfigError("estimator.threads must be positive");
    const double finest_h = length / double(finest_elements());
    for (auto n : steps) {
        const double dt = horizon / double(n);
        if (!(std::pow(finest_h, 2.0 / rho) + dt < horizon)) {
            throw ConfigError("ladder point violates h^{2/rho} + dt < T");
        }
    }
    for (auto e : elements) {
        const double dt = horizon / double(finest_steps());
        if (!(std::pow(length / double(e), 2.0 / rho) + dt < horizon)) {
            throw ConfigError("ladder point violates h^{2/rho} + dt < T");
        }
    }
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig config;
    std::string section;
    std::set<std::string> seen;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!kSections.count(section)) fail(line_no, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        if (section.empty()) fail(line_no, "key outside of a section");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) fail(line_no, "unknown key '" + key + "'");
        if (!seen.insert(key).second) fail(line_no, "duplicate key '" + key + "'");
        it->second(config, value, line_no);
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string to_string(NoiseModel v) {
    switch (v) {
    case NoiseModel::none: return "none";
    case NoiseModel::identity: return "identity";
    case NoiseModel::inverse_power: return "inverse_power";
    case NoiseModel::custom: return "custom";
    }
    return "?";
}

std::string to_string(LadderKind v) { return v == LadderKind::time ? "time" : "space"; }

std::string to_string(EstimatorKind v) { return v == EstimatorKind::exact_cov ? "exact_cov" : "monte_carlo"; }

std::string to_string(Functional v) {
    switch (v) {
    case Functional::norm_sq: return "norm_sq";
    case Functional::exp_neg_norm_sq: return "exp_neg_norm_sq";
    case Functional::linear_sq: return "linear_sq";
    }
    return "?";
}

std::string to_string(KernelVariant v) { return v == KernelVariant::riesz ? "riesz" : "tempered_riesz"; }

std::string to_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "[kernel]\n"
       << "variant = " << to_string(c.variant) << "\n"
       << "rho = " << c.rho << "\n"
       << "eta = " << c.eta << "\n\n"
       << "[domain]\n"
       << "length = " << c.length << "\n"
       << "horizon = " << c.horizon << "\n"
       << "initial = " << (c.initial.empty() ? std::string("zero") : join(c.initial)) << "\n\n"
       << "[noise]\n"
       << "model = " << to_string(c.noise) << "\n"
       << "alpha = " << c.alpha << "\n"
       << "truncation = " << c.truncation << "\n";
    if (!c.custom_q.empty()) os << "coefficients = " << join(c.custom_q) << "\n";
    os << "\n[ladder]\n"
       << "kind = " << to_string(c.ladder) << "\n"
       << "steps = " << join(c.steps) << "\n"
       << "elements = " << join(c.elements) << "\n\n"
       << "[estimator]\n"
       << "kind = " << to_string(c.estimator) << "\n"
       << "paths = " << c.paths << "\n"
       << "functional = " << to_string(c.functional) << "\n"
       << "functional_mode = " << c.functional_mode << "\n"
       << "seed = " << c.seed << "\n"
       << "reference_factor = " << c.reference_factor << "\n"
       << "tolerance = " << c.tolerance << "\n"
       << "reference_modes = " << c.reference_modes << "\n"
       << "threads = " << c.threads << "\n\n"
       << "[output]\n";
    if (!c.output.empty()) os << "path = " << c.output << "\n";
    os << "drop_coarse = " << c.drop_coarse << "\n";
    return os.str();
}

} // namespace volterra
