#include "unistab/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "unistab/controller.hpp"
#include "unistab/expectation.hpp"
#include "unistab/sphere.hpp"
#include "unistab/stability.hpp"
#include "unistab/weights.hpp"

namespace unistab::cli {

namespace {

std::string trim(const std::string& s) {
    size_t first = 0, last = s.size();
    while (first < last && std::isspace(static_cast<unsigned char>(s[first]))) ++first;
    while (last > first && std::isspace(static_cast<unsigned char>(s[last - 1]))) --last;
    return s.substr(first, last - first);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> tokens;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

bool parse_real(const std::string& token, double& out) {
    if (token.empty()) return false;
    char* end = nullptr;
    out = std::strtod(token.c_str(), &end);
    return end == token.c_str() + token.size() && std::isfinite(out);
}

bool parse_int(const std::string& token, long long& out) {
    if (token.empty()) return false;
    char* end = nullptr;
    out = std::strtoll(token.c_str(), &end, 10);
    return end == token.c_str() + token.size();
}

bool parse_u64(const std::string& token, std::uint64_t& out) {
    if (token.empty() || token[0] == '-') return false;
    char* end = nullptr;
    out = std::strtoull(token.c_str(), &end, 10);
    return end == token.c_str() + token.size();
}

// The index permutation GainSpectrum applies (stable sort by descending
// magnitude), used to carry user-ordered companion vectors (x0, weights) into
// spectrum order.
std::vector<int> sort_permutation(const std::vector<double>& lambdas) {
    std::vector<int> order(lambdas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(lambdas[static_cast<size_t>(a)]) > std::abs(lambdas[static_cast<size_t>(b)]);
    });
    return order;
}

std::string join_g17(const Vec& v, const char* sep = " ") {
    std::string s;
    for (int i = 0; i < v.size(); ++i) {
        if (i > 0) s += sep;
        s += fmt_g17(v(i));
    }
    return s;
}

struct RawEntry {
    int line = 0;
    std::string value;
    bool used = false;
};

using RawSections = std::map<std::string, std::map<std::string, RawEntry>>;

RawSections read_raw_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path, 0, "file");
    RawSections sections;
    std::string line;
    int line_no = 0;
    std::string section;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("unterminated section header", line_no, "section");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "spectrum" && section != "simulation" && section != "policy") {
                throw ConfigError("unknown section [" + section + "]", line_no, section);
            }
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected key = value", line_no, line);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError("key before any section", line_no, key);
        if (key.empty()) throw ConfigError("empty key", line_no, "key");
        if (!sections[section].emplace(key, RawEntry{line_no, value, false}).second) {
            throw ConfigError("duplicate key '" + key + "'", line_no, section + "." + key);
        }
    }
    return sections;
}

class ConfigReader {
public:
    explicit ConfigReader(RawSections sections) : sections_(std::move(sections)) {}

    RawEntry* take(const std::string& section, const std::string& key) {
        auto s = sections_.find(section);
        if (s == sections_.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        k->second.used = true;
        return &k->second;
    }

    void ensure_all_used() const {
        for (const auto& [section, keys] : sections_) {
            for (const auto& [key, entry] : keys) {
                if (!entry.used) {
                    throw ConfigError("unexpected key '" + key + "' in [" + section + "]",
                                      entry.line, section + "." + key);
                }
            }
        }
    }

private:
    RawSections sections_;
};

double require_real(const RawEntry& entry, const std::string& field) {
    double v = 0.0;
    if (!parse_real(entry.value, v)) {
        throw ConfigError("expected a finite real, got '" + entry.value + "'", entry.line, field);
    }
    return v;
}

long long require_int(const RawEntry& entry, const std::string& field, long long min_value) {
    long long v = 0;
    if (!parse_int(entry.value, v) || v < min_value) {
        throw ConfigError("expected an integer >= " + std::to_string(min_value) + ", got '" +
                              entry.value + "'",
                          entry.line, field);
    }
    return v;
}

std::vector<double> require_reals(const RawEntry& entry, const std::string& field) {
    std::vector<double> values;
    for (const std::string& tok : split_ws(entry.value)) {
        double v = 0.0;
        if (!parse_real(tok, v)) {
            throw ConfigError("expected finite reals, got '" + tok + "'", entry.line, field);
        }
        values.push_back(v);
    }
    if (values.empty()) throw ConfigError("expected at least one real", entry.line, field);
    return values;
}

Vec permuted(const std::vector<double>& user_order, const std::vector<int>& perm) {
    Vec v(static_cast<long>(user_order.size()));
    for (size_t i = 0; i < user_order.size(); ++i) {
        v(static_cast<long>(i)) = user_order[static_cast<size_t>(perm[i])];
    }
    return v;
}

int decision_exit_code(Decision d) {
    switch (d) {
        case Decision::stabilizable: return 0;
        case Decision::unstabilizable: return 1;
        case Decision::inconclusive_at_threshold: return 2;
    }
    return 2;
}

// Horizon at which |lambda_max|^(2N) stays clear of the divergence cap.
int safe_horizon(int requested, double lambda_max_abs) {
    if (lambda_max_abs <= 1.0) return requested;
    const double cap = 600.0 / (2.0 * std::log(lambda_max_abs));
    if (cap >= static_cast<double>(requested)) return requested;
    return std::max(16, static_cast<int>(cap));
}

}  // namespace

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

SimulationConfig parse_config_file(const std::string& path) {
    ConfigReader reader(read_raw_config(path));
    SimulationConfig config;

    RawEntry* lambdas_entry = reader.take("spectrum", "lambdas");
    if (!lambdas_entry) throw ConfigError("missing required key", 0, "spectrum.lambdas");
    const std::vector<double> lambdas = require_reals(*lambdas_entry, "spectrum.lambdas");
    try {
        config.spec = GainSpectrum(
            Eigen::Map<const Vec>(lambdas.data(), static_cast<long>(lambdas.size())));
    } catch (const Error& e) {
        throw ConfigError(e.what(), lambdas_entry->line, "spectrum.lambdas");
    }
    const std::vector<int> perm = sort_permutation(lambdas);
    const int d = config.spec.dim();

    if (RawEntry* e = reader.take("simulation", "horizon")) {
        config.horizon = static_cast<int>(require_int(*e, "simulation.horizon", 1));
    } else {
        config.horizon = 1000;
    }
    if (RawEntry* e = reader.take("simulation", "trials")) {
        config.trials = require_int(*e, "simulation.trials", 1);
    } else {
        config.trials = 1;
    }
    if (RawEntry* e = reader.take("simulation", "seed")) {
        if (!parse_u64(e->value, config.seed)) {
            throw ConfigError("expected an unsigned 64-bit integer, got '" + e->value + "'",
                              e->line, "simulation.seed");
        }
    }
    if (RawEntry* e = reader.take("simulation", "x0")) {
        const std::vector<double> x0 = require_reals(*e, "simulation.x0");
        if (static_cast<int>(x0.size()) != d) {
            throw ConfigError("x0 needs exactly " + std::to_string(d) + " entries", e->line,
                              "simulation.x0");
        }
        config.x0 = permuted(x0, perm);
    } else {
        config.x0 = Vec::Ones(d);
    }
    if (RawEntry* e = reader.take("simulation", "record_weighted")) {
        if (e->value == "none") {
            config.record_weighted.reset();
        } else if (e->value == "stationary") {
            try {
                config.record_weighted = stationary_controller(config.spec);
            } catch (const Error& err) {
                throw ConfigError(err.what(), e->line, "simulation.record_weighted");
            }
        } else {
            const std::vector<double> w = require_reals(*e, "simulation.record_weighted");
            if (static_cast<int>(w.size()) != d) {
                throw ConfigError("weights need exactly " + std::to_string(d) + " entries",
                                  e->line, "simulation.record_weighted");
            }
            try {
                config.record_weighted = WeightMatrix(permuted(w, perm));
            } catch (const Error& err) {
                throw ConfigError(err.what(), e->line, "simulation.record_weighted");
            }
        }
    }

    RawEntry* kind_entry = reader.take("policy", "kind");
    if (!kind_entry) throw ConfigError("missing required key", 0, "policy.kind");
    const std::string& kind = kind_entry->value;
    if (kind == "zero") {
        config.policy = ZeroPolicy{};
    } else if (kind == "greedy") {
        RawEntry* weights_entry = reader.take("policy", "weights");
        WeightMatrix w;
        if (!weights_entry || weights_entry->value == "stationary") {
            const int line = weights_entry ? weights_entry->line : kind_entry->line;
            try {
                w = stationary_controller(config.spec);
            } catch (const Error& err) {
                throw ConfigError(err.what(), line, "policy.weights");
            }
        } else {
            const std::vector<double> wv = require_reals(*weights_entry, "policy.weights");
            if (static_cast<int>(wv.size()) != d) {
                throw ConfigError("weights need exactly " + std::to_string(d) + " entries",
                                  weights_entry->line, "policy.weights");
            }
            try {
                w = WeightMatrix(permuted(wv, perm));
            } catch (const Error& err) {
                throw ConfigError(err.what(), weights_entry->line, "policy.weights");
            }
        }
        config.policy = GreedyPolicy{std::move(w)};
    } else if (kind == "mixed") {
        RawEntry* q_entry = reader.take("policy", "q");
        try {
            if (!q_entry || q_entry->value == "auto") {
                config.policy = to_policy(build_mixed_strategy(config.spec));
            } else {
                const double q = require_real(*q_entry, "policy.q");
                config.policy = to_policy(build_mixed_strategy_with_q(config.spec, q));
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& err) {
            throw ConfigError(err.what(), q_entry ? q_entry->line : kind_entry->line, "policy.q");
        }
    } else {
        throw ConfigError("unknown policy kind '" + kind + "'", kind_entry->line, "policy.kind");
    }

    reader.ensure_all_used();
    return config;
}

std::string effective_config_block(const SimulationConfig& config) {
    std::ostringstream os;
    os << "# [spectrum]\n";
    os << "# lambdas = " << join_g17(config.spec.lambdas()) << "\n";
    os << "# [simulation]\n";
    os << "# horizon = " << config.horizon << "\n";
    os << "# trials = " << config.trials << "\n";
    os << "# seed = " << config.seed << "\n";
    os << "# x0 = " << join_g17(config.x0) << "\n";
    os << "# record_weighted = "
       << (config.record_weighted ? join_g17(config.record_weighted->w) : std::string("none"))
       << "\n";
    os << "# [policy]\n";
    if (std::holds_alternative<ZeroPolicy>(config.policy)) {
        os << "# kind = zero\n";
    } else if (const auto* greedy = std::get_if<GreedyPolicy>(&config.policy)) {
        os << "# kind = greedy\n";
        os << "# weights = " << join_g17(greedy->w.w) << "\n";
    } else if (const auto* mixed = std::get_if<MixedPolicy>(&config.policy)) {
        os << "# kind = mixed\n";
        os << "# q = " << fmt_g17(mixed->q) << "\n";
    }
    return os.str();
}

int cmd_threshold(const std::vector<double>& lambdas, std::ostream& out, std::ostream& err) {
    if (lambdas.empty()) {
        err << "threshold: at least one eigenvalue is required\n";
        return 64;
    }
    GainSpectrum spec;
    try {
        spec = GainSpectrum(
            Eigen::Map<const Vec>(lambdas.data(), static_cast<long>(lambdas.size())));
    } catch (const Error& e) {
        err << "threshold: " << e.what() << "\n";
        return 64;
    }
    const StabilityVerdict v = classify(spec);
    out << "r=" << fmt_g17(v.r) << " m=" << v.m << " case=" << to_string(v.case_label)
        << " decision=" << to_string(v.decision)
        << " subsystem=" << join_g17(v.subsystem.lambdas(), ",")
        << " boundary_sensitive=" << (v.boundary_sensitive ? 1 : 0) << "\n";
    out << "case " << to_string(v.case_label) << " (" << v.m << " of " << spec.dim()
        << " modes unstable): threshold r = " << fmt_g17(v.r) << " -> " << to_string(v.decision)
        << "\n";
    return decision_exit_code(v.decision);
}

int cmd_simulate(const std::string& config_path, std::ostream& out, std::ostream& err) {
    SimulationConfig config;
    try {
        config = parse_config_file(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << " (line " << e.line << ", field " << e.field
            << ")\n";
        return 65;
    }
    const EnsembleStats stats = run_ensemble(config);
    out << effective_config_block(config);
    out << "step,mean_sq_norm,std_err,mean_weighted,weighted_std_err\n";
    const bool weighted = config.record_weighted.has_value();
    for (int n = 0; n <= config.horizon; ++n) {
        out << n << ',' << fmt_g17(stats.mean_sq_norm(n)) << ',' << fmt_g17(stats.std_errors(n))
            << ',';
        if (weighted) {
            out << fmt_g17(stats.mean_weighted(n)) << ',' << fmt_g17(stats.weighted_std_errors(n));
        } else {
            out << ',';
        }
        out << '\n';
    }
    return 0;
}

int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err) {
    if (!(opts.min1 > 0.0) || !(opts.min2 > 0.0) || opts.max1 < opts.min1 ||
        opts.max2 < opts.min2 || opts.steps1 < 2 || opts.steps2 < 2) {
        err << "sweep: axes need min > 0, max >= min, steps >= 2\n";
        return 64;
    }
    const bool paired = opts.grid_template == "four_d_paired";
    if (!paired && opts.grid_template != "two_d") {
        err << "sweep: unknown template '" << opts.grid_template << "'\n";
        return 64;
    }
    out << "lambda1,lambda2,r,predicted,empirical_rate,empirical_verdict\n";
    for (int i = 0; i < opts.steps1; ++i) {
        const double l1 = opts.min1 + i * (opts.max1 - opts.min1) / (opts.steps1 - 1);
        for (int j = 0; j < opts.steps2; ++j) {
            const double l2 = opts.min2 + j * (opts.max2 - opts.min2) / (opts.steps2 - 1);
            const GainSpectrum spec =
                paired ? GainSpectrum{l1, l1, l2, l2} : GainSpectrum{l1, l2};
            const StabilityVerdict verdict = classify(spec);
            std::string rate_cell, verdict_cell;
            if (opts.empirical) {
                if (std::abs(verdict.r - 1.0) < 0.01) {
                    verdict_cell = "indeterminate";
                } else {
                    SimulationConfig config;
                    config.spec = spec;
                    config.x0 = Vec::Ones(spec.dim());
                    config.seed = opts.seed;
                    config.horizon = safe_horizon(opts.horizon, std::max(std::abs(l1), std::abs(l2)));
                    bool runnable = true;
                    if (verdict.case_label == StabilityCase::all_stable) {
                        config.policy = ZeroPolicy{};
                        config.trials = 1;
                    } else if (verdict.case_label == StabilityCase::case_1a) {
                        try {
                            WeightMatrix w = stationary_controller(spec);
                            config.record_weighted = w;
                            config.policy = GreedyPolicy{std::move(w)};
                            config.trials = opts.trials;
                        } catch (const Error&) {
                            runnable = false;
                        }
                    } else if (verdict.case_label == StabilityCase::case_2 &&
                               verdict.decision == Decision::stabilizable) {
                        try {
                            config.policy = to_policy(build_mixed_strategy(spec));
                            config.trials = opts.trials;
                        } catch (const Error&) {
                            runnable = false;
                        }
                    } else {
                        // No stabilizing construction applies; the uncontrolled
                        // dynamics already decide these cells.
                        config.policy = ZeroPolicy{};
                        config.trials = 1;
                    }
                    if (runnable) {
                        const EnsembleStats stats = run_ensemble(config);
                        rate_cell = fmt_g17(stats.growth_rate);
                        verdict_cell = to_string(stats.verdict);
                    } else {
                        verdict_cell = "indeterminate";
                    }
                }
            }
            out << fmt_g17(l1) << ',' << fmt_g17(l2) << ',' << fmt_g17(verdict.r) << ','
                << to_string(verdict.decision) << ',' << rate_cell << ',' << verdict_cell << '\n';
        }
    }
    return 0;
}

int cmd_solve_weights(const std::vector<double>& lambdas, double q, std::ostream& out,
                      std::ostream& err) {
    if (lambdas.empty()) {
        err << "solve-weights: at least one eigenvalue is required\n";
        return 64;
    }
    if (!(q > 0.0) || q > 1.0) {
        err << "solve-weights: q must lie in (0, 1]\n";
        return 64;
    }
    GainSpectrum spec;
    try {
        spec = GainSpectrum(
            Eigen::Map<const Vec>(lambdas.data(), static_cast<long>(lambdas.size())));
    } catch (const Error& e) {
        err << "solve-weights: " << e.what() << "\n";
        return 64;
    }
    const TargetFractions targets = target_fractions(spec, q);
    if (!targets.all_positive()) {
        err << "solve-weights: not solvable, nonpositive target fraction(s):";
        for (int i : targets.nonpositive_indices()) {
            err << " v[" << i << "]=" << fmt_g17(targets.v(i)) << " (lambda=" << fmt_g17(spec[i])
                << ")";
        }
        err << "\n";
        return 3;
    }
    const WeightMatrix p = solve_weight_fixed_point(targets, 1e-12);
    const Vec expectations = ratio_expectation_all(p).values;
    const double residual = (expectations - targets.v / q).cwiseAbs().maxCoeff();
    const double r = (spec.dim() - q) / spec.inv_sq().sum();

    // Weights are reported in the order the eigenvalues were supplied, scaled
    // so the first printed weight is 1.
    const std::vector<int> perm = sort_permutation(lambdas);
    Vec p_user(spec.dim());
    for (int sorted_pos = 0; sorted_pos < spec.dim(); ++sorted_pos) {
        p_user(perm[static_cast<size_t>(sorted_pos)]) = p.w(sorted_pos);
    }
    p_user /= p_user(0);
    out << "p = " << join_g17(p_user) << "\n";
    out << "residual = " << fmt_g17(residual) << "\n";
    out << "r = " << fmt_g17(r) << "\n";
    return 0;
}

namespace {

using CheckResult = std::optional<std::string>;

CheckResult check_trace_identity(std::uint64_t seed, bool inject_bias) {
    for (int d = 2; d <= 6; ++d) {
        SeededRng rng(seed, 100 + static_cast<std::uint64_t>(d));
        Vec p(d);
        for (int i = 0; i < d; ++i) p(i) = 0.1 + 4.0 * rng.uniform01();
        Vec values = ratio_expectation_all(WeightMatrix(p)).values;
        if (inject_bias) values(0) += 1e-3;
        const double sum = values.sum();
        if (std::abs(sum - 1.0) > 1e-10) {
            return "d=" + std::to_string(d) + " component sum off by " + fmt_g17(sum - 1.0);
        }
    }
    return std::nullopt;
}

CheckResult check_closed_form_2d() {
    for (int k = 0; k < 50; ++k) {
        const double alpha = std::pow(10.0, -4.0 + 8.0 * k / 49.0);
        const double value = ratio_expectation(WeightMatrix{1.0, alpha}, 0);
        const double reference = 1.0 / (std::sqrt(alpha) + 1.0);
        if (std::abs(value - reference) > 1e-8) {
            return "alpha=" + fmt_g17(alpha) + " off by " + fmt_g17(value - reference);
        }
    }
    return std::nullopt;
}

CheckResult check_geometric_weights() {
    const struct {
        GainSpectrum spec;
        double q;
    } cases[] = {{GainSpectrum{1.3, 2.4}, 1.0},
                 {GainSpectrum{1.3, 2.4}, 0.8},
                 {GainSpectrum{1.2, 1.3, 1.4}, 1.0},
                 {GainSpectrum{1.2, 1.3, 1.4}, 0.7}};
    for (const auto& c : cases) {
        const WeightMatrix p = solve_weight_fixed_point(target_fractions(c.spec, c.q), 1e-12);
        const RiccatiTrace trace = riccati_sequence(p, c.spec, 30, c.q);
        const DecayRateEstimate est = measured_decay_rate(trace);
        const double expected = (c.spec.dim() - c.q) / c.spec.inv_sq().sum();
        if (std::abs(est.rate - expected) > 1e-7 * expected ||
            est.max_abs_deviation > 1e-7 * expected) {
            return "d=" + std::to_string(c.spec.dim()) + " q=" + fmt_g17(c.q) + " rate " +
                   fmt_g17(est.rate) + " vs " + fmt_g17(expected);
        }
    }
    return std::nullopt;
}

CheckResult check_sphere_moments(std::uint64_t seed) {
    const long n = 20000;
    for (int d : {2, 3, 5}) {
        SeededRng rng(seed, 200 + static_cast<std::uint64_t>(d));
        double s1 = 0.0, s1_sq = 0.0;   // b_0
        double s2 = 0.0, s2_sq = 0.0;   // b_0^2
        double s12 = 0.0, s12_sq = 0.0; // b_0 b_1
        for (long k = 0; k < n; ++k) {
            const ActuationDirection b = sample_uniform(d, rng);
            const double v1 = b.b(0), v2 = b.b(0) * b.b(0), v12 = b.b(0) * b.b(1);
            s1 += v1;
            s1_sq += v1 * v1;
            s2 += v2;
            s2_sq += v2 * v2;
            s12 += v12;
            s12_sq += v12 * v12;
        }
        const auto banded = [n](double sum, double sum_sq, double target) {
            const double mean = sum / n;
            const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1));
            const double se = std::sqrt(var / n);
            return std::abs(mean - target) <= 5.0 * se + 1e-12;
        };
        if (!banded(s1, s1_sq, 0.0)) return "d=" + std::to_string(d) + " first moment off";
        if (!banded(s2, s2_sq, 1.0 / d)) return "d=" + std::to_string(d) + " second moment off";
        if (!banded(s12, s12_sq, 0.0)) return "d=" + std::to_string(d) + " cross moment off";
    }
    return std::nullopt;
}

CheckResult check_sphere_area() {
    const double pi = std::acos(-1.0);
    for (int d = 2; d <= 10; ++d) {
        const double reference = 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
        const double value = sphere_area(d);
        if (std::abs(value - reference) > 1e-8) {
            return "d=" + std::to_string(d) + " off by " + fmt_g17(value - reference);
        }
    }
    return std::nullopt;
}

CheckResult check_drop_calibration(std::uint64_t seed) {
    const int d = 4, m = 2;
    const double q = 0.7;
    const double h = drop_threshold(d, m, q);
    const double h_reference = 1.0 / std::sqrt(0.3);  // Beta(1,1) quantile is the identity
    if (std::abs(h - h_reference) > 1e-10) {
        return "threshold off by " + fmt_g17(h - h_reference);
    }
    const long n = 100000;
    SeededRng rng(seed, 300);
    long drops = 0;
    double tb_sum = 0.0, tb_sum_sq = 0.0;
    for (long k = 0; k < n; ++k) {
        const ActuationDirection b = sample_uniform(d, rng);
        const double tb_norm = b.b.head(m).norm();
        if (tb_norm < 1e-300 || tb_norm * h <= 1.0) ++drops;
        const double tb_sq = tb_norm * tb_norm;
        tb_sum += tb_sq;
        tb_sum_sq += tb_sq * tb_sq;
    }
    const double drop_freq = static_cast<double>(drops) / n;
    const double freq_se = std::sqrt(q * (1.0 - q) / n);
    if (std::abs(drop_freq - (1.0 - q)) > 5.0 * freq_se) {
        return "drop frequency " + fmt_g17(drop_freq) + " vs " + fmt_g17(1.0 - q);
    }
    const double tb_mean = tb_sum / n;
    const double tb_var = std::max(0.0, (tb_sum_sq - tb_sum * tb_sum / n) / (n - 1));
    const double tb_se = std::sqrt(tb_var / n);
    if (std::abs(tb_mean - 0.5) > 5.0 * tb_se) {
        return "projected square-norm mean " + fmt_g17(tb_mean) + " vs 0.5";
    }
    return std::nullopt;
}

}  // namespace

int cmd_verify(std::uint64_t seed, const std::string& inject_fault, std::ostream& out,
               std::ostream& err) {
    if (!inject_fault.empty() && inject_fault != "expectation-bias") {
        err << "verify: unknown fault '" << inject_fault << "'\n";
        return 64;
    }
    bool all_pass = true;
    const auto report = [&](const char* name, const CheckResult& failure) {
        if (failure) {
            all_pass = false;
            out << "check " << name << ": FAIL " << *failure << "\n";
        } else {
            out << "check " << name << ": PASS\n";
        }
    };
    report("trace-identity", check_trace_identity(seed, inject_fault == "expectation-bias"));
    report("closed-form-2d", check_closed_form_2d());
    report("geometric-weights", check_geometric_weights());
    report("sphere-moments", check_sphere_moments(seed));
    report("sphere-area", check_sphere_area());
    report("drop-calibration", check_drop_calibration(seed));
    if (!all_pass) err << "verify: at least one check failed\n";
    return all_pass ? 0 : 1;
}

}  // namespace unistab::cli
