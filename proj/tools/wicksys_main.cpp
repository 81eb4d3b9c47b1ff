// wicksys command line: simulate Wick-convolution systems, certify their
// stability, and cross-validate the chaos algebra by Monte Carlo sampling.
//
// Exit codes: 0 success/certified/pass, 1 refuted or validation failure,
// 2 malformed input or request, 3 policy violation or size cap, 4 inconclusive.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "wicksys/wicksys.hpp"

namespace {

using nlohmann::json;
using namespace wicksys;

struct RunConfig {
    std::string command;
    std::string input;
    std::string output;
    std::optional<std::string> criterion;
    std::uint64_t seed = 0;
    int probes = 16;
    double tol = 1e-9;
    std::optional<int> max_degree;
    std::optional<int> max_var;
    int threads = 1;

    json to_json() const {
        json j;
        j["command"] = command;
        j["input"] = input;
        j["output"] = output;
        j["criterion"] = criterion ? json(*criterion) : json();
        j["seed"] = seed;
        j["probes"] = probes;
        j["tol"] = tol;
        j["max_degree"] = max_degree ? json(*max_degree) : json();
        j["max_var"] = max_var ? json(*max_var) : json();
        j["threads"] = threads;
        return j;
    }
};

int parse_threads_env() {
    const char* raw = std::getenv("WICKSYS_THREADS");
    if (raw == nullptr) return 1;
    char* end = nullptr;
    const long value = std::strtol(raw, &end, 10);
    if (end == raw || *end != '\0' || value < 1) {
        std::cerr << "wicksys: ignoring invalid WICKSYS_THREADS value '" << raw << "'\n";
        return 1;
    }
    return static_cast<int>(value);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open input file: " + path);
    json j;
    in >> j;
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
}

std::string csv_path_for(const std::string& output) {
    const std::string suffix = ".json";
    if (output.size() > suffix.size() &&
        output.compare(output.size() - suffix.size(), suffix.size(), suffix) == 0)
        return output.substr(0, output.size() - suffix.size()) + ".csv";
    return output + ".csv";
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

TruncationPolicy apply_policy_override(const TruncationPolicy& declared, const RunConfig& cfg) {
    return {cfg.max_var ? *cfg.max_var : declared.max_var,
            cfg.max_degree ? *cfg.max_degree : declared.max_degree};
}

json report_envelope(const RunConfig& cfg) {
    json j;
    j["version"] = kVersionString;
    j["config"] = cfg.to_json();
    return j;
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg) {
    const json sys_json = read_json_file(cfg.input);
    SystemDescription sys = parse_system(sys_json);

    json out = report_envelope(cfg);
    std::string csv = "n_or_t,norm_k,alpha0_re,alpha0_im\n";

    if (std::holds_alternative<DiscreteSystemDescription>(sys)) {
        const auto& d = std::get<DiscreteSystemDescription>(sys);
        if (!d.input) throw std::invalid_argument("simulate: the input signal is missing");
        const TruncationPolicy policy = apply_policy_override(d.policy, cfg);
        const DiscreteConvolution y =
            wick_convolve(d.impulse.embedded(policy), d.input->embedded(policy));
        out["kind"] = "discrete";
        out["truncation_loss"] = y.truncation_loss;
        out["signal"] = y.signal;
        for (int n = y.signal.n_min(); !y.signal.empty() && n <= y.signal.n_max(); ++n) {
            const ChaosExpansion f = y.signal.at(n);
            const cplx a0 = f.coeff(MultiIndex{});
            csv += std::to_string(n) + "," + format_number(norm_k(f, d.k)) + "," +
                   format_number(a0.real()) + "," + format_number(a0.imag()) + "\n";
        }
    } else {
        const auto& c = std::get<ContinuousSystemDescription>(sys);
        if (!c.input) throw std::invalid_argument("simulate: the input signal is missing");
        const TruncationPolicy policy = apply_policy_override(c.policy, cfg);
        const GridConvolution y =
            wick_convolve_grid(c.impulse.embedded(policy), c.input->embedded(policy));
        out["kind"] = "continuous";
        out["truncation_loss"] = y.truncation_loss;
        out["signal"] = y.signal;
        for (std::size_t i = 0; i < y.signal.length(); ++i) {
            const ChaosExpansion& f = y.signal.sample(i);
            const cplx a0 = f.coeff(MultiIndex{});
            csv += format_number(y.signal.time(i)) + "," + format_number(norm_k(f, c.k)) + "," +
                   format_number(a0.real()) + "," + format_number(a0.imag()) + "\n";
        }
    }

    write_text_file(cfg.output, out.dump(2) + "\n");
    write_text_file(csv_path_for(cfg.output), csv);
    return 0;
}

// --- certify ----------------------------------------------------------------

StabilityReport merge_bounds(StabilityReport upper_side, const StabilityReport& lower_side) {
    upper_side.lower_bound = lower_side.lower_bound;
    upper_side.witness = lower_side.witness;
    for (const auto& n : lower_side.notes) upper_side.notes.push_back(n);
    if (lower_side.parameters.contains("probes"))
        upper_side.parameters["probes"] = lower_side.parameters["probes"];
    return upper_side;
}

std::vector<ChaosExpansion> subsampled_taps(const std::vector<ChaosExpansion>& samples,
                                            std::size_t max_taps) {
    if (samples.size() <= max_taps) return samples;
    std::vector<ChaosExpansion> out;
    const std::size_t stride = samples.size() / max_taps;
    for (std::size_t i = 0; i < samples.size(); i += stride) out.push_back(samples[i]);
    return out;
}

int cmd_certify(const RunConfig& cfg) {
    if (!cfg.criterion) throw std::invalid_argument("certify: --criterion is required");
    const std::string criterion = *cfg.criterion;
    const json sys_json = read_json_file(cfg.input);
    SystemDescription sys = parse_system(sys_json);

    StabilityReport rep;
    if (std::holds_alternative<DiscreteSystemDescription>(sys)) {
        const auto& d = std::get<DiscreteSystemDescription>(sys);
        const TruncationPolicy policy = apply_policy_override(d.policy, cfg);
        const DiscreteSignal h = d.impulse.embedded(policy);
        if (criterion == "bibo") {
            const auto probes = make_probe_set(h.samples(), d.k, policy, cfg.probes, cfg.seed);
            rep = merge_bounds(bibo_sufficient(h, d.k, d.l, cfg.tol), bibo_probe(h, d.k, probes));
        } else if (criterion == "l1l2") {
            rep = l1l2_certify(h, d.k, d.l, cfg.tol);
        } else if (criterion == "dissipative") {
            const int n_time = sys_json.value("n_time", 128);
            rep = dissipativity_check(h, d.k, policy, n_time, cfg.tol);
        } else {
            throw std::invalid_argument("certify: criterion '" + criterion +
                                        "' does not apply to discrete systems");
        }
    } else {
        const auto& c = std::get<ContinuousSystemDescription>(sys);
        const TruncationPolicy policy = apply_policy_override(c.policy, cfg);
        const GridSignal h = c.impulse.embedded(policy);
        const auto probes = make_probe_set(subsampled_taps(h.samples(), 8), c.k, policy,
                                           cfg.probes, cfg.seed);
        if (criterion == "bibo") {
            rep = merge_bounds(cont_bibo_sufficient(h, c.k, c.l, cfg.tol),
                               cont_bibo_probe(h, c.k, probes));
        } else if (criterion == "l2linf") {
            rep = l2linf_certify(h, c.k, c.l, cfg.tol, probes);
        } else {
            throw std::invalid_argument("certify: criterion '" + criterion +
                                        "' does not apply to continuous systems");
        }
    }

    rep.parameters["seed"] = cfg.seed;
    json out = report_envelope(cfg);
    out["report"] = rep;
    write_text_file(cfg.output, out.dump(2) + "\n");

    switch (rep.verdict) {
        case Verdict::certified: return 0;
        case Verdict::refuted: return 1;
        case Verdict::inconclusive: return 4;
    }
    return 4;
}

// --- mc-validate ------------------------------------------------------------

int cmd_mc_validate(const RunConfig& cfg) {
    const json conf = read_json_file(cfg.input);
    const long samples = conf.value("samples", 100000L);
    const double threshold = conf.value("threshold", 4.0);
    const TruncationPolicy policy =
        conf.contains("policy") ? policy_from_json(conf["policy"]) : TruncationPolicy(3, 3);
    const int wick_cases = conf.value("wick_cases", 5);
    if (samples < 1) throw std::invalid_argument("mc-validate: samples >= 1 required");

    const BasisEnumeration basis(policy);
    json rows = json::array();
    double max_abs_z = 0.0;
    std::uint64_t stream = cfg.seed;

    const auto push_row = [&](const std::string& name, const json& detail, cplx expected,
                              const McMoment& m) {
        double z = 0.0;
        const double err = std::abs(m.mean - expected);
        if (m.std_error > 0.0)
            z = err / m.std_error;
        else if (err > 1e-12)
            z = std::numeric_limits<double>::infinity();
        max_abs_z = std::max(max_abs_z, z);
        json row = detail;
        row["case"] = name;
        row["expected_re"] = expected.real();
        row["expected_im"] = expected.imag();
        row["mean_re"] = m.mean.real();
        row["mean_im"] = m.mean.imag();
        row["std_error"] = m.std_error;
        row["z"] = z;
        row["pass"] = !(z > threshold);
        rows.push_back(std::move(row));
    };

    // orthogonality: E[H_alpha H_beta] = delta alpha!
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (std::size_t j = i; j < basis.size(); ++j) {
            const ChaosExpansion f = ChaosExpansion::basis_term(policy, basis.alpha(i));
            const ChaosExpansion g = ChaosExpansion::basis_term(policy, basis.alpha(j));
            const McMoment m = mc_moment(f, g, samples, stream++);
            json detail;
            detail["alpha"] = basis.alpha(i);
            detail["beta"] = basis.alpha(j);
            const double expected = (i == j) ? basis.alpha(i).factorial() : 0.0;
            push_row("orthogonality", detail, expected, m);
        }
    }

    // wick expectation: E[f <> g] = f_0 g_0, exact in coefficients and sampled
    const TruncationPolicy half(policy.max_var, policy.max_degree / 2);
    const BasisEnumeration half_basis(half);
    std::mt19937_64 engine(cfg.seed ^ 0x517cc1b727220a95ULL);
    std::normal_distribution<double> gauss;
    for (int t = 0; t < wick_cases; ++t) {
        ChaosExpansion f(policy), g(policy);
        for (const MultiIndex& alpha : half_basis.all()) {
            f.set_coeff(alpha, cplx(gauss(engine), gauss(engine)));
            g.set_coeff(alpha, cplx(gauss(engine), gauss(engine)));
        }
        const WickResult w = wick_product(f, g);
        const cplx expected = f.coeff(MultiIndex{}) * g.coeff(MultiIndex{});
        json detail;
        detail["pair"] = t;
        detail["coefficient_residual"] = std::abs(w.value.coeff(MultiIndex{}) - expected);
        detail["truncation_loss"] = w.truncation_loss;
        const McMoment m =
            mc_moment(w.value, ChaosExpansion::constant(policy, 1.0), samples, stream++);
        push_row("wick_expectation", detail, expected, m);
    }

    json out = report_envelope(cfg);
    out["policy"] = policy;
    out["samples"] = samples;
    out["threshold"] = threshold;
    out["rows"] = std::move(rows);
    out["max_abs_z"] = max_abs_z;
    const bool pass = !(max_abs_z > threshold);
    out["pass"] = pass;
    write_text_file(cfg.output, out.dump(2) + "\n");
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wicksys: random linear systems as truncated chaos expansions"};
    app.require_subcommand(1);

    RunConfig cfg;
    cfg.threads = parse_threads_env();

    const auto add_common = [&cfg](CLI::App* sub) {
        sub->add_option("--input", cfg.input, "input JSON path")->required();
        sub->add_option("--output", cfg.output, "output JSON path")->required();
        sub->add_option("--seed", cfg.seed, "seed for all randomized choices");
        sub->add_option("--probes", cfg.probes, "number of random probe directions");
        sub->add_option("--tol", cfg.tol, "certification / validation tolerance");
        sub->add_option("--max-degree", cfg.max_degree, "override the policy degree bound");
        sub->add_option("--max-var", cfg.max_var, "override the policy variable bound");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run a Wick convolution");
    add_common(simulate);
    CLI::App* certify = app.add_subcommand("certify", "run a stability certifier");
    add_common(certify);
    std::string criterion;
    certify->add_option("--criterion", criterion, "bibo | l1l2 | dissipative | l2linf")
        ->required();
    CLI::App* mc = app.add_subcommand("mc-validate", "Monte Carlo validation of the algebra");
    add_common(mc);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            cfg.command = "simulate";
            return cmd_simulate(cfg);
        }
        if (certify->parsed()) {
            cfg.command = "certify";
            cfg.criterion = criterion;
            return cmd_certify(cfg);
        }
        cfg.command = "mc-validate";
        return cmd_mc_validate(cfg);
    } catch (const PolicyError& e) {
        std::cerr << "wicksys: policy violation: " << e.what() << "\n";
        return 3;
    } catch (const CapacityError& e) {
        std::cerr << "wicksys: size cap: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "wicksys: malformed input: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "wicksys: malformed input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "wicksys: error: " << e.what() << "\n";
        return 2;
    }
}
