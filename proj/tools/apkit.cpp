#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "apkit/apkit.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_parse = 2;
constexpr int exit_numerical = 3;
constexpr int exit_property = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw apkit::parse_error(0, "", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

apkit::IndexRange parse_window(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) throw std::invalid_argument("missing ':'");
        const std::size_t first = std::stoul(text.substr(0, colon));
        const std::size_t last = std::stoul(text.substr(colon + 1));
        if (first > last) throw std::invalid_argument("first > last");
        return {first, last};
    } catch (const std::exception&) {
        throw apkit::parse_error(0, "--window", "expected FIRST:LAST, got '" + text + "'");
    }
}

apkit::Vector parse_point(const std::string& text, std::size_t dim) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double x = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0') throw apkit::parse_error(0, "--at", "not a number: '" + item + "'");
        v.push_back(x);
    }
    if (v.size() != dim) {
        throw apkit::parse_error(0, "--at", "expected " + std::to_string(dim) + " comma-separated coordinates");
    }
    return apkit::Vector(std::move(v));
}

struct Common {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::string window;
    std::string out;
};

/// File seed, then $APKIT_SEED, then --seed.
apkit::ProblemSpec load(const std::string& path, const Common& c) {
    apkit::ProblemSpec spec = apkit::parse_problem(read_file(path));
    apkit::apply_seed_override(spec);
    if (c.seed) {
        spec.seed = *c.seed;
        spec.solver.seed = *c.seed;
    }
    if (c.samples) spec.diagnostics.samples = *c.samples;
    if (!c.window.empty()) {
        spec.diagnostics.window = parse_window(c.window);
        spec.diagnostics.rate = true;
    }
    return spec;
}

void emit(const Common& c, const std::string& json, const std::string* csv = nullptr) {
    if (c.out.empty()) {
        std::cout << json;
        return;
    }
    const std::filesystem::path dir(c.out);
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", json);
    if (csv != nullptr) write_file(dir / "trace.csv", *csv);
}

int cmd_run(const std::string& file, const Common& c) {
    const apkit::ProblemSpec spec = load(file, c);
    const apkit::RunResult r = apkit::run(spec);
    const std::string csv = apkit::emit_trace_csv(r.trace);
    emit(c, apkit::emit_report_json(apkit::to_report(r, spec)), &csv);
    return exit_ok;
}

int cmd_diagnose(const std::string& file, const std::string& at, const Common& c) {
    apkit::ProblemSpec spec = load(file, c);
    std::optional<apkit::Vector> z;
    if (!at.empty()) z = parse_point(at, spec.dim);
    else if (spec.diagnostics.at) z = spec.diagnostics.at;
    else {
        const apkit::Trace t = apkit::alternate(spec.X, spec.Y, spec.start, spec.solver);
        if (t.termination != apkit::Termination::converged) {
            throw apkit::numerical_error("diagnose: no --at point given and the run did not converge");
        }
        z = t.final_x;
    }
    const apkit::TransversalityOptions opt = apkit::transversality_options(spec);
    apkit::report_json j;
    j["report"] = "diagnose";
    j["problem"] = spec.name;
    j["seed"] = spec.seed;
    j["transversality"] = apkit::to_report(apkit::transversality_report(spec.X, spec.Y, *z, opt));
    j["super_regularity_X"] = apkit::to_report(
        apkit::super_regularity_profile(spec.X, *z, opt.radius, opt.pairs, apkit::derive_seed(opt.seed, 200)));
    j["super_regularity_Y"] = apkit::to_report(
        apkit::super_regularity_profile(spec.Y, *z, opt.radius, opt.pairs, apkit::derive_seed(opt.seed, 201)));
    j["kl_profile"] = apkit::to_report(
        apkit::kl_profile(spec.X, spec.Y, *z, opt.radius, 20, std::max<std::size_t>(opt.pairs, 20), apkit::derive_seed(opt.seed, 202)));
    emit(c, apkit::emit_report_json(j));
    return exit_ok;
}

int cmd_rate(const std::string& file, const Common& c) {
    const std::vector<double> gaps = apkit::parse_trace_csv(read_file(file));
    const apkit::IndexRange w = c.window.empty() ? apkit::default_window(gaps) : parse_window(c.window);
    apkit::report_json j;
    j["report"] = "rate";
    j["rows"] = gaps.size();
    j["fit"] = apkit::to_report(apkit::fit_rate(std::span<const double>(gaps), w));
    emit(c, apkit::emit_report_json(j));
    return exit_ok;
}

int cmd_perturb(const std::string& file, double sigma, std::size_t trials, const Common& c) {
    const apkit::ProblemSpec spec = load(file, c);
    const apkit::PerturbationStudy s = apkit::perturbation_study(spec, sigma, trials, spec.seed);
    emit(c, apkit::emit_report_json(apkit::to_report(s)));
    return exit_ok;
}

int cmd_verify(const Common& c) {
    const std::uint64_t seed = c.seed.value_or(1);
    bool ok = true;
    for (const apkit::verify::SuiteResult& r : apkit::verify::all_suites(seed)) {
        std::printf("%-26s %s  cases=%zu violations=%zu worst=%.3g%s%s\n", r.name.c_str(), r.passed() ? "PASS" : "FAIL",
                    r.cases, r.violations, r.worst, r.passed() ? "" : "  first=", r.first_failure.c_str());
        ok = ok && r.passed();
    }
    return ok ? exit_ok : exit_property;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"apkit: alternating projections and transversality diagnostics"};
    app.require_subcommand(1);
    Common common;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "override the problem seed");
        sub->add_option("--samples", common.samples, "unit-sphere samples for cone minimization (0 = by dimension)");
        sub->add_option("--window", common.window, "rate-fit window FIRST:LAST (half-open)");
        sub->add_option("--out", common.out, "write outputs into this directory instead of stdout");
    };

    std::string file;
    std::string at;
    double sigma = 0.0;
    std::size_t trials = 100;

    CLI::App* run = app.add_subcommand("run", "run alternating projections on a problem file");
    run->add_option("file", file, "problem file (JSON)")->required();
    add_common(run);

    CLI::App* diagnose = app.add_subcommand("diagnose", "transversality diagnostics at a point");
    diagnose->add_option("file", file, "problem file (JSON)")->required();
    diagnose->add_option("--at", at, "point as comma-separated coordinates");
    add_common(diagnose);

    CLI::App* rate = app.add_subcommand("rate", "fit a linear rate to a trace CSV");
    rate->add_option("trace", file, "trace CSV")->required();
    add_common(rate);

    CLI::App* perturb = app.add_subcommand("perturb", "random translations of Y");
    perturb->add_option("file", file, "problem file (JSON)")->required();
    perturb->add_option("--sigma", sigma, "shift radius")->required();
    perturb->add_option("--trials", trials, "number of trials");
    add_common(perturb);

    CLI::App* verify = app.add_subcommand("verify", "run the built-in property suites");
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_parse;
    }

    try {
        if (*run) return cmd_run(file, common);
        if (*diagnose) return cmd_diagnose(file, at, common);
        if (*rate) return cmd_rate(file, common);
        if (*perturb) return cmd_perturb(file, sigma, trials, common);
        if (*verify) return cmd_verify(common);
    } catch (const apkit::parse_error& e) {
        std::cerr << "apkit: " << e.what() << "\n";
        return exit_parse;
    } catch (const std::invalid_argument& e) {
        std::cerr << "apkit: invalid input: " << e.what() << "\n";
        return exit_parse;
    } catch (const std::exception& e) {
        std::cerr << "apkit: numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_ok;
}
