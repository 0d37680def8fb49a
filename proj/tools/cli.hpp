// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "haarlab/haarlab.hpp"

namespace haarlab::cli {

/// Exit statuses.
enum ExitCode : int {
    kPass = 0,
    kStatisticalFailure = 1,
    kExecutionError = 2,
    kUsage = 64,
};

struct CommonOptions {
    std::uint64_t seed = 0;
    bool seed_given = false;
    int streams = 0;
    int workers = 0;
    std::string format = "json";
    std::string output;
};

namespace detail {

inline int default_parallelism() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// --seed wins; otherwise HAARLAB_SEED; otherwise 0.
inline std::uint64_t resolve_seed(CommonOptions const& c) {
    if (c.seed_given) {
        return c.seed;
    }
    if (char const* env = std::getenv("HAARLAB_SEED")) {
        try {
            std::size_t pos = 0;
            const auto v = std::stoull(env, &pos);
            if (pos == std::string(env).size()) {
                return v;
            }
        } catch (std::exception const&) {
        }
        throw CLI::ValidationError("HAARLAB_SEED", "not an unsigned integer");
    }
    return 0;
}

inline McPlan make_plan(CommonOptions const& c) {
    McPlan plan;
    plan.seed = resolve_seed(c);
    plan.streams = c.streams > 0 ? c.streams : default_parallelism();
    plan.workers = c.workers > 0 ? c.workers : default_parallelism();
    return plan;
}

inline nlohmann::json metadata(std::string const& command, McPlan const& plan) {
    return {{"command", command}, {"seed", plan.seed}, {"streams", plan.streams}};
}

inline nlohmann::json reports_json(std::vector<EstimateReport> const& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (auto const& r : rows) {
        out.push_back(to_json(r));
    }
    return out;
}

inline LimitMomentQuery parse_mixed(std::string const& text) {
    // "a1,a2,...:b1,b2,..."
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw CLI::ValidationError("--mixed", "expected a1,a2,...:b1,b2,...");
    }
    auto parse_list = [](std::string const& s) {
        std::vector<int> v;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            v.push_back(std::stoi(item));
        }
        return v;
    };
    LimitMomentQuery q{parse_list(text.substr(0, colon)), parse_list(text.substr(colon + 1))};
    q.validate();
    return q;
}

inline Complex parse_point(std::string const& text) {
    // "re:im" or "re"
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        return {std::stod(text), 0.0};
    }
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
}

}  // namespace detail

/**
 * Entry point for the haarlab command line. Writes the report to `out`
 * (or to --output), diagnostics to `err`, and returns the exit status.
 */
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"haarlab: Haar unitary sampling, exact moment and density formulas, "
                 "and Monte Carlo checks of their limit laws"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    CommonOptions common;
    auto add_common = [&](CLI::App* sub, bool with_format = true) {
        sub->add_option_function<std::uint64_t>(
               "--seed",
               [&](std::uint64_t const& v) {
                   common.seed = v;
                   common.seed_given = true;
               },
               "RNG seed (default 0; HAARLAB_SEED applies when absent)");
        sub->add_option("--streams", common.streams,
                        "Number of RNG streams (default: available hardware threads)");
        sub->add_option("--workers", common.workers,
                        "Worker threads (default: available hardware threads); "
                        "never changes results");
        if (with_format) {
            sub->add_option("--format", common.format, "Output format")
                ->check(CLI::IsMember({"json", "csv"}))
                ->capture_default_str();
        }
        sub->add_option("--output,-o", common.output, "Output path (default: stdout)");
    };

    // sample
    auto* sample = app.add_subcommand("sample", "Draw Haar unitary matrices");
    int sample_n = 4;
    int sample_count = 1;
    std::string sample_method = "gram-schmidt";
    std::string sample_format = "json";
    sample->add_option("--n", sample_n, "Matrix size")->check(CLI::PositiveNumber)->capture_default_str();
    sample->add_option("--count", sample_count, "Number of matrices")->check(CLI::PositiveNumber)->capture_default_str();
    sample->add_option("--method", sample_method, "Sampler")
        ->check(CLI::IsMember({"gram-schmidt", "qr"}))
        ->capture_default_str();
    add_common(sample, false);
    sample->add_option("--format", sample_format, "Output format (binary: uint64 dims + float64 pairs)")
        ->check(CLI::IsMember({"json", "binary"}))
        ->capture_default_str();

    // entries
    auto* entries = app.add_subcommand("entries", "Entry moments, entry law and diagonal correlation");
    int entries_n = 8;
    int entries_k_max = 3;
    std::int64_t entries_samples = 100000;
    bool entries_formulas = false;
    entries->add_option("--n", entries_n, "Matrix size")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    entries->add_option("--k-max", entries_k_max, "Highest moment order k in E|U11|^{2k}")
        ->check(CLI::Range(1, 30))
        ->capture_default_str();
    entries->add_option("--samples", entries_samples, "Monte Carlo samples")->check(CLI::Range(std::int64_t{3}, std::int64_t{1} << 40))->capture_default_str();
    entries->add_flag("--formulas", entries_formulas,
                      "Only tabulate exact formula values (n,k,l,value,kind) up to --n and --k-max");
    add_common(entries);

    // traces
    auto* traces = app.add_subcommand("traces", "Moments of traces of powers against their limits");
    std::vector<int> traces_n{8, 16, 32};
    std::vector<int> traces_powers{1, 2, 3};
    int traces_k_max = 2;
    std::int64_t traces_samples = 200000;
    std::vector<std::string> traces_mixed;
    std::string traces_method = "gram-schmidt";
    traces->add_option("--n", traces_n, "Matrix sizes, increasing")->delimiter(',')->capture_default_str();
    traces->add_option("--powers", traces_powers, "Powers l of Tr U^l")->delimiter(',')->capture_default_str();
    traces->add_option("--k-max", traces_k_max, "Highest k in E|Tr U^l|^{2k}")->check(CLI::Range(1, 12))->capture_default_str();
    traces->add_option("--samples", traces_samples, "Monte Carlo samples per size")->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40))->capture_default_str();
    traces->add_option("--mixed", traces_mixed,
                       "Mixed moment a1,a2,..:b1,b2,.. of prod (Tr U^i)^{a_i} conj(Tr U^i)^{b_i}; repeatable");
    traces->add_option("--method", traces_method, "Sampler")
        ->check(CLI::IsMember({"gram-schmidt", "qr"}))
        ->capture_default_str();
    add_common(traces);

    // eigenpowers
    auto* eigenpowers = app.add_subcommand("eigenpowers", "Independence of m-th powers of eigenvalues");
    int ep_n = 6;
    int ep_m = 7;
    std::int64_t ep_samples = 10000;
    bool ep_override = false;
    eigenpowers->add_option("--n", ep_n, "Matrix size")->check(CLI::PositiveNumber)->capture_default_str();
    eigenpowers->add_option("--m", ep_m, "Power of the eigenvalues")->check(CLI::PositiveNumber)->capture_default_str();
    eigenpowers->add_option("--samples", ep_samples, "Monte Carlo samples")->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40))->capture_default_str();
    eigenpowers->add_flag("--allow-small-power", ep_override,
                          "Run with m <= n (hypothesis violated; reported, not asserted)");
    add_common(eigenpowers);

    // truncate
    auto* trunc = app.add_subcommand("truncate", "Eigenvalues of truncated Haar unitaries");
    std::vector<int> trunc_n{32, 256};
    int trunc_m = 2;
    std::int64_t trunc_samples = 10000;
    bool trunc_scaled = false;
    trunc->add_option("--n", trunc_n, "Ambient sizes")->delimiter(',')->capture_default_str();
    trunc->add_option("--m", trunc_m, "Kept block size")->check(CLI::PositiveNumber)->capture_default_str();
    trunc->add_option("--samples", trunc_samples, "Monte Carlo samples")->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40))->capture_default_str();
    trunc->add_flag("--scaled", trunc_scaled, "Multiply the block by sqrt(n/m)");
    add_common(trunc);

    // density
    auto* density = app.add_subcommand("density", "Evaluate joint eigenvalue densities and related formulas");
    std::string density_kind = "weyl";
    int density_n = 2;
    int density_m = 1;
    std::vector<std::string> density_points;
    std::vector<double> density_angles;
    double density_x = 0.0;
    density->add_option("--kind", density_kind, "Formula to evaluate")
        ->check(CLI::IsMember({"weyl", "truncated", "scaled-truncated", "ginibre", "vandermonde",
                               "entry-cdf", "constant"}))
        ->capture_default_str();
    density->add_option("--n", density_n, "Matrix size")->check(CLI::PositiveNumber)->capture_default_str();
    density->add_option("--m", density_m, "Truncation size")->check(CLI::PositiveNumber)->capture_default_str();
    density->add_option("--points", density_points, "Complex points re:im, comma separated")->delimiter(',');
    density->add_option("--angles", density_angles, "Eigenangles for --kind weyl")->delimiter(',');
    density->add_option("--x", density_x, "Argument of --kind entry-cdf")->capture_default_str();
    add_common(density);

    // verify
    auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
    std::string verify_suite = "full";
    std::int64_t verify_samples = 0;
    verify->add_option("--suite", verify_suite, "Suite")
        ->check(CLI::IsMember({"full", "quick"}))
        ->capture_default_str();
    verify->add_option("--samples", verify_samples,
                       "Override every Monte Carlo sample count (default: per-criterion values)")
        ->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
    add_common(verify, false);

    std::vector<char const*> argv;
    argv.push_back("haarlab");
    for (auto const& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return kPass;
    } catch (CLI::CallForAllHelp const&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kPass;
    } catch (CLI::ParseError const& e) {
        // subcommand --help arrives here with the subcommand's help text
        if (e.get_exit_code() == 0) {
            CLI::App* target = &app;
            for (auto* sub : app.get_subcommands()) {
                target = sub;
            }
            out << target->help();
            return kPass;
        }
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    }

    std::unique_ptr<std::ofstream> file;
    std::ostream* sink = &out;
    auto open_output = [&](bool binary) {
        if (!common.output.empty()) {
            file = std::make_unique<std::ofstream>(
                common.output, binary ? std::ios::binary | std::ios::out : std::ios::out);
            if (!*file) {
                throw std::runtime_error("cannot open output file " + common.output);
            }
            sink = file.get();
        }
    };
    auto emit_json = [&](nlohmann::json const& j) { *sink << j.dump(2) << '\n'; };

    try {
        McPlan plan = detail::make_plan(common);
        bool ok = true;

        if (*sample) {
            const auto method = sample_method == "qr" ? HaarMethod::householder_qr
                                                      : HaarMethod::gram_schmidt;
            open_output(sample_format == "binary");
            nlohmann::json mats = nlohmann::json::array();
            for (int i = 0; i < sample_count; ++i) {
                RngStream stream(plan.seed, static_cast<std::uint64_t>(i));
                const ComplexMatrix u = sample_haar(stream, sample_n, method);
                if (unitarity_defect(u) > kUnitarityTolerance) {
                    throw NumericalError("sampled matrix failed the unitarity check");
                }
                if (sample_format == "binary") {
                    write_matrix_binary(*sink, u);
                } else {
                    mats.push_back(matrix_to_json(u));
                }
            }
            if (sample_format == "json") {
                nlohmann::json meta = {{"command", "sample"}, {"seed", plan.seed},
                                       {"method", sample_method}};
                emit_json({{"metadata", meta}, {"matrices", std::move(mats)}});
            }
        } else if (*entries) {
            open_output(false);
            if (entries_formulas) {
                const auto rows = formula_table(entries_n, entries_k_max, entries_k_max);
                if (common.format == "csv") {
                    write_formula_csv(*sink, rows);
                } else {
                    nlohmann::json arr = nlohmann::json::array();
                    for (auto const& r : rows) {
                        nlohmann::json j = {{"value", r.value}, {"kind", r.kind}};
                        j["n"] = r.n ? nlohmann::json(*r.n) : nlohmann::json();
                        j["k"] = r.k ? nlohmann::json(*r.k) : nlohmann::json();
                        j["l"] = r.l ? nlohmann::json(*r.l) : nlohmann::json();
                        arr.push_back(std::move(j));
                    }
                    emit_json({{"metadata", {{"command", "entries --formulas"}}}, {"formulas", arr}});
                }
                return kPass;
            }
            auto rows = entry_moment_experiment(entries_n, entries_k_max, entries_samples,
                                                plan.with_tag(1));
            rows.push_back(correlation_experiment(entries_n, entries_samples, plan.with_tag(2)));
            const auto law = entry_law_experiment(entries_n, entries_samples, plan.with_tag(3));
            for (auto const& r : rows) {
                ok = ok && r.within();
            }
            ok = ok && law.passed();
            if (common.format == "csv") {
                write_reports_csv(*sink, rows);
            } else {
                emit_json({{"metadata", detail::metadata("entries", plan)},
                           {"reports", detail::reports_json(rows)},
                           {"entry_law_ks", to_json(law)},
                           {"passed", ok}});
            }
        } else if (*traces) {
            open_output(false);
            TraceExperimentConfig cfg;
            cfg.sizes = traces_n;
            cfg.powers = traces_powers;
            cfg.k_max = traces_k_max;
            for (auto const& m : traces_mixed) {
                cfg.mixed.push_back(detail::parse_mixed(m));
            }
            cfg.samples = traces_samples;
            cfg.plan = plan;
            cfg.method = traces_method == "qr" ? HaarMethod::householder_qr
                                               : HaarMethod::gram_schmidt;
            const auto res = trace_experiment(cfg);
            ok = res.passed();
            if (common.format == "csv") {
                write_reports_csv(*sink, res.rows);
            } else {
                nlohmann::json conv = nlohmann::json::array();
                for (auto const& v : res.convergence) {
                    conv.push_back(to_json(v));
                }
                emit_json({{"metadata", detail::metadata("traces", plan)},
                           {"reports", detail::reports_json(res.rows)},
                           {"convergence", std::move(conv)},
                           {"passed", ok}});
            }
        } else if (*eigenpowers) {
            open_output(false);
            const auto rep = eigenpower_experiment(ep_n, ep_m, ep_samples, plan, ep_override);
            // with the hypothesis violated the outcome is a demonstration only
            ok = !rep.hypothesis_holds || rep.passed();
            if (common.format == "csv") {
                write_reports_csv(*sink, rep.cross_moments);
            } else {
                emit_json({{"metadata", detail::metadata("eigenpowers", plan)},
                           {"report", to_json(rep)},
                           {"passed", ok}});
            }
        } else if (*trunc) {
            open_output(false);
            nlohmann::json reps = nlohmann::json::array();
            std::vector<EstimateReport> rows;
            for (std::size_t i = 0; i < trunc_n.size(); ++i) {
                const auto rep = truncation_experiment(trunc_n[i], trunc_m, trunc_samples,
                                                       trunc_scaled,
                                                       plan.with_tag(static_cast<std::uint32_t>(i)));
                ok = ok && rep.passed();
                rows.insert(rows.end(), rep.moments.begin(), rep.moments.end());
                reps.push_back(to_json(rep));
            }
            if (common.format == "csv") {
                write_reports_csv(*sink, rows);
            } else {
                emit_json({{"metadata", detail::metadata("truncate", plan)},
                           {"reports", std::move(reps)},
                           {"passed", ok}});
            }
        } else if (*density) {
            open_output(false);
            std::vector<Complex> pts;
            for (auto const& p : density_points) {
                pts.push_back(detail::parse_point(p));
            }
            DensityPoint dp;
            std::optional<double> scalar;
            std::optional<Complex> complex_value;
            if (density_kind == "weyl") {
                dp = weyl_density(density_angles, density_n);
            } else if (density_kind == "truncated") {
                dp = truncated_jpdf(density_n, density_m, pts);
            } else if (density_kind == "scaled-truncated") {
                dp = scaled_truncated_jpdf(density_n, density_m, pts);
            } else if (density_kind == "ginibre") {
                dp = ginibre_limit_density(density_m, pts);
            } else if (density_kind == "vandermonde") {
                complex_value = vandermonde(pts);
            } else if (density_kind == "entry-cdf") {
                scalar = entry_radial_cdf(density_n, density_x);
            } else {
                scalar = truncation_constant(density_n, density_m);
            }
            if (scalar || complex_value) {
                if (common.format == "csv") {
                    *sink << std::setprecision(17) << "kind,n,m,re,im\n" << density_kind << ','
                          << density_n << ',' << density_m << ','
                          << (scalar ? *scalar : complex_value->real()) << ','
                          << (scalar ? 0.0 : complex_value->imag()) << '\n';
                } else {
                    emit_json({{"metadata", {{"command", "density"}, {"kind", density_kind}}},
                               {"value", scalar ? nlohmann::json(*scalar)
                                                : complex_to_json(*complex_value)}});
                }
            } else if (common.format == "csv") {
                write_density_csv(*sink, {dp});
            } else {
                nlohmann::json points = nlohmann::json::array();
                for (auto const& z : dp.points) {
                    points.push_back(complex_to_json(z));
                }
                emit_json({{"metadata", {{"command", "density"}, {"kind", density_kind}}},
                           {"points", std::move(points)},
                           {"value", dp.value},
                           {"measure", to_string(dp.measure)}});
            }
        } else if (*verify) {
            open_output(false);
            VerifyOptions opt;
            opt.seed = plan.seed;
            opt.streams = common.streams > 0 ? common.streams : detail::default_parallelism();
            opt.workers = plan.workers;
            opt.suite = verify_suite;
            if (verify_samples > 0) {
                opt.samples = verify_samples;
            }
            const auto results = run_acceptance_suite(opt);
            const auto report = verify_report_json(opt, results);
            emit_json(report);
            for (auto const& c : results) {
                err << (c.passed ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << '\n';
            }
            ok = report.at("passed").get<bool>();
        }
        sink->flush();
        return ok ? kPass : kStatisticalFailure;
    } catch (CLI::ParseError const& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (std::invalid_argument const& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (std::exception const& e) {
        err << "error: " << e.what() << '\n';
        return kExecutionError;
    }
}

}  // namespace haarlab::cli
