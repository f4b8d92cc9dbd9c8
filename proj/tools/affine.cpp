// affine: command-line front end for validating, analyzing, transforming and
// simulating affine jump models on finite lattice state spaces.

#include <CLI11.hpp>

#include <complex>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "affine/affine.hpp"

namespace {

using namespace affine;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitModelInvalid = 2;

std::vector<Complex> parse_complex_vector(const std::string& text, std::size_t expected) {
    std::vector<Complex> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) out.push_back(parse_complex(token));
    if (out.size() != expected)
        throw ParseError("expected " + std::to_string(expected) +
                         " comma-separated complex entries, got " + std::to_string(out.size()));
    return out;
}

Point parse_point(const std::string& text, std::size_t expected) {
    Point out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stoll(token, &pos));
            if (pos != token.size()) throw ParseError("malformed integer \"" + token + "\"");
        } catch (const ParseError&) {
            throw;
        } catch (...) {
            throw ParseError("malformed integer \"" + token + "\"");
        }
    }
    if (out.size() != expected)
        throw ParseError("expected " + std::to_string(expected) +
                         " comma-separated integers, got " + std::to_string(out.size()));
    return out;
}

void emit(const json& payload, const std::string& output_path) {
    if (output_path.empty())
        std::cout << payload.dump(2) << "\n";
    else
        save_json(payload, output_path);
}

void write_text(const std::string& text, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(output_path);
        if (!out) throw ParseError("cannot open file for writing: " + output_path);
        out << text;
    }
}

AffineModel load_valid_model(const std::string& path) {
    AffineModel model = load_model(path);
    const ValidationReport report = validate_model(model);
    if (!report.valid) {
        std::cerr << json{{"error", "InvalidModel"},
                          {"report", validation_report_to_json(report)}}
                         .dump(2)
                  << "\n";
        std::exit(kExitModelInvalid);
    }
    return model;
}

json transform_value_to_json(const TransformValue& tv, const AffineModel& model) {
    json psi = json::array();
    for (const auto& p : tv.psi) psi.push_back(complex_to_string(p));
    json values = json::array();
    for (const auto& x : model.space().points())
        values.push_back(json{{"x", x}, {"value", complex_to_string(transform_value_at(tv, x))}});
    return json{{"phi", complex_to_string(tv.phi)}, {"psi", std::move(psi)},
                {"values", std::move(values)}};
}

RiccatiSystem require_riccati_system(const AffineModel& model) {
    return build_riccati(decompose_kernel(model, model.dimension()));
}

struct VerifyOutcome {
    json report;
    bool agreement = true;
};

VerifyOutcome run_verify(const AffineModel& model, const std::vector<Complex>& u, double t,
                         std::size_t paths, std::uint64_t seed, const Point& x0) {
    VerifyOutcome out;
    const RiccatiSystem sys = require_riccati_system(model);
    const TransformValue tv = solve_riccati(sys, u, t, 1e-12);
    const auto oracle = transform_oracle(model, u, t);

    double riccati_vs_oracle = 0.0;
    for (std::size_t i = 0; i < model.space().points().size(); ++i)
        riccati_vs_oracle = std::max(
            riccati_vs_oracle,
            std::abs(transform_value_at(tv, model.space().points()[i]) - oracle[i]));
    out.report["riccati_vs_oracle_max_abs"] = riccati_vs_oracle;
    out.agreement = out.agreement && riccati_vs_oracle < 1e-7;

    if (model.dimension() == 1) {
        try {
            const Classification1D c = classify_1d(model);
            if (c.kind == Classification1D::Kind::BirthDeath && c.normalizing_map.is_identity()) {
                const TransformValue cf = closed_form_1d(
                    c.n, c.alpha_rate.to_double(), c.beta_rate.to_double(), u[0], t);
                const double diff = std::max(std::abs(cf.phi - tv.phi),
                                             std::abs(cf.psi[0] - tv.psi[0]));
                out.report["closed_form_vs_riccati_max_abs"] = diff;
                out.agreement = out.agreement && diff < 1e-8;
            }
        } catch (const NotAffine1D&) {
            // No closed form for this kernel shape; the two-way check stands.
        }
    }

    const auto samples = sample_at(model, x0, t, paths, seed);
    const EmpiricalTransform mc = empirical_transform(samples, u);
    const Complex reference = oracle[model.space().index_of(x0)];
    const double dev_re = std::abs(mc.mean.real() - reference.real());
    const double dev_im = std::abs(mc.mean.imag() - reference.imag());
    const bool mc_ok =
        dev_re <= 3.0 * mc.se_re + 1e-12 && dev_im <= 3.0 * mc.se_im + 1e-12;
    out.report["monte_carlo"] = json{{"x0", x0},
                                     {"paths", paths},
                                     {"seed", seed},
                                     {"mean", complex_to_string(mc.mean)},
                                     {"se_re", mc.se_re},
                                     {"se_im", mc.se_im},
                                     {"oracle", complex_to_string(reference)},
                                     {"within_3_se", mc_ok}};
    out.agreement = out.agreement && mc_ok;
    out.report["agreement"] = out.agreement;
    return out;
}

int dispatch(CLI::App& app, int argc, char** argv) {
    // ---- validate ----
    auto* validate = app.add_subcommand("validate", "check a model file against its invariants");
    std::string validate_path, validate_out;
    validate->add_option("model", validate_path, "model JSON file")->required();
    validate->add_option("--output", validate_out, "write the report to a file");

    // ---- counters ----
    auto* counters = app.add_subcommand("counters", "normalized jump counter of every channel");
    std::string counters_path, counters_out;
    counters->add_option("model", counters_path)->required();
    counters->add_option("--output", counters_out);

    // ---- transform-structure ----
    auto* structure =
        app.add_subcommand("transform-structure", "structural transform T, k and counter basis");
    std::string structure_path, structure_out;
    structure->add_option("model", structure_path)->required();
    structure->add_option("--output", structure_out);

    // ---- classify ----
    auto* classify = app.add_subcommand("classify", "dimension-specific classification verdict");
    std::string classify_path, classify_out;
    classify->add_option("model", classify_path)->required();
    classify->add_option("--output", classify_out);

    // ---- make ----
    auto* make = app.add_subcommand("make", "emit a built-in model");
    make->require_subcommand(1);
    auto* make_bd = make->add_subcommand("birth-death", "birth-death chain on {0..N}");
    std::int64_t bd_n = 1;
    std::string bd_alpha = "1", bd_beta = "0", make_bd_out;
    make_bd->add_option("--N", bd_n, "lattice size")->required();
    make_bd->add_option("--alpha", bd_alpha, "death rate per unit (rational)")->required();
    make_bd->add_option("--beta", bd_beta, "birth rate per vacancy (rational)")->required();
    make_bd->add_option("--output", make_bd_out);

    auto* make_sx = make->add_subcommand("simplex", "lattice simplex model");
    std::size_t sx_d = 2;
    std::int64_t sx_n = 1;
    std::vector<std::string> sx_rates;
    std::string sx_all, make_sx_out;
    make_sx->add_option("--d", sx_d, "dimension")->required();
    make_sx->add_option("--N", sx_n, "simplex level")->required();
    make_sx->add_option("--rate", sx_rates, "per-pair rate as j,k=r (repeatable)");
    make_sx->add_option("--all-rates", sx_all, "uniform rate for every ordered pair");
    make_sx->add_option("--output", make_sx_out);

    auto* make_layer = make->add_subcommand("layer-example", "the 13-state layered model");
    std::string make_layer_out;
    make_layer->add_option("--output", make_layer_out);

    // ---- transform ----
    auto* transform = app.add_subcommand(
        "transform", "conditional transform E_x[exp(<u, X_t>)] for every state x");
    std::string transform_path, transform_u, transform_out, transform_csv;
    double transform_t = 0.0, transform_tol = 1e-10;
    std::string transform_method = "riccati";
    transform->add_option("model", transform_path)->required();
    transform->add_option("--u", transform_u, "complex vector, e.g. 0.3i,0.5i")->required();
    transform->add_option("--t", transform_t, "time horizon")->required();
    transform->add_option("--method", transform_method)
        ->check(CLI::IsMember({"riccati", "oracle", "closed-form"}));
    transform->add_option("--tolerance", transform_tol, "ODE absolute tolerance");
    transform->add_option("--csv", transform_csv, "also export per-state values as CSV");
    transform->add_option("--output", transform_out);

    // ---- simulate ----
    auto* simulate = app.add_subcommand("simulate", "exact simulation (CSV output)");
    std::string simulate_path, simulate_x0, simulate_out;
    double simulate_horizon = 0.0;
    std::size_t simulate_paths = 1;
    std::uint64_t simulate_seed = 0;
    bool simulate_hybrid_flag = false;
    simulate->add_option("model", simulate_path)->required();
    simulate->add_option("--x0", simulate_x0, "start state, e.g. 3 or 1,2 (hybrid: y,z)")
        ->required();
    simulate->add_option("--horizon", simulate_horizon)->required();
    simulate->add_option("--paths", simulate_paths, "1 = full event path, >1 = endpoints");
    simulate->add_option("--seed", simulate_seed)->required();
    simulate->add_flag("--hybrid", simulate_hybrid_flag, "layered hybrid simulation");
    simulate->add_option("--output", simulate_out);

    // ---- verify ----
    auto* verify = app.add_subcommand(
        "verify", "three-way transform comparison: Riccati vs oracle vs Monte Carlo");
    std::string verify_path, verify_u, verify_x0, verify_out;
    double verify_t = 0.0;
    std::size_t verify_paths = 10000;
    std::uint64_t verify_seed = 0;
    verify->add_option("model", verify_path)->required();
    verify->add_option("--u", verify_u)->required();
    verify->add_option("--t", verify_t)->required();
    verify->add_option("--paths", verify_paths);
    verify->add_option("--seed", verify_seed)->required();
    verify->add_option("--x0", verify_x0, "Monte Carlo start state (default: first state)");
    verify->add_option("--output", verify_out);

    // ---- zeros ----
    auto* zeros = app.add_subcommand("zeros", "search for a vanishing Psi(u, t), k = 1 models");
    std::string zeros_path, zeros_out;
    double zeros_t = 1.0, re_min = -1.0, re_max = 1.0, im_min = 2.0, im_max = 4.0;
    double zeros_threshold = 1e-8;
    zeros->add_option("model", zeros_path)->required();
    zeros->add_option("--t", zeros_t)->required();
    zeros->add_option("--re-min", re_min)->required();
    zeros->add_option("--re-max", re_max)->required();
    zeros->add_option("--im-min", im_min)->required();
    zeros->add_option("--im-max", im_max)->required();
    zeros->add_option("--threshold", zeros_threshold);
    zeros->add_option("--output", zeros_out);

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    if (*validate) {
        const AffineModel model = load_model(validate_path);
        const ValidationReport report = validate_model(model);
        emit(validation_report_to_json(report), validate_out);
        return report.valid ? kExitOk : kExitModelInvalid;
    }

    if (*counters) {
        const AffineModel model = load_valid_model(counters_path);
        json arr = json::array();
        for (const auto& ch : model.kernel().channels())
            arr.push_back(counter_to_json(compute_jump_counter(model.space(), ch.jump)));
        emit(json{{"dimension", model.dimension()}, {"counters", std::move(arr)}}, counters_out);
        return kExitOk;
    }

    if (*structure) {
        const AffineModel model = load_valid_model(structure_path);
        emit(transform_result_to_json(build_transform(model)), structure_out);
        return kExitOk;
    }

    if (*classify) {
        const AffineModel model = load_valid_model(classify_path);
        json out;
        if (model.dimension() == 1) {
            out = classification1d_to_json(classify_1d(model));
        } else if (model.dimension() == 2) {
            out = classification2d_to_json(classify_2d(model));
        } else {
            throw UnclassifiableModel("classification covers dimensions 1 and 2 only");
        }
        const ModelDiagnostics diag = model_diagnostics(model);
        json diag_json{{"irreducible", diag.irreducible}};
        if (diag.autonomous_direction) {
            json dir = json::array();
            for (const auto& c : *diag.autonomous_direction) dir.push_back(rational_to_json(c));
            diag_json["autonomous_direction"] = std::move(dir);
        }
        out["diagnostics"] = std::move(diag_json);
        emit(out, classify_out);
        return kExitOk;
    }

    if (*make_bd) {
        emit(model_to_json(
                 make_birth_death(bd_n, Rational::parse(bd_alpha), Rational::parse(bd_beta))),
             make_bd_out);
        return kExitOk;
    }
    if (*make_sx) {
        SimplexRates rates;
        if (!sx_all.empty()) {
            const Rational r = Rational::parse(sx_all);
            for (std::size_t j = 0; j <= sx_d; ++j)
                for (std::size_t k = 0; k <= sx_d; ++k)
                    if (j != k) rates[{j, k}] = r;
        }
        for (const auto& spec : sx_rates) {
            const auto eq = spec.find('=');
            const auto comma = spec.find(',');
            if (eq == std::string::npos || comma == std::string::npos || comma > eq)
                throw ParseError("--rate expects j,k=r, got \"" + spec + "\"");
            const auto j = static_cast<std::size_t>(std::stoul(spec.substr(0, comma)));
            const auto k =
                static_cast<std::size_t>(std::stoul(spec.substr(comma + 1, eq - comma - 1)));
            rates[{j, k}] = Rational::parse(spec.substr(eq + 1));
        }
        emit(model_to_json(make_simplex(sx_d, sx_n, rates)), make_sx_out);
        return kExitOk;
    }
    if (*make_layer) {
        emit(model_to_json(make_layer_example()), make_layer_out);
        return kExitOk;
    }

    if (*transform) {
        const AffineModel model = load_valid_model(transform_path);
        const auto u = parse_complex_vector(transform_u, model.dimension());
        json out{{"method", transform_method}, {"t", transform_t}};
        std::vector<Complex> per_state;
        if (transform_method == "oracle") {
            per_state = transform_oracle(model, u, transform_t);
            json values = json::array();
            for (std::size_t i = 0; i < per_state.size(); ++i)
                values.push_back(json{{"x", model.space().points()[i]},
                                      {"value", complex_to_string(per_state[i])}});
            out["values"] = std::move(values);
        } else if (transform_method == "closed-form") {
            const Classification1D c = classify_1d(model);
            if (c.kind != Classification1D::Kind::BirthDeath || !c.normalizing_map.is_identity())
                throw NotAffine1D("closed form requires a birth-death model on {0..N}");
            const TransformValue tv = closed_form_1d(c.n, c.alpha_rate.to_double(),
                                                     c.beta_rate.to_double(), u[0], transform_t);
            out.update(transform_value_to_json(tv, model));
            for (const auto& x : model.space().points())
                per_state.push_back(transform_value_at(tv, x));
        } else {
            const RiccatiSystem sys = require_riccati_system(model);
            const TransformValue tv = solve_riccati(sys, u, transform_t, transform_tol);
            out.update(transform_value_to_json(tv, model));
            for (const auto& x : model.space().points())
                per_state.push_back(transform_value_at(tv, x));
        }
        if (!transform_csv.empty()) {
            std::ostringstream csv;
            const std::size_t d = model.dimension();
            for (std::size_t j = 0; j < d; ++j) csv << "x" << (j + 1) << ",";
            csv << "re,im\n";
            for (std::size_t i = 0; i < per_state.size(); ++i) {
                for (const auto c : model.space().points()[i]) csv << c << ",";
                csv << format_double(per_state[i].real()) << ","
                    << format_double(per_state[i].imag()) << "\n";
            }
            write_text(csv.str(), transform_csv);
        }
        emit(out, transform_out);
        return kExitOk;
    }

    if (*simulate) {
        std::ostringstream csv;
        if (simulate_hybrid_flag) {
            const HybridModel h = load_hybrid_model(simulate_path);
            // x0 = "y,z"
            const auto comma = simulate_x0.find(',');
            if (comma == std::string::npos)
                throw ParseError("hybrid --x0 expects y,z");
            const std::int64_t y0 = std::stoll(simulate_x0.substr(0, comma));
            const double z0 = std::stod(simulate_x0.substr(comma + 1));
            if (simulate_paths == 1) {
                const HybridTrajectory traj =
                    simulate_hybrid(h, y0, z0, simulate_horizon, simulate_seed);
                csv << "t_start,t_end,y,z_start,z_end\n";
                for (std::size_t i = 0; i < traj.segments.size(); ++i) {
                    const auto& seg = traj.segments[i];
                    const double t_end = traj.segment_end(i);
                    csv << format_double(seg.t_start) << "," << format_double(t_end) << ","
                        << seg.y << "," << format_double(seg.z_start) << ","
                        << format_double(seg.flow.at(t_end - seg.t_start)) << "\n";
                }
            } else {
                csv << "path,y,z\n";
                for (std::size_t p = 0; p < simulate_paths; ++p) {
                    const HybridTrajectory traj =
                        simulate_hybrid(h, y0, z0, simulate_horizon, simulate_seed, p);
                    const auto& last = traj.segments.back();
                    csv << p << "," << last.y << ","
                        << format_double(last.flow.at(simulate_horizon - last.t_start)) << "\n";
                }
            }
        } else {
            const AffineModel model = load_valid_model(simulate_path);
            const Point x0 = parse_point(simulate_x0, model.dimension());
            const std::size_t d = model.dimension();
            if (simulate_paths == 1) {
                const Trajectory traj = simulate_ssa(model, x0, simulate_horizon, simulate_seed);
                csv << "t";
                for (std::size_t j = 0; j < d; ++j) csv << ",x" << (j + 1);
                csv << "\n";
                for (const auto& [t, x] : traj.events) {
                    csv << format_double(t);
                    for (const auto c : x) csv << "," << c;
                    csv << "\n";
                }
            } else {
                const auto samples =
                    sample_at(model, x0, simulate_horizon, simulate_paths, simulate_seed);
                csv << "path";
                for (std::size_t j = 0; j < d; ++j) csv << ",x" << (j + 1);
                csv << "\n";
                for (std::size_t p = 0; p < samples.size(); ++p) {
                    csv << p;
                    for (const auto c : samples[p]) csv << "," << c;
                    csv << "\n";
                }
            }
        }
        write_text(csv.str(), simulate_out);
        return kExitOk;
    }

    if (*verify) {
        const AffineModel model = load_valid_model(verify_path);
        const auto u = parse_complex_vector(verify_u, model.dimension());
        const Point x0 = verify_x0.empty() ? model.space().points().front()
                                           : parse_point(verify_x0, model.dimension());
        const VerifyOutcome outcome =
            run_verify(model, u, verify_t, verify_paths, verify_seed, x0);
        emit(outcome.report, verify_out);
        return outcome.agreement ? kExitOk : kExitInternal;
    }

    if (*zeros) {
        const AffineModel model = load_valid_model(zeros_path);
        if (model.dimension() != 1)
            throw NotCounterCoordinates("zeros requires a one-dimensional model");
        const RiccatiSystem sys = require_riccati_system(model);
        const auto z = find_psi_zero(sys, zeros_t, {re_min, re_max, im_min, im_max},
                                     zeros_threshold);
        json out{{"t", zeros_t}, {"found", z.has_value()}};
        if (z) {
            out["u"] = complex_to_string(*z);
            out["abs_psi"] = std::abs(solve_riccati(sys, {*z}, zeros_t, 1e-12).psi[0]);
        }
        emit(out, zeros_out);
        return kExitOk;
    }

    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"affine jump processes on finite lattice state spaces"};
    try {
        return dispatch(app, argc, argv);
    } catch (const ToleranceNotMet& e) {
        std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump(2) << "\n";
        return kExitInternal;
    } catch (const Error& e) {
        std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump(2) << "\n";
        return kExitModelInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", "InvalidArgument"}, {"message", e.what()}}.dump(2) << "\n";
        return kExitModelInvalid;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump(2) << "\n";
        return kExitInternal;
    }
}
