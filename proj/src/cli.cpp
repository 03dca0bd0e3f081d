#include "mvsde/cli.hpp"

#include "mvsde/chaos.hpp"
#include "mvsde/csv.hpp"
#include "mvsde/engine.hpp"
#include "mvsde/flow.hpp"
#include "mvsde/model.hpp"
#include "mvsde/solver.hpp"
#include "mvsde/yamada.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace mvsde {

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::config: return 2;
        case ErrorKind::blow_up: return 3;
        case ErrorKind::non_convergence: return 4;
        default: return 1;
    }
}

namespace {

template <class Writer>
std::string to_csv(Writer w) {
    std::ostringstream os;
    w(os);
    return os.str();
}

void write_assumption_row(std::ostream& os, const AssumptionCheck& c) {
    os << c.name << ',' << fmt_num(c.declared) << ',' << fmt_num(c.estimated) << ',' << c.violations << ','
       << fmt_num(c.worst_excess) << ',' << (c.pass ? 1 : 0) << ',';
    if (c.has_witness) os << fmt_num(c.witness_x) << ',' << fmt_num(c.witness_y);
    else os << ',';
    os << '\n';
}

void run_simulate(const RunConfig& c, const ModelSpec& model, Artifacts& out, std::ostream& log) {
    const PathRecord rec = c.mollify_n > 0 ? simulate_mollified(c.sim, model, c.init, c.mollify_n)
                                           : simulate_interacting(c.sim, model, c.init);
    out["paths.csv"] = to_csv([&](std::ostream& os) {
        if (c.output_format == "wide") write_wide_csv(os, rec);
        else write_long_csv(os, rec);
    });
    log << "particles: " << rec.particles() << "\nsteps: " << rec.times.size() - 1
        << "\nfinal mean: " << fmt_num(rec.snapshots.back().mean()) << '\n';
}

void run_solve(const RunConfig& c, const ModelSpec& model, Artifacts& out, std::ostream& log) {
    const FixedPointResult fp = solve_fixed_point(c.sim, model, c.init, c.solver);
    std::ostringstream rhos;
    for (double r : fp.rho) rhos << ' ' << fmt_num(r);
    if (fp.tol_below_noise_floor)
        log << "warning: solver.tol " << fmt_num(c.solver.tol) << " is below the noise floor "
            << fmt_num(fp.noise_floor.front()) << '\n';
    if (!fp.converged)
        throw NonConvergenceError("no convergence in " + std::to_string(fp.iterations()) + " iterations; rho:" +
                                  rhos.str());
    out["flow.csv"] = to_csv([&](std::ostream& os) { write_flow_csv(os, fp.flow); });
    out["diagnostics.csv"] = to_csv([&](std::ostream& os) { write_diagnostics_csv(os, fp); });
    log << "lambda: " << fmt_num(fp.lambda) << "\niterations: " << fp.iterations() << "\nstop: " << to_string(fp.reason)
        << "\nrho:" << rhos.str() << "\nnoise floor: " << fmt_num(fp.noise_floor.back()) << '\n';
}

Reference reference_for(const RunConfig& c, const ModelSpec& model, std::ostream& log) {
    Reference ref = build_reference(c.sim, model, c.init, c.reference_M, c.sim.seed);
    log << "reference: " << ref.kind << " (M = " << c.reference_M << ", own error ~ " << fmt_num(ref.own_error)
        << ")\n";
    return ref;
}

void run_chaos_rate(const RunConfig& c, const ModelSpec& model, Artifacts& out, std::ostream& log) {
    const Reference ref = reference_for(c, model, log);
    const RateReport r = estimate_chaos_rate(c.sim, model, c.init, c.N_list, c.replicas, ref);
    out["rate.csv"] = to_csv([&](std::ostream& os) { write_rate_csv(os, r); });
    out["rate_summary.csv"] = to_csv([&](std::ostream& os) { write_rate_summary_csv(os, r); });
    out["runs.csv"] = to_csv([&](std::ostream& os) { write_runs_csv(os, r.runs); });
    log << "slope: " << fmt_num(r.fit.slope) << " +- " << fmt_num(r.fit.slope_stderr)
        << "\ntheoretical exponent: " << fmt_num(r.theoretical_exponent) << '\n';
}

void run_coupling(const RunConfig& c, const ModelSpec& model, Artifacts& out, std::ostream& log) {
    const Reference ref = reference_for(c, model, log);
    const CouplingCurve cc = coupling_error_curve(c.sim, model, c.init, ref.flow, c.N_list, c.replicas);
    out["coupling.csv"] = to_csv([&](std::ostream& os) { write_coupling_csv(os, cc); });
    out["runs.csv"] = to_csv([&](std::ostream& os) { write_runs_csv(os, cc.runs); });
    std::size_t holds = 0;
    for (const auto& r : cc.runs) holds += r.triangle_holds() ? 1 : 0;
    log << "slope: " << fmt_num(cc.fit.slope) << " +- " << fmt_num(cc.fit.slope_stderr) << "\ntriangle holds: " << holds
        << '/' << cc.runs.size() << '\n';
}

void run_tv_study(const RunConfig& c, const ModelSpec& model, Artifacts& out, std::ostream& log) {
    require_tv_preconditions(model);
    const Reference ref = reference_for(c, model, log);
    const auto rows = marginal_tv_study(c.sim, model, c.init, ref.flow, c.tv_N_list, c.tv_replicas, c.tv_times,
                                        c.tv_bin_width);
    out["tv.csv"] = to_csv([&](std::ostream& os) { write_tv_csv(os, rows); });
    for (const auto& r : rows) log << "N = " << r.N << ", t = " << fmt_num(r.t) << ": tv " << fmt_num(r.tv) << '\n';
}

void run_check_assumptions(const RunConfig& c, const ModelSpec& model, Artifacts& out, std::ostream& log) {
    AuditSpec spec = c.audit;
    spec.r = c.sim.delay();
    spec.h = c.sim.dt;
    const AssumptionReport rep = check_assumptions(model, spec);
    out["assumptions.csv"] = to_csv([&](std::ostream& os) {
        os << "condition,declared,estimated,violations,worst_excess,pass,witness_x,witness_y\n";
        write_assumption_row(os, rep.drift);
        write_assumption_row(os, rep.diffusion);
        write_assumption_row(os, rep.path_drift);
    });
    log << rep.note << "\nalpha estimate: " << fmt_num(rep.alpha_hat) << '\n';
}

void run_yamada_verify(const RunConfig& c, Artifacts& out, std::ostream& log) {
    const YamadaFunction v = make_yamada(c.yamada_epsilon);
    const auto xs = yamada_grid(v, c.yamada_points);
    const YamadaAudit audit = audit_yamada(v, xs);
    if (!audit.pass())
        throw DomainError("V_eps audit failed: " + std::to_string(audit.r1_violations) + " first-property and " +
                          std::to_string(audit.r2_violations) + " second-property violations");
    out["yamada.csv"] = to_csv([&](std::ostream& os) { write_yamada_csv(os, audit); });
    log << "epsilon: " << fmt_num(v.epsilon()) << "\nsupport: [" << fmt_num(v.support_lo()) << ", "
        << fmt_num(v.support_hi()) << "]\npoints: " << xs.size() << "\nviolations: 0\n";
}

}  // namespace

Artifacts run(const RunConfig& c, std::ostream& log) {
    set_thread_count(c.threads);
    for (const auto& w : c.warnings) log << "warning: " << w << '\n';
    Artifacts out;
    if (c.command == "yamada-verify") {
        run_yamada_verify(c, out, log);
    } else {
        const ModelSpec model = build_model(c);
        if (c.command == "simulate") run_simulate(c, model, out, log);
        else if (c.command == "solve") run_solve(c, model, out, log);
        else if (c.command == "chaos-rate") run_chaos_rate(c, model, out, log);
        else if (c.command == "coupling") run_coupling(c, model, out, log);
        else if (c.command == "tv-study") run_tv_study(c, model, out, log);
        else if (c.command == "check-assumptions") run_check_assumptions(c, model, out, log);
        else throw ConfigError("command", "unknown subcommand '" + c.command + "'");
    }
    out["manifest.txt"] = manifest_text(c);
    return out;
}

void commit_artifacts(const std::string& dir, const Artifacts& artifacts) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::pair<fs::path, fs::path>> staged;
    for (const auto& [name, content] : artifacts) {
        const fs::path final_path = fs::path(dir) / name;
        fs::path tmp = final_path;
        tmp += ".tmp";
        std::ofstream os(tmp, std::ios::binary);
        os << content;
        os.close();
        if (!os) {
            for (const auto& s : staged) fs::remove(s.first);
            fs::remove(tmp);
            throw DomainError("cannot write '" + tmp.string() + "'");
        }
        staged.emplace_back(tmp, final_path);
    }
    for (const auto& [tmp, final_path] : staged) fs::rename(tmp, final_path);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Particle simulation of path-dependent McKean-Vlasov SDEs", "mvsde"};
    app.set_version_flag("--version", std::string(MVSDE_VERSION));
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "config file of key = value lines");
    app.add_option("--set", sets, "override: key=value (repeatable)");

    std::map<std::string, std::string> flagged;
    for (const auto& k : config_keys()) app.add_option(std::string("--") + k.key, flagged[k.key], k.help);
    std::string epsilon;
    std::string model;
    app.add_option("--epsilon", epsilon, "alias of --yamada.epsilon");
    app.add_option("--model", model, "alias of --model.name");

    const std::map<std::string, std::string> about{
        {"simulate", "interacting particle paths"},
        {"solve", "Picard fixed point of the measure flow"},
        {"chaos-rate", "W1 error against the limit law across particle counts"},
        {"coupling", "pathwise error of the synchronous coupling"},
        {"tv-study", "one-particle total variation and Pinsker check"},
        {"check-assumptions", "sampled audit of the declared constants"},
        {"yamada-verify", "grid audit of V_eps"}};
    for (const auto& name : subcommands()) app.add_subcommand(name, about.at(name))->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        KeyValues overrides;
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("--set", "expected key=value, got '" + s + "'");
            overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
        for (const auto& k : config_keys())
            if (app.count(std::string("--") + k.key) > 0) overrides.emplace_back(k.key, flagged[k.key]);
        if (app.count("--epsilon") > 0) overrides.emplace_back("yamada.epsilon", epsilon);
        if (app.count("--model") > 0) overrides.emplace_back("model.name", model);

        const RunConfig config = config_path.empty() ? parse_config(command, {}, overrides)
                                                     : parse_config_file(command, config_path, overrides);
        const Artifacts artifacts = run(config, out);
        commit_artifacts(config.out_dir, artifacts);
        out << "wrote " << artifacts.size() << " files to " << config.out_dir << '\n';
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace mvsde
