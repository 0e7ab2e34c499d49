#include "qwave/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "qwave/charts.hpp"
#include "qwave/errors.hpp"
#include "qwave/evolve.hpp"
#include "qwave/io.hpp"
#include "qwave/verify.hpp"

namespace qwave::experiment {

namespace fs = std::filesystem;
using config::ExperimentConfig;
using nlohmann::json;

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json optional_json(const std::optional<double>& x) { return x ? number_or_null(*x) : json(nullptr); }

template <class F>
std::string render(F&& write) {
    std::ostringstream os;
    write(os);
    return os.str();
}

void emit(const fs::path& dir, const std::string& name, const std::string& content) {
    io::write_text(dir / name, content);
}

std::pair<model::RadialProfile, model::RadialProfile> data_on(const ExperimentConfig& cfg, model::Grid grid) {
    auto [f, g] = model::make_bump(cfg.epsilon, model::parse_bump_kind(cfg.bump), grid);
    if (cfg.mollify_n > 0) {
        const auto kernel = model::MollifierKernel::standard();
        f = model::mollify(f, cfg.mollify_n, kernel);
        g = model::mollify(g, cfg.mollify_n, kernel);
    }
    return {f, g};
}

evolve::RunHistory run_on(const ExperimentConfig& cfg, std::size_t N) {
    ExperimentConfig c = cfg;
    c.N = N;
    const auto [f, g] = data_on(c, c.grid());
    return evolve::run(f, g, c.coefficient(), c.run_options());
}

// subcommands --------------------------------------------------------------------

int do_run(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto history = run_on(cfg, cfg.N);
    log << "run: " << history.step_count() << " steps to T = " << cfg.T << "\n";
    const auto series = functionals::compute_series(history, cfg.K);
    emit(out, "series.csv", render([&](std::ostream& os) { write_series_csv(os, series); }));

    std::vector<double> times;
    if (cfg.snapshots == 1) {
        times.push_back(cfg.T);
    } else {
        for (std::size_t i = 0; i < cfg.snapshots; ++i)
            times.push_back(cfg.T * static_cast<double>(i) / static_cast<double>(cfg.snapshots - 1));
    }
    for (double t : times) {
        const auto& level = history.nearest_sample(t);
        emit(out, state_file_name(level.state.t),
             render([&](std::ostream& os) { write_state_csv(os, level); }));
    }

    std::vector<charts::Characteristic> fan;
    const double r_max = history.grid().r_max();
    for (std::size_t j = 0; j < cfg.fan; ++j) {
        const double frac = static_cast<double>(j) / static_cast<double>(cfg.fan);
        const double gamma = frac;
        const double beta = std::min(cfg.T, r_max) * (static_cast<double>(j) + 1.0) / static_cast<double>(cfg.fan);
        fan.push_back(charts::trace(history, charts::Family::plus, {charts::SeedKind::gamma, gamma}, {}, cfg.substeps));
        if (beta < r_max)
            fan.push_back(charts::trace(history, charts::Family::minus, {charts::SeedKind::beta, beta}, {},
                                        cfg.substeps));
    }
    emit(out, "characteristics.csv",
         render([&](std::ostream& os) { charts::write_characteristics_csv(os, fan); }));
    return exit_ok;
}

int do_verify(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto history = run_on(cfg, cfg.N);
    log << "verify: base run at N = " << cfg.N << " done\n";
    std::optional<evolve::RunHistory> refined;
    if (cfg.refine) {
        refined.emplace(run_on(cfg, 2 * cfg.N));
        log << "verify: refined run at N = " << 2 * cfg.N << " done\n";
    }
    verify::VerifyOptions opts;
    opts.radii_per_snapshot = cfg.radii;
    opts.substeps = cfg.substeps;
    opts.local_horizon = cfg.local_horizon;
    const auto report = verify::verify_theorem21(history, cfg.K, cfg.epsilon, refined ? &*refined : nullptr, opts);
    const auto series = functionals::compute_series(history, cfg.K);
    emit(out, "series.csv", render([&](std::ostream& os) { write_series_csv(os, series); }));
    emit(out, "report.json", render([&](std::ostream& os) { verify::write_report_json(os, report); }));
    emit(out, "report.csv", render([&](std::ostream& os) { verify::write_report_csv(os, report); }));
    for (const auto& w : report.warnings) log << "verify: warning: " << w << "\n";
    if (report.any_saturated()) {
        log << "verify: saturation flagged\n";
        return exit_saturation;
    }
    return exit_ok;
}

int do_linear_check(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    std::vector<model::RadialProfile> family;
    for (double s : cfg.scales) family.push_back(verify::scaled_bump(s, cfg.R_max));
    const auto table = verify::linear_strichartz_check(family, cfg.T, cfg.delta);
    emit(out, "strichartz.csv", render([&](std::ostream& os) {
             os << "support,numerator,denominator,ratio,in_cone,in_cone_weighted,in_cone_tail,"
                   "in_cone_weighted_tail\n";
             for (const auto& r : table.rows) {
                 os << io::format_double(r.support) << "," << io::format_double(r.numerator) << ","
                    << io::format_double(r.denominator) << "," << io::format_optional(r.ratio) << ","
                    << io::format_double(r.in_cone) << "," << io::format_double(r.in_cone_weighted) << ","
                    << io::format_double(r.in_cone_tail) << "," << io::format_double(r.in_cone_weighted_tail)
                    << "\n";
             }
         }));
    json j;
    j["T"] = cfg.T;
    j["delta"] = cfg.delta;
    j["max_ratio"] = optional_json(table.max_ratio);
    j["min_ratio"] = optional_json(table.min_ratio);
    j["spread"] = optional_json(table.spread());
    emit(out, "strichartz.json", j.dump(2) + "\n");
    if (auto s = table.spread()) log << "linear-check: ratio spread " << *s << "\n";
    return exit_ok;
}

verify::HomotopyFamily homotopy(const ExperimentConfig& cfg, double factor) {
    const auto [f, g] = initial_data(cfg);
    return {f, g, f.scaled(factor), g.scaled(factor), cfg.lambdas};
}

int do_stability(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto model = cfg.coefficient();
    const auto opts = cfg.run_options();
    const auto full = verify::stability_check(homotopy(cfg, cfg.perturbation), model, opts);
    const double half_factor = 1.0 + 0.5 * (cfg.perturbation - 1.0);
    verify::HomotopyFamily half_family = homotopy(cfg, half_factor);
    half_family.lambdas.clear();
    const auto half = verify::stability_check(half_family, model, opts);

    emit(out, "stability_gaps.csv", render([&](std::ostream& os) {
             os << "t,gap,grad_l2,ut_l2,gap_half\n";
             for (std::size_t i = 0; i < full.gaps.size(); ++i) {
                 const auto& g = full.gaps[i];
                 os << io::format_double(g.t) << "," << io::format_double(g.gap) << ","
                    << io::format_double(g.grad_l2) << "," << io::format_double(g.ut_l2) << ","
                    << (i < half.gaps.size() ? io::format_double(half.gaps[i].gap) : std::string{}) << "\n";
             }
         }));
    emit(out, "stability_lambda.csv", render([&](std::ostream& os) {
             os << "lambda,sup_u,final_E1,gap_ratio\n";
             for (const auto& r : full.lambda_rows)
                 os << io::format_double(r.lambda) << "," << io::format_double(r.sup_u) << ","
                    << io::format_double(r.final_E1) << "," << io::format_optional(r.gap_ratio) << "\n";
         }));
    json j;
    j["perturbation"] = cfg.perturbation;
    j["kappa"] = full.kappa;
    j["sup_ratio"] = number_or_null(full.sup_ratio);
    j["sup_ratio_t"] = full.sup_ratio_t;
    j["half_perturbation"] = half_factor;
    j["half_kappa"] = half.kappa;
    j["half_sup_ratio"] = number_or_null(half.sup_ratio);
    std::optional<double> change;
    if (full.sup_ratio > 0.0 && half.sup_ratio > 0.0)
        change = std::max(full.sup_ratio, half.sup_ratio) / std::min(full.sup_ratio, half.sup_ratio);
    j["halving_change_factor"] = optional_json(change);
    emit(out, "stability.json", j.dump(2) + "\n");
    log << "stability: sup gap/kappa = " << full.sup_ratio << "\n";
    return exit_ok;
}

int do_convergence(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto kind = model::parse_bump_kind(cfg.bump);
    const double c = model::bump_scale(cfg.epsilon, kind, cfg.grid());
    const bool has_f = kind != model::BumpKind::velocity;
    const bool has_g = kind != model::BumpKind::displacement;
    auto f = [=](double r) { return has_f ? c * model::bump_base(r) : 0.0; };
    auto g = [=](double r) { return has_g ? c * model::bump_base(r) : 0.0; };
    const auto res = evolve::convergence_order(f, g, cfg.coefficient(), cfg.R_max, cfg.resolutions, cfg.run_options());
    json j;
    j["resolutions"] = res.resolutions;
    json diffs = json::array();
    for (double d : res.differences) diffs.push_back(number_or_null(d));
    j["differences"] = diffs;
    j["order"] = optional_json(res.order);
    j["exact"] = res.exact();
    emit(out, "convergence.json", j.dump(2) + "\n");
    emit(out, "convergence.csv", render([&](std::ostream& os) {
             os << "N,difference\n";
             for (std::size_t i = 0; i < res.differences.size(); ++i)
                 os << res.resolutions[i] << "," << io::format_double(res.differences[i]) << "\n";
         }));
    if (res.order) log << "convergence: observed order " << *res.order << "\n";
    return exit_ok;
}

int do_maximal(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto rows = verify::maximal_selftest(cfg.seed, cfg.selftest_N, cfg.selftest_cases);
    emit(out, "maximal_selftest.csv", render([&](std::ostream& os) { verify::write_maximal_csv(os, rows); }));
    const auto failed = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.pass; });
    log << "maximal-selftest: " << rows.size() - static_cast<std::size_t>(failed) << "/" << rows.size()
        << " rows pass\n";
    return failed ? exit_saturation : exit_ok;
}

} // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"run",       "verify",      "linear-check",
                                                   "stability", "convergence", "maximal-selftest"};
    return names;
}

std::pair<model::RadialProfile, model::RadialProfile> initial_data(const ExperimentConfig& cfg) {
    return data_on(cfg, cfg.grid());
}

std::string manifest_json(const ExperimentConfig& cfg, const std::string& subcommand) {
    json j;
    j["subcommand"] = subcommand;
    j["config"] = cfg.to_text();
    json params = json::object();
    std::istringstream in(cfg.to_text());
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 3);
        double x = 0.0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
        if (ec == std::errc() && p == value.data() + value.size() && std::isfinite(x))
            params[key] = x;
        else
            params[key] = value;
    }
    j["parameters"] = params;
    return j.dump(2) + "\n";
}

ExperimentConfig load_manifest(const fs::path& manifest) {
    const std::string text = io::read_text(manifest);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config::ConfigError(manifest.string() + ": " + e.what(), 0);
    }
    if (!j.contains("config") || !j["config"].is_string())
        throw config::ConfigError(manifest.string() + ": missing 'config' entry", 0);
    return config::parse_config(j["config"].get<std::string>());
}

void write_series_csv(std::ostream& os, const std::vector<functionals::SeriesRow>& rows) {
    os << "t,sup_u,sup_du_in_cone,sup_du_out_cone,E1,E2,W_K_partial,log_disp_partial\n";
    for (const auto& r : rows) {
        os << io::format_double(r.t) << "," << io::format_double(r.sup_u) << ","
           << io::format_double(r.sup_du_in_cone) << "," << io::format_double(r.sup_du_out_cone) << ","
           << io::format_double(r.E1) << "," << io::format_double(r.E2) << "," << io::format_double(r.W_K_partial)
           << "," << io::format_double(r.log_disp_partial) << "\n";
    }
}

void write_state_csv(std::ostream& os, const evolve::ArchivedLevel& level) {
    const auto d = functionals::field_derivatives(level);
    os << "r,v,w,u,ut,ur\n";
    for (std::size_t i = 0; i < d.v.size(); ++i) {
        os << io::format_double(d.grid.r(i)) << "," << io::format_double(d.v[i]) << ","
           << io::format_double(d.w[i]) << "," << io::format_double(d.u[i]) << "," << io::format_double(d.ut[i])
           << "," << io::format_double(d.ur[i]) << "\n";
    }
}

std::string state_file_name(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "state_%.3f.csv", t);
    return buf;
}

int execute(const ExperimentConfig& cfg, const std::string& subcommand, const fs::path& out_dir,
            std::ostream& log) {
    try {
        config::validate(cfg);
        if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end()) {
            log << "error: unknown subcommand '" << subcommand << "'\n";
            return exit_config;
        }
        io::ensure_directory(out_dir);
        emit(out_dir, "run_manifest.json", manifest_json(cfg, subcommand));
        if (subcommand == "run") return do_run(cfg, out_dir, log);
        if (subcommand == "verify") return do_verify(cfg, out_dir, log);
        if (subcommand == "linear-check") return do_linear_check(cfg, out_dir, log);
        if (subcommand == "stability") return do_stability(cfg, out_dir, log);
        if (subcommand == "convergence") return do_convergence(cfg, out_dir, log);
        return do_maximal(cfg, out_dir, log);
    } catch (const config::ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const GuardTrip& e) {
        log << "blow-up guard: " << e.what() << "\n";
        return exit_guard;
    } catch (const DomainTooSmall& e) {
        log << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const ArgumentError& e) {
        log << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const IoError& e) {
        log << "I/O error: " << e.what() << "\n";
        return exit_io;
    }
}

} // namespace qwave::experiment
