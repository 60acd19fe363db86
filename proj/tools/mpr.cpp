// Command-line front end: config ingestion, command dispatch, CSV emission
// and JSON run manifests.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mpr/allocation.hpp"
#include "mpr/csv.hpp"
#include "mpr/density.hpp"
#include "mpr/filter.hpp"
#include "mpr/mc.hpp"
#include "mpr/mgf.hpp"
#include "mpr/voi.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mpr;

namespace {

constexpr const char* kVersion = "1.0.0";

MarketParams parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::InvalidParams, "cannot open config file: " + path);
    MarketParams p;
    p.w = 1.0;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw Error(Errc::InvalidParams,
                            "config line " + std::to_string(line_no) + " is not key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val_s = trim(line.substr(eq + 1));
        double value = 0.0;
        try {
            value = std::stod(val_s);
        } catch (...) {
            throw Error(Errc::InvalidParams, "config value for '" + key + "' is not a number");
        }
        if (key == "r") p.r = value;
        else if (key == "sigma") p.sigma = value;
        else if (key == "lambda") p.lambda = value;
        else if (key == "sigma_x") p.sigma_x = value;
        else if (key == "x_bar") p.x_bar = value;
        else if (key == "rho") p.rho = value;
        else if (key == "pi0") p.pi0 = value;
        else if (key == "r0") p.r0 = value;
        else if (key == "T") p.horizon = value;
        else if (key == "gamma") p.gamma = value;
        else if (key == "w") p.w = value;
        else throw Error(Errc::InvalidParams, "unknown config key: " + key);
    }
    return p;
}

json params_json(const MarketParams& p) {
    return json{{"r", p.r},     {"sigma", p.sigma}, {"lambda", p.lambda},
                {"sigma_x", p.sigma_x}, {"x_bar", p.x_bar}, {"rho", p.rho},
                {"pi0", p.pi0}, {"r0", p.r0},       {"T", p.horizon},
                {"gamma", p.gamma},     {"w", p.w}};
}

/// Collects written files and emits a manifest good enough to re-run the
/// command exactly.
class RunOutput {
  public:
    RunOutput(std::string out_dir, std::string command, const MarketParams& params,
              json options)
        : dir_(std::move(out_dir)), command_(std::move(command)), params_(params),
          options_(std::move(options)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (!fs::is_directory(dir_))
            throw Error(Errc::InvalidParams, "output directory is not writable: " + dir_);
    }

    void write(const std::string& name, const std::string& content) {
        const fs::path path = fs::path(dir_) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(Errc::InvalidParams, "cannot write " + path.string());
        out << content;
        std::ostringstream checksum;
        checksum << std::hex << fnv1a64(content);
        files_.push_back(json{{"file", name},
                              {"bytes", content.size()},
                              {"fnv1a64", checksum.str()}});
    }

    void finish() {
        json manifest{{"tool", "mpr"},
                      {"version", kVersion},
                      {"command", command_},
                      {"params", params_json(params_)},
                      {"options", options_},
                      {"outputs", files_}};
        const fs::path path = fs::path(dir_) / ("manifest_" + command_ + ".json");
        std::ofstream out(path);
        out << manifest.dump(2) << '\n';
    }

  private:
    std::string dir_, command_;
    MarketParams params_;
    json options_;
    std::vector<json> files_;
};

struct SolvedSystems {
    MarketParams p;
    TimeGrid grid;
    RegimeReport regime;
    RiccatiSolution full;
    FilterVariance fv;
    RiccatiSolution partial;
    QPath q;
};

SolvedSystems solve_systems(const MarketParams& raw, int grid_n = 0) {
    SolvedSystems s{validate(raw), {}, {}, {}, {}, {}, {}};
    s.grid = grid_n > 0 ? TimeGrid{0.0, s.p.horizon, grid_n} : default_grid(s.p.horizon);
    s.regime = classify(s.p);
    s.full = solve_full_riccati(s.p, s.regime, s.grid);
    s.fv = solve_filter_variance(s.p, s.grid);
    s.partial = solve_partial_riccati(s.p, s.fv, s.grid);
    s.q = q_path(s.full, s.fv, s.p);
    return s;
}

InversionSpec cli_inversion_spec(double u_max, int n_u, double alpha) {
    InversionSpec spec;
    if (u_max > 0.0) {
        spec.u_max = u_max;
        spec.auto_extend = false;
    } else {
        spec.u_max = 256.0; // auto: doubled until the tail gate passes
        spec.auto_extend = true;
    }
    spec.n_u = n_u > 0 ? n_u : static_cast<int>(spec.u_max / 0.125);
    spec.alpha = alpha;
    return spec;
}

std::vector<double> linspace(double from, double to, int n) {
    std::vector<double> v;
    if (n == 1) {
        v.push_back(from);
        return v;
    }
    for (int i = 0; i < n; ++i) v.push_back(from + (to - from) * i / (n - 1));
    return v;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

// ---------------------------------------------------------------------------
// commands

void cmd_classify(const MarketParams& params, RunOutput& out) {
    const MarketParams p = validate(params);
    const RegimeReport rep = classify(p);
    std::ostringstream csv;
    csv << std::setprecision(12)
        << "rho,gamma,regime,rho_star,gamma_star,t_star,a,b,c,delta,p,q\n"
        << p.rho << ',' << p.gamma << ',' << regime_name(rep.regime) << ',' << rep.rho_star
        << ',';
    if (rep.gamma_star) csv << *rep.gamma_star;
    csv << ',';
    if (rep.t_star) csv << *rep.t_star;
    csv << ',' << rep.a << ',' << rep.b << ',' << rep.c << ',' << rep.delta << ',' << rep.p
        << ',' << rep.q << '\n';
    out.write("classify.csv", csv.str());

    std::cout << "regime      " << regime_name(rep.regime) << '\n';
    std::cout << std::setprecision(6) << "rho_star    " << rep.rho_star << '\n';
    if (rep.gamma_star) std::cout << "gamma_star  " << *rep.gamma_star << '\n';
    if (rep.t_star) std::cout << "t_star      " << *rep.t_star << " years\n";
    std::cout << "delta       " << rep.delta << '\n';
}

void cmd_solve(const MarketParams& params, int grid_n, RunOutput& out) {
    const SolvedSystems s = solve_systems(params, grid_n);
    {
        std::ostringstream csv;
        write_riccati_csv(csv, s.full);
        out.write("riccati_full.csv", csv.str());
    }
    {
        std::ostringstream csv;
        write_riccati_csv(csv, s.partial, s.fv, s.q);
        out.write("riccati_partial.csv", csv.str());
    }
    const Admissibility adm = check_admissibility(s.full, s.partial, s.q, s.p);
    std::cout << std::setprecision(10);
    std::cout << "A(0)       " << s.full.a(0) << "   B(0) " << s.full.b(0) << "   C(0) "
              << s.full.c(0) << '\n';
    std::cout << "A~(0)      " << s.partial.a(0) << "   B~(0) " << s.partial.b(0)
              << "   C~(0) " << s.partial.c(0) << '\n';
    std::cout << "Q(0)       " << s.q.q(0) << "   R_inf " << s.fv.r_infty << '\n';
    std::cout << "admissible full=" << adm.full_ok << " partial=" << adm.partial_ok;
    if (adm.t_star_star) std::cout << "  T** = " << *adm.t_star_star;
    std::cout << '\n';
}

void cmd_strategy(const MarketParams& params, double x_state, RunOutput& out) {
    const SolvedSystems s = solve_systems(params);
    std::ostringstream csv;
    csv << std::setprecision(12) << "t,theta_full,theta_partial,nu\n";
    const int stride = std::max(1, s.grid.n / 1000);
    for (int i = 0; i <= s.grid.n; i += stride) {
        const double t = s.grid.node(i);
        csv << t << ',' << strategy_full(t, x_state, s.full, s.p) << ','
            << strategy_partial(t, x_state, s.partial, s.fv, s.p) << ','
            << penalty(t, x_state, s.full, s.p) << '\n';
    }
    out.write("strategy.csv", csv.str());
    std::cout << std::setprecision(8) << "theta_full(0)    "
              << strategy_full(0.0, x_state, s.full, s.p) << '\n'
              << "theta_partial(0) "
              << strategy_partial(0.0, x_state, s.partial, s.fv, s.p) << '\n'
              << "nu(0)            " << penalty(0.0, x_state, s.full, s.p) << '\n';
}

void cmd_density(const MarketParams& params, const std::string& kind,
                 const std::string& conditioning, double x0, double u_max, int n_u,
                 double alpha, RunOutput& out) {
    const SolvedSystems s = solve_systems(params);
    const InversionSpec spec = cli_inversion_spec(u_max, n_u, alpha);
    const Conditioning cond = conditioning == "x0" ? Conditioning::ConditionalOnX0
                                                   : Conditioning::Unconditional;
    auto emit = [&](const char* name, const RiccatiSolution& sol, const FilterVariance* fv) {
        const WealthDistribution dist = invert_to_density(s.p, sol, fv, cond, x0, spec, {});
        std::ostringstream csv;
        write_density_csv(csv, dist);
        out.write(name, csv.str());
        std::cout << std::setprecision(8) << name << ": mean " << dist.mean << "  sd "
                  << std::sqrt(dist.variance) << "  mass " << dist.raw_mass << "  u_max "
                  << dist.u_max_used << '\n';
    };
    if (kind == "full" || kind == "both") emit("density_full.csv", s.full, nullptr);
    if (kind == "partial" || kind == "both") emit("density_partial.csv", s.partial, &s.fv);
}

void cmd_frontier(const MarketParams& params, double gamma_min, double gamma_max, int n_points,
                  const std::string& kind, RunOutput& out) {
    std::vector<double> gammas;
    for (int i = 0; i < n_points; ++i)
        gammas.push_back(gamma_min * std::pow(gamma_max / gamma_min,
                                              static_cast<double>(i) / (n_points - 1)));
    auto emit = [&](const char* name, InfoKind k) {
        const auto points = frontier(params, gammas, k);
        std::ostringstream csv;
        write_frontier_csv(csv, points);
        out.write(name, csv.str());
    };
    if (kind == "full" || kind == "both") emit("frontier_full.csv", InfoKind::FullInfo);
    if (kind == "partial" || kind == "both") emit("frontier_partial.csv", InfoKind::PartialInfo);
    std::cout << "frontier over " << n_points << " risk aversions in [" << gamma_min << ", "
              << gamma_max << "]\n";
}

void cmd_voi(const MarketParams& params, const std::string& sweep, double from, double to,
             int n_points, const std::string& rho_list, RunOutput& out) {
    if (sweep.empty()) {
        const InfoValueReport rep = info_value_report(params);
        std::vector<InfoValueReport> one{rep};
        std::ostringstream csv;
        write_voi_csv(csv, "point", one);
        out.write("voi.csv", csv.str());
        std::cout << std::setprecision(8) << "V_initial  " << rep.v_initial << "\nV_dynamic  "
                  << rep.v_dynamic << "\nCE_partial " << rep.ce_partial << '\n';
        return;
    }
    SweepAxis axis;
    if (sweep == "R0") axis = SweepAxis::R0;
    else if (sweep == "T") axis = SweepAxis::Horizon;
    else if (sweep == "rho") axis = SweepAxis::Rho;
    else if (sweep == "gamma") axis = SweepAxis::Gamma;
    else throw Error(Errc::InvalidParams, "sweep axis must be one of R0, T, rho, gamma");

    const std::vector<double> values = linspace(from, to, n_points);
    std::vector<double> rhos = parse_list(rho_list);
    if (rhos.empty() || axis == SweepAxis::Rho) rhos = {params.rho};

    std::ostringstream csv;
    bool first = true;
    for (double rho : rhos) {
        MarketParams p = params;
        p.rho = rho;
        const auto reports = voi_sweep(p, axis, values);
        std::ostringstream block;
        write_voi_csv(block, sweep_axis_name(axis), reports);
        std::string text = block.str();
        if (!first) text = text.substr(text.find('\n') + 1); // keep one header
        if (first) {
            // prepend a rho column header
            csv << "rho," << text.substr(0, text.find('\n')) << '\n';
            text = text.substr(text.find('\n') + 1);
            first = false;
        }
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line))
            if (!line.empty()) csv << rho << ',' << line << '\n';
    }
    out.write("voi.csv", csv.str());
    std::cout << "voi sweep over " << sweep << " with " << n_points << " points\n";
}

void cmd_simulate(const MarketParams& params, long n_paths, int n_steps, std::uint64_t seed,
                  bool antithetic, const std::string& z_list, int dump, RunOutput& out) {
    const SolvedSystems s = solve_systems(params);
    SimConfig cfg;
    cfg.n_paths = n_paths;
    cfg.n_steps = n_steps;
    cfg.seed = seed;
    cfg.antithetic = antithetic;
    cfg.moment_exponents = parse_list(z_list);
    const SimInputs inputs{s.p, &s.full, &s.partial, &s.fv, {}};
    const std::vector<StrategySpec> strategies{StrategySpec::full(), StrategySpec::partial(),
                                               StrategySpec::myopic()};
    const SimResult res = simulate_scenarios(inputs, cfg, strategies);

    // closed-form counterparts where they exist
    auto closed_moment = [&](InfoKind k, double z) {
        const RiccatiSolution& sol = k == InfoKind::FullInfo ? s.full : s.partial;
        const FilterVariance* fv = k == InfoKind::FullInfo ? nullptr : &s.fv;
        return wealth_moment(s.p, sol, fv, Conditioning::Unconditional, s.p.pi0, z);
    };

    std::ostringstream csv;
    csv << std::setprecision(12) << "strategy,statistic,mc_mean,mc_se,closed_form\n";
    const char* names[] = {"full", "partial", "myopic"};
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        const StrategyStats& st = res.strategies[i];
        const bool opt = i < 2;
        const InfoKind k = i == 1 ? InfoKind::PartialInfo : InfoKind::FullInfo;
        csv << names[i] << ",E[W_T]," << st.terminal_wealth.mean << ','
            << st.terminal_wealth.se << ',';
        if (opt) csv << closed_moment(k, 1.0);
        csv << '\n';
        csv << names[i] << ",E[u(W_T)]," << st.utility.mean << ',' << st.utility.se << ',';
        if (opt && !s.p.log_utility())
            csv << (i == 0 ? expected_utility_full_unconditional(s.full, s.p)
                           : expected_utility_partial_unconditional(s.partial, s.p));
        csv << '\n';
        csv << names[i] << ",E[xi_T W_T]," << st.budget.mean << ',' << st.budget.se << ','
            << s.p.w << '\n';
        csv << names[i] << ",E[ln W_T]," << st.log_wealth.mean << ',' << st.log_wealth.se
            << ",\n";
        for (std::size_t j = 0; j < cfg.moment_exponents.size(); ++j) {
            csv << names[i] << ",E[W_T^" << cfg.moment_exponents[j] << "],"
                << st.moments[j].mean << ',' << st.moments[j].se << ',';
            if (opt) csv << closed_moment(k, cfg.moment_exponents[j]);
            csv << '\n';
        }
        if (opt)
            csv << names[i] << ",max_closed_form_gap," << st.max_closed_form_gap << ",,\n";
    }
    for (const FilterCheckpoint& cp : res.filter.checkpoints) {
        csv << "filter,E[X-pi](t=" << cp.t << ")," << cp.error_mean.mean << ','
            << cp.error_mean.se << ",0\n";
        csv << "filter,Var[X-pi](t=" << cp.t << ")," << cp.error_var << ',' << cp.error_var_se
            << ',' << cp.r_theory << '\n';
    }
    csv << "x,E[X_T]," << res.x_terminal_mean.mean << ',' << res.x_terminal_mean.se << ',';
    const double decay = std::exp(-s.p.lambda * s.p.horizon);
    csv << s.p.x_bar + (s.p.pi0 - s.p.x_bar) * decay << '\n';
    out.write("simulate.csv", csv.str());

    if (dump > 0) {
        std::ostringstream paths;
        dump_paths(inputs, cfg, dump, paths);
        out.write("paths.csv", paths.str());
    }
    std::cout << "simulated " << n_paths << " paths x " << n_steps << " steps (seed " << seed
              << ", antithetic " << (antithetic ? "on" : "off") << ")\n";
}

// Figure-data recipes. The base parameter set comes from the config file;
// each figure varies the axes the corresponding study figure varies.
void cmd_figures(const MarketParams& base, std::uint64_t seed, RunOutput& out) {
    (void)seed;
    std::cout << "emitting figure data to fig1.csv ... fig8.csv\n";

    // fig1: time-0 penalty vs gamma for three correlations, X0 = pi0.
    {
        std::vector<double> gammas;
        for (int i = 0; i < 64; ++i)
            gammas.push_back(0.45 * std::pow(12.0 / 0.45, i / 63.0));
        std::ostringstream csv;
        csv << std::setprecision(10) << "gamma,nu0_rho_p08,nu0_rho_0,nu0_rho_m08\n";
        for (double g : gammas) {
            csv << g;
            for (double rho : {0.8, 0.0, -0.8}) {
                MarketParams p = base;
                p.rho = rho;
                p.gamma = g;
                const RiccatiSolution full =
                    solve_full_riccati(p, classify(p), default_grid(p.horizon));
                csv << ',' << penalty(0.0, p.pi0, full, p);
            }
            csv << '\n';
        }
        out.write("fig1.csv", csv.str());
    }

    // fig2: critical existence time T* and maximal condition horizon T**
    // against gamma, for rho = 0 and rho = 0.8.
    {
        std::ostringstream csv;
        csv << std::setprecision(10)
            << "gamma,tstar_rho0,tstarstar_rho0,tstar_rho08,tstarstar_rho08\n";
        for (int i = 0; i < 80; ++i) {
            const double g = 0.02 + (0.72 - 0.02) * i / 79.0;
            csv << g;
            for (double rho : {0.0, 0.8}) {
                MarketParams p = base;
                p.rho = rho;
                p.gamma = g;
                const RegimeReport rep = classify(p);
                csv << ',';
                if (rep.t_star) csv << *rep.t_star;
                csv << ',';
                const auto tss = max_admissible_horizon(p, 60.0);
                if (tss) csv << *tss;
            }
            csv << '\n';
        }
        out.write("fig2.csv", csv.str());
    }

    // fig3: terminal-wealth densities of the matched-mean pair.
    {
        MarketParams pf = base;
        pf.gamma = 4.03;
        const SolvedSystems sf = solve_systems(pf);
        MarketParams pp = base;
        pp.gamma = 2.08;
        const SolvedSystems sp = solve_systems(pp);
        const InversionSpec spec = cli_inversion_spec(0.0, 0, 1.0);
        const auto df = invert_to_density(sf.p, sf.full, nullptr, Conditioning::Unconditional,
                                          pf.pi0, spec, {});
        const auto dp = invert_to_density(sp.p, sp.partial, &sp.fv,
                                          Conditioning::Unconditional, pp.pi0, spec, {});
        std::ostringstream csv;
        csv << std::setprecision(10) << "w_full,pdf_full,w_partial,pdf_partial\n";
        for (std::size_t k = 0; k < df.w_grid.size(); ++k)
            csv << df.w_grid[k] << ',' << df.pdf_vals[k] << ',' << dp.w_grid[k] << ','
                << dp.pdf_vals[k] << '\n';
        out.write("fig3.csv", csv.str());
    }

    // fig4: mean-std curves of the optimal strategies under both regimes.
    {
        std::vector<double> gammas;
        for (int i = 0; i < 40; ++i)
            gammas.push_back(1.3 * std::pow(20.0 / 1.3, i / 39.0));
        const auto pf = frontier(base, gammas, InfoKind::FullInfo);
        const auto pp = frontier(base, gammas, InfoKind::PartialInfo);
        std::ostringstream csv;
        csv << std::setprecision(10)
            << "gamma,std_full,mean_full,std_partial,mean_partial\n";
        for (std::size_t i = 0; i < gammas.size(); ++i) {
            csv << gammas[i] << ',';
            if (pf[i].admissible) csv << pf[i].std_return << ',' << pf[i].mean_return;
            else csv << ',';
            csv << ',';
            if (pp[i].admissible) csv << pp[i].std_return << ',' << pp[i].mean_return;
            else csv << ',';
            csv << '\n';
        }
        out.write("fig4.csv", csv.str());
    }

    // fig5: wealth cdfs, plus the partial-information investor topped up by
    // the dynamic-information reservation price (CRRA wealth scales
    // linearly, so the topped-up cdf is a rescaled abscissa).
    {
        const SolvedSystems s = solve_systems(base);
        const InversionSpec spec = cli_inversion_spec(0.0, 0, 1.0);
        const auto df = invert_to_density(s.p, s.full, nullptr, Conditioning::Unconditional,
                                          base.pi0, spec, {});
        const auto dp = invert_to_density(s.p, s.partial, &s.fv, Conditioning::Unconditional,
                                          base.pi0, spec, {});
        const InfoValueReport voi = info_value_report(base);
        std::ostringstream csv;
        csv << std::setprecision(10)
            << "w_full,cdf_full,w_partial,cdf_partial,w_topped,cdf_topped\n";
        for (std::size_t k = 0; k < df.w_grid.size(); ++k)
            csv << df.w_grid[k] << ',' << df.cdf_vals[k] << ',' << dp.w_grid[k] << ','
                << dp.cdf_vals[k] << ',' << dp.w_grid[k] * (1.0 + voi.v_dynamic) << ','
                << dp.cdf_vals[k] << '\n';
        out.write("fig5.csv", csv.str());
    }

    // fig6: V^I, V^D and the partial-information certainty equivalent
    // against the prior variance, for three correlations.
    // fig7: the ratio V^D / V^I on the same sweep.
    {
        std::vector<double> r0s;
        for (int i = 0; i <= 40; ++i) r0s.push_back(0.005 + (1.0 - 0.005) * i / 40.0);
        std::vector<std::vector<InfoValueReport>> rows;
        for (double rho : {-0.9, 0.0, 0.9}) {
            MarketParams p = base;
            p.rho = rho;
            rows.push_back(voi_sweep(p, SweepAxis::R0, r0s));
        }
        std::ostringstream f6, f7;
        f6 << std::setprecision(10)
           << "r0,vi_rho_m09,vi_rho_0,vi_rho_p09,vd_rho_m09,vd_rho_0,vd_rho_p09,"
              "ce_rho_m09,ce_rho_0,ce_rho_p09\n";
        f7 << std::setprecision(10) << "r0,ratio_rho_m09,ratio_rho_0,ratio_rho_p09\n";
        for (std::size_t i = 0; i < r0s.size(); ++i) {
            f6 << r0s[i];
            for (const auto& row : rows) f6 << ',' << row[i].v_initial;
            for (const auto& row : rows) f6 << ',' << row[i].v_dynamic;
            for (const auto& row : rows) f6 << ',' << row[i].ce_partial;
            f6 << '\n';
            f7 << r0s[i];
            for (const auto& row : rows) f7 << ',' << row[i].v_dynamic / row[i].v_initial;
            f7 << '\n';
        }
        out.write("fig6.csv", f6.str());
        out.write("fig7.csv", f7.str());
    }

    // fig8: the ratio against the investment horizon at the base prior
    // variance.
    {
        std::vector<double> horizons;
        for (int i = 0; i <= 36; ++i) horizons.push_back(1.0 + 9.0 * i / 36.0);
        std::ostringstream csv;
        csv << std::setprecision(10) << "T,ratio_rho_m09,ratio_rho_0,ratio_rho_p09\n";
        std::vector<std::vector<InfoValueReport>> rows;
        for (double rho : {-0.9, 0.0, 0.9}) {
            MarketParams p = base;
            p.rho = rho;
            rows.push_back(voi_sweep(p, SweepAxis::Horizon, horizons));
        }
        for (std::size_t i = 0; i < horizons.size(); ++i) {
            csv << horizons[i];
            for (const auto& row : rows) csv << ',' << row[i].v_dynamic / row[i].v_initial;
            csv << '\n';
        }
        out.write("fig8.csv", csv.str());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal dynamic portfolios under a latent mean-reverting market price of "
                 "risk: closed forms, filtering, wealth distributions and the value of "
                 "information"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path = "table1.cfg";
    std::string out_dir = "out";
    app.add_option("-c,--config", config_path, "flat key = value parameter file");
    app.add_option("-o,--out", out_dir, "output directory");
    std::optional<double> ov_rho, ov_gamma, ov_r0, ov_T, ov_w, ov_pi0;
    app.add_option("--rho", ov_rho, "override correlation");
    app.add_option("--gamma", ov_gamma, "override risk aversion");
    app.add_option("--r0", ov_r0, "override prior variance");
    app.add_option("--T", ov_T, "override horizon");
    app.add_option("--w", ov_w, "override initial wealth");
    app.add_option("--pi0", ov_pi0, "override prior mean");

    auto* c_classify = app.add_subcommand("classify", "regime classification report");

    auto* c_solve = app.add_subcommand("solve", "solve the Riccati systems and emit CSV");
    int grid_n = 0;
    c_solve->add_option("--grid-n", grid_n, "grid intervals (0 = default)");

    auto* c_strategy = app.add_subcommand("strategy", "strategy and penalty paths");
    std::optional<double> x_state;
    c_strategy->add_option("--x", x_state, "state value (default pi0)");

    auto* c_density = app.add_subcommand("density", "terminal-wealth density by inversion");
    std::string den_kind = "both", den_cond = "uncond";
    double den_umax = 0.0, den_alpha = 1.0;
    int den_nu = 0;
    std::optional<double> den_x0;
    c_density->add_option("--kind", den_kind, "full|partial|both")
        ->check(CLI::IsMember({"full", "partial", "both"}));
    c_density->add_option("--conditioning", den_cond, "uncond|x0")
        ->check(CLI::IsMember({"uncond", "x0"}));
    c_density->add_option("--x0", den_x0, "conditioning value (default pi0)");
    c_density->add_option("--umax", den_umax, "inversion cutoff (0 = auto-extend)");
    c_density->add_option("--nu", den_nu, "number of u intervals (0 = from spacing)");
    c_density->add_option("--alpha", den_alpha, "damping");

    auto* c_frontier = app.add_subcommand("frontier", "mean-std curves over risk aversion");
    double g_min = 1.3, g_max = 20.0;
    int g_points = 40;
    std::string fr_kind = "both";
    c_frontier->add_option("--gamma-min", g_min);
    c_frontier->add_option("--gamma-max", g_max);
    c_frontier->add_option("--points", g_points);
    c_frontier->add_option("--kind", fr_kind)
        ->check(CLI::IsMember({"full", "partial", "both"}));

    auto* c_voi = app.add_subcommand("voi", "value of initial and dynamic information");
    std::string sweep, rho_list;
    double sw_from = 0.01, sw_to = 1.0;
    int sw_points = 25;
    c_voi->add_option("--sweep", sweep, "R0|T|rho|gamma (omit for a single point)");
    c_voi->add_option("--from", sw_from);
    c_voi->add_option("--to", sw_to);
    c_voi->add_option("--points", sw_points);
    c_voi->add_option("--rho-list", rho_list, "comma-separated correlations, one block each");

    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo oracle run");
    long n_paths = 100000;
    int n_steps = 500, dump = 0;
    std::uint64_t seed = 42;
    bool no_antithetic = false;
    std::string z_list = "0.5,1,2";
    c_sim->add_option("--paths", n_paths);
    c_sim->add_option("--steps", n_steps);
    c_sim->add_option("--seed", seed);
    c_sim->add_flag("--no-antithetic", no_antithetic);
    c_sim->add_option("--z", z_list, "moment exponents");
    c_sim->add_option("--dump", dump, "dump up to N paths (cap 100)");

    auto* c_figures = app.add_subcommand("figures", "emit fig1.csv ... fig8.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        MarketParams params = parse_config(config_path);
        if (ov_rho) params.rho = *ov_rho;
        if (ov_gamma) params.gamma = *ov_gamma;
        if (ov_r0) params.r0 = *ov_r0;
        if (ov_T) params.horizon = *ov_T;
        if (ov_w) params.w = *ov_w;
        if (ov_pi0) params.pi0 = *ov_pi0;
        params = validate(params);

        json options{{"config", config_path}};
        for (auto* sub : app.get_subcommands()) options["subcommand"] = sub->get_name();

        if (c_classify->parsed()) {
            RunOutput out(out_dir, "classify", params, options);
            cmd_classify(params, out);
            out.finish();
        } else if (c_solve->parsed()) {
            options["grid_n"] = grid_n;
            RunOutput out(out_dir, "solve", params, options);
            cmd_solve(params, grid_n, out);
            out.finish();
        } else if (c_strategy->parsed()) {
            const double x = x_state.value_or(params.pi0);
            options["x"] = x;
            RunOutput out(out_dir, "strategy", params, options);
            cmd_strategy(params, x, out);
            out.finish();
        } else if (c_density->parsed()) {
            const double x0 = den_x0.value_or(params.pi0);
            options["kind"] = den_kind;
            options["conditioning"] = den_cond;
            options["x0"] = x0;
            options["umax"] = den_umax;
            options["nu"] = den_nu;
            options["alpha"] = den_alpha;
            RunOutput out(out_dir, "density", params, options);
            cmd_density(params, den_kind, den_cond, x0, den_umax, den_nu, den_alpha, out);
            out.finish();
        } else if (c_frontier->parsed()) {
            options["gamma_min"] = g_min;
            options["gamma_max"] = g_max;
            options["points"] = g_points;
            options["kind"] = fr_kind;
            RunOutput out(out_dir, "frontier", params, options);
            cmd_frontier(params, g_min, g_max, g_points, fr_kind, out);
            out.finish();
        } else if (c_voi->parsed()) {
            options["sweep"] = sweep;
            options["from"] = sw_from;
            options["to"] = sw_to;
            options["points"] = sw_points;
            options["rho_list"] = rho_list;
            RunOutput out(out_dir, "voi", params, options);
            cmd_voi(params, sweep, sw_from, sw_to, sw_points, rho_list, out);
            out.finish();
        } else if (c_sim->parsed()) {
            options["paths"] = n_paths;
            options["steps"] = n_steps;
            options["seed"] = seed;
            options["antithetic"] = !no_antithetic;
            options["z"] = z_list;
            options["dump"] = dump;
            RunOutput out(out_dir, "simulate", params, options);
            cmd_simulate(params, n_paths, n_steps, seed, !no_antithetic, z_list, dump, out);
            out.finish();
        } else if (c_figures->parsed()) {
            RunOutput out(out_dir, "figures", params, options);
            cmd_figures(params, seed, out);
            out.finish();
        }
    } catch (const Error& e) {
        const int code = errc_exit_code(e.code());
        json err{{"error", errc_name(e.code())}, {"exit", code}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return code;
    } catch (const std::exception& e) {
        json err{{"error", "Internal"}, {"exit", 1}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
    return 0;
}
