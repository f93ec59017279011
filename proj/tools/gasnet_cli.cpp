// Command-line front end over the shared-library C interface.

#include "gasnet.h"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace {

int fail(int rc) {
    std::fprintf(stderr, "error: %s\n", gasnet_last_error());
    return rc;
}

struct NetHandle {
    gasnet_network* p = nullptr;
    ~NetHandle() { gasnet_network_free(p); }
};

int open_network(const std::string& path, NetHandle& h) {
    // Benchmark names double as network arguments everywhere a path fits.
    if (gasnet_network_bench(path.c_str(), &h.p) == GASNET_OK)
        return GASNET_OK;
    return gasnet_network_load(path.c_str(), &h.p);
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(std::strtod(item.c_str(), nullptr));
    return out;
}

void print_counts(gasnet_network* net) {
    int v = 0, vs = 0, e = 0, c = 0, dim = 0;
    gasnet_network_counts(net, &v, &vs, &e, &c, &dim);
    std::printf("%d nodes (%d supply), %d pipes, %d compressors, state dimension %d\n",
                v, vs, e, c, dim);
}

void print_state(const gasnet_state_summary& s) {
    std::printf("density %.6g .. %.6g kg/m^3, flux %.6g .. %.6g kg/m^2/s, line pack %.6g kg\n",
                s.rho_min, s.rho_max, s.phi_min, s.phi_max, s.line_pack_kg);
}

double read_summary_objective(const std::string& dir) {
    std::ifstream in(dir + "/summary.csv");
    if (!in)
        return std::numeric_limits<double>::quiet_NaN();
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("objective,", 0) == 0)
            return std::strtod(line.c_str() + 10, nullptr);
    return std::numeric_limits<double>::quiet_NaN();
}

// Relative energy difference against a previous run's summary, appended to
// this run's summary so the pair is auditable from either directory.
int report_gap(const std::string& out_dir, const std::string& cmp_dir, double objective) {
    double other = read_summary_objective(cmp_dir);
    if (other != other) {
        std::fprintf(stderr, "error: no objective in %s/summary.csv\n", cmp_dir.c_str());
        return 2;
    }
    double ref = std::min(std::abs(objective), std::abs(other));
    double gap = std::abs(objective - other) / (ref > 1e-300 ? ref : 1e-300) * 100.0;
    std::printf("energy gap vs %s: %.4g%%\n", cmp_dir.c_str(), gap);
    std::ofstream app(out_dir + "/summary.csv", std::ios::app);
    app << "energy_gap_pct," << gap << "\ncompared_to," << cmp_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    if (const char* tn = std::getenv("GASNET_THREADS"))
        gasnet_set_threads(std::atoi(tn));

    CLI::App app{"gas pipeline network simulation, analysis, and compressor scheduling"};
    app.require_subcommand(1);

    std::string network, scenario, out, policy, mu_text, name, compare_dir;
    double lmax_km = 10, t_s = 0, dt_s = 60, kappa = 0.1, period_s = 3600;
    double horizon_hr = 2, tol_pct = 1.0, dt_min = 60;
    double plen_km = 5, pdiam = 0.5, pfric = 0.011, psigma = 377, prho = 35, pphi = 300;
    double fmin = 0.01, fmax = 100;
    int samples = 240;
    bool sinusoidal = false, nonlinear = false, fixed_model = false;
    std::string variants = "all";

    auto add_net = [&](CLI::App* c) {
        c->add_option("--network", network, "network document path, or cyclic5 | tree25")
            ->required();
        c->add_option("--scenario", scenario, "boundary scenario document (default: embedded)");
    };

    CLI::App* validate = app.add_subcommand("validate", "parse and check a network document");
    add_net(validate);

    CLI::App* refine = app.add_subcommand("refine", "split pipes to a maximum segment length");
    add_net(refine);
    refine->add_option("--lmax-km", lmax_km, "maximum segment length, km")->required();
    refine->add_option("--out", out, "refined network document path")->required();

    CLI::App* steady = app.add_subcommand("steady", "solve the steady state at one instant");
    add_net(steady);
    steady->add_option("--mu", mu_text, "compressor ratios, comma separated (default all 1)");
    steady->add_option("--time-s", t_s, "scenario time for boundary values");
    steady->add_option("--out", out, "state CSV path");

    CLI::App* simulate = app.add_subcommand("simulate", "integrate the scenario horizon");
    add_net(simulate);
    simulate->add_option("--policy", policy, "compressor policy CSV (default ratios 1)");
    simulate->add_option("--dt-s", dt_s, "integration step, s");
    simulate->add_option("--out", out, "trajectory CSV path")->required();

    CLI::App* linearize = app.add_subcommand("linearize", "dump the model about a steady state");
    add_net(linearize);
    linearize->add_option("--mu", mu_text, "compressor ratios, comma separated");
    linearize->add_option("--time-s", t_s, "scenario time for boundary values");
    linearize->add_option("--out", out, "output directory")->required();

    CLI::App* spectrum = app.add_subcommand("spectrum", "state-matrix eigenvalues");
    add_net(spectrum);
    spectrum->add_option("--mu", mu_text, "compressor ratios, comma separated");
    spectrum->add_option("--time-s", t_s, "scenario time for boundary values");
    spectrum->add_option("--out", out, "eigenvalue CSV path");

    CLI::App* bode = app.add_subcommand("bode", "single-pipe transfer response, all variants");
    bode->add_option("--network", name, "built-in pipe: pipe5km | pipe50km");
    bode->add_option("--length-km", plen_km, "pipe length, km");
    bode->add_option("--diameter", pdiam, "diameter, m");
    bode->add_option("--friction", pfric, "friction factor");
    bode->add_option("--sigma", psigma, "sound speed, m/s");
    bode->add_option("--rho", prho, "baseline density, kg/m^3");
    bode->add_option("--phi", pphi, "baseline flux, kg/m^2/s");
    bode->add_option("--fmin", fmin, "lowest frequency, cyc/hr");
    bode->add_option("--fmax", fmax, "highest frequency, cyc/hr");
    bode->add_option("--samples", samples, "frequency samples");
    bode->add_option("--variants", variants, "variant set (only: all)");
    bode->add_option("--out", out, "response CSV path")->required();

    CLI::App* bound = app.add_subcommand("bound", "linearization error bound curve");
    add_net(bound);
    bound->add_option("--mu", mu_text, "compressor ratios, comma separated");
    bound->add_option("--time-s", t_s, "scenario time for the nominal state");
    bound->add_option("--kappa", kappa, "perturbation fraction in (0,1)")->required();
    bound->add_flag("--sin", sinusoidal, "sinusoidal perturbation weighting");
    bound->add_option("--period-s", period_s, "sinusoid period, s");
    bound->add_option("--horizon-hr", horizon_hr, "curve horizon, hours");
    bound->add_option("--tol-pct", tol_pct, "crossing threshold, percent");
    bound->add_option("--out", out, "curve CSV path");

    CLI::App* mpc = app.add_subcommand("mpc", "receding-horizon compressor scheduling");
    add_net(mpc);
    mpc->add_option("--dt-minutes", dt_min, "segment length, minutes");
    mpc->add_flag("--nonlinear", nonlinear, "iterate each segment against the nonlinear step");
    mpc->add_flag("--fixed-model", fixed_model, "keep the initial linear model throughout");
    mpc->add_option("--out", out, "output directory")->required();
    mpc->add_option("--compare", compare_dir, "report energy gap vs this run directory");

    CLI::App* oc = app.add_subcommand("oc", "whole-horizon open-loop compressor scheduling");
    add_net(oc);
    oc->add_option("--dt-minutes", dt_min, "segment length, minutes");
    oc->add_flag("--nonlinear", nonlinear, "iterate against the nonlinear rollout");
    oc->add_option("--out", out, "output directory")->required();
    oc->add_option("--compare", compare_dir, "report energy gap vs this run directory");

    CLI::App* bench = app.add_subcommand("bench", "emit a built-in study network");
    bench->add_option("--name", name, "cyclic5 | tree25")->required();
    bench->add_option("--emit", out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) {
        NetHandle h;
        if (open_network(network, h) != GASNET_OK)
            return fail(2);
        std::printf("ok: ");
        print_counts(h.p);
        return 0;
    }

    if (refine->parsed()) {
        NetHandle h, r;
        if (open_network(network, h) != GASNET_OK)
            return fail(2);
        int rc = gasnet_network_refine(h.p, lmax_km * 1000.0, &r.p);
        if (rc != GASNET_OK)
            return fail(rc);
        rc = gasnet_network_save(r.p, out.c_str());
        if (rc != GASNET_OK)
            return fail(rc);
        print_counts(r.p);
        std::printf("wrote %s\n", out.c_str());
        return 0;
    }

    if (steady->parsed() || simulate->parsed() || linearize->parsed() || spectrum->parsed() ||
        bound->parsed() || mpc->parsed() || oc->parsed()) {
        NetHandle h;
        if (open_network(network, h) != GASNET_OK)
            return fail(2);
        std::vector<double> mu = parse_list(mu_text);
        const double* mup = mu.empty() ? nullptr : mu.data();
        const char* scn = scenario.empty() ? nullptr : scenario.c_str();

        if (steady->parsed()) {
            gasnet_state_summary s{};
            int rc = gasnet_steady(h.p, scn, mup, int(mu.size()), t_s,
                                   out.empty() ? nullptr : out.c_str(), &s);
            if (rc != GASNET_OK)
                return fail(rc);
            print_state(s);
            return 0;
        }
        if (simulate->parsed()) {
            gasnet_state_summary s{};
            int rc = gasnet_simulate(h.p, scn, policy.empty() ? nullptr : policy.c_str(), dt_s,
                                     out.c_str(), &s);
            if (rc != GASNET_OK)
                return fail(rc);
            print_state(s);
            std::printf("wrote %s\n", out.c_str());
            return 0;
        }
        if (linearize->parsed()) {
            int dim = 0;
            int rc = gasnet_linearize(h.p, scn, mup, int(mu.size()), t_s, out.c_str(), &dim);
            if (rc != GASNET_OK)
                return fail(rc);
            std::printf("state dimension %d; wrote %s/{A.coo,nominal.csv,affine.csv,coefficients.csv}\n",
                        dim, out.c_str());
            return 0;
        }
        if (spectrum->parsed()) {
            double cog = 0, residual = 0;
            int rc = gasnet_spectrum(h.p, scn, mup, int(mu.size()), t_s,
                                     out.empty() ? nullptr : out.c_str(), &cog, &residual);
            if (rc != GASNET_OK)
                return fail(rc);
            std::printf("eigenvalue center of gravity %.10g 1/s, trace identity residual %.3g\n",
                        cog, residual);
            if (!out.empty())
                std::printf("wrote %s\n", out.c_str());
            return 0;
        }
        if (bound->parsed()) {
            double crossing = -1;
            int rc = gasnet_bound(h.p, scn, mup, int(mu.size()), t_s, kappa, sinusoidal ? 1 : 0,
                                  period_s, horizon_hr * 3600.0, tol_pct,
                                  out.empty() ? nullptr : out.c_str(), &crossing);
            if (rc != GASNET_OK)
                return fail(rc);
            if (crossing >= 0)
                std::printf("bound reaches %.3g%% at t = %.6g s (%.4g min)\n", tol_pct, crossing,
                            crossing / 60.0);
            else
                std::printf("bound stays below %.3g%% over the horizon\n", tol_pct);
            return 0;
        }
        gasnet_control_summary s{};
        int rc;
        if (mpc->parsed())
            rc = gasnet_mpc(h.p, scn, dt_min * 60.0, nonlinear ? 1 : 0, fixed_model ? 1 : 0,
                            out.c_str(), &s);
        else
            rc = gasnet_oc(h.p, scn, dt_min * 60.0, nonlinear ? 1 : 0, out.c_str(), &s);
        if (rc != GASNET_OK)
            return fail(rc);
        std::printf("objective %.10g, %d steps, %.3f s optimization, %lld LP iterations\n",
                    s.objective, s.steps, s.wall_s, s.lp_iterations);
        if (!compare_dir.empty())
            return report_gap(out, compare_dir, s.objective);
        return 0;
    }

    if (bode->parsed()) {
        if (variants != "all") {
            std::fprintf(stderr, "error: only --variants all is supported\n");
            return 2;
        }
        if (name == "pipe5km") {
            plen_km = 5;
        } else if (name == "pipe50km") {
            plen_km = 50;
        } else if (!name.empty()) {
            std::fprintf(stderr, "error: unknown pipe '%s' (expected pipe5km or pipe50km)\n",
                         name.c_str());
            return 2;
        }
        int rc = gasnet_bode(plen_km * 1000.0, pdiam, pfric, psigma, prho, pphi, fmin, fmax,
                             samples, out.c_str());
        if (rc != GASNET_OK)
            return fail(rc);
        std::printf("wrote %s\n", out.c_str());
        return 0;
    }

    if (bench->parsed()) {
        NetHandle h;
        int rc = gasnet_network_bench(name.c_str(), &h.p);
        if (rc != GASNET_OK)
            return fail(rc);
        std::string net_path = out + "/" + name + ".network.json";
        std::string scn_path = out + "/" + name + ".scenario.json";
        std::error_code ec;
        std::filesystem::create_directories(out, ec);
        rc = gasnet_network_save(h.p, net_path.c_str());
        if (rc != GASNET_OK)
            return fail(rc);
        rc = gasnet_network_save_scenario(h.p, scn_path.c_str());
        if (rc != GASNET_OK)
            return fail(rc);
        print_counts(h.p);
        std::printf("wrote %s and %s\n", net_path.c_str(), scn_path.c_str());
        return 0;
    }

    return 2;
}
