#include "gasnet.h"

#include "gasnet/bench.hpp"
#include "gasnet/control.hpp"
#include "gasnet/error_bounds.hpp"
#include "gasnet/errors.hpp"
#include "gasnet/io.hpp"
#include "gasnet/linearize.hpp"
#include "gasnet/network.hpp"
#include "gasnet/simulate.hpp"
#include "gasnet/spectral.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using namespace gasnet;

struct gasnet_network {
    NetworkSpec net;
};

namespace {

thread_local std::string t_err;

template <class F>
int guard(F&& body) {
    try {
        body();
        return GASNET_OK;
    } catch (const input_error& e) {
        t_err = e.what();
        return GASNET_ERR_INPUT;
    } catch (const domain_error& e) {
        t_err = e.what();
        return GASNET_ERR_INPUT;
    } catch (const solver_error& e) {
        t_err = e.what();
        return GASNET_ERR_SOLVER;
    } catch (const std::exception& e) {
        t_err = e.what();
        return GASNET_ERR_SOLVER;
    } catch (...) {
        t_err = "unknown failure";
        return GASNET_ERR_SOLVER;
    }
}

const NetworkSpec& need(const gasnet_network* net) {
    if (!net)
        throw input_error("null network handle");
    return net->net;
}

// Wraps an already-refined (or deliberately unrefined) network without
// splitting anything further.
RefinedNetwork as_refined(const NetworkSpec& net) {
    double lmax = 1.0;
    for (const PipeSpec& p : net.pipes)
        lmax = std::max(lmax, p.length_m);
    return refine(net, lmax);
}

BoundaryScenario scenario_for(const NetworkSpec& net, const char* path) {
    if (path && *path)
        return load_scenario(path);
    return embedded_scenario(net);
}

VectorXd ratios_for(const NetworkSpec& net, const double* mu, int mu_len) {
    int nc = int(net.compressors.size());
    if (!mu)
        return VectorXd::Ones(nc);
    if (mu_len != nc)
        throw input_error("expected " + std::to_string(nc) + " compressor ratios, got " +
                          std::to_string(mu_len));
    return Eigen::Map<const VectorXd>(mu, nc);
}

void fill_summary(const Dynamics& dyn, const Trajectory& traj, gasnet_state_summary* sum) {
    if (!sum || traj.x.empty())
        return;
    sum->rho_min = sum->phi_min = std::numeric_limits<double>::infinity();
    sum->rho_max = sum->phi_max = -std::numeric_limits<double>::infinity();
    for (const State& x : traj.x) {
        sum->rho_min = std::min(sum->rho_min, x.rho.minCoeff());
        sum->rho_max = std::max(sum->rho_max, x.rho.maxCoeff());
        sum->phi_min = std::min(sum->phi_min, x.phi.minCoeff());
        sum->phi_max = std::max(sum->phi_max, x.phi.maxCoeff());
    }
    sum->line_pack_kg = dyn.base().Lambda.dot(traj.x.back().rho);
}

// Steady state and linear model at scenario time t_s.
LinearModel model_at(const Dynamics& dyn, const NetworkSpec& net, const BoundaryScenario& scn,
                     const VectorXd& mu, double t_s) {
    BoundarySampler bs(net, scn);
    VectorXd s = bs.supply(t_s), w = bs.withdrawal(t_s);
    State x = dyn.steady_state(mu, s, w);
    return relinearize(dyn, x, mu, s, w);
}

int status_code(RunStatus st) {
    switch (st) {
    case RunStatus::optimal: return 0;
    case RunStatus::infeasible: return 1;
    default: return 2;
    }
}

void write_control_artifacts(const NetworkSpec& net, const OptimizationResult& r,
                             const std::string& mode, double dt_s, const char* out_dir,
                             gasnet_control_summary* sum) {
    if (out_dir && *out_dir) {
        std::filesystem::create_directories(out_dir);
        std::string dir = out_dir;
        write_policy_csv(net, r.policy(), dir + "/policy.csv");
        write_trajectory_csv(net, r.trajectory(), dir + "/trajectory.csv");
        std::ostringstream os;
        os << "key,value\n";
        os << "mode," << mode << "\n";
        os << "status," << status_code(r.status) << "\n";
        os << "objective," << format_double(r.objective) << "\n";
        os << "wall_s," << format_double(r.wall_s) << "\n";
        os << "lp_iterations," << r.lp_iterations << "\n";
        os << "steps," << (r.mu.empty() ? 0 : int(r.mu.size()) - 1) << "\n";
        os << "dt_s," << format_double(dt_s) << "\n";
        if (!r.message.empty())
            os << "message," << r.message << "\n";
        write_file(dir + "/summary.csv", os.str());
    }
    if (sum) {
        sum->status = status_code(r.status);
        sum->steps = r.mu.empty() ? 0 : int(r.mu.size()) - 1;
        sum->objective = r.objective;
        sum->wall_s = r.wall_s;
        sum->lp_iterations = r.lp_iterations;
    }
}

} // namespace

extern "C" {

const char* gasnet_last_error(void) { return t_err.c_str(); }

void gasnet_set_threads(int n) { Eigen::setNbThreads(n > 0 ? n : 0); }

int gasnet_network_load(const char* path, gasnet_network** out) {
    return guard([&] {
        if (!path || !out)
            throw input_error("null argument");
        auto h = std::make_unique<gasnet_network>();
        h->net = load_network(path);
        *out = h.release();
    });
}

int gasnet_network_bench(const char* name, gasnet_network** out) {
    return guard([&] {
        if (!name || !out)
            throw input_error("null argument");
        auto h = std::make_unique<gasnet_network>();
        h->net = bench_by_name(name);
        *out = h.release();
    });
}

int gasnet_network_refine(const gasnet_network* net, double lmax_m, gasnet_network** out) {
    return guard([&] {
        const NetworkSpec& n = need(net);
        if (!out)
            throw input_error("null argument");
        auto h = std::make_unique<gasnet_network>();
        h->net = refine(n, lmax_m).net;
        *out = h.release();
    });
}

void gasnet_network_free(gasnet_network* net) { delete net; }

int gasnet_network_counts(const gasnet_network* net, int* nodes, int* supply_nodes,
                          int* pipes, int* compressors, int* state_dim) {
    return guard([&] {
        const NetworkSpec& n = need(net);
        Layout lay = layout(n);
        if (nodes)
            *nodes = lay.V();
        if (supply_nodes)
            *supply_nodes = lay.Vs();
        if (pipes)
            *pipes = lay.E();
        if (compressors)
            *compressors = int(n.compressors.size());
        if (state_dim)
            *state_dim = lay.E() + lay.Vw();
    });
}

int gasnet_network_save(const gasnet_network* net, const char* path) {
    return guard([&] {
        if (!path)
            throw input_error("null path");
        save_network(need(net), path);
    });
}

int gasnet_network_save_scenario(const gasnet_network* net, const char* path) {
    return guard([&] {
        if (!path)
            throw input_error("null path");
        save_scenario(embedded_scenario(need(net)), path);
    });
}

int gasnet_steady(const gasnet_network* net, const char* scenario_path,
                  const double* mu, int mu_len, double t_s,
                  const char* out_csv, gasnet_state_summary* sum) {
    return guard([&] {
        const NetworkSpec& n = need(net);
        Dynamics dyn(as_refined(n));
        BoundaryScenario scn = scenario_for(n, scenario_path);
        BoundarySampler bs(n, scn);
        VectorXd m = ratios_for(n, mu, mu_len);
        State x = dyn.steady_state(m, bs.supply(t_s), bs.withdrawal(t_s));
        Trajectory tr;
        tr.t = {t_s};
        tr.x = {x};
        tr.mu = {m};
        if (out_csv && *out_csv)
            write_trajectory_csv(n, tr, out_csv);
        fill_summary(dyn, tr, sum);
    });
}

int gasnet_simulate(const gasnet_network* net, const char* scenario_path,
                    const char* policy_csv, double dt_s,
                    const char* out_csv, gasnet_state_summary* sum) {
    return guard([&] {
        const NetworkSpec& n = need(net);
        if (!(dt_s > 0))
            throw input_error("time step must be positive");
        Dynamics dyn(as_refined(n));
        BoundaryScenario scn = scenario_for(n, scenario_path);
        Policy pol;
        if (policy_csv && *policy_csv) {
            pol = read_policy_csv(n, policy_csv);
        } else {
            pol.t = {0.0};
            pol.mu = {VectorXd::Ones(dyn.nc())};
        }
        Trajectory tr = dyn.simulate(scn, pol, dt_s);
        if (out_csv && *out_csv)
            write_trajectory_csv(n, tr, out_csv);
        fill_summary(dyn, tr, sum);
    });
}

int gasnet_linearize(const gasnet_network* net, const char* scenario_path,
                     const double* mu, int mu_len, double t_s,
                     const char* out_dir, int* state_dim) {
    return guard([&] {
        const NetworkSpec& n = need(net);
        Dynamics dyn(as_refined(n));
        VectorXd m = ratios_for(n, mu, mu_len);
        LinearModel mdl = model_at(dyn, n, scenario_for(n, scenario_path), m, t_s);
        if (state_dim)
            *state_dim = mdl.dim();
        if (!out_dir || !*out_dir)
            return;
        std::filesystem::create_directories(out_dir);
        std::string dir = out_dir;
        dump_matrix_coo(mdl.A, dir + "/A.coo");

        const Layout& lay = dyn.lay();
        std::ostringstream nom;
        nom << "name,value\n";
        for (int j = 0; j < mdl.Vw; ++j)
            nom << "rho:" << lay.withdrawal_ids[j] << "," << format_double(mdl.nom.x.rho[j]) << "\n";
        for (int k = 0; k < mdl.E; ++k)
            nom << "phi:" << lay.edge_ids[k] << "," << format_double(mdl.nom.x.phi[k]) << "\n";
        for (size_t i = 0; i < n.compressors.size(); ++i)
            nom << "mu:" << n.compressors[i].edge << "," << format_double(mdl.nom.mu[int(i)]) << "\n";
        write_file(dir + "/nominal.csv", nom.str());

        std::ostringstream aff;
        aff << "row,value\n";
        for (int i = 0; i < mdl.F.size(); ++i)
            aff << i << "," << format_double(mdl.F[i]) << "\n";
        write_file(dir + "/affine.csv", aff.str());

        std::ostringstream co;
        co << "edge,alpha,beta\n";
        for (int k = 0; k < mdl.E; ++k)
            co << lay.edge_ids[k] << "," << format_double(mdl.alpha[k]) << ","
               << format_double(mdl.beta[k]) << "\n";
        write_file(dir + "/coefficients.csv", co.str());
    });
}

int gasnet_spectrum(const gasnet_network* net, const char* scenario_path,
                    const double* mu, int mu_len, double t_s,
                    const char* out_csv, double* center_of_gravity_out,
                    double* trace_residual) {
    return guard([&] {
        const NetworkSpec& n = need(net);
        Dynamics dyn(as_refined(n));
        VectorXd m = ratios_for(n, mu, mu_len);
        LinearModel mdl = model_at(dyn, n, scenario_for(n, scenario_path), m, t_s);
        Eigen::VectorXcd eig = eigenvalues(mdl.A);
        if (center_of_gravity_out)
            *center_of_gravity_out = center_of_gravity(eig);
        if (trace_residual)
            *trace_residual = std::abs(eig.real().sum() + mdl.beta.sum());
        if (out_csv && *out_csv) {
            std::ostringstream os;
            os << "re,im\n";
            for (int i = 0; i < eig.size(); ++i)
                os << format_double(eig[i].real()) << "," << format_double(eig[i].imag()) << "\n";
            write_file(out_csv, os.str());
        }
    });
}

int gasnet_bode(double length_m, double diameter_m, double friction, double sigma,
                double rho_bar, double phi_bar, double fmin_cyc_hr, double fmax_cyc_hr,
                int samples, const char* out_csv) {
    return guard([&] {
        if (!out_csv || !*out_csv)
            throw input_error("null output path");
        if (samples < 2)
            throw input_error("need at least 2 samples");
        PipeFrequencyParams base;
        base.length_m = length_m;
        base.diameter_m = diameter_m;
        base.friction = friction;
        base.sigma = sigma;
        base.rho_bar = rho_bar;
        base.phi_bar = phi_bar;
        struct Variant {
            const char* tag;
            bool inertia, gradient;
        };
        const Variant variants[4] = {
            {"d1a1", true, true}, {"d1a0", true, false}, {"d0a1", false, true}, {"d0a0", false, false}};
        std::array<FrequencyResponse, 4> resp;
        for (int v = 0; v < 4; ++v) {
            PipeFrequencyParams p = base;
            p.inertia = variants[v].inertia;
            p.with_gradient = variants[v].gradient;
            resp[v] = frequency_response(p, fmin_cyc_hr, fmax_cyc_hr, samples);
        }
        const char* coeff[4] = {"G11", "G12", "G21", "G22"};
        std::ostringstream os;
        os << "f_cyc_hr";
        for (const Variant& v : variants)
            for (const char* cname : coeff)
                os << "," << v.tag << "." << cname << ".mag"
                   << "," << v.tag << "." << cname << ".phase";
        os << "\n";
        for (size_t i = 0; i < resp[0].f_cyc_hr.size(); ++i) {
            os << format_double(resp[0].f_cyc_hr[i]);
            for (int v = 0; v < 4; ++v)
                for (int c = 0; c < 4; ++c)
                    os << "," << format_double(resp[v].mag[i][c]) << ","
                       << format_double(resp[v].phase[i][c]);
            os << "\n";
        }
        write_file(out_csv, os.str());
    });
}

int gasnet_bound(const gasnet_network* net, const char* scenario_path,
                 const double* mu, int mu_len, double t_s,
                 double kappa, int sinusoidal, double period_s,
                 double horizon_s, double tol_pct,
                 const char* out_csv, double* crossing_s) {
    return guard([&] {
        const NetworkSpec& n = need(net);
        if (!(kappa > 0 && kappa < 1))
            throw input_error("kappa must lie in (0, 1)");
        if (!(horizon_s > 0))
            throw input_error("horizon must be positive");
        if (sinusoidal && !(period_s > 0))
            throw input_error("period must be positive");
        Dynamics dyn(as_refined(n));
        VectorXd m = ratios_for(n, mu, mu_len);
        LinearModel mdl = model_at(dyn, n, scenario_for(n, scenario_path), m, t_s);
        BoundCurve curve(mdl, horizon_s);

        auto value = [&](double t) {
            return sinusoidal ? curve.time_varying(kappa, t, period_s) : curve.uniform(kappa, t);
        };
        const std::vector<double>& grid = curve.grid();
        size_t stride = std::max<size_t>(1, grid.size() / 2048);

        std::ostringstream os;
        os << "t_s,propagator_norm,bound_pct\n";
        double cross = -1.0, prev_t = 0.0, prev_v = 0.0;
        for (size_t i = 0; i < grid.size(); ++i) {
            double t = grid[i];
            double v = value(t);
            if (cross < 0 && v >= tol_pct && i > 0) {
                double f = (tol_pct - prev_v) / std::max(v - prev_v, 1e-300);
                cross = prev_t + f * (t - prev_t);
            }
            prev_t = t;
            prev_v = v;
            if (i % stride == 0 || i + 1 == grid.size())
                os << format_double(t) << "," << format_double(curve.propagator_norm(t)) << ","
                   << format_double(v) << "\n";
        }
        if (crossing_s)
            *crossing_s = cross;
        if (out_csv && *out_csv)
            write_file(out_csv, os.str());
    });
}

int gasnet_mpc(const gasnet_network* net, const char* scenario_path, double dt_s,
               int nonlinear, int fixed_model, const char* out_dir,
               gasnet_control_summary* sum) {
    return guard([&] {
        const NetworkSpec& n = need(net);
        if (!(dt_s > 0))
            throw input_error("time step must be positive");
        Dynamics dyn(as_refined(n));
        ControlOptions co;
        co.dt = dt_s;
        co.nonlinear = nonlinear != 0;
        co.relinearize = fixed_model == 0;
        OptimizationResult r = run_mpc(dyn, scenario_for(n, scenario_path), co);
        write_control_artifacts(n, r, "mpc", dt_s, out_dir, sum);
        if (r.status != RunStatus::optimal)
            throw solver_error(r.message.empty() ? "optimization failed" : r.message);
    });
}

int gasnet_oc(const gasnet_network* net, const char* scenario_path, double dt_s,
              int nonlinear, const char* out_dir, gasnet_control_summary* sum) {
    return guard([&] {
        const NetworkSpec& n = need(net);
        if (!(dt_s > 0))
            throw input_error("time step must be positive");
        Dynamics dyn(as_refined(n));
        ControlOptions co;
        co.dt = dt_s;
        co.nonlinear = nonlinear != 0;
        OptimizationResult r = run_oc(dyn, scenario_for(n, scenario_path), co);
        write_control_artifacts(n, r, "oc", dt_s, out_dir, sum);
        if (r.status != RunStatus::optimal)
            throw solver_error(r.message.empty() ? "optimization failed" : r.message);
    });
}

} // extern "C"
