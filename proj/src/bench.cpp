#include "gasnet/bench.hpp"

#include "gasnet/errors.hpp"
#include "gasnet/network.hpp"

#include <cmath>

namespace gasnet {

namespace {

constexpr double kDay = 86400.0;
constexpr double kSample = 900.0;

// value(t) = base + sum of amp*sin(2*pi*t/period_h + phase)
struct Wave {
    double amp = 0;
    double period_h = 24;
    double phase = 0;
};

Profile sampled_load(double base, std::initializer_list<Wave> waves) {
    Profile p;
    int n = int(kDay / kSample);
    p.t.reserve(n + 1);
    p.v.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        double t = i * kSample;
        double v = base;
        for (const Wave& w : waves)
            v += w.amp * std::sin(2.0 * M_PI * t / (w.period_h * 3600.0) + w.phase);
        p.t.push_back(t);
        p.v.push_back(v);
    }
    return p;
}

Profile constant(double v) {
    Profile p;
    p.t = {0.0, kDay};
    p.v = {v, v};
    return p;
}

PipeSpec pipe(int id, int from, int to, double km, double diameter, double friction) {
    PipeSpec e;
    e.id = id;
    e.from = from;
    e.to = to;
    e.length_m = km * 1000.0;
    e.diameter_m = diameter;
    e.friction = friction;
    return e;
}

} // namespace

NetworkSpec bench_cyclic5() {
    NetworkSpec net;
    for (int i = 1; i <= 5; ++i)
        net.nodes.push_back({i, i == 1});
    net.pipes = {
        pipe(1, 1, 2, 20, 0.9144, 0.01),
        pipe(2, 2, 3, 70, 0.9144, 0.01),
        pipe(3, 3, 4, 10, 0.9144, 0.01),
        pipe(4, 4, 5, 80, 0.9144, 0.01),
        pipe(5, 2, 5, 60, 0.635, 0.015),
    };
    net.compressors = {{1, 1.7, 0.95}, {2, 1.7, 0.88}, {4, 1.7, 0.82}};
    net.lim.sigma = 377.964;
    net.lim.rho_min = 21.0;
    net.lim.rho_max = 35.0;
    net.lim.phi_min = 0.0;

    net.profiles[1] = constant(21.0);
    net.profiles[3] = sampled_load(35.0, {{5.0, 24, 0.3}, {2.5, 8, 1.7}});
    net.profiles[4] = sampled_load(28.0, {{4.0, 12, 4.1}, {2.0, 6, 0.9}});
    net.profiles[5] = sampled_load(45.0, {{7.0, 24, 2.2}, {3.0, 8, 5.0}});

    validate(net);
    return net;
}

NetworkSpec bench_tree25() {
    NetworkSpec net;
    for (int i = 1; i <= 25; ++i)
        net.nodes.push_back({i, i == 1});
    const double big = 0.9144, mid = 0.762, small = 0.6096;
    net.pipes = {
        pipe(1, 1, 2, 41, big, 0.01),    pipe(2, 2, 3, 41, big, 0.01),
        pipe(3, 3, 4, 31, big, 0.01),    pipe(4, 4, 5, 31, big, 0.01),
        pipe(5, 5, 6, 31, big, 0.01),    pipe(6, 5, 7, 21, mid, 0.01),
        pipe(7, 7, 6, 21, mid, 0.01),    pipe(8, 3, 8, 25, mid, 0.01),
        pipe(9, 8, 9, 21, mid, 0.01),    pipe(10, 9, 10, 11, small, 0.01),
        pipe(11, 8, 11, 19, small, 0.01), pipe(12, 4, 12, 21, mid, 0.01),
        pipe(13, 12, 13, 11, small, 0.01), pipe(14, 12, 14, 11, small, 0.01),
        pipe(15, 6, 15, 21, mid, 0.01),  pipe(16, 15, 16, 11, small, 0.01),
        pipe(17, 15, 17, 11, small, 0.01), pipe(18, 2, 18, 21, mid, 0.01),
        pipe(19, 18, 19, 11, small, 0.01), pipe(20, 19, 20, 11, small, 0.01),
        pipe(21, 6, 21, 11, small, 0.01), pipe(22, 7, 22, 11, small, 0.01),
        pipe(23, 9, 23, 11, small, 0.01), pipe(24, 14, 24, 11, small, 0.01),
        pipe(25, 17, 25, 11, small, 0.01),
    };
    net.compressors = {
        {1, 1.5, 0.95}, {3, 1.5, 0.91}, {8, 1.5, 0.87}, {12, 1.5, 0.84}, {15, 1.5, 0.8}};
    net.lim.sigma = 377.964;
    net.lim.rho_min = 35.0;
    net.lim.rho_max = 56.0;
    net.lim.phi_min = 0.0;

    net.profiles[1] = constant(35.0);
    net.profiles[10] = sampled_load(24.0, {{7.0, 24, 0.4}, {3.0, 8, 2.1}});
    net.profiles[11] = sampled_load(18.0, {{6.0, 12, 1.3}, {2.0, 6, 3.8}});
    net.profiles[13] = sampled_load(20.0, {{6.0, 24, 2.9}, {3.0, 8, 0.6}});
    net.profiles[16] = sampled_load(16.0, {{5.0, 12, 5.2}, {2.0, 6, 1.9}});
    net.profiles[20] = sampled_load(22.0, {{7.0, 24, 4.4}, {2.5, 8, 3.0}});
    net.profiles[21] = sampled_load(14.0, {{4.0, 12, 0.8}});
    net.profiles[22] = sampled_load(18.0, {{5.0, 24, 1.6}, {2.0, 6, 5.5}});
    net.profiles[23] = sampled_load(16.0, {{5.0, 12, 3.5}});
    net.profiles[24] = sampled_load(20.0, {{6.0, 24, 5.8}, {2.5, 8, 4.2}});
    net.profiles[25] = sampled_load(15.0, {{4.0, 12, 2.4}});

    validate(net);
    return net;
}

NetworkSpec bench_by_name(const std::string& name) {
    if (name == "cyclic5")
        return bench_cyclic5();
    if (name == "tree25")
        return bench_tree25();
    throw input_error("unknown benchmark '" + name + "' (expected cyclic5 or tree25)");
}

} // namespace gasnet
