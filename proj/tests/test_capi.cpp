#include "gasnet.h"

#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("gasnet_capi_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const char* name) const { return (path / name).string(); }
};

struct NetHandle {
    gasnet_network* p = nullptr;
    ~NetHandle() { gasnet_network_free(p); }
};

} // namespace

TEST_CASE("errors surface as codes with messages") {
    gasnet_network* net = nullptr;
    CHECK(gasnet_network_load("/nonexistent/net.json", &net) == GASNET_ERR_INPUT);
    CHECK(net == nullptr);
    CHECK(std::string(gasnet_last_error()).size() > 0);

    CHECK(gasnet_network_bench("no-such-benchmark", &net) == GASNET_ERR_INPUT);
    CHECK(gasnet_network_load(nullptr, &net) == GASNET_ERR_INPUT);
}

TEST_CASE("benchmark handles report their shape") {
    NetHandle raw, fine;
    REQUIRE(gasnet_network_bench("cyclic5", &raw.p) == GASNET_OK);

    int nodes = 0, supply = 0, pipes = 0, comps = 0, dim = 0;
    REQUIRE(gasnet_network_counts(raw.p, &nodes, &supply, &pipes, &comps, &dim) == GASNET_OK);
    CHECK(nodes == 5);
    CHECK(supply == 1);
    CHECK(pipes == 5);
    CHECK(comps == 3);
    CHECK(dim == 9); // 4 withdrawal nodes + 5 edges

    REQUIRE(gasnet_network_refine(raw.p, 5000.0, &fine.p) == GASNET_OK);
    REQUIRE(gasnet_network_counts(fine.p, &nodes, &supply, &pipes, &comps, &dim) == GASNET_OK);
    CHECK(pipes == 48);
    CHECK(comps == 3);
    CHECK(dim == 95);

    NetHandle tree, tfine;
    REQUIRE(gasnet_network_bench("tree25", &tree.p) == GASNET_OK);
    REQUIRE(gasnet_network_refine(tree.p, 10000.0, &tfine.p) == GASNET_OK);
    REQUIRE(gasnet_network_counts(tfine.p, nullptr, nullptr, &pipes, &comps, &dim) == GASNET_OK);
    CHECK(pipes == 69);
    CHECK(comps == 5);
    CHECK(dim == 137);
}

TEST_CASE("network and scenario files round trip") {
    TempDir tmp;
    NetHandle a, b;
    REQUIRE(gasnet_network_bench("cyclic5", &a.p) == GASNET_OK);
    REQUIRE(gasnet_network_save(a.p, tmp.file("net.json").c_str()) == GASNET_OK);
    REQUIRE(gasnet_network_load(tmp.file("net.json").c_str(), &b.p) == GASNET_OK);

    int n1 = 0, n2 = 0, e1 = 0, e2 = 0;
    gasnet_network_counts(a.p, &n1, nullptr, &e1, nullptr, nullptr);
    gasnet_network_counts(b.p, &n2, nullptr, &e2, nullptr, nullptr);
    CHECK(n1 == n2);
    CHECK(e1 == e2);

    REQUIRE(gasnet_network_save_scenario(a.p, tmp.file("scn.json").c_str()) == GASNET_OK);
    CHECK(fs::file_size(tmp.file("scn.json")) > 0);
}

TEST_CASE("steady and transient summaries stay inside the benchmark box") {
    TempDir tmp;
    NetHandle net;
    REQUIRE(gasnet_network_bench("cyclic5", &net.p) == GASNET_OK);
    NetHandle fine;
    REQUIRE(gasnet_network_refine(net.p, 5000.0, &fine.p) == GASNET_OK);

    double mu[3] = {1.2, 1.2, 1.2};
    gasnet_state_summary sum{};
    REQUIRE(gasnet_steady(fine.p, nullptr, mu, 3, 0.0, tmp.file("steady.csv").c_str(), &sum) ==
            GASNET_OK);
    CHECK(sum.rho_min > 15.0);
    CHECK(sum.rho_max < 40.0);
    CHECK(sum.line_pack_kg > 0.0);
    CHECK(fs::file_size(tmp.file("steady.csv")) > 0);

    // wrong ratio count is an input error
    CHECK(gasnet_steady(fine.p, nullptr, mu, 2, 0.0, nullptr, &sum) == GASNET_ERR_INPUT);

    gasnet_state_summary tsum{};
    REQUIRE(gasnet_simulate(fine.p, nullptr, nullptr, 600.0, tmp.file("traj.csv").c_str(),
                            &tsum) == GASNET_OK);
    CHECK(tsum.rho_min > 0.0);
    CHECK(tsum.rho_max >= tsum.rho_min);
    CHECK(tsum.phi_max >= tsum.phi_min);
    CHECK(tsum.line_pack_kg > 0.0);

    std::ifstream traj(tmp.file("traj.csv"));
    std::string header;
    std::getline(traj, header);
    CHECK(header.rfind("t,", 0) == 0);
    CHECK(header.find("node:") != std::string::npos);
    CHECK(header.find("edge:") != std::string::npos);
}

TEST_CASE("linearization artifacts land in the output directory") {
    TempDir tmp;
    NetHandle net, fine;
    REQUIRE(gasnet_network_bench("cyclic5", &net.p) == GASNET_OK);
    REQUIRE(gasnet_network_refine(net.p, 5000.0, &fine.p) == GASNET_OK);

    int dim = 0;
    REQUIRE(gasnet_linearize(fine.p, nullptr, nullptr, 0, 0.0, tmp.path.string().c_str(),
                             &dim) == GASNET_OK);
    CHECK(dim == 95);
    for (const char* name : {"A.coo", "nominal.csv", "affine.csv", "coefficients.csv"})
        CHECK(fs::file_size(tmp.path / name) > 0);
}

TEST_CASE("spectrum and bound endpoints agree with their summaries") {
    TempDir tmp;
    NetHandle net, fine;
    REQUIRE(gasnet_network_bench("cyclic5", &net.p) == GASNET_OK);
    REQUIRE(gasnet_network_refine(net.p, 5000.0, &fine.p) == GASNET_OK);

    double cog = 0, resid = 1;
    REQUIRE(gasnet_spectrum(fine.p, nullptr, nullptr, 0, 0.0, tmp.file("eigs.csv").c_str(),
                            &cog, &resid) == GASNET_OK);
    CHECK(cog < 0.0);
    CHECK(std::abs(resid) < 1e-6);
    CHECK(fs::file_size(tmp.file("eigs.csv")) > 0);

    double crossing = 0;
    REQUIRE(gasnet_bound(fine.p, nullptr, nullptr, 0, 0.0, 0.05, 0, 3600.0, 900.0, 1e12,
                         tmp.file("bound.csv").c_str(), &crossing) == GASNET_OK);
    CHECK(crossing == -1.0); // an absurd tolerance is never reached

    CHECK(gasnet_bound(fine.p, nullptr, nullptr, 0, 0.0, 1.5, 0, 3600.0, 900.0, 1.0,
                       tmp.file("bound2.csv").c_str(), &crossing) == GASNET_ERR_INPUT);
}

TEST_CASE("bode table covers the requested grid") {
    TempDir tmp;
    REQUIRE(gasnet_bode(5e4, 0.5, 0.011, 377.0, 35.0, 300.0, 0.1, 10.0, 25,
                        tmp.file("bode.csv").c_str()) == GASNET_OK);

    std::ifstream in(tmp.file("bode.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 26); // header plus one row per sample

    CHECK(gasnet_bode(-1.0, 0.5, 0.011, 377.0, 35.0, 300.0, 0.1, 10.0, 25,
                      tmp.file("bode2.csv").c_str()) == GASNET_ERR_INPUT);
}

TEST_CASE("control runs emit the three run artifacts") {
    gasnet_set_threads(1);
    TempDir tmp;
    NetHandle net, fine;
    REQUIRE(gasnet_network_bench("cyclic5", &net.p) == GASNET_OK);
    REQUIRE(gasnet_network_refine(net.p, 5000.0, &fine.p) == GASNET_OK);

    gasnet_control_summary m{};
    REQUIRE(gasnet_mpc(fine.p, nullptr, 3600.0, 0, 0, tmp.path.string().c_str(), &m) ==
            GASNET_OK);
    CHECK(m.status == 0);
    CHECK(m.steps == 24);
    CHECK(m.objective > 0.0);
    CHECK(m.lp_iterations > 0);
    for (const char* name : {"policy.csv", "trajectory.csv", "summary.csv"})
        CHECK(fs::file_size(tmp.path / name) > 0);

    fs::path ocdir = tmp.path / "oc";
    fs::create_directories(ocdir);
    gasnet_control_summary o{};
    REQUIRE(gasnet_oc(fine.p, nullptr, 3600.0, 0, ocdir.string().c_str(), &o) == GASNET_OK);
    CHECK(o.status == 0);
    CHECK(o.steps == 24);
    CHECK(o.objective > 0.0);
    for (const char* name : {"policy.csv", "trajectory.csv", "summary.csv"})
        CHECK(fs::file_size(ocdir / name) > 0);

    // open loop can only do as well or better than receding horizon here
    CHECK(o.objective <= m.objective * 1.05);
    gasnet_set_threads(0);
}
