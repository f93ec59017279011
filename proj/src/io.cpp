#include "gasnet/io.hpp"

#include "gasnet/errors.hpp"
#include "gasnet/network.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <sstream>

using json = nlohmann::ordered_json;

namespace gasnet {

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write " + path);
    out << text;
}

std::uint64_t content_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

double require_number(const json& j, const std::string& at) {
    if (!j.is_number()) throw input_error(at + ": expected a number");
    return j.get<double>();
}

int require_int(const json& j, const std::string& at) {
    if (!j.is_number_integer()) throw input_error(at + ": expected an integer");
    return j.get<int>();
}

Profile parse_profile(const json& j, const std::string& at) {
    if (!j.is_array() || j.empty()) throw input_error(at + ": expected [[t, value], ...]");
    Profile p;
    for (size_t i = 0; i < j.size(); ++i) {
        const json& bp = j[i];
        std::string bat = at + "[" + std::to_string(i) + "]";
        if (!bp.is_array() || bp.size() != 2) throw input_error(bat + ": expected [t, value]");
        p.t.push_back(require_number(bp[0], bat + "[0]"));
        p.v.push_back(require_number(bp[1], bat + "[1]"));
    }
    return p;
}

json profile_json(const Profile& p) {
    json arr = json::array();
    for (size_t i = 0; i < p.t.size(); ++i) arr.push_back({p.t[i], p.v[i]});
    return arr;
}

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw input_error(std::string("document is not valid JSON: ") + e.what());
    }
}

} // namespace

NetworkSpec parse_network(const std::string& text) {
    json doc = parse_text(text);
    if (!doc.is_object()) throw input_error("network document: expected an object");
    NetworkSpec net;

    if (!doc.contains("nodes") || !doc["nodes"].is_array()) throw input_error("nodes: expected an array");
    for (size_t i = 0; i < doc["nodes"].size(); ++i) {
        const json& jn = doc["nodes"][i];
        std::string at = "nodes[" + std::to_string(i) + "]";
        NodeSpec n;
        n.id = require_int(jn.value("id", json()), at + ".id");
        std::string kind = jn.value("kind", std::string());
        if (kind == "supply") n.is_supply = true;
        else if (kind == "withdrawal") n.is_supply = false;
        else throw input_error(at + ".kind: expected \"supply\" or \"withdrawal\"");
        net.nodes.push_back(n);
    }

    if (!doc.contains("pipes") || !doc["pipes"].is_array()) throw input_error("pipes: expected an array");
    for (size_t i = 0; i < doc["pipes"].size(); ++i) {
        const json& jp = doc["pipes"][i];
        std::string at = "pipes[" + std::to_string(i) + "]";
        PipeSpec p;
        p.id = require_int(jp.value("id", json()), at + ".id");
        p.from = require_int(jp.value("from", json()), at + ".from");
        p.to = require_int(jp.value("to", json()), at + ".to");
        p.length_m = 1000.0 * require_number(jp.value("length_km", json()), at + ".length_km");
        p.diameter_m = require_number(jp.value("diameter_m", json()), at + ".diameter_m");
        p.friction = require_number(jp.value("friction", json()), at + ".friction");
        net.pipes.push_back(p);
    }

    if (doc.contains("compressors")) {
        if (!doc["compressors"].is_array()) throw input_error("compressors: expected an array");
        for (size_t i = 0; i < doc["compressors"].size(); ++i) {
            const json& jc = doc["compressors"][i];
            std::string at = "compressors[" + std::to_string(i) + "]";
            CompressorSpec c;
            c.edge = require_int(jc.value("edge", json()), at + ".edge");
            c.max_ratio = require_number(jc.value("max_ratio", json()), at + ".max_ratio");
            c.efficiency = jc.contains("efficiency")
                               ? require_number(jc["efficiency"], at + ".efficiency")
                               : 1.0;
            net.compressors.push_back(c);
        }
    }

    if (!doc.contains("parameters") || !doc["parameters"].is_object())
        throw input_error("parameters: expected an object");
    const json& jl = doc["parameters"];
    net.lim.sigma = require_number(jl.value("sound_speed_mps", json()), "parameters.sound_speed_mps");
    net.lim.rho_min = require_number(jl.value("rho_min", json()), "parameters.rho_min");
    net.lim.rho_max = require_number(jl.value("rho_max", json()), "parameters.rho_max");
    net.lim.phi_min = jl.contains("phi_min") ? require_number(jl["phi_min"], "parameters.phi_min") : 0.0;
    if (jl.contains("phi_max") && !jl["phi_max"].is_null())
        net.lim.phi_max = require_number(jl["phi_max"], "parameters.phi_max");

    if (doc.contains("profiles")) {
        if (!doc["profiles"].is_object()) throw input_error("profiles: expected an object keyed by node id");
        for (auto& [key, val] : doc["profiles"].items()) {
            int id = 0;
            auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
            if (ec != std::errc() || p != key.data() + key.size())
                throw input_error("profiles: key \"" + key + "\" is not a node id");
            net.profiles[id] = parse_profile(val, "profiles[" + key + "]");
        }
    }

    validate(net);
    return net;
}

std::string serialize_network(const NetworkSpec& net) {
    json doc;
    doc["nodes"] = json::array();
    for (const auto& n : net.nodes)
        doc["nodes"].push_back({{"id", n.id}, {"kind", n.is_supply ? "supply" : "withdrawal"}});
    doc["pipes"] = json::array();
    for (const auto& p : net.pipes)
        doc["pipes"].push_back({{"id", p.id},
                                {"from", p.from},
                                {"to", p.to},
                                {"length_km", p.length_m / 1000.0},
                                {"diameter_m", p.diameter_m},
                                {"friction", p.friction}});
    doc["compressors"] = json::array();
    for (const auto& c : net.compressors)
        doc["compressors"].push_back(
            {{"edge", c.edge}, {"max_ratio", c.max_ratio}, {"efficiency", c.efficiency}});
    doc["parameters"] = {{"sound_speed_mps", net.lim.sigma},
                         {"rho_min", net.lim.rho_min},
                         {"rho_max", net.lim.rho_max},
                         {"phi_min", net.lim.phi_min},
                         {"phi_max", std::isinf(net.lim.phi_max) ? json() : json(net.lim.phi_max)}};
    if (!net.profiles.empty()) {
        doc["profiles"] = json::object();
        for (const auto& [id, pr] : net.profiles) doc["profiles"][std::to_string(id)] = profile_json(pr);
    }
    return doc.dump(2) + "\n";
}

NetworkSpec load_network(const std::string& path) { return parse_network(read_file(path)); }
void save_network(const NetworkSpec& net, const std::string& path) {
    write_file(path, serialize_network(net));
}

BoundaryScenario parse_scenario(const std::string& text) {
    json doc = parse_text(text);
    if (!doc.is_object()) throw input_error("scenario document: expected an object");
    BoundaryScenario scn;
    scn.horizon_s = require_number(doc.value("horizon_s", json()), "horizon_s");
    if (!(scn.horizon_s > 0)) throw input_error("horizon_s: must be positive");
    if (!doc.contains("profiles") || !doc["profiles"].is_object())
        throw input_error("profiles: expected an object keyed by node id");
    for (auto& [key, val] : doc["profiles"].items()) {
        int id = 0;
        auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
        if (ec != std::errc() || p != key.data() + key.size())
            throw input_error("profiles: key \"" + key + "\" is not a node id");
        Profile pr = parse_profile(val, "profiles[" + key + "]");
        for (size_t i = 1; i < pr.t.size(); ++i)
            if (!(pr.t[i] > pr.t[i - 1]))
                throw input_error("profiles[" + key + "]: breakpoint times must increase");
        scn.profiles[id] = pr;
    }
    return scn;
}

std::string serialize_scenario(const BoundaryScenario& scn) {
    json doc;
    doc["horizon_s"] = scn.horizon_s;
    doc["profiles"] = json::object();
    for (const auto& [id, pr] : scn.profiles) doc["profiles"][std::to_string(id)] = profile_json(pr);
    return doc.dump(2) + "\n";
}

BoundaryScenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }
void save_scenario(const BoundaryScenario& scn, const std::string& path) {
    write_file(path, serialize_scenario(scn));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string trajectory_csv(const NetworkSpec& net, const Trajectory& traj) {
    Layout lay = layout(net);
    std::ostringstream out;
    out << "t";
    for (int id : lay.withdrawal_ids) out << ",node:" << id << ".rho";
    for (int id : lay.edge_ids) out << ",edge:" << id << ".phi";
    for (const auto& c : net.compressors) out << ",comp:" << c.edge << ".mu";
    out << "\n";
    for (size_t k = 0; k < traj.t.size(); ++k) {
        out << format_double(traj.t[k]);
        for (int i = 0; i < traj.x[k].rho.size(); ++i) out << "," << format_double(traj.x[k].rho[i]);
        for (int i = 0; i < traj.x[k].phi.size(); ++i) out << "," << format_double(traj.x[k].phi[i]);
        if (!traj.mu.empty())
            for (int i = 0; i < traj.mu[k].size(); ++i) out << "," << format_double(traj.mu[k][i]);
        out << "\n";
    }
    return out.str();
}

void write_trajectory_csv(const NetworkSpec& net, const Trajectory& traj, const std::string& path) {
    write_file(path, trajectory_csv(net, traj));
}

Trajectory read_trajectory_csv(const NetworkSpec& net, const std::string& path) {
    Layout lay = layout(net);
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw input_error(path + ": empty trajectory file");
    size_t expect = 1 + lay.withdrawal_ids.size() + lay.edge_ids.size() + net.compressors.size();
    if (split_csv_line(line).size() != expect)
        throw input_error(path + ": header does not match network shape");
    Trajectory traj;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != expect) throw input_error(path + ": ragged row");
        size_t k = 0;
        traj.t.push_back(strtod(cells[k++].c_str(), nullptr));
        State x;
        x.rho.resize(lay.Vw());
        x.phi.resize(lay.E());
        for (int i = 0; i < x.rho.size(); ++i) x.rho[i] = strtod(cells[k++].c_str(), nullptr);
        for (int i = 0; i < x.phi.size(); ++i) x.phi[i] = strtod(cells[k++].c_str(), nullptr);
        VectorXd mu(net.compressors.size());
        for (int i = 0; i < mu.size(); ++i) mu[i] = strtod(cells[k++].c_str(), nullptr);
        traj.x.push_back(std::move(x));
        traj.mu.push_back(std::move(mu));
    }
    return traj;
}

void write_policy_csv(const NetworkSpec& net, const Policy& pol, const std::string& path) {
    std::ostringstream out;
    out << "t";
    for (const auto& c : net.compressors) out << ",comp:" << c.edge << ".mu";
    out << "\n";
    for (size_t k = 0; k < pol.t.size(); ++k) {
        out << format_double(pol.t[k]);
        for (int i = 0; i < pol.mu[k].size(); ++i) out << "," << format_double(pol.mu[k][i]);
        out << "\n";
    }
    write_file(path, out.str());
}

Policy read_policy_csv(const NetworkSpec& net, const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw input_error(path + ": empty policy file");
    size_t expect = 1 + net.compressors.size();
    if (split_csv_line(line).size() != expect)
        throw input_error(path + ": header does not match compressor count");
    Policy pol;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != expect) throw input_error(path + ": ragged row");
        pol.t.push_back(strtod(cells[0].c_str(), nullptr));
        VectorXd mu(net.compressors.size());
        for (int i = 0; i < mu.size(); ++i) mu[i] = strtod(cells[1 + i].c_str(), nullptr);
        pol.mu.push_back(std::move(mu));
    }
    if (pol.t.empty()) throw input_error(path + ": policy has no rows");
    return pol;
}

void dump_matrix_coo(const Eigen::SparseMatrix<double, Eigen::RowMajor>& m, const std::string& path) {
    std::ostringstream out;
    for (int r = 0; r < m.outerSize(); ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it)
            out << it.row() << " " << it.col() << " " << format_double(it.value()) << "\n";
    write_file(path, out.str());
}

void dump_matrix_coo(const MatrixXd& m, const std::string& path) {
    std::ostringstream out;
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            if (m(r, c) != 0.0) out << r << " " << c << " " << format_double(m(r, c)) << "\n";
    write_file(path, out.str());
}

} // namespace gasnet
