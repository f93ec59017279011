#include "gasnet/network.hpp"

#include "gasnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gasnet {

double Profile::sample(double at) const {
    if (t.empty()) throw domain_error("profile has no breakpoints");
    if (at <= t.front()) return v.front();
    if (at >= t.back()) return v.back();
    auto it = std::upper_bound(t.begin(), t.end(), at);
    size_t i = size_t(it - t.begin());
    double w = (at - t[i - 1]) / (t[i] - t[i - 1]);
    return v[i - 1] + w * (v[i] - v[i - 1]);
}

VectorXd Policy::at(double time) const {
    if (mu.empty()) throw domain_error("empty policy");
    auto it = std::lower_bound(t.begin(), t.end(), time);
    size_t i = size_t(it - t.begin());
    if (i >= mu.size()) i = mu.size() - 1;
    return mu[i];
}

void validate(NetworkSpec& net) {
    std::sort(net.nodes.begin(), net.nodes.end(),
              [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
    std::sort(net.pipes.begin(), net.pipes.end(),
              [](const PipeSpec& a, const PipeSpec& b) { return a.id < b.id; });
    std::sort(net.compressors.begin(), net.compressors.end(),
              [](const CompressorSpec& a, const CompressorSpec& b) { return a.edge < b.edge; });

    if (net.nodes.empty()) throw input_error("nodes: empty");
    if (net.pipes.empty()) throw input_error("pipes: empty");

    std::set<int> node_ids;
    int supply_count = 0;
    int max_supply = std::numeric_limits<int>::min();
    int min_withdrawal = std::numeric_limits<int>::max();
    for (const auto& n : net.nodes) {
        if (!node_ids.insert(n.id).second)
            throw input_error("nodes: duplicate id " + std::to_string(n.id));
        if (n.is_supply) {
            ++supply_count;
            max_supply = std::max(max_supply, n.id);
        } else {
            min_withdrawal = std::min(min_withdrawal, n.id);
        }
    }
    if (supply_count == 0) throw input_error("nodes: no supply node");
    if (supply_count == int(net.nodes.size()))
        throw input_error("nodes: no withdrawal node");
    if (max_supply > min_withdrawal)
        throw input_error("nodes: supply labels must precede withdrawal labels");

    std::map<int, bool> supply_of;
    for (const auto& n : net.nodes) supply_of[n.id] = n.is_supply;

    std::set<int> pipe_ids;
    for (const auto& p : net.pipes) {
        std::string at = "pipes[id=" + std::to_string(p.id) + "]";
        if (!pipe_ids.insert(p.id).second)
            throw input_error("pipes: duplicate id " + std::to_string(p.id));
        if (!node_ids.count(p.from)) throw input_error(at + ".from: unknown node " + std::to_string(p.from));
        if (!node_ids.count(p.to)) throw input_error(at + ".to: unknown node " + std::to_string(p.to));
        if (p.from == p.to) throw input_error(at + ": self loop");
        if (!(p.length_m > 0)) throw input_error(at + ".length_km: must be positive");
        if (!(p.diameter_m > 0)) throw input_error(at + ".diameter_m: must be positive");
        if (!(p.friction > 0)) throw input_error(at + ".friction: must be positive");
        if (supply_of[p.to])
            throw input_error(at + ": edges incident to a supply node must be directed away from it");
    }

    std::set<int> comp_edges;
    for (const auto& c : net.compressors) {
        std::string at = "compressors[edge=" + std::to_string(c.edge) + "]";
        if (!pipe_ids.count(c.edge)) throw input_error(at + ".edge: unknown pipe");
        if (!comp_edges.insert(c.edge).second) throw input_error(at + ": duplicate compressor on pipe");
        if (!(c.max_ratio >= 1.0)) throw input_error(at + ".max_ratio: must be >= 1");
        if (!(c.efficiency > 0)) throw input_error(at + ".efficiency: must be positive");
    }

    if (!(net.lim.sigma > 0)) throw input_error("parameters.sound_speed_mps: must be positive");
    if (!(net.lim.rho_min > 0)) throw input_error("parameters.rho_min: must be positive");
    if (!(net.lim.rho_max > net.lim.rho_min)) throw input_error("parameters.rho_max: must exceed rho_min");
    if (std::isnan(net.lim.phi_min)) throw input_error("parameters.phi_min: not a number");
    if (!(net.lim.phi_max > net.lim.phi_min)) throw input_error("parameters.phi_max: must exceed phi_min");

    // undirected connectivity
    std::map<int, std::vector<int>> adj;
    for (const auto& p : net.pipes) {
        adj[p.from].push_back(p.to);
        adj[p.to].push_back(p.from);
    }
    std::set<int> seen;
    std::vector<int> stack{net.nodes.front().id};
    seen.insert(stack.back());
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : adj[u])
            if (seen.insert(v).second) stack.push_back(v);
    }
    if (seen.size() != net.nodes.size())
        throw input_error("pipes: network is not connected");

    for (const auto& [id, pr] : net.profiles) {
        std::string at = "profiles[" + std::to_string(id) + "]";
        if (!node_ids.count(id)) throw input_error(at + ": unknown node");
        if (pr.t.empty() || pr.t.size() != pr.v.size()) throw input_error(at + ": malformed breakpoints");
        for (size_t i = 1; i < pr.t.size(); ++i)
            if (!(pr.t[i] > pr.t[i - 1])) throw input_error(at + ": breakpoint times must increase");
    }
}

Layout layout(const NetworkSpec& net) {
    Layout lay;
    for (const auto& n : net.nodes)
        (n.is_supply ? lay.supply_ids : lay.withdrawal_ids).push_back(n.id);
    for (const auto& p : net.pipes) lay.edge_ids.push_back(p.id);
    int col = 0;
    for (int id : lay.supply_ids) lay.node_col[id] = col++;
    for (int id : lay.withdrawal_ids) lay.node_col[id] = col++;
    int row = 0;
    for (int id : lay.edge_ids) lay.edge_row[id] = row++;
    return lay;
}

RefinedNetwork refine(const NetworkSpec& src, double lmax_m) {
    if (!(lmax_m > 0)) throw input_error("lmax: must be positive");
    NetworkSpec net = src;
    validate(net);

    RefinedNetwork out;
    out.lmax_m = lmax_m;
    out.net.nodes = net.nodes;
    out.net.lim = net.lim;
    out.net.profiles = net.profiles;

    int next_node = 0;
    for (const auto& n : net.nodes) next_node = std::max(next_node, n.id);
    ++next_node;

    std::map<int, int> first_segment; // source pipe id -> refined pipe id
    int next_pipe = 1;
    for (const auto& p : net.pipes) {
        int nseg = int(std::ceil(p.length_m / lmax_m - 1e-12));
        nseg = std::max(nseg, 1);
        double seg_len = p.length_m / nseg;
        int tail = p.from;
        for (int k = 0; k < nseg; ++k) {
            int head = (k + 1 == nseg) ? p.to : next_node++;
            if (head != p.to)
                out.net.nodes.push_back({head, false});
            PipeSpec seg = p;
            seg.id = next_pipe++;
            seg.from = tail;
            seg.to = head;
            seg.length_m = seg_len;
            out.net.pipes.push_back(seg);
            out.parent_edge[seg.id] = p.id;
            if (k == 0) first_segment[p.id] = seg.id;
            tail = head;
        }
    }
    for (const auto& c : net.compressors) {
        CompressorSpec cc = c;
        cc.edge = first_segment.at(c.edge);
        out.net.compressors.push_back(cc);
    }
    validate(out.net);
    return out;
}

BoundarySampler::BoundarySampler(const NetworkSpec& net, const BoundaryScenario& scn) : scn_(scn) {
    if (!(scn_.horizon_s > 0)) throw input_error("scenario.horizon_s: must be positive");
    Layout lay = layout(net);
    for (int id : lay.supply_ids) {
        auto it = scn_.profiles.find(id);
        if (it == scn_.profiles.end())
            throw input_error("scenario: missing supply profile for node " + std::to_string(id));
        sup_.push_back(&it->second);
    }
    for (int id : lay.withdrawal_ids) {
        auto it = scn_.profiles.find(id);
        wdr_.push_back(it == scn_.profiles.end() ? nullptr : &it->second);
    }
}

void BoundarySampler::check_time(double t) const {
    if (t < -1e-9 || t > scn_.horizon_s * (1 + 1e-12) + 1e-9)
        throw domain_error("sample time outside scenario horizon");
}

VectorXd BoundarySampler::supply(double t) const {
    check_time(t);
    VectorXd s(sup_.size());
    for (size_t i = 0; i < sup_.size(); ++i) s[i] = sup_[i]->sample(t);
    return s;
}

VectorXd BoundarySampler::withdrawal(double t) const {
    check_time(t);
    VectorXd w(wdr_.size());
    for (size_t i = 0; i < wdr_.size(); ++i) w[i] = wdr_[i] ? wdr_[i]->sample(t) : 0.0;
    return w;
}

BoundaryScenario embedded_scenario(const NetworkSpec& net) {
    if (net.profiles.empty()) throw input_error("network document embeds no profiles");
    BoundaryScenario scn;
    scn.profiles = net.profiles;
    for (const auto& [id, pr] : scn.profiles)
        scn.horizon_s = std::max(scn.horizon_s, pr.t.back());
    return scn;
}

} // namespace gasnet
