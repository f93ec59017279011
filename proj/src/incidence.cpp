#include "gasnet/incidence.hpp"

#include "gasnet/errors.hpp"
#include "gasnet/network.hpp"

#include <vector>

namespace gasnet {

IncidenceSet assemble(const RefinedNetwork& rn, const VectorXd& mu) {
    const NetworkSpec& net = rn.net;
    if (mu.size() != int(net.compressors.size()))
        throw domain_error("ratio vector length does not match compressor count");
    for (int i = 0; i < mu.size(); ++i)
        if (!(mu[i] >= 1.0))
            throw domain_error("compressor ratio must be >= 1, got " + std::to_string(mu[i]));

    IncidenceSet inc;
    inc.lay = layout(net);
    const int V = inc.lay.V(), Vs = inc.lay.Vs(), Vw = inc.lay.Vw(), E = inc.lay.E();

    inc.mu_edge = VectorXd::Ones(E);
    for (size_t i = 0; i < net.compressors.size(); ++i) {
        int row = inc.lay.edge_row.at(net.compressors[i].edge);
        inc.mu_edge[row] = mu[int(i)];
        inc.comp_row.push_back(row);
    }

    inc.ell.resize(E);
    inc.K.resize(E);
    inc.chi.resize(E);

    using T = Eigen::Triplet<double>;
    std::vector<T> txi, tm, tn, tq, tql, tq0;
    for (const auto& p : net.pipes) {
        int k = inc.lay.edge_row.at(p.id);
        int ci = inc.lay.node_col.at(p.from);
        int cj = inc.lay.node_col.at(p.to);
        inc.ell[k] = p.length_m;
        inc.K[k] = p.friction / (2.0 * p.diameter_m);
        inc.chi[k] = p.area();

        txi.emplace_back(k, ci, -inc.mu_edge[k]);
        txi.emplace_back(k, cj, 1.0);
        // heads are always withdrawal nodes (edges leave supply nodes)
        tm.emplace_back(k, cj - Vs, 1.0);
        tq.emplace_back(k, cj - Vs, 1.0);
        tql.emplace_back(k, cj - Vs, 1.0);
        if (ci < Vs) {
            tn.emplace_back(k, ci, -inc.mu_edge[k]);
        } else {
            tm.emplace_back(k, ci - Vs, -inc.mu_edge[k]);
            tq.emplace_back(k, ci - Vs, -1.0);
            tq0.emplace_back(k, ci - Vs, -1.0);
        }
    }

    inc.Xi.resize(E, V);
    inc.M.resize(E, Vw);
    inc.N.resize(E, Vs);
    inc.Q.resize(E, Vw);
    inc.Ql.resize(E, Vw);
    inc.Q0.resize(E, Vw);
    inc.Xi.setFromTriplets(txi.begin(), txi.end());
    inc.M.setFromTriplets(tm.begin(), tm.end());
    inc.N.setFromTriplets(tn.begin(), tn.end());
    inc.Q.setFromTriplets(tq.begin(), tq.end());
    inc.Ql.setFromTriplets(tql.begin(), tql.end());
    inc.Q0.setFromTriplets(tq0.begin(), tq0.end());

    inc.Lambda = volume_matrix(inc);
    for (int j = 0; j < Vw; ++j)
        if (!(inc.Lambda[j] > 0))
            throw domain_error("withdrawal node " + std::to_string(inc.lay.withdrawal_ids[j]) +
                               " has no incoming edge; volume matrix is singular");
    return inc;
}

VectorXd volume_matrix(const IncidenceSet& inc) {
    VectorXd lambda = VectorXd::Zero(inc.lay.Vw());
    // one incoming entry per edge row, so the triple product collapses to
    // accumulating chi*ell at each head node
    for (int k = 0; k < inc.Ql.outerSize(); ++k)
        for (SpMat::InnerIterator it(inc.Ql, k); it; ++it)
            lambda[it.col()] += inc.chi[k] * inc.ell[k];
    return lambda;
}

} // namespace gasnet
