#include "gasnet/linearize.hpp"

#include "gasnet/errors.hpp"

namespace gasnet {

VectorXd LinearModel::stack(const State& x) const {
    VectorXd z(Vw + E);
    z.head(Vw) = x.rho;
    z.tail(E) = x.phi;
    return z;
}

State LinearModel::unstack(const VectorXd& z) const {
    return State{z.head(Vw), z.tail(E)};
}

LinearModel build_model(const Dynamics& dyn, const NominalPoint& nom) {
    if (!dyn.inertia())
        throw domain_error("linearization requires the inertial dynamics");
    const Layout& lay = dyn.lay();
    if (nom.x.rho.size() != lay.Vw() || nom.x.phi.size() != lay.E() ||
        nom.s.size() != lay.Vs() || nom.w.size() != lay.Vw())
        throw domain_error("nominal point dimensions do not match the network");

    LinearModel m;
    m.nom = nom;
    m.inc = dyn.at(nom.mu);
    m.Vw = static_cast<int>(dyn.lay().Vw());
    m.E = static_cast<int>(dyn.lay().E());
    dyn.friction_jacobian(m.inc, nom.x, m.alpha, m.beta);

    const VectorXd scale = dyn.sigma() * dyn.sigma() * m.inc.ell.cwiseInverse();
    const VectorXd out_rho = m.inc.Ql * nom.x.rho;

    m.A = MatrixXd::Zero(m.dim(), m.dim());
    for (int k = 0; k < m.inc.Q.outerSize(); ++k)
        for (SpMat::InnerIterator it(m.inc.Q, k); it; ++it)
            m.A(it.col(), m.Vw + k) += it.value() * m.inc.chi[k] / m.inc.Lambda[it.col()];
    for (int k = 0; k < m.inc.M.outerSize(); ++k)
        for (SpMat::InnerIterator it(m.inc.M, k); it; ++it)
            m.A(m.Vw + k, it.col()) -= scale[k] * it.value();
    for (int k = 0; k < m.inc.Ql.outerSize(); ++k)
        for (SpMat::InnerIterator it(m.inc.Ql, k); it; ++it)
            m.A(m.Vw + k, it.col()) += m.alpha[k] * it.value();
    m.A.bottomRightCorner(m.E, m.E).diagonal() = -m.beta;

    const VectorXd grad_bar = m.inc.M * nom.x.rho + m.inc.N * nom.s;
    const VectorXd fric_bar =
        m.inc.K.cwiseProduct(nom.x.phi.cwiseProduct(nom.x.phi.cwiseAbs())).cwiseQuotient(out_rho);
    m.F = VectorXd::Zero(m.dim());
    m.F.tail(m.E) = scale.cwiseProduct(grad_bar) - fric_bar - m.alpha.cwiseProduct(out_rho) +
                    m.beta.cwiseProduct(nom.x.phi);
    m.flux_bar = dyn.rhs(nom.x, nom.mu, nom.s, nom.w).phi;
    return m;
}

VectorXd linear_rhs(const Dynamics& dyn, const LinearModel& m, const State& x,
                    const VectorXd& mu, const VectorXd& s, const VectorXd& w) {
    const Layout& lay = dyn.lay();
    if (x.rho.size() != static_cast<Eigen::Index>(lay.Vw()) ||
        x.phi.size() != static_cast<Eigen::Index>(lay.E()))
        throw domain_error("linear_rhs: state size mismatch");

    const IncidenceSet& bar = m.inc;
    const VectorXd scale = dyn.sigma() * dyn.sigma() * bar.ell.cwiseInverse();

    VectorXd out(m.dim());

    // Mass rows are linear already; same expression as the dynamics.
    out.head(m.Vw) =
        (bar.Q.transpose() * (bar.chi.asDiagonal() * x.phi) - w).cwiseQuotient(bar.Lambda);

    // Flux rows evaluated in increments off the nominal so that at the nominal
    // arguments every bracket vanishes identically and the nonlinear right
    // side is reproduced to the last bit.
    const IncidenceSet fresh = dyn.at(mu);
    const VectorXd u_mu = fresh.N * m.nom.s + fresh.M * m.nom.x.rho;
    const VectorXd u_bar = bar.N * m.nom.s + bar.M * m.nom.x.rho;

    out.tail(m.E) = m.flux_bar;
    out.tail(m.E) += m.alpha.cwiseProduct(bar.Ql * (x.rho - m.nom.x.rho));
    out.tail(m.E) -= scale.cwiseProduct(VectorXd(bar.M * (x.rho - m.nom.x.rho)));
    out.tail(m.E) -= m.beta.cwiseProduct(x.phi - m.nom.x.phi);
    out.tail(m.E) -= scale.cwiseProduct(u_mu - u_bar);
    out.tail(m.E) -= scale.cwiseProduct(VectorXd(bar.N * (s - m.nom.s)));
    return out;
}

LinearModel relinearize(const Dynamics& dyn, const State& x, const VectorXd& mu,
                        const VectorXd& s, const VectorXd& w) {
    return build_model(dyn, NominalPoint{x, mu, s, w});
}

} // namespace gasnet
