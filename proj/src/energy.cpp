#include "singvar/energy.hpp"

#include <cmath>

#include "singvar/errors.hpp"

namespace singvar {

double DirichletDensity::value(const Vec&, const Mat& P) const {
    double s = P.frobenius();
    return s * s;
}

Mat DirichletDensity::dP(const Vec&, const Mat& P) const {
    Mat g = P;
    g *= 2.0;
    return g;
}

Mat DirichletDensity::dP2_apply(const Vec&, const Mat&, const Mat& R) const {
    Mat g = R;
    g *= 2.0;
    return g;
}

double LogCoshDensity::value(const Vec&, const Mat& P) const {
    double s = 0.0;
    for (std::size_t i = 0; i < P.rows(); ++i)
        for (std::size_t j = 0; j < P.cols(); ++j) {
            const double p = P(i, j);
            // log cosh with overflow-safe form
            s += p * p + std::fabs(p) + std::log1p(std::exp(-2.0 * std::fabs(p))) -
                 std::log(2.0);
        }
    return s;
}

Mat LogCoshDensity::dP(const Vec&, const Mat& P) const {
    Mat g(P.rows(), P.cols());
    for (std::size_t i = 0; i < P.rows(); ++i)
        for (std::size_t j = 0; j < P.cols(); ++j)
            g(i, j) = 2.0 * P(i, j) + std::tanh(P(i, j));
    return g;
}

Mat LogCoshDensity::dP2_apply(const Vec&, const Mat& P, const Mat& R) const {
    Mat g(P.rows(), P.cols());
    for (std::size_t i = 0; i < P.rows(); ++i)
        for (std::size_t j = 0; j < P.cols(); ++j) {
            const double t = std::tanh(P(i, j));
            g(i, j) = (2.0 + 1.0 - t * t) * R(i, j);
        }
    return g;
}

Mat LogCoshDensity::hessian_dense(const Mat& P) const {
    const std::size_t m = P.rows() * P.cols();
    Mat H(m, m);
    for (std::size_t i = 0; i < P.rows(); ++i)
        for (std::size_t j = 0; j < P.cols(); ++j) {
            const double t = std::tanh(P(i, j));
            H(i * P.cols() + j, i * P.cols() + j) = 3.0 - t * t;
        }
    return H;
}

ZDependentDensity::ZDependentDensity(int k, int n, double beta,
                                     std::function<double(const Vec&)> w,
                                     std::function<Vec(const Vec&)> grad_w)
    : k_(k), n_(n), beta_(beta), w_(std::move(w)), grad_w_(std::move(grad_w)) {
    if (std::fabs(beta) >= 1.0)
        throw LosesCoercivity("z_dependent_density: |beta| must be < 1");
}

double ZDependentDensity::value(const Vec& z, const Mat& P) const {
    double s = P.frobenius();
    return (1.0 + beta_ * w_(z)) * s * s;
}

Mat ZDependentDensity::dP(const Vec& z, const Mat& P) const {
    Mat g = P;
    g *= 2.0 * (1.0 + beta_ * w_(z));
    return g;
}

Mat ZDependentDensity::dP2_apply(const Vec& z, const Mat&, const Mat& R) const {
    Mat g = R;
    g *= 2.0 * (1.0 + beta_ * w_(z));
    return g;
}

Vec ZDependentDensity::dz(const Vec& z, const Mat& P) const {
    double s = P.frobenius();
    Vec g = grad_w_(z);
    for (double& v : g) v *= beta_ * s * s;
    return g;
}

namespace {

class RescaledDensity final : public EnergyDensity {
public:
    RescaledDensity(std::shared_ptr<const EnergyDensity> base, Mat A, double lambda)
        : base_(std::move(base)), A_(std::move(A)), lambda_(lambda) {
        if (!(lambda > 0.0)) throw Error("rescaled_density: lambda must be positive");
        zref_.assign(base_->k(), 0.0);
        FA_ = base_->value(zref_, A_);
        dFA_ = base_->dP(zref_, A_);
    }

    int k() const override { return base_->k(); }
    int n() const override { return base_->n(); }

    double value(const Vec&, const Mat& P) const override {
        Mat shifted = shift(P);
        double lin = 0.0;
        for (std::size_t i = 0; i < P.rows(); ++i)
            for (std::size_t j = 0; j < P.cols(); ++j) lin += dFA_(i, j) * P(i, j);
        return (base_->value(zref_, shifted) - FA_ - lambda_ * lin) /
               (lambda_ * lambda_);
    }

    Mat dP(const Vec&, const Mat& P) const override {
        Mat g = base_->dP(zref_, shift(P));
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j)
                g(i, j) = (g(i, j) - dFA_(i, j)) / lambda_;
        return g;
    }

    Mat dP2_apply(const Vec&, const Mat& P, const Mat& R) const override {
        return base_->dP2_apply(zref_, shift(P), R);
    }

    double convexity_modulus() const override { return base_->convexity_modulus(); }

private:
    Mat shift(const Mat& P) const {
        Mat s = A_;
        for (std::size_t i = 0; i < s.rows(); ++i)
            for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) += lambda_ * P(i, j);
        return s;
    }

    std::shared_ptr<const EnergyDensity> base_;
    Mat A_;
    double lambda_;
    Vec zref_;
    double FA_;
    Mat dFA_;
};

} // namespace

std::shared_ptr<EnergyDensity> rescaled_density(std::shared_ptr<const EnergyDensity> base,
                                                const Mat& A, double lambda) {
    return std::make_shared<RescaledDensity>(std::move(base), A, lambda);
}

std::shared_ptr<EnergyDensity> z_dependent_density(
    int k, int n, double beta, std::function<double(const Vec&)> w,
    std::function<Vec(const Vec&)> grad_w) {
    return std::make_shared<ZDependentDensity>(k, n, beta, std::move(w),
                                               std::move(grad_w));
}

std::vector<Mat> gradient_field(const Field& f) {
    const Grid& g = f.grid;
    const long nc = g.num_cells();
    std::vector<Mat> out;
    out.reserve(nc);
    for (long c = 0; c < nc; ++c) {
        auto idx = g.cell_coords(c);
        const long base = g.node_index(idx);
        Mat P(f.k, g.n);
        for (int a = 0; a < g.n; ++a) {
            auto nb = idx;
            nb[a] += 1;
            const long other = g.node_index(nb);
            for (int comp = 0; comp < f.k; ++comp)
                P(comp, a) = (f.node(other)[comp] - f.node(base)[comp]) / g.h[a];
        }
        out.push_back(std::move(P));
    }
    return out;
}

namespace {

// Enumerate the 2^n corners of cell idx; returns node ids.
void cell_corner_ids(const Grid& g, const std::vector<int>& idx,
                     std::vector<long>& ids) {
    const int corners = 1 << g.n;
    ids.resize(corners);
    for (int c = 0; c < corners; ++c) {
        auto corner = idx;
        for (int a = 0; a < g.n; ++a)
            if (c & (1 << a)) corner[a] += 1;
        ids[c] = g.node_index(corner);
    }
}

} // namespace

double energy_value(const DiscreteEnergy& de, const Field& f) {
    const Grid& g = f.grid;

    double pot = 0.0;
    if (de.potential) {
        Vec w = node_weights(g);
        const long nn = g.num_nodes();
        for (long id = 0; id < nn; ++id) {
            Vec z = f.node_value(id);
            if (de.potential->is_singular() && !(de.potential->margin(z) > 0.0))
                return kInf;
            pot += w[id] * de.potential->value(z);
        }
    }

    double bulk = 0.0;
    if (de.density) {
        const double cv = g.cell_volume();
        const long nc = g.num_cells();
        std::vector<long> corners;
        for (long c = 0; c < nc; ++c) {
            auto idx = g.cell_coords(c);
            cell_corner_ids(g, idx, corners);
            Vec zbar(f.k, 0.0);
            for (long id : corners)
                for (int a = 0; a < f.k; ++a) zbar[a] += f.node(id)[a];
            for (double& v : zbar) v /= corners.size();

            Mat P(f.k, g.n);
            const long base = g.node_index(idx);
            for (int a = 0; a < g.n; ++a) {
                auto nb = idx;
                nb[a] += 1;
                const long other = g.node_index(nb);
                for (int comp = 0; comp < f.k; ++comp)
                    P(comp, a) = (f.node(other)[comp] - f.node(base)[comp]) / g.h[a];
            }
            bulk += cv * de.density->value(zbar, P);
        }
    }
    return bulk + pot;
}

Vec energy_gradient(const DiscreteEnergy& de, const Field& f) {
    const Grid& g = f.grid;
    const long nn = g.num_nodes();
    Vec grad(static_cast<std::size_t>(nn) * f.k, 0.0);

    if (de.density) {
        const double cv = g.cell_volume();
        const long nc = g.num_cells();
        std::vector<long> corners;
        for (long c = 0; c < nc; ++c) {
            auto idx = g.cell_coords(c);
            cell_corner_ids(g, idx, corners);
            Vec zbar(f.k, 0.0);
            for (long id : corners)
                for (int a = 0; a < f.k; ++a) zbar[a] += f.node(id)[a];
            for (double& v : zbar) v /= corners.size();

            Mat P(f.k, g.n);
            const long base = g.node_index(idx);
            for (int a = 0; a < g.n; ++a) {
                auto nb = idx;
                nb[a] += 1;
                const long other = g.node_index(nb);
                for (int comp = 0; comp < f.k; ++comp)
                    P(comp, a) = (f.node(other)[comp] - f.node(base)[comp]) / g.h[a];
            }

            Mat dP = de.density->dP(zbar, P);
            for (int a = 0; a < g.n; ++a) {
                auto nb = idx;
                nb[a] += 1;
                const long other = g.node_index(nb);
                for (int comp = 0; comp < f.k; ++comp) {
                    const double flux = cv * dP(comp, a) / g.h[a];
                    grad[other * f.k + comp] += flux;
                    grad[base * f.k + comp] -= flux;
                }
            }

            if (de.density->dz_lipschitz() > 0.0) {
                Vec fz = de.density->dz(zbar, P);
                const double share = cv / corners.size();
                for (long id : corners)
                    for (int a = 0; a < f.k; ++a) grad[id * f.k + a] += share * fz[a];
            }
        }
    }

    if (de.potential) {
        Vec w = node_weights(g);
        for (long id = 0; id < nn; ++id) {
            Vec z = f.node_value(id);
            if (de.potential->is_singular() && !(de.potential->margin(z) > 0.0))
                throw BoundaryContact("energy_gradient: node value on/outside dK");
            Vec pg = de.potential->gradient(z);
            for (int a = 0; a < f.k; ++a) grad[id * f.k + a] += w[id] * pg[a];
        }
    }

    // Dirichlet nodes do not move.
    for (long id = 0; id < nn; ++id)
        if (f.boundary_mask[id])
            for (int a = 0; a < f.k; ++a) grad[id * f.k + a] = 0.0;
    return grad;
}

} // namespace singvar
