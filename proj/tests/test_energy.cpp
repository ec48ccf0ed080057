#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "singvar/energy.hpp"
#include "singvar/errors.hpp"
#include "test_util.hpp"

using namespace singvar;

namespace {

Field affine_field(const Grid& g, int k, const Vec& a, const Mat& A) {
    return make_field(g, k, [&](const std::vector<double>& x) {
        Vec v = a;
        for (int c = 0; c < k; ++c)
            for (int d = 0; d < g.n; ++d) v[c] += A(c, d) * x[d];
        return v;
    });
}

// Directional-derivative test of energy_gradient on interior perturbations.
void check_gradient(const DiscreteEnergy& de, const Field& f, std::uint64_t seed) {
    Vec grad = energy_gradient(de, f);
    auto g = testutil::rng(seed);
    Vec w(f.values.size(), 0.0);
    const long nn = f.grid.num_nodes();
    for (long id = 0; id < nn; ++id)
        if (!f.boundary_mask[id])
            for (int c = 0; c < f.k; ++c)
                w[id * f.k + c] = testutil::uniform(g, -1.0, 1.0);
    const double t = 1e-5;
    Field fp = f, fm = f;
    axpy(t, w, fp.values);
    axpy(-t, w, fm.values);
    double dd = (energy_value(de, fp) - energy_value(de, fm)) / (2.0 * t);
    double want = dot(grad, w);
    CHECK(std::fabs(dd - want) <= 1e-6 * std::max(1.0, std::fabs(want)));
}

} // namespace

TEST_CASE("cell gradients reproduce affine slopes exactly") {
    Grid g = Grid::unit_box(2, 9);
    Mat A(2, 2);
    A(0, 0) = 1.5;
    A(0, 1) = -0.25;
    A(1, 0) = 0.75;
    A(1, 1) = 2.0;
    Field f = affine_field(g, 2, {0.3, -0.1}, A);
    for (const Mat& P : gradient_field(f))
        CHECK(testutil::mat_max_abs_diff(P, A) <= 1e-13);

    Field c = make_field(g, 1, [](const std::vector<double>&) { return Vec{0.7}; });
    for (const Mat& P : gradient_field(c)) CHECK(P.frobenius() == 0.0);
}

TEST_CASE("cell gradients converge to the analytic derivative") {
    Grid g = Grid::unit_box(1, 257);
    Field f = make_field(g, 1, [](const std::vector<double>& x) {
        return Vec{std::sin(M_PI * x[0])};
    });
    auto grads = gradient_field(f);
    double h = g.h[0], worst = 0.0;
    for (long c = 0; c < g.num_cells(); ++c) {
        double mid = (c + 0.5) * h;
        worst = std::max(worst, std::fabs(grads[c](0, 0) - M_PI * std::cos(M_PI * mid)));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("energy of affine fields under the Dirichlet density") {
    Grid g = Grid::unit_box(2, 17);
    Mat A(2, 2);
    A(0, 0) = 0.8;
    A(0, 1) = -0.3;
    A(1, 0) = 0.1;
    A(1, 1) = -0.6;
    Field f = affine_field(g, 2, {0.0, 0.0}, A);
    DiscreteEnergy de{std::make_shared<DirichletDensity>(2, 2), nullptr};
    double fro2 = A.frobenius() * A.frobenius();
    CHECK(energy_value(de, f) == doctest::Approx(fro2).epsilon(1e-13));
}

TEST_CASE("singular potential values: node weights and infinity outside K") {
    Grid g = Grid::unit_box(2, 9);
    DiscreteEnergy de{std::make_shared<DirichletDensity>(1, 2), log_ball(1)};

    Field f = make_field(g, 1, [](const std::vector<double>&) { return Vec{0.5}; });
    CHECK(energy_value(de, f) == doctest::Approx(-std::log(0.5)).epsilon(1e-13));

    Field bad = f;
    bad.node(g.node_index({4, 4}))[0] = 1.0; // margin 0
    CHECK(energy_value(de, bad) == kInf);
    CHECK_THROWS_AS(energy_gradient(de, bad), BoundaryContact);
}

TEST_CASE("energy gradient is the exact derivative") {
    Grid g1 = Grid::unit_box(1, 17);
    Grid g2 = Grid::unit_box(2, 9);

    Field f1 = make_field(g1, 1, [](const std::vector<double>& x) {
        return Vec{0.3 * std::sin(M_PI * x[0]) + 0.2};
    });
    Field f2 = make_field(g2, 2, [](const std::vector<double>& x) {
        return Vec{0.25 * std::cos(M_PI * x[0]) * x[1], 0.3 * x[0] - 0.1};
    });

    check_gradient({std::make_shared<DirichletDensity>(1, 1), log_ball(1)}, f1, 31);
    check_gradient({std::make_shared<LogCoshDensity>(1, 1), nullptr}, f1, 32);
    check_gradient({std::make_shared<DirichletDensity>(2, 2), log_ball(2)}, f2, 33);
    check_gradient({std::make_shared<LogCoshDensity>(2, 2),
                    regularize(log_ball(2), 0.05)},
                   f2, 34);
    check_gradient(
        {z_dependent_density(
             2, 2, 0.4, [](const Vec& z) { return std::tanh(z[0]); },
             [](const Vec& z) {
                 double c = std::cosh(z[0]);
                 return Vec{1.0 / (c * c), 0.0};
             }),
         log_ball(2)},
        f2, 35);
    check_gradient({std::make_shared<DirichletDensity>(1, 1),
                    inverse_square(std::make_shared<BallMargin>(1), 0.5)},
                   f1, 36);
}

TEST_CASE("discrete Laplacian stencil on a 5-node line") {
    Grid g = Grid::unit_box(1, 5);
    Field f = make_field(g, 1, [](const std::vector<double>& x) {
        return Vec{x[0] * x[0] - 0.3 * x[0]};
    });
    DiscreteEnergy de{std::make_shared<DirichletDensity>(1, 1), nullptr};
    Vec grad = energy_gradient(de, f);
    double h = g.h[0];
    for (long i = 1; i <= 3; ++i) {
        double lap = (f.node(i + 1)[0] - 2.0 * f.node(i)[0] + f.node(i - 1)[0]) / h;
        CHECK(grad[i] == doctest::Approx(-2.0 * lap).epsilon(1e-12));
    }
    CHECK(grad[0] == 0.0);
    CHECK(grad[4] == 0.0);
}

TEST_CASE("rescaled density identities") {
    auto base = std::make_shared<DirichletDensity>(2, 2);
    auto g = testutil::rng(37);
    Mat A(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) A(i, j) = testutil::uniform(g, -1.0, 1.0);

    // Quadratic F: rescaling is the identity on densities.
    auto rq = rescaled_density(base, A, 0.37);
    for (int t = 0; t < 20; ++t) {
        Mat P(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) P(i, j) = testutil::uniform(g, -2.0, 2.0);
        CHECK(rq->value(Vec{}, P) ==
              doctest::Approx(base->value(Vec{}, P)).epsilon(1e-11));
    }

    // Any F: zero value and zero dP at P = 0.
    auto lc = std::make_shared<LogCoshDensity>(2, 2);
    auto rl = rescaled_density(lc, A, 0.1);
    Mat zero(2, 2);
    CHECK(std::fabs(rl->value(Vec{}, zero)) <= 1e-14);
    CHECK(rl->dP(Vec{}, zero).frobenius() <= 1e-12);

    // lambda -> 0 limit is the quadratic (1/2) P' d2F(A) P.
    Mat P(2, 2);
    P(0, 0) = 0.4;
    P(0, 1) = -0.7;
    P(1, 0) = 0.2;
    P(1, 1) = 0.9;
    Mat HP = lc->dP2_apply(Vec{}, A, P);
    double quad = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) quad += 0.5 * P(i, j) * HP(i, j);
    double prev_err = kInf;
    for (double lam : {1e-1, 1e-2, 1e-3}) {
        double err = std::fabs(rescaled_density(lc, A, lam)->value(Vec{}, P) - quad);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err <= 1e-3);
}

TEST_CASE("z-dependent density bounds") {
    CHECK_THROWS_AS(z_dependent_density(
                        1, 1, 1.0, [](const Vec&) { return 0.0; },
                        [](const Vec&) { return Vec{0.0}; }),
                    LosesCoercivity);

    double beta = 0.4;
    auto d = z_dependent_density(
        2, 2, beta, [](const Vec& z) { return std::tanh(z[0]); },
        [](const Vec& z) {
            double c = std::cosh(z[0]);
            return Vec{1.0 / (c * c), 0.0};
        });
    CHECK(d->dz_lipschitz() == doctest::Approx(2.0 * beta).epsilon(1e-15));
    CHECK(d->convexity_modulus() == doctest::Approx(2.0 * (1.0 - beta)).epsilon(1e-15));

    auto g = testutil::rng(38);
    for (int t = 0; t < 200; ++t) {
        Vec z1 = testutil::random_vec(g, 2), z2 = testutil::random_vec(g, 2);
        Mat P(2, 2);
        double p2 = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                P(i, j) = testutil::uniform(g, -2.0, 2.0);
                p2 += P(i, j) * P(i, j);
            }
        CHECK(std::fabs(d->value(z1, P) - d->value(z2, P)) <=
              2.0 * beta * (1.0 + p2) * norm2(vsub(z1, z2)) + 1e-12);

        // Sampled convexity: R : d2F : R >= modulus |R|^2.
        Mat R(2, 2);
        double r2 = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                R(i, j) = testutil::uniform(g, -1.0, 1.0);
                r2 += R(i, j) * R(i, j);
            }
        Mat HR = d->dP2_apply(z1, P, R);
        double quad = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) quad += R(i, j) * HR(i, j);
        CHECK(quad >= d->convexity_modulus() * r2 - 1e-12);
    }

    // beta = 0 reduces to the Dirichlet density.
    auto d0 = z_dependent_density(
        1, 1, 0.0, [](const Vec&) { return 0.5; },
        [](const Vec&) { return Vec{0.0}; });
    Mat P(1, 1);
    P(0, 0) = 1.3;
    CHECK(d0->value(Vec{0.2}, P) == doctest::Approx(1.69).epsilon(1e-14));
}

TEST_CASE("coercivity witness on random fields") {
    Grid g = Grid::unit_box(2, 9);
    auto rng = testutil::rng(39);
    DiscreteEnergy de{std::make_shared<LogCoshDensity>(1, 2), nullptr};
    for (int t = 0; t < 20; ++t) {
        Field f = make_field(g, 1, [&](const std::vector<double>&) {
            return Vec{testutil::uniform(rng, -0.9, 0.9)};
        });
        double lower = 0.0;
        const double cv = g.cell_volume();
        for (const Mat& P : gradient_field(f))
            lower += cv * P.frobenius() * P.frobenius();
        CHECK(energy_value(de, f) >= lower - 1e-12);
    }
}

TEST_CASE("field snapshots round trip exactly") {
    Grid g = Grid::unit_box(2, 7);
    auto rng = testutil::rng(40);
    Field f = make_field(g, 3, [&](const std::vector<double>&) {
        return Vec{testutil::uniform(rng, -1, 1), testutil::uniform(rng, -1, 1),
                   testutil::uniform(rng, -1, 1)};
    });
    const char* path = "roundtrip_test.field";
    save_field(f, path);
    Field back = load_field(path);
    std::remove(path);
    REQUIRE(back.values.size() == f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i)
        CHECK(back.values[i] == f.values[i]);
    CHECK(back.boundary_mask == f.boundary_mask);
    CHECK(back.grid.shape == f.grid.shape);
}
