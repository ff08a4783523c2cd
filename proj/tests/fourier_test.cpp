#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include <limdist/fourier.hpp>

#include "fixtures.hpp"
#include "oracle.hpp"

using namespace limdist;

namespace
{

error_kind kind_of(const std::function<void()> &fn)
{
    try {
        fn();
    } catch (const limdist::error &e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return error_kind::usage;
}

coefficient_model psi_terms(std::size_t n)
{
    return build_psi_model(fixtures::zeta_zeros(1000.0)).first_terms(n);
}

coefficient_model harmonic(const std::string &label, double c, double shift, double scale, std::size_t n)
{
    coefficient_model m;
    m.label = label;
    m.c = c;
    for (std::size_t k = 1; k <= n; ++k) {
        const double x = static_cast<double>(k);
        m.terms.push_back({x + shift, cplx{scale / x, 0.3 * scale / x}});
    }
    return m;
}

char_fn_spec two_rotors(double c, double smoothing)
{
    char_fn_spec s;
    s.c = {c};
    s.lambdas = {1.0, 2.0};
    s.rows = {{cplx{1.0, 0.0}, cplx{0.0, 1.0}}};
    s.n_terms = 2;
    s.smoothing = smoothing;
    return s;
}

} // namespace

TEST(BesselJ0, KnownValues)
{
    EXPECT_EQ(bessel_j0(0.0), 1.0);
    EXPECT_NEAR(bessel_j0(oracle::j0_first_zero), 0.0, 1e-6);
    EXPECT_NEAR(bessel_j0(oracle::j0_first_zero), 0.0, 1e-15);
    const std::pair<double, double> table[] = {
        {1.0, 0.76519768655796655},     {5.5, -0.0068438694178191968}, {10.0, -0.24593576445134834},
        {12.0, 0.047689310796833537},   {20.0, 0.16702466434058315},   {30.0, -0.086367983581040211},
        {100.0, 0.019985850304223122},  {1000.5, 0.019486559987130137}};
    for (auto [x, want] : table) {
        EXPECT_NEAR(bessel_j0(x), want, 1e-12) << x;
    }
}

TEST(BesselJ0, EvenAndBounded)
{
    for (double x = 0.0; x < 60.0; x += 0.37) {
        EXPECT_EQ(bessel_j0(x), bessel_j0(-x));
        EXPECT_LE(std::abs(bessel_j0(x)), 1.0);
    }
    EXPECT_THROW((void)bessel_j0(std::numeric_limits<double>::infinity()), limdist::error);
}

TEST(BesselJ0, BranchesJoinSmoothly)
{
    const std::pair<double, double> edges[] = {{8.0, 0.17165080713755390609}, {25.0, 0.096266783275958116174}};
    for (auto [x, want] : edges) {
        for (double y : {std::nextafter(x, 0.0), x, std::nextafter(x, 100.0)}) {
            EXPECT_NEAR(bessel_j0(y), want, 1e-14) << y;
        }
    }
}

TEST(CharFn, OriginAndBound)
{
    const auto s = make_char_fn_spec(psi_terms(100), std::nullopt, false);
    EXPECT_EQ(char_fn(s, 0.0).value, cplx(1.0, 0.0));
    for (double xi = -40.0; xi <= 40.0; xi += 0.73) {
        EXPECT_LE(std::abs(char_fn(s, xi).value), 1.0 + 1e-15);
    }
}

TEST(CharFn, ConjugateSymmetry)
{
    auto m = psi_terms(50);
    m.c = 0.4;
    const auto s = make_char_fn_spec(m, std::nullopt, false);
    for (double xi : {0.3, 1.7, 9.0, 25.0}) {
        const cplx a = char_fn(s, xi).value;
        const cplx b = char_fn(s, -xi).value;
        EXPECT_LT(std::abs(b - std::conj(a)), 1e-15);
    }
}

TEST(CharFn, SingleTermIsOneBesselFactor)
{
    coefficient_model m;
    const cplx r = 2.0 / cplx{0.5, oracle::gamma1};
    m.terms.push_back({oracle::gamma1, r});
    const auto s = make_char_fn_spec(m, std::nullopt, false);
    for (double xi : {0.5, 3.0, 17.0, 80.0}) {
        EXPECT_NEAR(char_fn(s, xi).value.real(), bessel_j0(std::abs(r) * xi), 1e-15);
        EXPECT_EQ(char_fn(s, xi).value.imag(), 0.0);
    }
}

TEST(CharFn, ResidueRaceFactorArguments)
{
    const auto &ds = fixtures::dirichlet_zeros(3, 30.0);
    const auto v = build_vector_model({build_mobius_ap_model(ds, 1), build_mobius_ap_model(ds, 2)});
    const character_table t(3);
    const auto s = make_char_fn_spec(v, std::size_t{1}, false);
    const double xi[2] = {0.8, -1.9};
    const auto &z = ds.zeros[0];
    const auto &chi = t[static_cast<std::size_t>(*z.char_id)];
    const cplx rho{0.5, z.gamma};
    const double arg = 2.0 * std::abs(std::conj(chi(1)) * xi[0] + std::conj(chi(2)) * xi[1]) /
                       (2.0 * std::abs(rho * *z.deriv));
    EXPECT_NEAR(char_fn(s, xi).value.real(), bessel_j0(arg), 1e-14);
}

TEST(CharFn, VarianceFromCurvature)
{
    const auto m = psi_terms(100);
    const auto s = make_char_fn_spec(m, std::nullopt, false);
    const double h = 1e-2;
    const double curvature = (2.0 - char_fn(s, h).value.real() - char_fn(s, -h).value.real()) / (h * h);
    const double want = 0.5 * m.l2_sum();
    EXPECT_NEAR(curvature / want, 1.0, 1e-3);
}

TEST(CharFn, TailBoundAndErrors)
{
    const auto m = psi_terms(200);
    const auto s = make_char_fn_spec(m, std::size_t{10}, false);
    EXPECT_GT(s.tail_l2, 0.0);
    const auto v = char_fn(s, 2.0);
    EXPECT_GT(v.log_bound, 0.0);
    EXPECT_NEAR(v.log_bound, j0_log_quadratic * 4.0 * s.tail_l2, 1e-15);
    EXPECT_LT(std::abs(char_fn(make_char_fn_spec(m, std::nullopt, false), 2.0).value - v.value),
              v.abs_error_bound() + 1e-15);
    EXPECT_EQ(kind_of([&] { (void)char_fn(s, 1000.0); }), error_kind::tail_bound);
    const double two[2] = {1.0, 1.0};
    EXPECT_EQ(kind_of([&] { (void)char_fn(s, two); }), error_kind::arity_mismatch);
    char_fn_spec bad = s;
    bad.n_terms = 1000;
    EXPECT_EQ(kind_of([&] { bad.validate(); }), error_kind::domain);
}

TEST(CharFn, QuadraticConstantBoundsLogJ0)
{
    for (double u = 0.01; u <= 1.0; u += 0.01) {
        EXPECT_LE(-std::log(bessel_j0(u)), j0_log_quadratic * u * u + 1e-15) << u;
    }
}

TEST(Inversion, PsiModelMassAndVariance)
{
    const auto m = psi_terms(100);
    const auto s = make_char_fn_spec(m, std::nullopt, false);
    const auto g = invert_to_density(s);
    EXPECT_LT(g.mass_defect, 1e-3);
    EXPECT_NEAR(g.variance() / m.second_moment(), 1.0, 0.05);
    EXPECT_NEAR(g.mean(), 0.0, 1e-3);
    for (double v : g.values) {
        EXPECT_GE(v, 0.0);
    }
}

TEST(Inversion, TwoRotorsSymmetricCompactSupport)
{
    const double c = 0.5;
    const auto s = two_rotors(c, 0.02);
    inversion_options opt;
    opt.range = std::vector<std::pair<double, double>>{{c - 3.0, c + 3.0}};
    opt.points = 512;
    const auto g = invert_to_density(s, opt);
    EXPECT_LT(g.mass_defect, 1e-3);
    double outside = 0.0;
    for (std::size_t k = 0; k < g.points; ++k) {
        const double x = g.coord(0, k);
        if (std::abs(x - c) > 2.2) {
            outside += g.values[k] * g.step(0);
        }
        const double mirror = g.values[g.points - 1 - k];
        EXPECT_NEAR(g.values[k], mirror, 1e-6 * g.peak + 1e-9);
    }
    EXPECT_LT(outside, 1e-6);
}

TEST(Inversion, SlowDecayIsReported)
{
    const auto s = two_rotors(0.0, 0.0);
    EXPECT_EQ(kind_of([&] { (void)invert_to_density(s); }), error_kind::insufficient_decay);
    char_fn_spec point;
    point.c = {1.0};
    point.rows = {{}};
    EXPECT_EQ(kind_of([&] { (void)invert_to_density(point); }), error_kind::degenerate_range);
}

TEST(Inversion, RetransformRecoversCharFn)
{
    const auto s = make_char_fn_spec(psi_terms(100), std::nullopt, false);
    inversion_options opt;
    opt.points = 1024;
    const auto g = invert_to_density(s, opt);
    for (double xi : {1.0, 3.0, 8.0}) {
        compensated_complex_sum<double> acc;
        for (std::size_t k = 0; k < g.points; ++k) {
            acc += g.values[k] * std::exp(cplx{0.0, -xi * g.coord(0, k)});
        }
        const cplx back = acc.value() * g.step(0);
        EXPECT_LT(std::abs(back - char_fn(s, xi).value), 1e-5) << xi;
    }
}

TEST(Inversion, TwoDimensionalMass)
{
    const auto v = build_vector_model({harmonic("a", 0.0, 0.0, 1.0, 60), harmonic("b", 0.0, 0.25, 0.8, 60)});
    const auto s = make_char_fn_spec(v, std::nullopt, false);
    inversion_options opt;
    opt.points = 64;
    const auto g = invert_to_density(s, opt);
    EXPECT_EQ(g.dim, 2u);
    EXPECT_LT(g.mass_defect, 1e-3);
    EXPECT_NEAR(g.variance(0), 0.5 * v.collapse(0).l2_sum(), 0.05 * 0.5 * v.collapse(0).l2_sum());
    EXPECT_NEAR(g.variance(1), 0.5 * v.collapse(1).l2_sum(), 0.05 * 0.5 * v.collapse(1).l2_sum());
}

TEST(Race, IdenticalComponentsAreDegenerate)
{
    const auto m = psi_terms(50);
    const auto r = race_probability(build_vector_model({m, m}));
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.probability, 0.5);
    EXPECT_EQ(r.tie_mass, 1.0);
}

TEST(Race, ReflectionGivesComplement)
{
    const auto v = build_vector_model({harmonic("a", 0.3, 0.0, 1.0, 200), harmonic("b", 0.0, 0.5, 0.7, 200)});
    const auto ab = race_probability(v, 0, 1);
    const auto ba = race_probability(v, 1, 0);
    EXPECT_FALSE(ab.degenerate);
    EXPECT_GT(ab.probability, 0.5);
    EXPECT_NEAR(ab.probability + ba.probability, 1.0, 1e-6);
    EXPECT_NEAR(ab.probability, ab.gil_pelaez, 1e-4);
}

TEST(Race, ModThreeResiduesAreEven)
{
    const auto &ds = fixtures::dirichlet_zeros(3, 200.0);
    const auto v = build_vector_model({build_mobius_ap_model(ds, 1), build_mobius_ap_model(ds, 2)});
    const auto r = race_probability(v);
    EXPECT_NEAR(r.probability, 0.5, 1e-3);
    EXPECT_NEAR(r.gil_pelaez, 0.5, 1e-3);
    EXPECT_LT(r.density.mass_defect, 1e-3);
}

TEST(Symmetry, ScalarWithRealCoefficientsIsEven)
{
    coefficient_model m;
    for (int n = 1; n <= 80; ++n) {
        m.terms.push_back({static_cast<double>(n), cplx{1.0 / n, 0.0}});
    }
    EXPECT_TRUE(symmetry_test(make_char_fn_spec(m, std::nullopt, false)).symmetric);
}

TEST(Symmetry, ResidueRaceIsSymmetric)
{
    const auto &ds = fixtures::dirichlet_zeros(3, 100.0);
    const auto v = build_vector_model({build_mobius_ap_model(ds, 1), build_mobius_ap_model(ds, 2)});
    inversion_options opt;
    opt.points = 64;
    const auto rep = symmetry_test(make_char_fn_spec(v, std::nullopt, false), opt);
    EXPECT_TRUE(rep.symmetric) << rep.max_abs_diff << " vs " << rep.tolerance;
}

TEST(Symmetry, AsymmetricRowsDetected)
{
    const auto v = build_vector_model({harmonic("a", 0.0, 0.0, 1.0, 60), harmonic("b", 0.0, 0.25, 0.5, 60)});
    inversion_options opt;
    opt.points = 64;
    const auto rep = symmetry_test(make_char_fn_spec(v, std::nullopt, false), opt);
    EXPECT_FALSE(rep.symmetric);
    EXPECT_GT(rep.max_abs_diff, 100.0 * rep.tolerance);
}

TEST(MonteCarlo, ConstantAndIndicator)
{
    coefficient_model one;
    one.terms.push_back({oracle::gamma1, cplx{0.3, 0.1}});
    const auto s = make_char_fn_spec(one, std::nullopt, false);
    const auto f1 = torus_mc_oracle(s, 1, [](std::span<const double>) { return cplx{1.0, 0.0}; }, 100000, 7);
    EXPECT_EQ(f1.mean, cplx(1.0, 0.0));
    EXPECT_EQ(f1.se_re, 0.0);
    const auto ind = torus_mc_oracle(
        s, 1, [](std::span<const double> x) { return cplx{x[0] > 0.0 ? 1.0 : 0.0, 0.0}; }, 200000, 7);
    EXPECT_NEAR(ind.mean.real(), 0.5, 4.0 * ind.se_re);
}

TEST(MonteCarlo, AgreesWithCharFnForFewTerms)
{
    auto m = psi_terms(6);
    m.c = 0.1;
    const auto s = make_char_fn_spec(m, std::nullopt, false);
    double z2 = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        char_fn_spec sn = s;
        sn.n_terms = n;
        for (double xi : {0.5, 1.0, 2.0, 6.0}) {
            for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                const auto est = torus_mc_oracle(
                    s, n, [xi](std::span<const double> x) { return std::exp(cplx{0.0, -xi * x[0]}); }, 100000, seed);
                const cplx want = char_fn(sn, xi).value;
                const double zr = (est.mean.real() - want.real()) / est.se_re;
                const double zi = (est.mean.imag() - want.imag()) / est.se_im;
                if (seed == 1) {
                    EXPECT_LT(std::abs(zr), 3.0) << n << " " << xi;
                    EXPECT_LT(std::abs(zi), 3.0) << n << " " << xi;
                }
                z2 += zr * zr + zi * zi;
                count += 2;
            }
        }
    }
    // Mean squared z-score of an unbiased estimator is 1.
    EXPECT_NEAR(z2 / static_cast<double>(count), 1.0, 0.35);
}

TEST(MonteCarlo, DeterministicAcrossWorkers)
{
    const auto s = make_char_fn_spec(psi_terms(4), std::nullopt, false);
    auto f = [](std::span<const double> x) { return std::exp(cplx{0.0, -x[0]}); };
    const auto a = torus_mc_oracle(s, 4, f, 100000, 99, 1);
    const auto b = torus_mc_oracle(s, 4, f, 100000, 99, 3);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.se_re, b.se_re);
    EXPECT_NE(torus_mc_oracle(s, 4, f, 100000, 100, 1).mean, a.mean);
}

TEST(MonteCarlo, Limits)
{
    const auto s = make_char_fn_spec(psi_terms(10), std::nullopt, false);
    auto f = [](std::span<const double>) { return cplx{1.0, 0.0}; };
    EXPECT_EQ(kind_of([&] { (void)torus_mc_oracle(s, 7, f, 100000, 1); }), error_kind::domain);
    EXPECT_EQ(kind_of([&] { (void)torus_mc_oracle(s, 2, f, 1000, 1); }), error_kind::insufficient_data);
}

TEST(Csv, DensityAndCharFn)
{
    const auto s = make_char_fn_spec(psi_terms(100), std::nullopt, false);
    inversion_options opt;
    opt.points = 16;
    std::ostringstream os;
    write_density_csv(os, invert_to_density(s, opt), {{"model", "psi"}});
    EXPECT_EQ(os.str().rfind("# model=psi\n# mass=", 0), 0u);
    EXPECT_NE(os.str().find("\nx,density\n"), std::string::npos);
    std::ostringstream cs;
    const std::vector<double> xis{0.0, 1.0};
    write_char_fn_csv(cs, s, xis);
    EXPECT_EQ(cs.str().rfind("xi,re,im,log_bound\n0,1,", 0), 0u);
}
