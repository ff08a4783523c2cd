#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include <limdist/lab.hpp>
#include <limdist/model.hpp>

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

std::size_t real_odd_index(const character_table &t)
{
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!t[i].principal() && t[i].is_real() && t[i].parity == 1) {
            return i;
        }
    }
    return 0;
}

coefficient_model power_model(std::size_t n, double power)
{
    coefficient_model m;
    m.label = "synthetic";
    for (std::size_t k = 1; k <= n; ++k) {
        const double x = static_cast<double>(k);
        m.terms.push_back({x, cplx{std::pow(x, -power), 0.0}});
    }
    return m;
}

} // namespace

TEST(PsiModel, FirstCoefficientAndConstant)
{
    const auto m = build_psi_model(fixtures::zeta_zeros(100.0));
    ASSERT_EQ(m.size(), static_cast<std::size_t>(oracle::zeros_upto_100));
    EXPECT_EQ(m.c, 0.0);
    EXPECT_EQ(m.label, "psi");
    EXPECT_NEAR(std::abs(m.terms[0].r), 2.0 / std::abs(cplx{0.5, oracle::gamma1}), 1e-15);
    EXPECT_NEAR(std::abs(m.terms[0].r), 0.141407, 1e-6);
    for (std::size_t i = 1; i < m.size(); ++i) {
        EXPECT_GT(m.terms[i].lambda, m.terms[i - 1].lambda);
    }
    EXPECT_GT(m.y0, 0.0);
    EXPECT_NO_THROW(m.validate());
}

TEST(PsiModel, RequiresZetaDataset)
{
    EXPECT_EQ(kind_of([] { (void)build_psi_model(fixtures::dirichlet_zeros(3, 20.0)); }), error_kind::domain);
}

TEST(MobiusModel, CoefficientsAndConstants)
{
    const auto &ds = fixtures::zeta_zeros(100.0);
    const auto m0 = build_mobius_model(ds, 0.0);
    const double want0 = 2.0 / (std::abs(cplx{0.5, oracle::gamma1}) * oracle::deriv_abs1);
    EXPECT_NEAR(std::abs(m0.terms[0].r), want0, 1e-9);
    EXPECT_NEAR(std::abs(m0.terms[0].r), 0.178283, 1e-6);
    EXPECT_EQ(m0.c, 0.0);

    const auto mh = build_mobius_model(ds, 0.5);
    EXPECT_NEAR(mh.c, 1.0 / oracle::zeta_half, 1e-13);
    EXPECT_NEAR(mh.c, -0.6847, 1e-4);
    EXPECT_EQ(build_mobius_model(ds, 0.75).c, 0.0);

    // |rho - 1| = |rho| on the critical line.
    const auto m1 = build_mobius_model(ds, 1.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_NEAR(std::abs(m1.terms[i].r), std::abs(m0.terms[i].r), 1e-14);
    }
    const cplx rho1{0.5, oracle::gamma1};
    EXPECT_LT(std::abs(m0.terms[0].r - 2.0 / (rho1 * oracle::deriv1)), 1e-9);
}

TEST(MobiusModel, Errors)
{
    const auto ds = fixtures::zeta_zeros(50.0);
    EXPECT_EQ(kind_of([&] { (void)build_mobius_model(ds, 1.5); }), error_kind::domain);
    zero_dataset bare = ds;
    for (auto &z : bare.zeros) {
        z.deriv_abs.reset();
        z.deriv.reset();
    }
    EXPECT_EQ(kind_of([&] { (void)build_mobius_model(bare, 0.0); }), error_kind::not_coefficient_ready);
}

TEST(MobiusModel, RecomputesMissingPhases)
{
    zero_dataset ds = fixtures::zeta_zeros(50.0);
    const auto with = build_mobius_model(ds, 0.0);
    for (auto &z : ds.zeros) {
        z.deriv.reset();
    }
    const auto without = build_mobius_model(ds, 0.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_LT(std::abs(with.terms[i].r - without.terms[i].r), 1e-15);
    }
}

TEST(LiouvilleModel, Constants)
{
    EXPECT_NEAR(liouville_constant(0.0), 1.0 / oracle::zeta_half, 1e-13);
    EXPECT_NEAR(liouville_constant(0.5), oracle::liouville_c_half, 1e-11);
    const double z = oracle::zeta_half;
    EXPECT_NEAR(liouville_constant(0.5), euler_gamma / z - oracle::zeta_prime_half / (2.0 * z * z), 1e-11);
    EXPECT_NEAR(liouville_constant(0.25), 1.0 / (0.5 * z), 1e-13);

    const auto &ds = fixtures::zeta_zeros(100.0);
    const auto mh = build_liouville_model(ds, 0.5);
    EXPECT_EQ(mh.secular, secular_kind::log_linear);
    EXPECT_NEAR(mh.slope, 1.0 / (2.0 * z), 1e-13);
    EXPECT_EQ(build_liouville_model(ds, 0.0).secular, secular_kind::none);
    for (const auto &t : mh.terms) {
        EXPECT_TRUE(std::isfinite(std::abs(t.r)));
    }
    const cplx rho1{0.5, oracle::gamma1};
    const cplx want = 2.0 * oracle::zeta_2rho1 / ((rho1 - 0.5) * oracle::deriv1);
    EXPECT_LT(std::abs(mh.terms[0].r - want), 1e-9);
}

TEST(LiouvilleModel, RequiresZetaTwoRho)
{
    zero_dataset ds = fixtures::zeta_zeros(50.0);
    ds.zeros[3].zeta2rho.reset();
    EXPECT_EQ(kind_of([&] { (void)build_liouville_model(ds, 0.5); }), error_kind::not_coefficient_ready);
}

TEST(MobiusApModel, ModThree)
{
    const auto &ds = fixtures::dirichlet_zeros(3, 30.0);
    const auto m = build_mobius_ap_model(ds, 1);
    EXPECT_EQ(m.label, "mobius_ap:q=3:a=1");
    EXPECT_EQ(m.c, 0.0);
    ASSERT_EQ(m.size(), ds.size());
    const character_table t(3);
    const std::size_t odd = real_odd_index(t);
    bool seen = false;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (*ds.zeros[i].char_id == odd && std::abs(ds.zeros[i].gamma - oracle::gamma1_chi3) < 1e-9) {
            const cplx rho{0.5, oracle::gamma1_chi3};
            EXPECT_LT(std::abs(m.terms[i].r - 1.0 / (rho * oracle::deriv1_chi3)), 1e-9);
            seen = true;
        }
    }
    EXPECT_TRUE(seen);
}

TEST(MobiusApModel, ModFourPhaseFlip)
{
    const auto &ds = fixtures::dirichlet_zeros(4, 30.0);
    const auto m1 = build_mobius_ap_model(ds, 1);
    const auto m3 = build_mobius_ap_model(ds, 3);
    const character_table t(4);
    const std::size_t odd = real_odd_index(t);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (*ds.zeros[i].char_id == odd) {
            EXPECT_LT(std::abs(m3.terms[i].r + m1.terms[i].r), 1e-15);
        } else {
            EXPECT_LT(std::abs(m3.terms[i].r - m1.terms[i].r), 1e-15);
        }
    }
    std::size_t first = 0;
    while (*ds.zeros[first].char_id != odd) {
        ++first;
    }
    const double want = 1.0 / (std::abs(cplx{0.5, oracle::gamma1_chi4}) * std::abs(oracle::deriv1_chi4));
    EXPECT_NEAR(std::abs(m1.terms[first].r), want, 1e-9);
}

TEST(MobiusApModel, Errors)
{
    const auto &ds = fixtures::dirichlet_zeros(4, 30.0);
    EXPECT_EQ(kind_of([&] { (void)build_mobius_ap_model(ds, 2); }), error_kind::invalid_residue);
    EXPECT_EQ(kind_of([] { (void)build_mobius_ap_model(fixtures::zeta_zeros(50.0), 1); }), error_kind::domain);
    EXPECT_GT(min_central_value(4), 1e-8);
}

TEST(VectorModel, SharedFrequenciesForResidues)
{
    const auto &ds = fixtures::dirichlet_zeros(3, 50.0);
    const auto a = build_mobius_ap_model(ds, 1);
    const auto b = build_mobius_ap_model(ds, 2);
    const auto v = build_vector_model({a, b});
    EXPECT_EQ(v.dim(), 2u);
    EXPECT_EQ(v.size(), ds.size());
    bool differ = false;
    for (std::size_t j = 0; j < v.size(); ++j) {
        EXPECT_TRUE(v.present[0][j] && v.present[1][j]);
        differ = differ || std::abs(v.rows[0][j] - v.rows[1][j]) > 1e-12;
    }
    EXPECT_TRUE(differ);
    EXPECT_EQ(v.collapse(0), a);
    EXPECT_EQ(v.collapse(1), b);
}

TEST(VectorModel, PrimeCountAndMertensPair)
{
    const auto &ds = fixtures::zeta_zeros(100.0);
    const auto pi_li = build_pi_li_model(ds);
    const auto mob = build_mobius_model(ds, 0.0);
    EXPECT_EQ(pi_li.c, -1.0);
    const auto v = build_vector_model({pi_li, mob});
    ASSERT_EQ(v.size(), ds.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        EXPECT_NE(v.rows[0][j], cplx(0.0, 0.0));
        EXPECT_NE(v.rows[1][j], cplx(0.0, 0.0));
    }
    EXPECT_EQ(v.constants(), (std::vector<double>{-1.0, 0.0}));
    EXPECT_EQ(v.collapse(0), pi_li);
    EXPECT_EQ(v.collapse(1), mob);
}

TEST(VectorModel, DisjointFrequenciesInterleave)
{
    coefficient_model a;
    a.label = "a";
    a.terms = {{1.0, {1.0, 0.0}}, {3.0, {3.0, 0.0}}};
    coefficient_model b;
    b.label = "b";
    b.c = 2.0;
    b.terms = {{2.0, {0.0, 2.0}}, {3.0, {0.0, 3.0}}, {4.0, {0.0, 4.0}}};
    const auto v = build_vector_model({a, b});
    EXPECT_EQ(v.lambdas, (std::vector<double>{1.0, 2.0, 3.0, 4.0}));
    EXPECT_EQ(v.rows[0], (std::vector<cplx>{1.0, 0.0, 3.0, 0.0}));
    EXPECT_EQ(v.rows[1], (std::vector<cplx>{0.0, {0.0, 2.0}, {0.0, 3.0}, {0.0, 4.0}}));
    EXPECT_EQ(v.collapse(0), a);
    EXPECT_EQ(v.collapse(1), b);

    const auto d = difference_model(v);
    EXPECT_EQ(d.label, "diff(a,b)");
    EXPECT_EQ(d.c, -2.0);
    ASSERT_EQ(d.size(), 4u);
    EXPECT_EQ(d.terms[2].r, cplx(3.0, -3.0));
    EXPECT_EQ(kind_of([&] { (void)difference_model(v, 0, 2); }), error_kind::arity_mismatch);
    EXPECT_EQ(kind_of([&] { (void)build_vector_model({a}); }), error_kind::domain);

    const auto t = v.truncated(2.5);
    EXPECT_EQ(t.size(), 2u);
    EXPECT_EQ(t.collapse(1).terms.size(), 1u);
}

TEST(VectorModel, RepeatedFrequencyWithinComponent)
{
    coefficient_model a;
    a.label = "a";
    a.terms = {{1.0, {1.0, 0.0}}, {1.0, {2.0, 0.0}}};
    coefficient_model b;
    b.label = "b";
    b.terms = {{1.0, {5.0, 0.0}}};
    const auto v = build_vector_model({a, b});
    EXPECT_EQ(v.size(), 2u);
    EXPECT_EQ(v.collapse(0), a);
    EXPECT_EQ(v.collapse(1), b);
}

TEST(Conditions, PsiModelTheta)
{
    const auto m = build_psi_model(fixtures::zeta_zeros(1000.0));
    const auto rep = check_conditions(m);
    EXPECT_EQ(rep.n_terms, static_cast<std::size_t>(oracle::zeros_upto_1000));
    EXPECT_GT(rep.theta_hat, 0.9);
    EXPECT_LT(rep.theta_hat, 1.3);
    EXPECT_GT(rep.theta_raw, rep.theta_hat);
    EXPECT_TRUE(rep.theta_pass);
    EXPECT_NEAR(rep.theta_bound, 3.0 - std::sqrt(3.0), 1e-15);

    condition_options raw;
    raw.log_power = 0.0;
    EXPECT_NEAR(check_conditions(m, raw).theta_hat, rep.theta_raw, 1e-12);
}

TEST(Conditions, SummablePowerModel)
{
    condition_options opt;
    opt.si_gamma = 0.0;
    const auto rep = check_conditions(power_model(1000, 2.0), opt);
    EXPECT_NEAR(rep.beta_hat, 2.0, 0.05);
    EXPECT_TRUE(rep.si_pass);
    EXPECT_TRUE(rep.alpha_feasible);
    EXPECT_NEAR(rep.alpha_hi, alpha_upper(rep.alpha_lo), 1e-15);
    EXPECT_LT(rep.si_sup, 1.5);
}

TEST(Conditions, MobiusThetaTracksJMinusOne)
{
    const auto &ds = fixtures::zeta_zeros(1000.0);
    const auto rep = check_conditions(build_mobius_model(ds, 0.0));
    // sum gamma^2 |r|^2 ~ 4 J_{-1}(T), which grows linearly.
    EXPECT_GT(rep.theta_raw, 0.8);
    EXPECT_LT(rep.theta_raw, 1.1);
    EXPECT_TRUE(rep.theta_pass);
}

TEST(Conditions, InsufficientData)
{
    EXPECT_EQ(kind_of([] { (void)check_conditions(power_model(99, 2.0)); }), error_kind::insufficient_data);
    EXPECT_NO_THROW((void)check_conditions(power_model(100, 2.0)));
}

TEST(Serialization, RoundTripAtFifteenDigits)
{
    const auto m = build_liouville_model(fixtures::zeta_zeros(100.0), 0.5);
    std::ostringstream os;
    write_model(os, m);
    std::istringstream is(os.str());
    const auto back = read_model(is);
    EXPECT_EQ(back.label, m.label);
    EXPECT_EQ(back.secular, m.secular);
    EXPECT_NEAR(back.slope, m.slope, 1e-14 * std::abs(m.slope));
    EXPECT_NEAR(back.c, m.c, 1e-14 * std::abs(m.c));
    ASSERT_EQ(back.size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        EXPECT_NEAR(back.terms[i].lambda, m.terms[i].lambda, 1e-14 * m.terms[i].lambda);
        EXPECT_LT(std::abs(back.terms[i].r - m.terms[i].r), 1e-14 * std::abs(m.terms[i].r) * 2.0);
    }
    std::ostringstream again;
    write_model(again, back);
    EXPECT_EQ(again.str(), os.str());

    const auto path = fixtures::temp_path("liouville_half.model");
    save_model(back, path);
    EXPECT_EQ(load_model(path), back);
}

TEST(Serialization, Errors)
{
    auto read = [](const std::string &s) {
        std::istringstream is(s);
        return read_model(is, "m");
    };
    EXPECT_EQ(kind_of([&] { (void)read(""); }), error_kind::parse);
    EXPECT_EQ(kind_of([&] { (void)read("model=psi c=0 secular=cubic\n"); }), error_kind::parse);
    EXPECT_EQ(kind_of([&] { (void)read("model=psi c=0 secular=none\n1 2\n"); }), error_kind::parse);
    EXPECT_EQ(kind_of([&] { (void)read("model=psi c=0 secular=none\n2 0 0\n1 0 0\n"); }), error_kind::monotonicity);
    EXPECT_EQ(kind_of([] { (void)load_model(fixtures::temp_path("missing.model")); }), error_kind::io);
}

TEST(Invariants, SquareSumsSettle)
{
    const auto &ds = fixtures::zeta_zeros(1000.0);
    const std::vector<coefficient_model> models{build_psi_model(ds), build_mobius_model(ds, 0.0),
                                                build_liouville_model(ds, 0.5)};
    for (const auto &m : models) {
        double prev = 1.0;
        for (double T : {200.0, 500.0, 1000.0}) {
            const double share = l2_last_span_fraction(m.truncated(T), 10.0);
            EXPECT_LT(share, prev) << m.label << " T=" << T;
            prev = share;
        }
        EXPECT_LT(l2_last_span_fraction(m, 1000.0 / 900.0), 0.05) << m.label;
    }
}

TEST(Invariants, ConjugatePairingAtOrigin)
{
    const auto m = build_mobius_model(fixtures::zeta_zeros(200.0), 0.0);
    const std::vector<double> y0{0.0};
    double want = 0.0;
    for (const auto &t : m.terms) {
        EXPECT_GT(t.lambda, 0.0);
        want += t.r.real();
    }
    EXPECT_NEAR(eval_trig_sum(m, 200.0, y0, 1)[0], want, 1e-14);
}

TEST(Invariants, SecondMomentAndTruncation)
{
    const auto m = build_psi_model(fixtures::zeta_zeros(1000.0));
    EXPECT_NEAR(m.second_moment(), 0.5 * m.l2_sum(), 1e-18);
    EXPECT_NEAR(m.second_moment(), oracle::zero_sum_1000, 1e-12);
    const auto cut = m.truncated(100.0);
    EXPECT_EQ(cut.size(), static_cast<std::size_t>(oracle::zeros_upto_100));
    EXPECT_EQ(m.count_upto(50.0), static_cast<std::size_t>(oracle::zeros_upto_50));
    EXPECT_EQ(m.first_terms(3).size(), 3u);
    coefficient_model bad = m.first_terms(3);
    std::swap(bad.terms[0], bad.terms[2]);
    EXPECT_EQ(kind_of([&] { bad.validate(); }), error_kind::monotonicity);
}
