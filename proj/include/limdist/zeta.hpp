#ifndef LIMDIST_ZETA_HPP
#define LIMDIST_ZETA_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include <limdist/characters.hpp>
#include <limdist/error.hpp>
#include <limdist/parallel.hpp>

namespace limdist
{

// Euler-Maclaurin truncation. The series length grows with |Im s| so that
// the Bernoulli tail stays far below double rounding at desk heights.
struct em_config {
    std::size_t min_terms = 20;
    double terms_per_unit_height = 2.0;
    int bernoulli_terms = 12;
    std::size_t max_terms = std::size_t{1} << 22;
};

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

namespace detail
{

// B_{2k} for k = 1..13.
inline constexpr double bernoulli_2k[] = {
    1.0 / 6.0,           -1.0 / 30.0,           1.0 / 42.0,        -1.0 / 30.0,       5.0 / 66.0,
    -691.0 / 2730.0,     7.0 / 6.0,             -3617.0 / 510.0,   43867.0 / 798.0,   -174611.0 / 330.0,
    854513.0 / 138.0,    -236364091.0 / 2730.0, 8553103.0 / 6.0,
};

// Principal log-gamma on Re z > 0 via Stirling after upward recurrence.
inline cplx log_gamma(cplx z)
{
    if (z.real() <= 0.0) {
        fail(error_kind::domain, "log_gamma: requires Re z > 0");
    }
    cplx shift{0.0, 0.0};
    while (std::abs(z) < 15.0) {
        shift += std::log(z);
        z += 1.0;
    }
    const cplx inv = 1.0 / z;
    const cplx inv2 = inv * inv;
    cplx series{0.0, 0.0};
    cplx p = inv;
    for (int k = 1; k <= 8; ++k) {
        series += bernoulli_2k[k - 1] / (2.0 * k * (2.0 * k - 1.0)) * p;
        p *= inv2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + series - shift;
}

// (e^w - 1) / w without cancellation near w = 0.
inline cplx expm1_over(cplx w)
{
    if (std::abs(w) < 1e-4) {
        return 1.0 + w / 2.0 + w * w / 6.0 + w * w * w / 24.0;
    }
    return (std::exp(w) - 1.0) / w;
}

struct em_tail_result {
    cplx value;
    double next_term;
};

// Euler-Maclaurin correction at x = N + a for sum_{n >= N} (n + a)^{-s}.
// With subtract_pole set, the integral term is (x^{1-s} - 1)/(s - 1), valid
// when the caller's coefficients over a full period sum to zero.
inline em_tail_result em_tail(cplx s, double x, int p, bool subtract_pole)
{
    const double lx = std::log(x);
    const cplx xs = std::exp(-s * lx);
    cplx integral;
    if (subtract_pole) {
        const cplx w = (1.0 - s) * lx;
        integral = -lx * expm1_over(w);
    } else {
        integral = x * xs / (s - 1.0);
    }
    cplx total = integral + 0.5 * xs;

    cplx poch = s;
    cplx xpow = xs / x;
    double fact = 2.0; // (2k)!
    for (int k = 1; k <= p; ++k) {
        total += bernoulli_2k[k - 1] / fact * poch * xpow;
        poch *= (s + (2.0 * k - 1.0)) * (s + 2.0 * k);
        xpow /= x * x;
        fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
    }
    const double next = std::abs(bernoulli_2k[p] / fact * poch * xpow);
    return {total, next};
}

inline std::size_t em_terms(cplx s, const em_config &cfg)
{
    const double want = std::ceil(cfg.terms_per_unit_height * std::abs(s.imag()));
    return std::max<std::size_t>(cfg.min_terms, static_cast<std::size_t>(want));
}

inline cplx pow_neg(double n, cplx s)
{
    const double ln = std::log(n);
    const double mag = std::exp(-s.real() * ln);
    const double ang = -s.imag() * ln;
    return {mag * std::cos(ang), mag * std::sin(ang)};
}

// L(s) = sum_{m >= 1} chi(m) m^{-s} for a q-periodic coefficient table,
// evaluated as a Hurwitz decomposition with a shared Euler-Maclaurin tail.
inline cplx periodic_series(cplx s, const std::vector<cplx> &coeff, bool principal, double tol,
                            const em_config &cfg)
{
    const std::size_t q = coeff.size();
    const int p = std::min(cfg.bernoulli_terms, 12);
    std::size_t N = std::min(cfg.max_terms, em_terms(s, cfg));
    const double qs = std::pow(static_cast<double>(q), -s.real());

    for (;;) {
        // Remainder estimate for the slowest Hurwitz piece (a = 1/q).
        const double a_min = 1.0 / static_cast<double>(q);
        const auto probe = em_tail(s, static_cast<double>(N) + a_min, p, false);
        const double est = probe.next_term * qs * static_cast<double>(q);
        if (est <= tol) {
            break;
        }
        if (N >= cfg.max_terms) {
            fail(error_kind::accuracy, "Euler-Maclaurin: tolerance unattainable within max_terms");
        }
        N = std::min(cfg.max_terms, 2 * N);
    }

    cplx direct{0.0, 0.0};
    const std::size_t M = N * q;
    for (std::size_t m = 1; m <= M; ++m) {
        const cplx c = coeff[m % q];
        if (c == cplx{0.0, 0.0}) {
            continue;
        }
        direct += c * pow_neg(static_cast<double>(m), s);
    }

    cplx tail{0.0, 0.0};
    for (std::size_t a = 1; a <= q; ++a) {
        const cplx c = coeff[a % q];
        if (c == cplx{0.0, 0.0}) {
            continue;
        }
        const double x = static_cast<double>(N) + static_cast<double>(a) / static_cast<double>(q);
        tail += c * em_tail(s, x, p, !principal).value;
    }
    return direct + pow_neg(static_cast<double>(q), s) * tail;
}

} // namespace detail

inline cplx zeta(cplx s, double tol = 1e-14, const em_config &cfg = {})
{
    if (s == cplx{1.0, 0.0}) {
        fail(error_kind::pole, "zeta: pole at s = 1");
    }
    if (tol < 1e-14) {
        fail(error_kind::accuracy, "zeta: tol below 1e-14 is not supported");
    }
    static const std::vector<cplx> ones{cplx{1.0, 0.0}};
    return detail::periodic_series(s, ones, true, tol, cfg);
}

inline double zeta(double s, double tol = 1e-14, const em_config &cfg = {})
{
    return zeta(cplx{s, 0.0}, tol, cfg).real();
}

// Hurwitz zeta(s, a) for 0 < a <= 1.
inline cplx hurwitz_zeta(cplx s, double a, double tol = 1e-14, const em_config &cfg = {})
{
    if (!(a > 0.0 && a <= 1.0)) {
        fail(error_kind::domain, "hurwitz_zeta: a must lie in (0, 1]");
    }
    if (s == cplx{1.0, 0.0}) {
        fail(error_kind::pole, "hurwitz_zeta: pole at s = 1");
    }
    const int p = std::min(cfg.bernoulli_terms, 12);
    std::size_t N = std::min(cfg.max_terms, detail::em_terms(s, cfg));
    while (detail::em_tail(s, static_cast<double>(N) + a, p, false).next_term > tol) {
        if (N >= cfg.max_terms) {
            fail(error_kind::accuracy, "hurwitz_zeta: tolerance unattainable");
        }
        N = std::min(cfg.max_terms, 2 * N);
    }
    cplx sum{0.0, 0.0};
    for (std::size_t n = 0; n < N; ++n) {
        sum += detail::pow_neg(static_cast<double>(n) + a, s);
    }
    return sum + detail::em_tail(s, static_cast<double>(N) + a, p, false).value;
}

inline cplx dirichlet_l(cplx s, const dirichlet_character &chi, double tol = 1e-13, const em_config &cfg = {})
{
    if (chi.modulus > 100) {
        fail(error_kind::capacity, "dirichlet_l: modulus above the configured ceiling of 100");
    }
    if (chi.principal() && s == cplx{1.0, 0.0}) {
        fail(error_kind::pole, "dirichlet_l: principal character has a pole at s = 1");
    }
    if (tol < 1e-14) {
        fail(error_kind::accuracy, "dirichlet_l: tol below 1e-14 is not supported");
    }
    return detail::periodic_series(s, chi.values, chi.principal(), tol, cfg);
}

// The factor X(s) in zeta(s) = X(s) zeta(1 - s), for Re s < 1.
inline cplx zeta_functional_factor(cplx s)
{
    if (s.real() >= 1.0) {
        fail(error_kind::domain, "zeta_functional_factor: requires Re s < 1");
    }
    const double pi = std::numbers::pi;
    const cplx lg = detail::log_gamma(1.0 - s);
    return std::exp(s * std::log(2.0) + (s - 1.0) * std::log(pi) + lg) * std::sin(pi * s / 2.0);
}

// Derivative of an analytic function along `direction` (|direction| = 1):
// central differences with two Richardson levels.
template <typename F>
cplx richardson_derivative(F &&f, cplx s, cplx direction, double h)
{
    auto central = [&](double step) {
        return (f(s + step * direction) - f(s - step * direction)) / (2.0 * step);
    };
    const cplx d0 = central(h);
    const cplx d1 = central(h / 2.0);
    const cplx d2 = central(h / 4.0);
    const cplx r0 = (4.0 * d1 - d0) / 3.0;
    const cplx r1 = (4.0 * d2 - d1) / 3.0;
    return (16.0 * r1 - r0) / 15.0 / direction;
}

inline double zeta_derivative(double s, double tol = 1e-14)
{
    return richardson_derivative([&](cplx z) { return zeta(z, tol); }, cplx{s, 0.0}, cplx{1.0, 0.0}, 1e-3).real();
}

// A zeta or Dirichlet L-function viewed from the critical line. Zero
// location uses the primitive character inducing chi (same critical-line
// zeros); values and derivatives use chi itself.
class l_function
{
public:
    static l_function riemann_zeta()
    {
        return l_function{};
    }

    static l_function dirichlet(const dirichlet_character &chi)
    {
        l_function f;
        if (chi.modulus == 1) {
            return f;
        }
        f.chi_ = chi;
        if (chi.principal()) {
            return f;
        }
        character_table table(chi.modulus);
        dirichlet_character prim = table.primitive_inducer(chi.index);
        f.prim_ = prim;
        f.root_phase_ = std::exp(cplx{0.0, -0.5 * std::arg(root_number(prim))});
        return f;
    }

    bool is_zeta() const noexcept
    {
        return !chi_.has_value();
    }

    const std::optional<dirichlet_character> &character() const noexcept
    {
        return chi_;
    }

    // Value of the function itself (imprimitive Euler factors included).
    cplx eval(cplx s, double tol = 1e-13) const
    {
        if (!chi_) {
            return zeta(s, std::max(tol, 1e-14));
        }
        return dirichlet_l(s, *chi_, std::max(tol, 1e-14));
    }

    // Value of the primitive function that owns the critical-line zeros.
    cplx eval_primitive(cplx s, double tol = 1e-13) const
    {
        if (!prim_) {
            return zeta(s, std::max(tol, 1e-14));
        }
        return dirichlet_l(s, *prim_, std::max(tol, 1e-14));
    }

    double conductor() const noexcept
    {
        return prim_ ? static_cast<double>(prim_->modulus) : 1.0;
    }

    int parity() const noexcept
    {
        return prim_ ? prim_->parity : 0;
    }

    // Phase theta with exp(i theta) eps^{-1/2} L(1/2 + it) real.
    double theta(double t) const
    {
        const double q = conductor();
        const double kappa = parity();
        return 0.5 * t * std::log(q / std::numbers::pi) +
               detail::log_gamma(cplx{(0.5 + kappa) / 2.0, t / 2.0}).imag();
    }

    // Hardy Z-function of the primitive function.
    double z(double t, double tol = 1e-13) const
    {
        const cplx v = eval_primitive(cplx{0.5, t}, tol);
        return (root_phase_ * std::exp(cplx{0.0, theta(t)}) * v).real();
    }

    // Exact number of zeros with 0 < gamma <= T (no zero at T assumed), by
    // the argument principle applied to the completed function.
    double count_zeros(double T) const
    {
        if (T <= 0.0) {
            return 0.0;
        }
        const double q = conductor();
        const double kappa = parity();
        auto gamma_arg = [&](cplx s) {
            const cplx w = (s + kappa) / 2.0;
            double a = (w * std::log(q / std::numbers::pi)).imag() + detail::log_gamma(w).imag();
            if (!prim_) {
                a += std::arg(s) + std::arg(s - 1.0);
            }
            return a;
        };
        auto f = [&](cplx s) { return eval_primitive(s, 1e-12); };

        double delta = gamma_arg(cplx{0.5, T}) - gamma_arg(cplx{2.0, 0.0});
        if (prim_) {
            delta += track_arg(f, cplx{0.5, 0.0}, cplx{2.0, 0.0});
        }
        delta += std::arg(f(cplx{2.0, T})) - std::arg(f(cplx{2.0, 0.0}));
        delta += track_arg(f, cplx{2.0, T}, cplx{0.5, T});
        return delta / std::numbers::pi;
    }

    // Smooth main term of the zero count (no S(T) contribution).
    double smooth_count(double T) const
    {
        const double q = conductor();
        if (!prim_) {
            return T / (2.0 * std::numbers::pi) * std::log(T / (2.0 * std::numbers::pi * std::numbers::e)) + 7.0 / 8.0;
        }
        return T / (2.0 * std::numbers::pi) * std::log(q * T / (2.0 * std::numbers::pi * std::numbers::e));
    }

    double mean_spacing(double t) const
    {
        const double arg = conductor() * t / (2.0 * std::numbers::pi);
        return 2.0 * std::numbers::pi / std::log(std::max(arg, std::numbers::e));
    }

private:
    // Continuous change of arg f along the segment a -> b.
    template <typename F>
    static double track_arg(F &f, cplx a, cplx b)
    {
        constexpr int initial = 32;
        double total = 0.0;
        cplx prev_pt = a;
        cplx prev_val = f(a);
        for (int i = 1; i <= initial; ++i) {
            const cplx pt = a + (b - a) * (static_cast<double>(i) / initial);
            const cplx val = f(pt);
            total += refine_arg(f, prev_pt, prev_val, pt, val, 0);
            prev_pt = pt;
            prev_val = val;
        }
        return total;
    }

    template <typename F>
    static double refine_arg(F &f, cplx pa, cplx va, cplx pb, cplx vb, int depth)
    {
        const double d = std::arg(vb / va);
        if (std::abs(d) < std::numbers::pi / 8.0 || depth >= 20) {
            return d;
        }
        const cplx pm = 0.5 * (pa + pb);
        const cplx vm = f(pm);
        return refine_arg(f, pa, va, pm, vm, depth + 1) + refine_arg(f, pm, vm, pb, vb, depth + 1);
    }

    std::optional<dirichlet_character> chi_;
    std::optional<dirichlet_character> prim_;
    cplx root_phase_{1.0, 0.0};
};

// One nontrivial zero 1/2 + i gamma together with the derivative data the
// coefficient models need.
struct zero_datum {
    double gamma = 0.0;
    std::optional<double> deriv_abs;
    std::optional<cplx> zeta2rho;
    std::optional<std::uint64_t> char_id;
    std::optional<cplx> deriv; // complex L'(rho); not serialized
};

struct zero_search_config {
    double chunk_length = 10.0;
    double base_step = 0.05;
    int max_refinements = 6;
    unsigned workers = default_workers();
};

inline constexpr double max_gamma_height = 1e4;

namespace detail
{

template <typename F>
double illinois(F &&f, double a, double b, double fa, double fb, double tol)
{
    int side = 0;
    for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it) {
        const double c = (a * fb - b * fa) / (fb - fa);
        const double fc = f(c);
        if (fc == 0.0) {
            return c;
        }
        if ((fc > 0) == (fb > 0)) {
            b = c;
            fb = fc;
            if (side == -1) {
                fa /= 2;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == 1) {
                fb /= 2;
            }
            side = 1;
        }
    }
    // Finish with a bisection step to the interval midpoint.
    return 0.5 * (a + b);
}

inline std::vector<double> sign_change_roots(const l_function &lf, double a, double b, double step, double tol)
{
    std::vector<double> roots;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / step)));
    double t0 = a;
    double z0 = lf.z(t0);
    auto zf = [&](double t) { return lf.z(t); };
    for (int i = 1; i <= n; ++i) {
        const double t1 = (i == n) ? b : a + (b - a) * i / n;
        const double z1 = lf.z(t1);
        if (z1 == 0.0) {
            roots.push_back(t1);
        } else if ((z0 > 0) != (z1 > 0) && z0 != 0.0) {
            roots.push_back(illinois(zf, t0, t1, z0, z1, tol));
        }
        t0 = t1;
        z0 = z1;
    }
    return roots;
}

} // namespace detail

// All zeros 0 < gamma <= gamma_max on the critical line, each bracketed by a
// sign change of Z and refined to tol. Each chunk's sign-change count is
// checked against the exact argument-principle count; mismatches trigger
// uniform resampling at 0.05, then successively halved steps.
inline std::vector<zero_datum> find_zeros(const l_function &lf, double gamma_max, double tol = 1e-10,
                                          const zero_search_config &cfg = {})
{
    if (gamma_max > max_gamma_height) {
        fail(error_kind::capacity, "find_zeros: gamma_max above the 1e4 ceiling");
    }
    if (tol < 1e-10) {
        fail(error_kind::accuracy, "find_zeros: tol below 1e-10 is not supported");
    }
    if (gamma_max <= 0.0) {
        return {};
    }
    if (std::abs(lf.z(0.0)) < 1e-8) {
        fail(error_kind::degenerate_zero, "find_zeros: the function vanishes at s = 1/2");
    }

    // Chunk boundaries kept away from zeros so the exact counts are stable.
    std::vector<double> bounds{0.0};
    for (double b = cfg.chunk_length; b < gamma_max; b += cfg.chunk_length) {
        double t = b;
        double scale = lf.mean_spacing(b);
        for (int k = 0; k < 40 && std::abs(lf.z(t)) < 1e-3; ++k) {
            t += 0.01 * scale;
        }
        if (t < gamma_max) {
            bounds.push_back(t);
        }
    }
    bounds.push_back(gamma_max);

    std::vector<double> counts(bounds.size(), 0.0);
    parallel_for(bounds.size(), cfg.workers, [&](std::size_t i) {
        if (i == 0) {
            return;
        }
        const double c = lf.count_zeros(bounds[i]);
        const double r = std::round(c);
        if (std::abs(c - r) > 0.25) {
            fail(error_kind::accuracy, "find_zeros: argument-principle count not near an integer at T = " +
                                           std::to_string(bounds[i]));
        }
        counts[i] = r;
    });

    std::vector<std::vector<double>> found(bounds.size() - 1);
    parallel_for(found.size(), cfg.workers, [&](std::size_t i) {
        const double a = bounds[i];
        const double b = bounds[i + 1];
        const auto expected = static_cast<std::size_t>(counts[i + 1] - counts[i]);
        double step = std::clamp(0.5 * lf.mean_spacing(b), cfg.base_step, 0.5);
        auto roots = detail::sign_change_roots(lf, a, b, step, tol);
        step = cfg.base_step;
        for (int level = 0; roots.size() != expected && level <= cfg.max_refinements; ++level) {
            roots = detail::sign_change_roots(lf, a, b, step, tol);
            step /= 2.0;
        }
        if (roots.size() != expected) {
            fail(error_kind::missed_zero, "find_zeros: located " + std::to_string(roots.size()) +
                                              " sign changes in (" + std::to_string(a) + ", " + std::to_string(b) +
                                              "] but the zero count is " + std::to_string(expected));
        }
        found[i] = std::move(roots);
    });

    std::vector<zero_datum> out;
    for (const auto &chunk : found) {
        for (double g : chunk) {
            zero_datum z;
            z.gamma = g;
            if (lf.character()) {
                z.char_id = lf.character()->index;
            }
            out.push_back(z);
        }
    }
    std::sort(out.begin(), out.end(), [](const auto &x, const auto &y) { return x.gamma < y.gamma; });
    return out;
}

// Complex L'(1/2 + i gamma) for the function itself.
inline cplx deriv_complex_at_zero(const l_function &lf, double gamma, double h = 1e-4)
{
    auto f = [&](cplx s) { return lf.eval(s, 1e-14); };
    const cplx d = richardson_derivative(f, cplx{0.5, gamma}, cplx{0.0, 1.0}, h);
    if (std::abs(d) < 1e-8) {
        fail(error_kind::degenerate_zero, "deriv_at_zero: derivative below 1e-8 (possible multiple zero)");
    }
    return d;
}

inline double deriv_at_zero(const l_function &lf, const zero_datum &zero, double h = 1e-4)
{
    return std::abs(deriv_complex_at_zero(lf, zero.gamma, h));
}

inline cplx zeta_at_2rho(const zero_datum &zero, double tol = 1e-13)
{
    return zeta(cplx{1.0, 2.0 * zero.gamma}, tol);
}

// Fills deriv / deriv_abs (and zeta(2 rho) when asked) for every zero.
inline void attach_derivatives(const l_function &lf, std::vector<zero_datum> &zeros, bool with_zeta2rho,
                               unsigned workers = default_workers())
{
    parallel_for(zeros.size(), workers, [&](std::size_t i) {
        const cplx d = deriv_complex_at_zero(lf, zeros[i].gamma);
        zeros[i].deriv = d;
        zeros[i].deriv_abs = std::abs(d);
        if (with_zeta2rho) {
            zeros[i].zeta2rho = zeta_at_2rho(zeros[i]);
        }
    });
}

} // namespace limdist

#endif
