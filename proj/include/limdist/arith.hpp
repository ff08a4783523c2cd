#ifndef LIMDIST_ARITH_HPP
#define LIMDIST_ARITH_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <limdist/compensated.hpp>
#include <limdist/error.hpp>
#include <limdist/parallel.hpp>
#include <limdist/zeta.hpp>

namespace limdist
{

struct sieve_config {
    std::uint64_t block_size = std::uint64_t{1} << 22;
    // Largest single block sieve_range will materialize.
    std::uint64_t max_block = std::uint64_t{1} << 27;
    unsigned workers = default_workers();
};

// Exact mu, lambda (Liouville) and Lambda (von Mangoldt) on [lo, hi].
class sieve_block
{
public:
    sieve_block() = default;

    std::uint64_t lo() const noexcept
    {
        return lo_;
    }

    std::uint64_t hi() const noexcept
    {
        return hi_;
    }

    std::size_t size() const noexcept
    {
        return mu_.size();
    }

    int mu(std::uint64_t n) const
    {
        return mu_[n - lo_];
    }

    int liouville(std::uint64_t n) const
    {
        return liouville_[n - lo_];
    }

    double lambda_vm(std::uint64_t n) const
    {
        return lambda_vm_[n - lo_];
    }

    bool is_prime(std::uint64_t n) const
    {
        return prime_[n - lo_] != 0;
    }

    std::span<const std::int8_t> mu_values() const noexcept
    {
        return mu_;
    }

    std::span<const std::int8_t> liouville_values() const noexcept
    {
        return liouville_;
    }

    std::span<const double> lambda_values() const noexcept
    {
        return lambda_vm_;
    }

private:
    friend sieve_block sieve_unchecked(std::uint64_t, std::uint64_t, std::span<const std::uint32_t>);

    std::uint64_t lo_ = 1;
    std::uint64_t hi_ = 1;
    std::vector<std::int8_t> mu_;
    std::vector<std::int8_t> liouville_;
    std::vector<double> lambda_vm_;
    std::vector<std::uint8_t> prime_;
};

// Primes up to `limit` by a plain sieve of Eratosthenes.
inline std::vector<std::uint32_t> primes_up_to(std::uint64_t limit)
{
    if (limit > (std::uint64_t{1} << 32)) {
        fail(error_kind::capacity, "primes_up_to: limit too large");
    }
    std::vector<bool> composite(limit + 1, false);
    std::vector<std::uint32_t> out;
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (composite[i]) {
            continue;
        }
        out.push_back(static_cast<std::uint32_t>(i));
        for (std::uint64_t j = i * i; j <= limit; j += i) {
            composite[j] = true;
        }
    }
    return out;
}

inline std::uint64_t isqrt(std::uint64_t n)
{
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) {
        --r;
    }
    while ((r + 1) * (r + 1) <= n) {
        ++r;
    }
    return r;
}

// Segment pass: for every prime power p^k <= hi walk its multiples, tracking
// the product of the small prime powers found; a leftover cofactor is the
// single prime factor above sqrt(hi).
inline sieve_block sieve_unchecked(std::uint64_t lo, std::uint64_t hi, std::span<const std::uint32_t> primes)
{
    sieve_block b;
    b.lo_ = lo;
    b.hi_ = hi;
    const std::size_t len = hi - lo + 1;
    std::vector<std::uint64_t> prod(len, 1);
    std::vector<std::uint32_t> lastp(len, 0);
    std::vector<std::uint8_t> distinct(len, 0);
    b.mu_.assign(len, 1);
    b.liouville_.assign(len, 1);
    b.lambda_vm_.assign(len, 0.0);
    b.prime_.assign(len, 0);

    const std::uint64_t root = isqrt(hi);
    for (const std::uint32_t p32 : primes) {
        const std::uint64_t p = p32;
        if (p > root) {
            break;
        }
        std::uint64_t pk = p;
        for (int k = 1;; ++k) {
            std::uint64_t m = (lo + pk - 1) / pk * pk;
            for (; m <= hi; m += pk) {
                const std::size_t i = m - lo;
                prod[i] *= p;
                b.liouville_[i] = static_cast<std::int8_t>(-b.liouville_[i]);
                if (k == 1) {
                    b.mu_[i] = static_cast<std::int8_t>(-b.mu_[i]);
                    ++distinct[i];
                    lastp[i] = p32;
                } else if (k == 2) {
                    b.mu_[i] = 0;
                }
            }
            if (pk > hi / p) {
                break;
            }
            pk *= p;
        }
    }

    for (std::size_t i = 0; i < len; ++i) {
        const std::uint64_t n = lo + i;
        std::uint64_t big = 0;
        if (prod[i] != n) {
            big = n / prod[i];
            b.mu_[i] = static_cast<std::int8_t>(-b.mu_[i]);
            b.liouville_[i] = static_cast<std::int8_t>(-b.liouville_[i]);
            ++distinct[i];
        }
        if (distinct[i] == 1) {
            const std::uint64_t p = big ? big : lastp[i];
            b.lambda_vm_[i] = std::log(static_cast<double>(p));
            b.prime_[i] = (p == n) ? 1 : 0;
        }
    }
    return b;
}

inline void check_range(std::uint64_t lo, std::uint64_t hi)
{
    if (lo < 1 || hi < lo) {
        fail(error_kind::domain, "sieve: require 1 <= lo <= hi");
    }
    if (hi > (std::uint64_t{1} << 63) - 1) {
        fail(error_kind::domain, "sieve: hi above 2^63 - 1");
    }
    if (isqrt(hi) > (std::uint64_t{1} << 27)) {
        fail(error_kind::capacity, "sieve: sqrt(hi) above the 2^27 base-prime budget");
    }
}

inline sieve_block sieve_range(std::uint64_t lo, std::uint64_t hi, const sieve_config &cfg = {})
{
    check_range(lo, hi);
    if (hi - lo + 1 > cfg.max_block) {
        fail(error_kind::capacity, "sieve_range: block of " + std::to_string(hi - lo + 1) +
                                       " integers exceeds the memory budget");
    }
    const auto primes = primes_up_to(isqrt(hi));
    return sieve_unchecked(lo, hi, primes);
}

// Sieves [lo, hi] in blocks of cfg.block_size, applying fn to each block in
// parallel. Results come back in block order.
template <typename Fn>
auto map_blocks(std::uint64_t lo, std::uint64_t hi, const sieve_config &cfg, Fn &&fn)
{
    using result_t = decltype(fn(std::declval<const sieve_block &>()));
    check_range(lo, hi);
    const auto primes = primes_up_to(isqrt(hi));
    const std::uint64_t bs = std::max<std::uint64_t>(1, cfg.block_size);
    const std::uint64_t nblocks = (hi - lo) / bs + 1;
    std::vector<result_t> out(nblocks);
    parallel_for(nblocks, cfg.workers, [&](std::size_t i) {
        const std::uint64_t blo = lo + i * bs;
        const std::uint64_t bhi = std::min(hi, blo + bs - 1);
        out[i] = fn(sieve_unchecked(blo, bhi, primes));
    });
    return out;
}

enum class summatory_kind { mobius, liouville, mobius_ap, psi };

namespace detail
{

inline double power_weight(std::uint64_t n, double alpha)
{
    if (alpha == 0.0) {
        return 1.0;
    }
    return std::exp(-alpha * std::log(static_cast<double>(n)));
}

} // namespace detail

// Per-block compensated partial sums of one summatory function over [1, x].
inline std::vector<compensated_sum<double>> summatory_partials(summatory_kind kind, std::uint64_t x, double alpha,
                                                               std::uint64_t q = 1, std::uint64_t a = 0,
                                                               const sieve_config &cfg = {})
{
    return map_blocks(1, x, cfg, [&](const sieve_block &b) {
        compensated_sum<double> s;
        for (std::uint64_t n = b.lo(); n <= b.hi(); ++n) {
            switch (kind) {
                case summatory_kind::mobius:
                    if (b.mu(n) != 0) {
                        s += b.mu(n) * detail::power_weight(n, alpha);
                    }
                    break;
                case summatory_kind::liouville:
                    s += b.liouville(n) * detail::power_weight(n, alpha);
                    break;
                case summatory_kind::mobius_ap:
                    if (n % q == a) {
                        s += b.mu(n);
                    }
                    break;
                case summatory_kind::psi:
                    s += b.lambda_vm(n);
                    break;
            }
        }
        return s;
    });
}

inline double reduce_in_order(const std::vector<compensated_sum<double>> &parts)
{
    compensated_sum<double> total;
    for (const auto &p : parts) {
        total += p;
    }
    return total.value();
}

inline void check_alpha(double alpha)
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        fail(error_kind::domain, "alpha must lie in [0, 1]");
    }
}

inline double summatory_M(std::uint64_t x, double alpha, const sieve_config &cfg = {})
{
    check_alpha(alpha);
    if (x < 1) {
        fail(error_kind::domain, "summatory_M: x >= 1 required");
    }
    return reduce_in_order(summatory_partials(summatory_kind::mobius, x, alpha, 1, 0, cfg));
}

inline double summatory_L(std::uint64_t x, double alpha, const sieve_config &cfg = {})
{
    check_alpha(alpha);
    if (x < 1) {
        fail(error_kind::domain, "summatory_L: x >= 1 required");
    }
    return reduce_in_order(summatory_partials(summatory_kind::liouville, x, alpha, 1, 0, cfg));
}

inline double summatory_M_ap(std::uint64_t x, std::uint64_t q, std::uint64_t a, const sieve_config &cfg = {})
{
    if (q < 2) {
        fail(error_kind::domain, "summatory_M_ap: q >= 2 required");
    }
    if (std::gcd(a, q) != 1) {
        fail(error_kind::invalid_residue, "summatory_M_ap: gcd(a, q) != 1");
    }
    if (x < 1) {
        fail(error_kind::domain, "summatory_M_ap: x >= 1 required");
    }
    return reduce_in_order(summatory_partials(summatory_kind::mobius_ap, x, 0.0, q, a % q, cfg));
}

inline double chebyshev_psi(std::uint64_t x, const sieve_config &cfg = {})
{
    if (x < 1) {
        fail(error_kind::domain, "chebyshev_psi: x >= 1 required");
    }
    return reduce_in_order(summatory_partials(summatory_kind::psi, x, 0.0, 1, 0, cfg));
}

// Real arguments: the summatory functions are step functions.
inline double summatory_M(double x, double alpha, const sieve_config &cfg = {})
{
    return summatory_M(static_cast<std::uint64_t>(std::floor(x)), alpha, cfg);
}

inline double chebyshev_psi(double x, const sieve_config &cfg = {})
{
    return chebyshev_psi(static_cast<std::uint64_t>(std::floor(x)), cfg);
}

// li(x) from log x (Ramanujan's series), x > 1.
inline double log_integral_from_log(double lx)
{
    if (!(lx > 0.0)) {
        fail(error_kind::domain, "log_integral: x > 1 required");
    }
    compensated_sum<double> s;
    double term = lx; // (-1)^{n-1} lx^n / (n! 2^{n-1})
    double inner = 0.0;  // sum of 1/(2k+1) for 2k+1 <= n
    for (int n = 1; n < 400; ++n) {
        if (n > 1) {
            term *= -lx / (2.0 * n);
        }
        if (n % 2 == 1) {
            inner += 1.0 / n;
        }
        const double add = term * inner;
        s += add;
        if (n > 2 * lx && std::abs(add) < 1e-18 * std::abs(s.value())) {
            break;
        }
    }
    return euler_gamma + std::log(lx) + std::exp(lx / 2.0) * s.value();
}

// Li(x) = int_2^x dt / log t.
inline double offset_log_integral_from_log(double lx)
{
    static const double li2 = log_integral_from_log(std::log(2.0));
    return log_integral_from_log(lx) - li2;
}

enum class error_term_kind { psi, mobius, liouville, mobius_ap, pi_li };

struct error_term_id {
    error_term_kind kind = error_term_kind::psi;
    double alpha = 0.0;
    std::uint64_t q = 0;
    std::uint64_t a = 0;

    static error_term_id psi()
    {
        return {};
    }

    static error_term_id mobius(double alpha)
    {
        return {error_term_kind::mobius, alpha, 0, 0};
    }

    static error_term_id liouville(double alpha)
    {
        return {error_term_kind::liouville, alpha, 0, 0};
    }

    static error_term_id mobius_ap(std::uint64_t q, std::uint64_t a)
    {
        return {error_term_kind::mobius_ap, 0.0, q, a};
    }

    static error_term_id pi_li()
    {
        return {error_term_kind::pi_li, 0.0, 0, 0};
    }

    std::string label() const
    {
        std::ostringstream os;
        os.precision(15);
        switch (kind) {
            case error_term_kind::psi: os << "psi"; break;
            case error_term_kind::pi_li: os << "pi_li"; break;
            case error_term_kind::mobius: os << "mobius:alpha=" << alpha; break;
            case error_term_kind::liouville: os << "liouville:alpha=" << alpha; break;
            case error_term_kind::mobius_ap: os << "mobius_ap:q=" << q << ":a=" << a; break;
        }
        return os.str();
    }

    static error_term_id parse(const std::string &label)
    {
        std::vector<std::string> parts;
        std::stringstream ss(label);
        for (std::string item; std::getline(ss, item, ':');) {
            parts.push_back(item);
        }
        if (parts.empty()) {
            fail(error_kind::parse, "error term label is empty");
        }
        error_term_id id;
        auto value_of = [&](const std::string &key) -> std::string {
            for (std::size_t i = 1; i < parts.size(); ++i) {
                if (parts[i].rfind(key + "=", 0) == 0) {
                    return parts[i].substr(key.size() + 1);
                }
            }
            fail(error_kind::parse, "error term label '" + label + "' lacks " + key);
        };
        try {
            if (parts[0] == "psi") {
                id.kind = error_term_kind::psi;
            } else if (parts[0] == "pi_li") {
                id.kind = error_term_kind::pi_li;
            } else if (parts[0] == "mobius") {
                id = mobius(std::stod(value_of("alpha")));
            } else if (parts[0] == "liouville") {
                id = liouville(std::stod(value_of("alpha")));
            } else if (parts[0] == "mobius_ap") {
                id = mobius_ap(std::stoull(value_of("q")), std::stoull(value_of("a")));
            } else {
                fail(error_kind::parse, "unknown error term '" + parts[0] + "'");
            }
        } catch (const std::logic_error &) {
            fail(error_kind::parse, "malformed error term label '" + label + "'");
        }
        return id;
    }

    void validate() const
    {
        if (kind == error_term_kind::mobius || kind == error_term_kind::liouville) {
            check_alpha(alpha);
        }
        if (kind == error_term_kind::mobius_ap) {
            if (q < 2) {
                fail(error_kind::domain, "mobius_ap: q >= 2 required");
            }
            if (std::gcd(a, q) != 1) {
                fail(error_kind::invalid_residue, "mobius_ap: gcd(a, q) != 1");
            }
        }
    }
};

struct error_term_sample {
    double y = 0.0;
    std::vector<double> value;
};

// Integer x with x <= e^y, treating y within rounding of log n as log n.
inline std::uint64_t floor_exp(double y)
{
    const double e = std::exp(y);
    const double r = std::nearbyint(e);
    if (std::abs(e - r) <= 1e-12 * r) {
        return static_cast<std::uint64_t>(r);
    }
    return static_cast<std::uint64_t>(std::floor(e));
}

namespace detail
{

// Constants subtracted by the normalizations of E2 / E3.
struct normalization_constants {
    double inv_zeta_alpha = 0.0;      // 1 / zeta(alpha)
    double zeta2a_over_zeta_a = 0.0;  // zeta(2 alpha) / zeta(alpha)
    double half_inv_zeta_half = 0.0;  // 1 / (2 zeta(1/2))
};

inline bool is_half(double alpha)
{
    return std::abs(alpha - 0.5) < 1e-15;
}

inline normalization_constants constants_for(const error_term_id &id)
{
    normalization_constants c;
    constexpr double tol = 1e-13;
    if (id.kind == error_term_kind::mobius && id.alpha > 0.5) {
        c.inv_zeta_alpha = (id.alpha == 1.0) ? 0.0 : 1.0 / zeta(id.alpha, tol);
    }
    if (id.kind == error_term_kind::liouville) {
        if (is_half(id.alpha)) {
            c.half_inv_zeta_half = 1.0 / (2.0 * zeta(0.5, tol));
        } else if (id.alpha > 0.5) {
            c.zeta2a_over_zeta_a = (id.alpha == 1.0) ? 0.0 : zeta(2.0 * id.alpha, tol) / zeta(id.alpha, tol);
        }
    }
    return c;
}

inline double normalize(const error_term_id &id, const normalization_constants &c, double y, double raw)
{
    switch (id.kind) {
        case error_term_kind::psi:
            return std::exp(-y / 2.0) * (raw - std::exp(y));
        case error_term_kind::mobius_ap:
            return std::exp(-y / 2.0) * raw;
        case error_term_kind::pi_li:
            return y * std::exp(-y / 2.0) * (raw - offset_log_integral_from_log(y));
        case error_term_kind::mobius: {
            const double scale = std::exp(y * (id.alpha - 0.5));
            return id.alpha <= 0.5 ? scale * raw : scale * (raw - c.inv_zeta_alpha);
        }
        case error_term_kind::liouville: {
            const double scale = std::exp(y * (id.alpha - 0.5));
            if (is_half(id.alpha)) {
                return raw - y * c.half_inv_zeta_half;
            }
            return id.alpha < 0.5 ? scale * raw : scale * (raw - c.zeta2a_over_zeta_a);
        }
    }
    return raw;
}

inline double term_value(const error_term_id &id, const sieve_block &b, std::uint64_t n)
{
    switch (id.kind) {
        case error_term_kind::psi: return b.lambda_vm(n);
        case error_term_kind::pi_li: return b.is_prime(n) ? 1.0 : 0.0;
        case error_term_kind::mobius: {
            const int m = b.mu(n);
            return m == 0 ? 0.0 : m * power_weight(n, id.alpha);
        }
        case error_term_kind::liouville: return b.liouville(n) * power_weight(n, id.alpha);
        case error_term_kind::mobius_ap: return (n % id.q == id.a % id.q) ? b.mu(n) : 0.0;
    }
    return 0.0;
}

} // namespace detail

// Normalized error terms sampled on an increasing y-grid, one component per
// id. One sieve sweep serves all components; blocks are summarized in
// parallel and stitched with compensated prefix sums in block order.
inline std::vector<error_term_sample> error_term_series(std::span<const error_term_id> ids,
                                                        std::span<const double> y_grid,
                                                        const sieve_config &cfg = {})
{
    if (ids.empty()) {
        fail(error_kind::domain, "error_term_series: no components");
    }
    for (const auto &id : ids) {
        id.validate();
    }
    for (std::size_t j = 0; j < y_grid.size(); ++j) {
        if (!(y_grid[j] >= 0.0) || !std::isfinite(y_grid[j]) || (j > 0 && y_grid[j] <= y_grid[j - 1])) {
            fail(error_kind::domain, "error_term_series: y_grid must be increasing and nonnegative");
        }
        for (const auto &id : ids) {
            if (id.kind == error_term_kind::pi_li && y_grid[j] <= 0.0) {
                fail(error_kind::domain, "error_term_series: pi_li requires y > 0");
            }
        }
    }
    if (y_grid.empty()) {
        return {};
    }

    const std::size_t ncomp = ids.size();
    std::vector<std::uint64_t> xs(y_grid.size());
    for (std::size_t j = 0; j < y_grid.size(); ++j) {
        xs[j] = floor_exp(y_grid[j]);
    }
    const std::uint64_t x_max = std::max<std::uint64_t>(xs.back(), 1);

    struct block_summary {
        std::size_t first = 0; // first grid index with x in this block
        std::vector<double> local; // [k * ncomp + c] partial sums up to xs[first + k]
        std::vector<compensated_sum<double>> total;
    };

    auto summaries = map_blocks(1, x_max, cfg, [&](const sieve_block &b) {
        block_summary s;
        s.total.resize(ncomp);
        auto j = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), b.lo()) - xs.begin());
        s.first = j;
        for (std::uint64_t n = b.lo(); n <= b.hi(); ++n) {
            for (std::size_t c = 0; c < ncomp; ++c) {
                const double v = detail::term_value(ids[c], b, n);
                if (v != 0.0) {
                    s.total[c] += v;
                }
            }
            while (j < xs.size() && xs[j] == n) {
                for (std::size_t c = 0; c < ncomp; ++c) {
                    s.local.push_back(s.total[c].value());
                }
                ++j;
            }
        }
        return s;
    });

    std::vector<detail::normalization_constants> consts;
    for (const auto &id : ids) {
        consts.push_back(detail::constants_for(id));
    }

    std::vector<error_term_sample> out(y_grid.size());
    std::vector<compensated_sum<double>> prefix(ncomp);
    std::size_t j = 0;
    // x = 0 never occurs (y >= 0), so every grid point lands in some block.
    for (const auto &s : summaries) {
        const std::size_t count = s.local.size() / ncomp;
        for (std::size_t k = 0; k < count; ++k, ++j) {
            out[j].y = y_grid[j];
            out[j].value.resize(ncomp);
            for (std::size_t c = 0; c < ncomp; ++c) {
                compensated_sum<double> v = prefix[c];
                v += s.local[k * ncomp + c];
                out[j].value[c] = detail::normalize(ids[c], consts[c], y_grid[j], v.value());
            }
        }
        for (std::size_t c = 0; c < ncomp; ++c) {
            prefix[c] += s.total[c];
        }
    }
    return out;
}

inline std::vector<error_term_sample> error_term_series(const error_term_id &id, std::span<const double> y_grid,
                                                        const sieve_config &cfg = {})
{
    return error_term_series(std::span<const error_term_id>(&id, 1), y_grid, cfg);
}

// Equally spaced grid lo, lo + step, ... <= hi (hi included when it lands
// within rounding of a step).
inline std::vector<double> uniform_grid(double lo, double hi, double step)
{
    if (!(step > 0.0) || hi < lo) {
        fail(error_kind::domain, "uniform_grid: need step > 0 and hi >= lo");
    }
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        g[i] = lo + static_cast<double>(i) * step;
    }
    return g;
}

// Binary mu cache: little-endian records of (n_start: u64, count: u64,
// ceil(count / 4) bytes of 2-bit codes, low bits first; 0 -> 0, 1 -> +1,
// 2 -> -1).
inline std::string mu_cache_name(std::uint64_t lo, std::uint64_t hi)
{
    return "mu_" + std::to_string(lo) + "_" + std::to_string(hi) + ".bin";
}

namespace detail
{

inline void put_u64(std::ostream &os, std::uint64_t v)
{
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    os.write(reinterpret_cast<const char *>(buf), 8);
}

inline bool get_u64(std::istream &is, std::uint64_t &v)
{
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char *>(buf), 8)) {
        return false;
    }
    v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return true;
}

} // namespace detail

inline void write_mu_cache(const std::string &path, const sieve_block &b)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        fail(error_kind::io, "write_mu_cache: cannot open " + path);
    }
    detail::put_u64(os, b.lo());
    detail::put_u64(os, b.size());
    std::vector<unsigned char> packed((b.size() + 3) / 4, 0);
    const auto mu = b.mu_values();
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const unsigned code = mu[i] == 0 ? 0u : (mu[i] > 0 ? 1u : 2u);
        packed[i / 4] = static_cast<unsigned char>(packed[i / 4] | (code << (2 * (i % 4))));
    }
    os.write(reinterpret_cast<const char *>(packed.data()), static_cast<std::streamsize>(packed.size()));
    if (!os) {
        fail(error_kind::io, "write_mu_cache: write failed for " + path);
    }
}

struct mu_record {
    std::uint64_t n_start = 0;
    std::vector<std::int8_t> mu;
};

inline std::vector<mu_record> read_mu_cache(const std::string &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        fail(error_kind::io, "read_mu_cache: cannot open " + path);
    }
    std::vector<mu_record> out;
    for (;;) {
        mu_record r;
        std::uint64_t count = 0;
        if (!detail::get_u64(is, r.n_start)) {
            if (is.gcount() != 0) {
                fail(error_kind::parse, "read_mu_cache: truncated record header");
            }
            break;
        }
        if (!detail::get_u64(is, count)) {
            fail(error_kind::parse, "read_mu_cache: truncated record header");
        }
        std::vector<unsigned char> packed((count + 3) / 4);
        if (!is.read(reinterpret_cast<char *>(packed.data()), static_cast<std::streamsize>(packed.size()))) {
            fail(error_kind::parse, "read_mu_cache: truncated record body");
        }
        r.mu.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            const unsigned code = (packed[i / 4] >> (2 * (i % 4))) & 3u;
            if (code == 3) {
                fail(error_kind::parse, "read_mu_cache: invalid code");
            }
            r.mu[i] = code == 0 ? 0 : (code == 1 ? 1 : -1);
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace limdist

#endif
