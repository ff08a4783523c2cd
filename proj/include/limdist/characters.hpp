#ifndef LIMDIST_CHARACTERS_HPP
#define LIMDIST_CHARACTERS_HPP

#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <limdist/error.hpp>

namespace limdist
{

using cplx = std::complex<double>;

namespace detail
{

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m)
{
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m)
{
    std::uint64_t r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1) {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

inline std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n)
{
    std::vector<std::pair<std::uint64_t, int>> out;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.emplace_back(p, e);
        }
    }
    if (n > 1) {
        out.emplace_back(n, 1);
    }
    return out;
}

inline std::uint64_t euler_phi(std::uint64_t n)
{
    std::uint64_t r = n;
    for (auto [p, e] : factorize(n)) {
        r = r / p * (p - 1);
    }
    return r;
}

// Exact e^{2 pi i k / L}: quarter turns are returned without rounding so
// that real characters take exactly the values +-1.
inline cplx root_of_unity(std::uint64_t k, std::uint64_t L)
{
    k %= L;
    if (k == 0) {
        return {1.0, 0.0};
    }
    if (4 * k % L == 0) {
        switch (4 * k / L) {
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            case 3: return {0.0, -1.0};
            default: break;
        }
    }
    const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(L);
    return {std::cos(ang), std::sin(ang)};
}

// One cyclic factor of (Z/qZ)^*: residues modulo `modulus` generated by
// `generator`, with a discrete-log table indexed by residue.
struct cyclic_factor {
    std::uint64_t modulus = 1;
    std::uint64_t order = 1;
    std::vector<std::int64_t> dlog; // -1 where not in the subgroup
    bool minus_one_part = false;    // the <-1> factor of 2^e, e >= 3
    bool five_part = false;         // the <5> factor of 2^e, e >= 3
};

inline std::vector<cyclic_factor> group_structure(std::uint64_t q)
{
    std::vector<cyclic_factor> out;
    for (auto [p, e] : factorize(q)) {
        std::uint64_t pe = 1;
        for (int i = 0; i < e; ++i) {
            pe *= p;
        }
        if (p == 2) {
            if (e == 1) {
                continue;
            }
            if (e == 2) {
                cyclic_factor f;
                f.modulus = 4;
                f.order = 2;
                f.dlog.assign(4, -1);
                f.dlog[1] = 0;
                f.dlog[3] = 1;
                out.push_back(std::move(f));
                continue;
            }
            cyclic_factor sign;
            sign.modulus = pe;
            sign.order = 2;
            sign.minus_one_part = true;
            cyclic_factor five;
            five.modulus = pe;
            five.order = pe / 4;
            five.five_part = true;
            five.dlog.assign(pe, -1);
            std::uint64_t v = 1;
            for (std::uint64_t k = 0; k < five.order; ++k) {
                five.dlog[v] = static_cast<std::int64_t>(k);
                v = v * 5 % pe;
            }
            out.push_back(std::move(sign));
            out.push_back(std::move(five));
            continue;
        }
        const std::uint64_t ord = pe / p * (p - 1);
        const auto pf = factorize(p - 1);
        std::uint64_t g = 2;
        for (;; ++g) {
            bool ok = true;
            for (auto [r, re] : pf) {
                if (powmod(g, (p - 1) / r, p) == 1) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                break;
            }
        }
        if (e > 1 && powmod(g, p - 1, p * p) == 1) {
            g += p;
        }
        cyclic_factor f;
        f.modulus = pe;
        f.order = ord;
        f.dlog.assign(pe, -1);
        std::uint64_t v = 1;
        for (std::uint64_t k = 0; k < ord; ++k) {
            f.dlog[v] = static_cast<std::int64_t>(k);
            v = v * g % pe;
        }
        out.push_back(std::move(f));
    }
    return out;
}

inline std::uint64_t factor_log(const cyclic_factor &f, std::uint64_t n)
{
    const std::uint64_t r = n % f.modulus;
    if (f.minus_one_part) {
        return r % 4 == 3 ? 1 : 0;
    }
    if (f.five_part) {
        const std::uint64_t s = (r % 4 == 3) ? (f.modulus - r) : r;
        return static_cast<std::uint64_t>(f.dlog[s]);
    }
    return static_cast<std::uint64_t>(f.dlog[r]);
}

} // namespace detail

// A Dirichlet character modulo q as an explicit value table over residues.
struct dirichlet_character {
    std::uint64_t modulus = 1;
    std::uint64_t index = 0; // 0 is the principal character
    std::vector<cplx> values;
    std::uint64_t conductor = 1;
    int parity = 0; // 0 even, 1 odd

    cplx operator()(std::uint64_t n) const
    {
        return values[n % modulus];
    }

    bool principal() const noexcept
    {
        return index == 0;
    }

    bool primitive() const noexcept
    {
        return conductor == modulus && (modulus > 1 || index == 0);
    }

    bool is_real() const
    {
        for (const auto &v : values) {
            if (v.imag() != 0.0) {
                return false;
            }
        }
        return true;
    }

    std::string label() const
    {
        return std::to_string(modulus) + "." + std::to_string(index);
    }
};

class character_table
{
public:
    explicit character_table(std::uint64_t q) : q_(q)
    {
        if (q < 1 || q > 100000) {
            fail(error_kind::domain, "character_table: modulus out of range");
        }
        phi_ = detail::euler_phi(q);
        factors_ = detail::group_structure(q);

        std::uint64_t L = 1;
        for (const auto &f : factors_) {
            L = std::lcm(L, f.order);
        }

        // Residue logs, one row per residue.
        std::vector<std::vector<std::uint64_t>> logs(q);
        for (std::uint64_t n = 0; n < q; ++n) {
            if (std::gcd(n, q) != 1) {
                continue;
            }
            logs[n].reserve(factors_.size());
            for (const auto &f : factors_) {
                logs[n].push_back(detail::factor_log(f, n));
            }
        }

        chars_.reserve(phi_);
        std::vector<std::uint64_t> k(factors_.size(), 0);
        for (std::uint64_t idx = 0; idx < phi_; ++idx) {
            dirichlet_character chi;
            chi.modulus = q;
            chi.index = idx;
            chi.values.assign(q, cplx{0.0, 0.0});
            for (std::uint64_t n = 0; n < q; ++n) {
                if (std::gcd(n, q) != 1) {
                    continue;
                }
                std::uint64_t e = 0;
                for (std::size_t j = 0; j < factors_.size(); ++j) {
                    e = (e + k[j] * logs[n][j] % factors_[j].order * (L / factors_[j].order)) % L;
                }
                chi.values[n] = detail::root_of_unity(e, L);
            }
            if (q == 1) {
                chi.values[0] = 1.0;
            }
            chi.parity = (q > 2 && chi.values[q - 1].real() < 0.0) ? 1 : 0;
            chars_.push_back(std::move(chi));

            for (std::size_t j = 0; j < k.size(); ++j) {
                if (++k[j] < factors_[j].order) {
                    break;
                }
                k[j] = 0;
            }
        }
        for (auto &chi : chars_) {
            chi.conductor = compute_conductor(chi);
        }
    }

    std::uint64_t modulus() const noexcept
    {
        return q_;
    }

    std::uint64_t phi() const noexcept
    {
        return phi_;
    }

    std::size_t size() const noexcept
    {
        return chars_.size();
    }

    const dirichlet_character &operator[](std::size_t i) const
    {
        return chars_.at(i);
    }

    const std::vector<dirichlet_character> &characters() const noexcept
    {
        return chars_;
    }

    const dirichlet_character &principal() const
    {
        return chars_.front();
    }

    std::size_t conjugate_index(std::size_t i) const
    {
        const auto &chi = chars_.at(i);
        for (std::size_t j = 0; j < chars_.size(); ++j) {
            bool same = true;
            for (std::uint64_t n = 0; n < q_ && same; ++n) {
                same = std::abs(chars_[j].values[n] - std::conj(chi.values[n])) < 1e-12;
            }
            if (same) {
                return j;
            }
        }
        fail(error_kind::domain, "character_table: conjugate not found");
    }

    // The primitive character modulo the conductor that induces chars_[i].
    dirichlet_character primitive_inducer(std::size_t i) const
    {
        const auto &chi = chars_.at(i);
        if (chi.conductor == q_) {
            return chi;
        }
        const std::uint64_t f = chi.conductor;
        character_table sub(f);
        for (const auto &cand : sub.characters()) {
            bool match = true;
            for (std::uint64_t n = 1; n < q_ && match; ++n) {
                if (std::gcd(n, q_) != 1) {
                    continue;
                }
                match = std::abs(cand(n) - chi(n)) < 1e-12;
            }
            if (match) {
                return cand;
            }
        }
        fail(error_kind::domain, "character_table: inducing character not found");
    }

private:
    std::uint64_t compute_conductor(const dirichlet_character &chi) const
    {
        for (std::uint64_t d = 1; d < q_; ++d) {
            if (q_ % d != 0) {
                continue;
            }
            bool induced = true;
            for (std::uint64_t n = 1; n < q_ && induced; ++n) {
                if (std::gcd(n, q_) == 1 && n % d == 1 % d) {
                    induced = std::abs(chi(n) - 1.0) < 1e-12;
                }
            }
            if (induced) {
                return d;
            }
        }
        return q_;
    }

    std::uint64_t q_;
    std::uint64_t phi_ = 0;
    std::vector<detail::cyclic_factor> factors_;
    std::vector<dirichlet_character> chars_;
};

// Root number of a primitive character: tau(chi) / (i^kappa sqrt(q)).
inline cplx root_number(const dirichlet_character &chi)
{
    if (!chi.primitive()) {
        fail(error_kind::domain, "root_number: character is not primitive");
    }
    const std::uint64_t q = chi.modulus;
    if (q == 1) {
        return 1.0;
    }
    cplx tau{0.0, 0.0};
    for (std::uint64_t a = 1; a < q; ++a) {
        tau += chi(a) * detail::root_of_unity(a, q);
    }
    const cplx ik = chi.parity ? cplx{0.0, 1.0} : cplx{1.0, 0.0};
    return tau / (ik * std::sqrt(static_cast<double>(q)));
}

} // namespace limdist

#endif
