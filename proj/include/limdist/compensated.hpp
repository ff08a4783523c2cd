#ifndef LIMDIST_COMPENSATED_HPP
#define LIMDIST_COMPENSATED_HPP

#include <cmath>
#include <complex>
#include <concepts>

namespace limdist
{

// Kahan-Babuska (Neumaier) running sum. The correction term also absorbs
// the error when an addend is larger than the running total.
template <std::floating_point T>
class compensated_sum
{
public:
    constexpr compensated_sum() = default;
    constexpr explicit compensated_sum(T init) : sum_(init) {}

    constexpr compensated_sum &operator+=(T x) noexcept
    {
        const T t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    constexpr compensated_sum &operator-=(T x) noexcept
    {
        return *this += -x;
    }

    // Merges another partial sum; both the head and the carried correction
    // go through the compensated path.
    constexpr compensated_sum &operator+=(const compensated_sum &other) noexcept
    {
        *this += other.sum_;
        comp_ += other.comp_;
        return *this;
    }

    constexpr T value() const noexcept
    {
        return sum_ + comp_;
    }

    constexpr explicit operator T() const noexcept
    {
        return value();
    }

private:
    T sum_{0};
    T comp_{0};
};

template <std::floating_point T>
class compensated_complex_sum
{
public:
    compensated_complex_sum &operator+=(std::complex<T> z) noexcept
    {
        re_ += z.real();
        im_ += z.imag();
        return *this;
    }

    std::complex<T> value() const noexcept
    {
        return {re_.value(), im_.value()};
    }

private:
    compensated_sum<T> re_;
    compensated_sum<T> im_;
};

} // namespace limdist

#endif
