#ifndef LIMDIST_ERROR_HPP
#define LIMDIST_ERROR_HPP

#include <stdexcept>
#include <string>

namespace limdist
{

enum class error_kind {
    usage,
    parse,
    capacity,
    domain,
    pole,
    accuracy,
    missed_zero,
    degenerate_zero,
    invalid_residue,
    not_coefficient_ready,
    monotonicity,
    arity_mismatch,
    insufficient_data,
    insufficient_decay,
    degenerate_range,
    tail_bound,
    io
};

inline const char *to_string(error_kind k) noexcept
{
    switch (k) {
        case error_kind::usage: return "usage";
        case error_kind::parse: return "parse";
        case error_kind::capacity: return "capacity";
        case error_kind::domain: return "domain";
        case error_kind::pole: return "pole";
        case error_kind::accuracy: return "accuracy";
        case error_kind::missed_zero: return "missed-zero";
        case error_kind::degenerate_zero: return "degenerate-zero";
        case error_kind::invalid_residue: return "invalid-residue";
        case error_kind::not_coefficient_ready: return "not-coefficient-ready";
        case error_kind::monotonicity: return "monotonicity";
        case error_kind::arity_mismatch: return "arity-mismatch";
        case error_kind::insufficient_data: return "insufficient-data";
        case error_kind::insufficient_decay: return "insufficient-decay";
        case error_kind::degenerate_range: return "degenerate-range";
        case error_kind::tail_bound: return "tail-bound";
        case error_kind::io: return "io";
    }
    return "unknown";
}

// Every failure in the library is reported through this type; the kind
// decides the CLI exit code.
class error : public std::runtime_error
{
public:
    error(error_kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}

    error_kind kind() const noexcept
    {
        return kind_;
    }

    // 1 numeric-quality failure, 2 usage/parse, 3 capacity.
    int exit_code() const noexcept
    {
        switch (kind_) {
            case error_kind::usage:
            case error_kind::parse:
            case error_kind::domain:
            case error_kind::invalid_residue:
            case error_kind::monotonicity:
            case error_kind::arity_mismatch:
            case error_kind::not_coefficient_ready:
            case error_kind::io:
                return 2;
            case error_kind::capacity:
                return 3;
            default:
                return 1;
        }
    }

private:
    error_kind kind_;
};

[[noreturn]] inline void fail(error_kind kind, const std::string &what)
{
    throw error(kind, what);
}

} // namespace limdist

#endif
