#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sindympc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class of every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension mismatch, out-of-range parameter or otherwise malformed argument.
class InvalidInput : public Error {
public:
    using Error::Error;
};

class EmptyDataError : public Error {
public:
    using Error::Error;
};

/// A simulation or model rollout produced a non-finite state.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double last_valid_time)
        : Error(what + " (last valid time " + std::to_string(last_valid_time) + ")"),
          last_valid_time_(last_valid_time)
    {
    }

    double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_;
};

/// A requested equilibrium does not exist for the given parameters.
class NonexistenceError : public Error {
public:
    using Error::Error;
};

/// Malformed text input (CSV, JSON). Carries the 1-based line when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? what + " at line " + std::to_string(line) : what), line_(line)
    {
    }

    int line() const noexcept { return line_; }

private:
    int line_;
};

inline void require(bool condition, std::string_view message)
{
    if (!condition) throw InvalidInput(std::string(message));
}

inline bool all_finite(const Eigen::Ref<const Matrix>& m)
{
    return m.allFinite();
}

/// Stable 64-bit mixing of a seed with a purpose string (FNV-1a folded through splitmix64).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : purpose) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL + h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose, std::uint64_t index)
{
    return derive_seed(derive_seed(seed, purpose), std::to_string(index));
}

} // namespace sindympc
