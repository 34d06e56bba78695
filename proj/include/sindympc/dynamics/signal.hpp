#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sindympc/core.hpp"

namespace sindympc::dynamics {

enum class SignalKind { Zero, SchroederSweep, SineProduct, CubedSine, PRBS, PiecewiseConstantRandom, Custom };

inline std::string to_string(SignalKind kind)
{
    switch (kind) {
    case SignalKind::Zero: return "zero";
    case SignalKind::SchroederSweep: return "schroeder";
    case SignalKind::SineProduct: return "sine-product";
    case SignalKind::CubedSine: return "cubed-sine";
    case SignalKind::PRBS: return "prbs";
    case SignalKind::PiecewiseConstantRandom: return "piecewise-random";
    case SignalKind::Custom: return "custom";
    }
    return "unknown";
}

inline SignalKind signal_kind_from_string(const std::string& s)
{
    for (auto k : {SignalKind::Zero, SignalKind::SchroederSweep, SignalKind::SineProduct, SignalKind::CubedSine,
                   SignalKind::PRBS, SignalKind::PiecewiseConstantRandom, SignalKind::Custom}) {
        if (to_string(k) == s) return k;
    }
    throw InvalidInput("unknown signal kind '" + s + "'");
}

/// Switching times and levels of a random piecewise-constant signal.
struct HoldSchedule {
    std::vector<double> start;
    std::vector<double> level;
};

/// Scalar excitation signal used to force plants during training, validation and tests.
///
/// Schroeder sweep: offset + amplitude * sum_{k=1..K} cos(2 pi k f0 t + phi_k), phi_k = -pi k (k-1) / K.
/// Sine product: amplitude * (2 sin(t) sin(t/10))^2.
/// Cubed sine: (amplitude * sin(frequency t))^3.
/// PRBS: offset +/- amplitude, a fresh random sign every hold_min time units.
/// Piecewise-constant random: a level uniform in [level_min, level_max] held for a duration
/// uniform in [hold_min, hold_max].
struct ExcitationSignal {
    SignalKind kind = SignalKind::Zero;
    double amplitude = 1.0;
    double offset = 0.0;
    double frequency = 1.0;
    int components = 20;
    double base_frequency = 0.01;
    double level_min = 0.0;
    double level_max = 1.0;
    double hold_min = 1.0;
    double hold_max = 1.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::function<double(double)> custom;
    std::shared_ptr<const HoldSchedule> schedule;
};

inline ExcitationSignal zero_signal()
{
    return {};
}

inline ExcitationSignal schroeder_sweep(double amplitude, int components, double base_frequency, double offset = 0.0)
{
    require(std::isfinite(amplitude), "schroeder amplitude must be finite");
    require(components >= 1, "schroeder sweep needs at least one component");
    require(base_frequency > 0.0, "schroeder base frequency must be positive");
    ExcitationSignal s;
    s.kind = SignalKind::SchroederSweep;
    s.amplitude = amplitude;
    s.components = components;
    s.base_frequency = base_frequency;
    s.offset = offset;
    return s;
}

inline ExcitationSignal sine_product(double amplitude = 1.0)
{
    ExcitationSignal s;
    s.kind = SignalKind::SineProduct;
    s.amplitude = amplitude;
    return s;
}

inline ExcitationSignal cubed_sine(double amplitude = 5.0, double frequency = 30.0)
{
    ExcitationSignal s;
    s.kind = SignalKind::CubedSine;
    s.amplitude = amplitude;
    s.frequency = frequency;
    return s;
}

inline ExcitationSignal custom_signal(std::function<double(double)> fn)
{
    ExcitationSignal s;
    s.kind = SignalKind::Custom;
    s.custom = std::move(fn);
    return s;
}

namespace detail {

inline void build_schedule(ExcitationSignal& s)
{
    require(s.hold_min > 0.0 && s.hold_max >= s.hold_min, "hold durations must satisfy 0 < hold_min <= hold_max");
    require(s.horizon > 0.0, "random signal needs a positive horizon");
    auto sched = std::make_shared<HoldSchedule>();
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> hold(s.hold_min, s.hold_max);
    std::uniform_real_distribution<double> level(s.level_min, s.level_max);
    std::bernoulli_distribution coin(0.5);
    double t = 0.0;
    while (t <= s.horizon) {
        sched->start.push_back(t);
        if (s.kind == SignalKind::PRBS) {
            sched->level.push_back(s.offset + (coin(rng) ? s.amplitude : -s.amplitude));
            t += s.hold_min;
        } else {
            sched->level.push_back(level(rng));
            t += hold(rng);
        }
    }
    s.schedule = std::move(sched);
}

} // namespace detail

inline ExcitationSignal prbs(double amplitude, double clock, double horizon, std::uint64_t seed, double offset = 0.0)
{
    ExcitationSignal s;
    s.kind = SignalKind::PRBS;
    s.amplitude = amplitude;
    s.offset = offset;
    s.hold_min = clock;
    s.hold_max = clock;
    s.horizon = horizon;
    s.seed = seed;
    detail::build_schedule(s);
    return s;
}

inline ExcitationSignal piecewise_constant_random(double level_min, double level_max, double hold_min,
                                                  double hold_max, double horizon, std::uint64_t seed)
{
    require(level_min <= level_max, "piecewise random levels must be ordered");
    ExcitationSignal s;
    s.kind = SignalKind::PiecewiseConstantRandom;
    s.level_min = level_min;
    s.level_max = level_max;
    s.hold_min = hold_min;
    s.hold_max = hold_max;
    s.horizon = horizon;
    s.seed = seed;
    detail::build_schedule(s);
    return s;
}

/// Returns the scalar input value at time t.
inline double eval_signal_scalar(const ExcitationSignal& s, double t)
{
    switch (s.kind) {
    case SignalKind::Zero: return 0.0;
    case SignalKind::SchroederSweep: {
        const int K = s.components;
        double sum = 0.0;
        for (int k = 1; k <= K; ++k) {
            const double phase = -std::numbers::pi * k * (k - 1) / K;
            sum += std::cos(2.0 * std::numbers::pi * k * s.base_frequency * t + phase);
        }
        return s.offset + s.amplitude * sum;
    }
    case SignalKind::SineProduct: {
        const double v = 2.0 * std::sin(t) * std::sin(t / 10.0);
        return s.amplitude * v * v;
    }
    case SignalKind::CubedSine: {
        const double v = s.amplitude * std::sin(s.frequency * t);
        return v * v * v;
    }
    case SignalKind::PRBS:
    case SignalKind::PiecewiseConstantRandom: {
        require(s.schedule != nullptr, "random signal has no schedule; build it with its factory");
        const auto& start = s.schedule->start;
        auto it = std::upper_bound(start.begin(), start.end(), t);
        const auto idx = it == start.begin() ? 0 : static_cast<std::size_t>(it - start.begin()) - 1;
        return s.schedule->level[idx];
    }
    case SignalKind::Custom:
        require(static_cast<bool>(s.custom), "custom signal has no function");
        return s.custom(t);
    }
    return 0.0;
}

inline Vector eval_signal(const ExcitationSignal& s, double t)
{
    return Vector::Constant(1, eval_signal_scalar(s, t));
}

} // namespace sindympc::dynamics
