#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sindympc/core.hpp"

namespace sindympc::dynamics {

enum class SystemKind { LotkaVolterra, Lorenz, F8, HIV, IdentifiedSparse, IdentifiedLinear };

inline std::string to_string(SystemKind kind)
{
    switch (kind) {
    case SystemKind::LotkaVolterra: return "lotka";
    case SystemKind::Lorenz: return "lorenz";
    case SystemKind::F8: return "f8";
    case SystemKind::HIV: return "hiv";
    case SystemKind::IdentifiedSparse: return "identified-sparse";
    case SystemKind::IdentifiedLinear: return "identified-linear";
    }
    return "unknown";
}

/// Continuous vector field f(x, u, t).
using VectorField = std::function<Vector(const Vector& x, const Vector& u, double t)>;
/// Discrete map x_{k+1} = F(x_k, u_k).
using DiscreteMap = std::function<Vector(const Vector& x, const Vector& u)>;

/// A plant: one of the benchmark systems with named parameters, or an identified model
/// wrapped so it can be simulated like a plant.
struct SystemSpec {
    SystemKind kind = SystemKind::LotkaVolterra;
    std::map<std::string, double> params;
    int n = 0;
    int q = 0;
    /// Set for IdentifiedSparse.
    VectorField field;
    /// Set for IdentifiedLinear together with map_dt.
    DiscreteMap map;
    double map_dt = 0.0;

    double param(const std::string& name) const
    {
        auto it = params.find(name);
        if (it == params.end()) throw InvalidInput("system " + to_string(kind) + " has no parameter '" + name + "'");
        return it->second;
    }

    std::string name() const { return to_string(kind); }
};

inline SystemSpec lotka_volterra()
{
    return {SystemKind::LotkaVolterra, {{"a", 0.5}, {"b", 0.025}, {"c", 0.5}, {"d", 0.005}}, 2, 1, {}, {}, 0.0};
}

inline SystemSpec lorenz()
{
    return {SystemKind::Lorenz, {{"sigma", 10.0}, {"beta", 8.0 / 3.0}, {"rho", 28.0}}, 3, 1, {}, {}, 0.0};
}

/// F-8 Crusader longitudinal dynamics at 30 000 ft and Mach 0.85. The coefficients are fixed.
inline SystemSpec f8()
{
    return {SystemKind::F8, {}, 3, 1, {}, {}, 0.0};
}

inline SystemSpec hiv()
{
    return {SystemKind::HIV,
            {{"lambda", 1.0},
             {"d", 0.1},
             {"beta", 1.0},
             {"a", 0.2},
             {"p1", 1.0},
             {"p2", 1.0},
             {"c1", 0.03},
             {"c2", 0.06},
             {"b1", 0.1},
             {"b2", 0.01},
             {"q", 0.5},
             {"h", 0.1},
             {"eta", 0.9799}},
            5,
            1,
            {},
            {},
            0.0};
}

inline SystemSpec identified_sparse(int n, int q, VectorField field)
{
    SystemSpec s;
    s.kind = SystemKind::IdentifiedSparse;
    s.n = n;
    s.q = q;
    s.field = std::move(field);
    return s;
}

inline SystemSpec identified_linear(int n, int q, DiscreteMap map, double dt)
{
    require(dt > 0.0, "identified linear plant needs dt > 0");
    SystemSpec s;
    s.kind = SystemKind::IdentifiedLinear;
    s.n = n;
    s.q = q;
    s.map = std::move(map);
    s.map_dt = dt;
    return s;
}

/// Looks up a benchmark system by its short name (lotka, lorenz, f8, hiv).
inline SystemSpec system_from_name(const std::string& name)
{
    if (name == "lotka" || name == "lotka-volterra") return lotka_volterra();
    if (name == "lorenz") return lorenz();
    if (name == "f8") return f8();
    if (name == "hiv") return hiv();
    throw InvalidInput("unknown system '" + name + "'");
}

inline Vector rhs_eval(const SystemSpec& sys, const Vector& x, const Vector& u, double t = 0.0)
{
    if (x.size() != sys.n || u.size() != sys.q) {
        throw InvalidInput("rhs_eval: expected state of size " + std::to_string(sys.n) + " and input of size " +
                           std::to_string(sys.q) + ", got " + std::to_string(x.size()) + " and " +
                           std::to_string(u.size()));
    }
    Vector dx(sys.n);
    switch (sys.kind) {
    case SystemKind::LotkaVolterra: {
        const double a = sys.param("a"), b = sys.param("b"), c = sys.param("c"), d = sys.param("d");
        dx(0) = a * x(0) - b * x(0) * x(1);
        dx(1) = -c * x(1) + d * x(0) * x(1) + u(0);
        break;
    }
    case SystemKind::Lorenz: {
        const double sigma = sys.param("sigma"), beta = sys.param("beta"), rho = sys.param("rho");
        dx(0) = sigma * (x(1) - x(0)) + u(0);
        dx(1) = x(0) * (rho - x(2)) - x(1);
        dx(2) = x(0) * x(1) - beta * x(2);
        break;
    }
    case SystemKind::F8: {
        const double x1 = x(0), x3 = x(2), v = u(0);
        const double x1s = x1 * x1, vs = v * v;
        dx(0) = -0.877 * x1 + x3 - 0.088 * x1 * x3 + 0.47 * x1s - 0.019 * x(1) * x(1) - x1s * x3 +
                3.846 * x1s * x1 - 0.215 * v + 0.28 * x1s * v + 0.47 * x1 * vs + 0.63 * vs * v;
        dx(1) = x3;
        dx(2) = -4.208 * x1 - 0.396 * x3 - 0.47 * x1s - 3.564 * x1s * x1 - 20.967 * v + 6.265 * x1s * v +
                46.0 * x1 * vs + 61.1 * vs * v;
        break;
    }
    case SystemKind::HIV: {
        const double lambda = sys.param("lambda"), d = sys.param("d"), beta = sys.param("beta"),
                     a = sys.param("a"), p1 = sys.param("p1"), p2 = sys.param("p2"), c1 = sys.param("c1"),
                     c2 = sys.param("c2"), b1 = sys.param("b1"), b2 = sys.param("b2"), q = sys.param("q"),
                     h = sys.param("h"), eta = sys.param("eta");
        const double infection = beta * (1.0 - eta * u(0)) * x(0) * x(1);
        dx(0) = lambda - d * x(0) - infection;
        dx(1) = infection - a * x(1) - p1 * x(3) * x(1) - p2 * x(4) * x(1);
        dx(2) = c2 * x(0) * x(1) * x(2) - c2 * q * x(1) * x(2) - b2 * x(2);
        dx(3) = c1 * x(1) * x(3) - b1 * x(3);
        dx(4) = c2 * q * x(1) * x(2) - h * x(4);
        break;
    }
    case SystemKind::IdentifiedSparse:
        require(static_cast<bool>(sys.field), "identified sparse plant has no vector field");
        dx = sys.field(x, u, t);
        break;
    case SystemKind::IdentifiedLinear:
        throw InvalidInput("rhs_eval: a discrete-time linear plant has no vector field");
    }
    return dx;
}

/// Recovery steady state of the HIV model (successful immune response, no treatment).
struct HivSteadyState {
    Vector x;
    double discriminant = 0.0;
    bool exists = false;
};

inline HivSteadyState hiv_recovery_state(const SystemSpec& sys)
{
    require(sys.kind == SystemKind::HIV, "hiv_recovery_state requires the HIV system");
    const double lambda = sys.param("lambda"), d = sys.param("d"), beta = sys.param("beta"), a = sys.param("a"),
                 p2 = sys.param("p2"), c2 = sys.param("c2"), b2 = sys.param("b2"), q = sys.param("q"),
                 h = sys.param("h");
    HivSteadyState out;
    const double m = c2 * (lambda - d * q) - b2 * beta;
    out.discriminant = m * m - 4.0 * beta * c2 * q * d * b2;
    out.exists = out.discriminant >= 0.0;
    out.x = Vector::Zero(5);
    if (!out.exists) return out;
    const double x2 = (m - std::sqrt(out.discriminant)) / (2.0 * beta * c2 * q);
    const double x5 = (x2 * c2 * (beta * q - a) + b2 * beta) / (c2 * p2 * x2);
    out.x << lambda / (d + beta * x2), x2, h * x5 / (c2 * q * x2), 0.0, x5;
    return out;
}

/// Whether the infectivity under treatment level u admits an immune-response region of attraction.
inline bool hiv_roa_condition(const SystemSpec& sys, double u)
{
    require(sys.kind == SystemKind::HIV, "hiv_roa_condition requires the HIV system");
    const double lambda = sys.param("lambda"), d = sys.param("d"), c1 = sys.param("c1"), c2 = sys.param("c2"),
                 b1 = sys.param("b1"), b2 = sys.param("b2"), q = sys.param("q");
    const double beta_eff = sys.param("beta") * (1.0 - sys.param("eta") * u);
    const double bound =
        c1 * (c2 * b2 * (lambda - q * d) - b2 * c1 * d) / (b1 * (c2 * b1 * q + b2 * c1));
    return beta_eff < bound;
}

inline std::vector<Vector> equilibria(const SystemSpec& sys)
{
    switch (sys.kind) {
    case SystemKind::LotkaVolterra: {
        // (c/d, a/b): prey level that balances predator death, predator level that balances prey growth.
        Vector x(2);
        x << sys.param("c") / sys.param("d"), sys.param("a") / sys.param("b");
        return {x};
    }
    case SystemKind::Lorenz: {
        const double rho = sys.param("rho");
        const double r = std::sqrt(sys.param("beta") * (rho - 1.0));
        Vector plus(3), minus(3);
        plus << r, r, rho - 1.0;
        minus << -r, -r, rho - 1.0;
        return {plus, minus};
    }
    case SystemKind::HIV: {
        auto ss = hiv_recovery_state(sys);
        if (!ss.exists) {
            throw NonexistenceError("HIV recovery steady state does not exist (discriminant " +
                                    std::to_string(ss.discriminant) + " < 0)");
        }
        return {ss.x};
    }
    default:
        throw InvalidInput("equilibria: not available for system " + to_string(sys.kind));
    }
}

/// Commanded angle of attack for the F-8 tracking task (rad).
inline double f8_reference(double t)
{
    const double th = t / 0.1;
    return 0.4 * (-0.5 / (1.0 + std::exp(th - 0.8)) + 1.0 / (1.0 + std::exp(th - 3.0)) - 0.4);
}

} // namespace sindympc::dynamics
