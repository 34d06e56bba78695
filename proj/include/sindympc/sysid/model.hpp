#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sindympc/core.hpp"
#include "sindympc/dynamics/csv.hpp"
#include "sindympc/features/library.hpp"

namespace sindympc::sysid {

enum class ModelForm { ContinuousTime, DiscreteTime };

/// Sparse model dx/dt = Xi Theta(x, u) (continuous) or x_{k+1} = Xi Theta(x_k, u_k) (discrete).
struct SparseModel {
    Matrix xi;
    features::LibrarySpec library;
    ModelForm form = ModelForm::ContinuousTime;
    /// Model timestep: the sample spacing of the training data.
    double dt = 0.0;
    Vector lambdas;
    /// Plant state indices the model describes; empty means all of them in order.
    std::vector<int> state_indices;
    std::vector<std::string> warnings;

    int n() const { return static_cast<int>(xi.rows()); }
    int q() const { return library.num_variables() - n(); }
    int num_active() const { return static_cast<int>((xi.array() != 0.0).count()); }
};

struct NoEmbedding {};

/// Delay coordinates: `delays` copies of the state and input, spaced `lag` model steps apart.
struct DelayEmbedding {
    int delays = 1;
    int lag = 1;
};

/// Polynomial lifting of the state (optionally together with the previous input).
struct PolyLiftEmbedding {
    features::LibrarySpec library;
};

using Embedding = std::variant<NoEmbedding, DelayEmbedding, PolyLiftEmbedding>;

/// Linear discrete-time model s_{k+1} = A s_k + B w_k of the DMDc family.
struct LinearModel {
    Matrix a;
    Matrix b;
    /// Goal-state deviation: the regression runs on x - state_offset.
    std::optional<Vector> state_offset;
    Embedding embedding = NoEmbedding{};
    double dt = 0.0;
    int n = 0;
    int q = 0;
    bool under_determined = false;
    std::vector<std::string> warnings;

    int lifted_dim() const { return static_cast<int>(a.rows()); }
    std::string embedding_name() const
    {
        if (std::holds_alternative<DelayEmbedding>(embedding)) return "delay";
        if (std::holds_alternative<PolyLiftEmbedding>(embedding)) return "poly-lift";
        return "none";
    }
};

/// Input law u = Xi_u Theta(x) identified from closed-loop data.
struct FeedbackLaw {
    Matrix xi_u;
    features::LibrarySpec library;
    bool ill_conditioned = false;
    std::vector<std::string> warnings;

    Vector operator()(const Vector& x) const { return xi_u * features::Library(library).evaluate(x); }
};

// ---------------------------------------------------------------------------------------------
// JSON

inline nlohmann::json matrix_to_json(const Matrix& m)
{
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Matrix matrix_from_json(const nlohmann::json& j)
{
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw ParseError("matrix data length mismatch");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index jj = 0; jj < cols; ++jj) m(i, jj) = data[static_cast<std::size_t>(i * cols + jj)];
    return m;
}

inline nlohmann::json vector_to_json(const Vector& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector vector_from_json(const nlohmann::json& j)
{
    const auto d = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

inline nlohmann::json to_json(const SparseModel& m)
{
    nlohmann::json j;
    j["type"] = "sparse";
    j["form"] = m.form == ModelForm::ContinuousTime ? "continuous" : "discrete";
    j["dt"] = m.dt;
    j["library"] = m.library;
    j["column_names"] = features::column_names(m.library);
    j["xi"] = matrix_to_json(m.xi);
    j["lambdas"] = vector_to_json(m.lambdas);
    j["state_indices"] = m.state_indices;
    return j;
}

inline nlohmann::json to_json(const LinearModel& m)
{
    nlohmann::json j;
    j["type"] = "linear";
    j["dt"] = m.dt;
    j["n"] = m.n;
    j["q"] = m.q;
    j["a"] = matrix_to_json(m.a);
    j["b"] = matrix_to_json(m.b);
    j["state_offset"] = m.state_offset ? vector_to_json(*m.state_offset) : nlohmann::json(nullptr);
    nlohmann::json e{{"kind", m.embedding_name()}, {"dimension", m.lifted_dim()}};
    if (auto* d = std::get_if<DelayEmbedding>(&m.embedding)) {
        e["delays"] = d->delays;
        e["lag"] = d->lag;
    } else if (auto* p = std::get_if<PolyLiftEmbedding>(&m.embedding)) {
        e["library"] = p->library;
    }
    j["embedding"] = e;
    return j;
}

inline SparseModel sparse_model_from_json(const nlohmann::json& j)
{
    if (j.at("type") != "sparse") throw ParseError("model JSON is not a sparse model");
    SparseModel m;
    const auto form = j.at("form").get<std::string>();
    if (form != "continuous" && form != "discrete") throw ParseError("unknown model form '" + form + "'");
    m.form = form == "continuous" ? ModelForm::ContinuousTime : ModelForm::DiscreteTime;
    m.dt = j.at("dt").get<double>();
    m.library = j.at("library").get<features::LibrarySpec>();
    m.xi = matrix_from_json(j.at("xi"));
    m.lambdas = vector_from_json(j.at("lambdas"));
    m.state_indices = j.value("state_indices", std::vector<int>{});
    if (m.xi.cols() != features::num_columns(m.library)) throw ParseError("xi column count does not match library");
    return m;
}

inline LinearModel linear_model_from_json(const nlohmann::json& j)
{
    if (j.at("type") != "linear") throw ParseError("model JSON is not a linear model");
    LinearModel m;
    m.dt = j.at("dt").get<double>();
    m.n = j.at("n").get<int>();
    m.q = j.at("q").get<int>();
    m.a = matrix_from_json(j.at("a"));
    m.b = matrix_from_json(j.at("b"));
    if (!j.at("state_offset").is_null()) m.state_offset = vector_from_json(j.at("state_offset"));
    const auto& e = j.at("embedding");
    const auto kind = e.at("kind").get<std::string>();
    if (kind == "delay") {
        m.embedding = DelayEmbedding{e.at("delays").get<int>(), e.at("lag").get<int>()};
    } else if (kind == "poly-lift") {
        m.embedding = PolyLiftEmbedding{e.at("library").get<features::LibrarySpec>()};
    } else if (kind != "none") {
        throw ParseError("unknown embedding '" + kind + "'");
    }
    return m;
}

/// Human-readable table of the nonzero coefficients, one block per state equation.
inline std::string coefficient_report(const SparseModel& m)
{
    const auto names = features::column_names(m.library);
    std::ostringstream os;
    const bool discrete = m.form == ModelForm::DiscreteTime;
    for (int k = 0; k < m.n(); ++k) {
        const int state = m.state_indices.empty() ? k : m.state_indices[static_cast<std::size_t>(k)];
        os << (discrete ? "x" + std::to_string(state + 1) + "[k+1]" : "d/dt x" + std::to_string(state + 1)) << ":\n";
        for (Eigen::Index j = 0; j < m.xi.cols(); ++j) {
            if (m.xi(k, j) != 0.0) os << "  " << names[static_cast<std::size_t>(j)] << "  " << io::format_double(m.xi(k, j)) << '\n';
        }
    }
    return os.str();
}

} // namespace sindympc::sysid
