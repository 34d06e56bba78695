#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "sindympc/core.hpp"

namespace sindympc::features {

enum class TrigFunction { Sin, Cos };

/// sin or cos of a single library variable.
struct TrigTerm {
    TrigFunction fn = TrigFunction::Sin;
    int variable = 0;

    bool operator==(const TrigTerm&) const = default;
};

/// Candidate-function library over an ordered list of variables (states first, then inputs).
struct LibrarySpec {
    int poly_order = 2;
    bool include_constant = true;
    std::vector<std::string> variables;
    std::vector<TrigTerm> trig_terms;
    /// Divide every column by its Euclidean norm over the data before regression.
    bool normalize = false;

    int num_variables() const { return static_cast<int>(variables.size()); }

    bool operator==(const LibrarySpec&) const = default;
};

/// Variable names x1..xn followed by u1..uq.
inline std::vector<std::string> default_variables(int n, int q)
{
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i));
    for (int j = 1; j <= q; ++j) v.push_back("u" + std::to_string(j));
    return v;
}

inline LibrarySpec polynomial_library(int n, int q, int order, bool constant = true, bool normalize = false)
{
    return {order, constant, default_variables(n, q), {}, normalize};
}

/// One library column: a monomial (sorted variable indices with repetition) or a trig term.
struct Term {
    std::vector<int> factors;
    bool is_trig = false;
    TrigTerm trig{};

    int degree() const { return static_cast<int>(factors.size()); }
};

namespace detail {

inline void combinations_with_replacement(int v, int r, int start, std::vector<int>& cur, std::vector<Term>& out)
{
    if (static_cast<int>(cur.size()) == r) {
        out.push_back(Term{cur, false, {}});
        return;
    }
    for (int i = start; i < v; ++i) {
        cur.push_back(i);
        combinations_with_replacement(v, r, i, cur, out);
        cur.pop_back();
    }
}

} // namespace detail

/// Columns in graded-lexicographic order: constant, degree 1, degree 2, ..., then trig terms.
inline std::vector<Term> enumerate_terms(const LibrarySpec& spec)
{
    require(spec.poly_order >= 0, "library polynomial order must be >= 0");
    require(spec.poly_order == 0 || !spec.variables.empty(), "library needs variables when poly_order >= 1");
    std::vector<Term> terms;
    if (spec.include_constant) terms.push_back(Term{});
    std::vector<int> cur;
    for (int r = 1; r <= spec.poly_order; ++r) {
        detail::combinations_with_replacement(spec.num_variables(), r, 0, cur, terms);
    }
    for (const auto& t : spec.trig_terms) {
        require(t.variable >= 0 && t.variable < spec.num_variables(), "trig term variable out of range");
        terms.push_back(Term{{}, true, t});
    }
    return terms;
}

inline std::string term_name(const Term& term, const std::vector<std::string>& variables)
{
    if (term.is_trig) {
        return std::string(term.trig.fn == TrigFunction::Sin ? "sin(" : "cos(") + variables[term.trig.variable] + ")";
    }
    if (term.factors.empty()) return "1";
    std::string name;
    std::size_t i = 0;
    while (i < term.factors.size()) {
        std::size_t j = i;
        while (j < term.factors.size() && term.factors[j] == term.factors[i]) ++j;
        if (!name.empty()) name += "*";
        name += variables[term.factors[i]];
        if (j - i > 1) name += "^" + std::to_string(j - i);
        i = j;
    }
    return name;
}

inline double eval_term(const Term& term, const Eigen::Ref<const Vector>& z)
{
    if (term.is_trig) {
        const double v = z(term.trig.variable);
        return term.trig.fn == TrigFunction::Sin ? std::sin(v) : std::cos(v);
    }
    double p = 1.0;
    for (int f : term.factors) p *= z(f);
    return p;
}

inline int num_columns(const LibrarySpec& spec)
{
    return static_cast<int>(enumerate_terms(spec).size());
}

inline std::vector<std::string> column_names(const LibrarySpec& spec)
{
    std::vector<std::string> names;
    for (const auto& t : enumerate_terms(spec)) names.push_back(term_name(t, spec.variables));
    return names;
}

/// Library evaluated on data. values is p x m (one row per library column).
struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> column_names;
    Vector column_scales;

    int num_columns() const { return static_cast<int>(values.rows()); }
    int num_samples() const { return static_cast<int>(values.cols()); }
    /// Regression matrix Theta(X, U), m x p.
    Matrix theta() const { return values.transpose(); }
};

/// A library with its terms enumerated once, for repeated evaluation.
class Library {
public:
    Library() = default;

    explicit Library(LibrarySpec spec) : spec_(std::move(spec)), terms_(enumerate_terms(spec_))
    {
        for (const auto& t : terms_) names_.push_back(term_name(t, spec_.variables));
    }

    const LibrarySpec& spec() const { return spec_; }
    const std::vector<Term>& terms() const { return terms_; }
    const std::vector<std::string>& names() const { return names_; }
    int size() const { return static_cast<int>(terms_.size()); }

    Vector evaluate(const Eigen::Ref<const Vector>& z) const
    {
        require(z.size() == spec_.num_variables(), "library evaluation: variable count mismatch");
        Vector out(size());
        for (int j = 0; j < size(); ++j) out(j) = eval_term(terms_[j], z);
        return out;
    }

    /// Evaluates only the listed columns.
    Vector evaluate(const Eigen::Ref<const Vector>& z, const std::vector<int>& columns) const
    {
        Vector out(static_cast<Eigen::Index>(columns.size()));
        for (std::size_t j = 0; j < columns.size(); ++j) out(static_cast<Eigen::Index>(j)) = eval_term(terms_[columns[j]], z);
        return out;
    }

    /// Index of the degree-1 monomial of each variable.
    std::vector<int> linear_columns() const
    {
        std::vector<int> idx(spec_.variables.size(), -1);
        for (int j = 0; j < size(); ++j) {
            if (!terms_[j].is_trig && terms_[j].degree() == 1) idx[terms_[j].factors[0]] = j;
        }
        return idx;
    }

private:
    LibrarySpec spec_;
    std::vector<Term> terms_;
    std::vector<std::string> names_;
};

/// Divides each row of values by its Euclidean norm; zero rows keep scale 1.
inline Vector normalize_rows(Matrix& values)
{
    Vector scales(values.rows());
    for (Eigen::Index j = 0; j < values.rows(); ++j) {
        const double s = values.row(j).norm();
        scales(j) = (s > 0.0 && std::isfinite(s)) ? s : 1.0;
        values.row(j) /= scales(j);
    }
    return scales;
}

/// Evaluates the library on the stacked data [X; U]. X is n x m and U is q x m; the spec's variables must
/// cover exactly the rows of X followed by the rows of U (U may have zero rows).
inline FeatureMatrix build_library(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& U,
                                   const LibrarySpec& spec)
{
    require(U.rows() == 0 || X.cols() == U.cols(), "build_library: X and U must share the sample count");
    if (X.cols() == 0) throw EmptyDataError("build_library: no samples");
    require(spec.num_variables() == X.rows() + U.rows(),
            "build_library: library has " + std::to_string(spec.num_variables()) + " variables but data has " +
                std::to_string(X.rows() + U.rows()) + " rows");
    const Library lib(spec);
    const Eigen::Index m = X.cols();
    Matrix Z(X.rows() + U.rows(), m);
    Z.topRows(X.rows()) = X;
    if (U.rows() > 0) Z.bottomRows(U.rows()) = U;

    FeatureMatrix fm;
    fm.values.resize(lib.size(), m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const Vector z = Z.col(k);
        for (int j = 0; j < lib.size(); ++j) fm.values(j, k) = eval_term(lib.terms()[j], z);
    }
    fm.column_names = lib.names();
    fm.column_scales = spec.normalize ? normalize_rows(fm.values) : Vector::Ones(lib.size());
    return fm;
}

inline LibrarySpec library_without_constant(LibrarySpec spec)
{
    spec.include_constant = false;
    return spec;
}

/// Maps coefficients fitted on a normalized library back to raw library units.
inline Matrix unscale_coefficients(const Eigen::Ref<const Matrix>& xi_scaled, const Eigen::Ref<const Vector>& scales)
{
    require(xi_scaled.cols() == scales.size(), "unscale_coefficients: dimension mismatch");
    for (Eigen::Index j = 0; j < scales.size(); ++j) {
        if (!(scales(j) != 0.0)) throw InvalidInput("unscale_coefficients: zero scale in column " + std::to_string(j));
    }
    return xi_scaled * scales.cwiseInverse().asDiagonal();
}

inline void to_json(nlohmann::json& j, const LibrarySpec& s)
{
    j = nlohmann::json{{"poly_order", s.poly_order},
                       {"include_constant", s.include_constant},
                       {"variables", s.variables},
                       {"normalize", s.normalize}};
    if (!s.trig_terms.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& t : s.trig_terms) {
            arr.push_back({{"function", t.fn == TrigFunction::Sin ? "sin" : "cos"}, {"variable", t.variable}});
        }
        j["trig_terms"] = arr;
    }
}

inline void from_json(const nlohmann::json& j, LibrarySpec& s)
{
    for (const auto& [key, _] : j.items()) {
        if (key != "poly_order" && key != "include_constant" && key != "variables" && key != "normalize" &&
            key != "trig_terms") {
            throw InvalidInput("library spec: unknown key '" + key + "'");
        }
    }
    s.poly_order = j.at("poly_order").get<int>();
    s.include_constant = j.value("include_constant", true);
    s.variables = j.at("variables").get<std::vector<std::string>>();
    s.normalize = j.value("normalize", false);
    s.trig_terms.clear();
    if (j.contains("trig_terms")) {
        for (const auto& t : j.at("trig_terms")) {
            const auto fn = t.at("function").get<std::string>();
            require(fn == "sin" || fn == "cos", "trig term function must be sin or cos");
            s.trig_terms.push_back({fn == "sin" ? TrigFunction::Sin : TrigFunction::Cos, t.at("variable").get<int>()});
        }
    }
}

} // namespace sindympc::features
