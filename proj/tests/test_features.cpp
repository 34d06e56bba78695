#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "sindympc/features/library.hpp"
#include "sindympc/sysid/regression.hpp"

using namespace sindympc;
using namespace sindympc::features;

namespace {

// Counts exponent vectors of v variables with total degree <= r by brute force.
int enumerate_monomials(int v, int r)
{
    int count = 0;
    std::vector<int> e(static_cast<std::size_t>(v), 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == v) {
            ++count;
            return;
        }
        for (int p = 0; p <= left; ++p) {
            e[static_cast<std::size_t>(i)] = p;
            rec(i + 1, left - p);
        }
    };
    rec(0, r);
    return count;
}

// Evaluates a column name such as "x1*x2^2" at a sample by parsing it.
double eval_name(const std::string& name, const std::map<std::string, double>& values)
{
    if (name == "1") return 1.0;
    double p = 1.0;
    std::stringstream ss(name);
    std::string factor;
    while (std::getline(ss, factor, '*')) {
        const auto caret = factor.find('^');
        const std::string var = factor.substr(0, caret);
        const int power = caret == std::string::npos ? 1 : std::stoi(factor.substr(caret + 1));
        p *= std::pow(values.at(var), power);
    }
    return p;
}

Matrix random_matrix(int rows, int cols, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = d(rng);
    return m;
}

} // namespace

TEST(Library, BenchmarkColumnCounts)
{
    EXPECT_EQ(num_columns(polynomial_library(5, 1, 3)), 84);
    EXPECT_EQ(num_columns(polynomial_library(3, 1, 3)), 35);
    EXPECT_EQ(num_columns(library_without_constant(polynomial_library(5, 1, 3))), 83);
    EXPECT_EQ(num_columns(library_without_constant(polynomial_library(3, 1, 3))), 34);
}

TEST(Library, CountMatchesExhaustiveEnumeration)
{
    for (int v = 1; v <= 6; ++v) {
        for (int r = 0; r <= 4; ++r) {
            LibrarySpec spec{r, true, default_variables(v, 0), {}, false};
            EXPECT_EQ(num_columns(spec), enumerate_monomials(v, r)) << "v=" << v << " r=" << r;
            spec.include_constant = false;
            EXPECT_EQ(num_columns(spec), enumerate_monomials(v, r) - 1);
        }
    }
}

TEST(Library, SingleSampleOrderTwo)
{
    Matrix X(2, 1), U(1, 1);
    X << 2.0, 3.0;
    U << 1.0;
    const auto fm = build_library(X, U, polynomial_library(2, 1, 2));
    const std::vector<double> expected{1, 2, 3, 1, 4, 6, 2, 9, 3, 1};
    const std::vector<std::string> names{"1", "x1", "x2", "u1", "x1^2", "x1*x2", "x1*u1", "x2^2", "x2*u1", "u1^2"};
    ASSERT_EQ(fm.num_columns(), 10);
    for (int j = 0; j < 10; ++j) {
        EXPECT_EQ(fm.values(j, 0), expected[static_cast<std::size_t>(j)]);
        EXPECT_EQ(fm.column_names[static_cast<std::size_t>(j)], names[static_cast<std::size_t>(j)]);
    }
    EXPECT_TRUE((fm.column_scales.array() == 1.0).all());
}

TEST(Library, OrderOneWithoutConstant)
{
    const auto spec = library_without_constant(polynomial_library(2, 0, 1));
    EXPECT_EQ(column_names(spec), (std::vector<std::string>{"x1", "x2"}));
}

TEST(Library, NamesUniqueAndMatchValues)
{
    const auto spec = polynomial_library(3, 1, 3);
    const Matrix X = random_matrix(3, 7, 1), U = random_matrix(1, 7, 2);
    const auto fm = build_library(X, U, spec);
    std::set<std::string> unique(fm.column_names.begin(), fm.column_names.end());
    EXPECT_EQ(unique.size(), fm.column_names.size());
    for (int k = 0; k < 7; ++k) {
        const std::map<std::string, double> v{{"x1", X(0, k)}, {"x2", X(1, k)}, {"x3", X(2, k)}, {"u1", U(0, k)}};
        for (int j = 0; j < fm.num_columns(); ++j)
            EXPECT_DOUBLE_EQ(fm.values(j, k), eval_name(fm.column_names[static_cast<std::size_t>(j)], v));
    }
}

TEST(Library, EvaluationIsColumnwise)
{
    const auto spec = polynomial_library(2, 1, 3);
    const Matrix X1 = random_matrix(2, 5, 3), U1 = random_matrix(1, 5, 4);
    const Matrix X2 = random_matrix(2, 4, 5), U2 = random_matrix(1, 4, 6);
    Matrix X(2, 9), U(1, 9);
    X << X1, X2;
    U << U1, U2;
    const auto whole = build_library(X, U, spec);
    const auto a = build_library(X1, U1, spec);
    const auto b = build_library(X2, U2, spec);
    EXPECT_TRUE((whole.values.leftCols(5).array() == a.values.array()).all());
    EXPECT_TRUE((whole.values.rightCols(4).array() == b.values.array()).all());
}

TEST(Library, NormalizationIsIdempotent)
{
    auto spec = polynomial_library(2, 1, 2, true, true);
    const auto fm = build_library(random_matrix(2, 30, 7) * 10.0, random_matrix(1, 30, 8), spec);
    EXPECT_TRUE((fm.column_scales.array() > 0.0).all());
    Matrix again = fm.values;
    const Vector scales = normalize_rows(again);
    EXPECT_LT((scales.array() - 1.0).abs().maxCoeff(), 1e-12);
    // Constant column survives with scale sqrt(m).
    EXPECT_NEAR(fm.column_scales(0), std::sqrt(30.0), 1e-12);
}

TEST(Library, TrigTerms)
{
    LibrarySpec spec = polynomial_library(1, 1, 1);
    spec.trig_terms = {{TrigFunction::Sin, 0}, {TrigFunction::Cos, 1}};
    Matrix X(1, 1), U(1, 1);
    X << 0.3;
    U << 1.1;
    const auto fm = build_library(X, U, spec);
    ASSERT_EQ(fm.num_columns(), 5);
    EXPECT_EQ(fm.column_names[3], "sin(x1)");
    EXPECT_DOUBLE_EQ(fm.values(3, 0), std::sin(0.3));
    EXPECT_DOUBLE_EQ(fm.values(4, 0), std::cos(1.1));
}

TEST(Library, RejectsEmptyData)
{
    EXPECT_THROW(build_library(Matrix(2, 0), Matrix(1, 0), polynomial_library(2, 1, 2)), EmptyDataError);
    EXPECT_THROW(build_library(Matrix(2, 3), Matrix(1, 3), polynomial_library(3, 1, 2)), InvalidInput);
}

TEST(Unscale, Definition)
{
    Matrix xi(1, 2);
    xi << 2.0, 3.0;
    Vector ones = Vector::Ones(2);
    EXPECT_TRUE((unscale_coefficients(xi, ones).array() == xi.array()).all());
    Vector s(2);
    s << 4.0, 1.0;
    EXPECT_DOUBLE_EQ(unscale_coefficients(xi, s)(0, 0), 0.5);
    s(1) = 0.0;
    EXPECT_THROW(unscale_coefficients(xi, s), InvalidInput);
}

TEST(Unscale, NormalizedFitMatchesRawFit)
{
    const Matrix X = random_matrix(2, 200, 11) * 5.0, U = random_matrix(1, 200, 12);
    Matrix Y(2, 200);
    Y.row(0) = (0.5 * X.row(0) - 0.02 * X.row(0).cwiseProduct(X.row(1))).array() + 0.3;
    Y.row(1) = -X.row(1) + U.row(0) + 0.1 * X.row(0).cwiseAbs2();
    const auto raw = build_library(X, U, polynomial_library(2, 1, 2));
    const auto nrm = build_library(X, U, polynomial_library(2, 1, 2, true, true));
    const Vector zero = Vector::Zero(2);
    const Matrix xi_raw = sysid::stls(raw.theta(), Y, zero).xi;
    const Matrix xi_nrm = unscale_coefficients(sysid::stls(nrm.theta(), Y, zero).xi, nrm.column_scales);
    const Matrix pred_raw = xi_raw * raw.values;
    const Matrix pred_nrm = xi_nrm * raw.values;
    EXPECT_LT((pred_raw - pred_nrm).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Library, JsonRoundTrip)
{
    LibrarySpec spec = polynomial_library(3, 1, 3, false, true);
    const nlohmann::json j = spec;
    for (const char* key : {"poly_order", "include_constant", "variables", "normalize"}) EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j.get<LibrarySpec>(), spec);
    nlohmann::json bad = j;
    bad["extra"] = 1;
    EXPECT_THROW(bad.get<LibrarySpec>(), InvalidInput);
}
