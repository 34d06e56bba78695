#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sindympc/dynamics/integrate.hpp"
#include "sindympc/sysid/derivatives.hpp"
#include "sindympc/sysid/fit.hpp"
#include "sindympc/sysid/noise.hpp"
#include "sindympc/sysid/predict.hpp"

using namespace sindympc;
using namespace sindympc::sysid;
using dynamics::Trajectory;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

Trajectory lotka_data(double duration = 100.0)
{
    dynamics::IntegratorConfig ic;
    ic.dt = 0.01;
    ic.sample_every = 10;
    return dynamics::integrate(dynamics::lotka_volterra(), vec({60.0, 50.0}),
                               dynamics::sine_product(0.5), 0.0, duration, ic);
}

Trajectory hiv_data()
{
    dynamics::IntegratorConfig ic;
    ic.dt = 0.01;
    ic.sample_every = 10;
    return dynamics::integrate(dynamics::hiv(), vec({10, 0.1, 0.1, 0.1, 0.1}),
                               dynamics::prbs(0.5, 1.0, 40.0, 3), 0.0, 40.0, ic);
}

// Scalar trajectory with explicit samples.
Trajectory scalar_traj(const Vector& x, const Vector& u)
{
    Trajectory tr;
    tr.times = Vector::LinSpaced(x.size(), 0.0, static_cast<double>(x.size() - 1));
    tr.states = x.transpose();
    tr.inputs = u.transpose();
    return tr;
}

Matrix random_inputs(int q, int m, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Matrix u(q, m);
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < q; ++i) u(i, k) = g(rng);
    return u;
}

} // namespace

TEST(Derivatives, FiniteDifferencesExactOnQuadratic)
{
    const double h = 0.1;
    Matrix x(1, 20);
    for (int k = 0; k < 20; ++k) x(0, k) = (k * h) * (k * h);
    const Matrix dx = finite_differences(x, h);
    for (int k = 0; k < 20; ++k) EXPECT_NEAR(dx(0, k), 2.0 * k * h, 1e-12);
}

TEST(Derivatives, ConstantHasZeroDerivative)
{
    const Matrix x = Matrix::Constant(2, 10, 3.5);
    EXPECT_EQ(finite_differences(x, 0.5).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LT(savitzky_golay(x, 5, 3, 1, 0.5).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Derivatives, FiniteDifferencesOnSineAreSecondOrder)
{
    const double h = 0.01;
    Matrix x(1, 300);
    for (int k = 0; k < 300; ++k) x(0, k) = std::sin(k * h);
    const Matrix dx = finite_differences(x, h);
    for (int k = 0; k < 300; ++k) EXPECT_LE(std::abs(dx(0, k) - std::cos(k * h)), h * h);
}

TEST(Derivatives, SavitzkyGolayExactOnCubic)
{
    const double h = 0.2;
    Matrix x(1, 30);
    const auto p = [](double t) { return 1.0 - 2.0 * t + 0.5 * t * t - 0.1 * t * t * t; };
    const auto dp = [](double t) { return -2.0 + t - 0.3 * t * t; };
    for (int k = 0; k < 30; ++k) x(0, k) = p(k * h);
    const Matrix s = savitzky_golay(x, 7, 3, 0, h);
    const Matrix ds = savitzky_golay(x, 7, 3, 1, h);
    for (int k = 0; k < 30; ++k) {
        EXPECT_NEAR(s(0, k), p(k * h), 1e-10);
        EXPECT_NEAR(ds(0, k), dp(k * h), 1e-9);
    }
}

TEST(Derivatives, FittingWindowShrinksToData)
{
    EXPECT_EQ(fitting_window(81, 3, 1000), 81);
    EXPECT_EQ(fitting_window(81, 3, 20), 19);
    EXPECT_EQ(fitting_window(4, 3, 20), 1);
    EXPECT_EQ(fitting_window(1, 3, 20), 1);
}

TEST(Stls, RecoversLinearDecay)
{
    // dx/dt = -2x with library [1, x, x^2].
    Matrix theta(50, 3);
    Matrix y(1, 50);
    for (int k = 0; k < 50; ++k) {
        const double x = 0.1 * k - 2.0;
        theta.row(k) << 1.0, x, x * x;
        y(0, k) = -2.0 * x;
    }
    const auto res = stls(theta, y, vec({0.1}));
    EXPECT_NEAR(res.xi(0, 0), 0.0, 0.0);
    EXPECT_NEAR(res.xi(0, 1), -2.0, 1e-12);
    EXPECT_EQ(res.xi(0, 2), 0.0);
    EXPECT_TRUE(res.converged);
}

TEST(Stls, ZeroTargetsGiveZeroModel)
{
    const Matrix theta = random_inputs(40, 6, 1);
    const auto res = stls(theta, Matrix::Zero(2, 40), vec({0.1, 0.1}));
    EXPECT_EQ(res.xi.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Stls, SupportNeverGrows)
{
    const Matrix theta = random_inputs(60, 12, 2);
    Matrix y = (theta * random_inputs(12, 3, 3)).transpose();
    y += 0.5 * random_inputs(3, 60, 4);
    const auto res = stls(theta, y, vec({0.6, 0.9, 1.2}));
    ASSERT_GE(res.support_history.size(), 1u);
    for (std::size_t it = 1; it < res.support_history.size(); ++it)
        for (std::size_t k = 0; k < 3; ++k) EXPECT_LE(res.support_history[it][k], res.support_history[it - 1][k]);
}

TEST(Stls, ZeroThresholdIsLeastSquares)
{
    const Matrix theta = random_inputs(30, 5, 5);
    const Matrix y = random_inputs(2, 30, 6);
    const Matrix xi = stls(theta, y, Vector::Zero(2)).xi;
    // Normal equations as the oracle.
    const Matrix ref = (theta.transpose() * theta).ldlt().solve(theta.transpose() * y.transpose()).transpose();
    EXPECT_LT((xi - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Stls, RejectsBadArguments)
{
    const Matrix theta = random_inputs(10, 3, 7);
    EXPECT_THROW(stls(theta, Matrix::Zero(1, 9), vec({0.1})), InvalidInput);
    EXPECT_THROW(stls(theta, Matrix::Zero(1, 10), vec({-1.0})), InvalidInput);
    EXPECT_THROW(stls(Matrix(0, 3), Matrix(1, 0), vec({0.1})), EmptyDataError);
}

TEST(Sindyc, RecoversLotkaVolterra)
{
    const auto tr = lotka_data();
    const auto m = fit_sindyc(tr, features::polynomial_library(2, 1, 2), vec({1e-3, 1e-3}));
    const auto names = features::column_names(m.library);
    Matrix truth = Matrix::Zero(2, static_cast<Eigen::Index>(names.size()));
    const auto col = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) - names.begin(); };
    truth(0, col("x1")) = 0.5;
    truth(0, col("x1*x2")) = -0.025;
    truth(1, col("x2")) = -0.5;
    truth(1, col("x1*x2")) = 0.005;
    truth(1, col("u1")) = 1.0;
    EXPECT_LT((m.xi - truth).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_EQ(m.num_active(), 5);
    EXPECT_DOUBLE_EQ(m.dt, 0.1);
}

TEST(Sindyc, DiscreteLinearEqualsDmdc)
{
    const auto tr = lotka_data(30.0);
    SindyOptions opt;
    opt.form = ModelForm::DiscreteTime;
    const auto lib = features::library_without_constant(features::polynomial_library(2, 1, 1));
    const auto s = fit_sindyc(tr, lib, Vector::Zero(2), opt);
    const auto d = fit_dmdc(tr);
    Matrix ab(2, 3);
    ab << d.a, d.b;
    EXPECT_LT((s.xi - ab).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Sindyc, AdaptLambdaReachesNonzeroRow)
{
    const auto tr = lotka_data(30.0);
    const auto res = adapt_lambda(tr, features::polynomial_library(2, 1, 2), 1e3);
    ASSERT_EQ(res.lambdas.size(), 2);
    EXPECT_TRUE(res.warnings.empty());
    for (int k = 0; k < 2; ++k) EXPECT_LT(res.lambdas(k), 1e3);
    const auto m = fit_sindyc(tr, features::polynomial_library(2, 1, 2), res.lambdas);
    for (int k = 0; k < 2; ++k) EXPECT_GT(m.xi.row(k).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dmdc, ScalarExample)
{
    // x_{k+1} = 0.5 x_k + u_k.
    const int m = 20;
    const Matrix u = random_inputs(1, m, 8);
    Vector x(m);
    x(0) = 1.0;
    for (int k = 0; k + 1 < m; ++k) x(k + 1) = 0.5 * x(k) + u(0, k);
    const auto model = fit_dmdc(scalar_traj(x, u.row(0).transpose()));
    EXPECT_NEAR(model.a(0, 0), 0.5, 1e-12);
    EXPECT_NEAR(model.b(0, 0), 1.0, 1e-12);
    EXPECT_FALSE(model.under_determined);
}

TEST(Dmdc, UnderDeterminedWarns)
{
    const auto model = fit_dmdc(scalar_traj(vec({1.0, 2.0}), vec({0.0, 1.0})));
    EXPECT_TRUE(model.under_determined);
    EXPECT_FALSE(model.warnings.empty());
}

TEST(DelayDmdc, SingleDelayIsDmdc)
{
    const auto tr = lotka_data(30.0);
    const auto a = fit_dmdc(tr);
    const auto b = fit_delay_dmdc(tr, 1);
    EXPECT_LT((a.a - b.a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((a.b - b.b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DelayDmdc, RecoversSecondOrderAutoregression)
{
    // x_{k+1} = 1.2 x_k - 0.5 x_{k-1} + 0.3 u_k.
    const int m = 200;
    const Matrix u = random_inputs(1, m, 9);
    Vector x(m);
    x(0) = 0.0;
    x(1) = 1.0;
    for (int k = 1; k + 1 < m; ++k) x(k + 1) = 1.2 * x(k) - 0.5 * x(k - 1) + 0.3 * u(0, k);
    const auto model = fit_delay_dmdc(scalar_traj(x, u.row(0).transpose()), 2);
    EXPECT_NEAR(model.a(0, 0), 1.2, 1e-8);
    EXPECT_NEAR(model.a(0, 1), -0.5, 1e-8);
    EXPECT_NEAR(model.b(0, 0), 0.3, 1e-8);
    EXPECT_NEAR(model.b(0, 1), 0.0, 1e-8);
    // The second block row only shifts the state.
    EXPECT_NEAR(model.a(1, 0), 1.0, 1e-8);
    EXPECT_NEAR(model.a(1, 1), 0.0, 1e-8);
}

TEST(DelayDmdc, HivDimensions)
{
    const auto model = fit_delay_dmdc(hiv_data(), 10);
    EXPECT_EQ(model.a.size(), 2500);
    EXPECT_EQ(model.b.rows(), 50);
    EXPECT_EQ(model.b.cols(), 10);
    EXPECT_EQ(model.embedding_name(), "delay");
    EXPECT_THROW(fit_delay_dmdc(lotka_data(1.0), 20), InvalidInput);
}

TEST(Edmdc, HivLiftDimension)
{
    const auto lib = features::library_without_constant(features::polynomial_library(5, 1, 3));
    const auto model = fit_edmdc(hiv_data(), lib);
    EXPECT_EQ(model.lifted_dim(), 83);
    EXPECT_EQ(model.a.cols(), 83);
    EXPECT_EQ(model.embedding_name(), "poly-lift");
}

TEST(Edmdc, LinearLiftMatchesDmdcPrediction)
{
    const auto tr = lotka_data(30.0);
    const auto lib = features::library_without_constant(features::polynomial_library(2, 0, 1));
    const LinearPredictor e(fit_edmdc(tr, lib));
    const LinearPredictor d(fit_dmdc(tr));
    const Vector x = vec({70.0, 30.0}), u = vec({0.2});
    const Vector pe = e.observe(e.advance(e.lift(x, u), u));
    const Vector pd = d.observe(d.advance(d.lift(x, u), u));
    EXPECT_LT((pe - pd).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Feedback, RecoversPolynomialLaws)
{
    Trajectory tr;
    const int m = 60;
    tr.times = Vector::LinSpaced(m, 0.0, 5.9);
    tr.states = random_inputs(2, m, 10);
    tr.inputs.resize(3, m);
    tr.inputs.row(0) = 2.0 * tr.states.row(0);
    tr.inputs.row(1) = tr.states.row(0).cwiseProduct(tr.states.row(1));
    tr.inputs.row(2).setZero();
    const auto lib = features::polynomial_library(2, 0, 2);
    const auto law = identify_feedback(tr, lib, vec({0.1, 0.1, 0.1}));
    const Vector x = vec({0.7, -1.3});
    const Vector u = law(x);
    EXPECT_NEAR(u(0), 1.4, 1e-10);
    EXPECT_NEAR(u(1), 0.7 * -1.3, 1e-10);
    EXPECT_EQ(u(2), 0.0);
    EXPECT_EQ((law.xi_u.array() != 0.0).count(), 2);
}

TEST(Noise, ZeroEtaLeavesDataUntouched)
{
    const auto tr = lotka_data(10.0);
    const auto noisy = add_noise(tr, {0.0, 1});
    EXPECT_TRUE((noisy.states.array() == tr.states.array()).all());
    EXPECT_TRUE(noisy.has_derivatives());
}

TEST(Noise, SigmaUsesLargestStateSpread)
{
    Trajectory tr;
    tr.times = vec({0, 1, 2, 3});
    tr.states.resize(2, 4);
    tr.states << 1, 2, 3, 4, 0, 0, 10, 10;
    tr.inputs = Matrix::Zero(1, 4);
    // Sample std of (0,0,10,10) is sqrt(100/3).
    EXPECT_NEAR(noise_sigma(tr, 0.1), 0.1 * std::sqrt(100.0 / 3.0), 1e-12);
}

TEST(Noise, EmpiricalSpreadMatchesSigma)
{
    const auto tr = lotka_data(500.0);
    const double eta = 0.1;
    const auto noisy = add_noise(tr, {eta, 42});
    const Matrix e = noisy.states - tr.states;
    const double sd = std::sqrt(e.array().square().mean());
    EXPECT_NEAR(sd / noise_sigma(tr, eta), 1.0, 0.02);
    EXPECT_FALSE(noisy.has_derivatives());
    EXPECT_TRUE((noisy.inputs.array() == tr.inputs.array()).all());
}

TEST(Noise, SeedsControlRealizations)
{
    const auto tr = lotka_data(10.0);
    const auto a = add_noise(tr, {0.1, 7});
    const auto b = add_noise(tr, {0.1, 7});
    const auto c = add_noise(tr, {0.1, 8});
    EXPECT_TRUE((a.states.array() == b.states.array()).all());
    EXPECT_FALSE((a.states.array() == c.states.array()).all());
}

TEST(Predict, ExactSparseModelTracksPlant)
{
    const auto tr = lotka_data();
    const auto m = fit_sindyc(tr, features::polynomial_library(2, 1, 2), vec({1e-3, 1e-3}));
    const SparsePredictor pred(m, 10);
    const auto signal = dynamics::sine_product(0.5);
    const auto p = predict(pred, vec({60.0, 50.0}), signal, 0.0, 20.0, 0.01);
    dynamics::IntegratorConfig ic;
    ic.sample_every = 10;
    const auto truth = dynamics::integrate(dynamics::lotka_volterra(), vec({60.0, 50.0}), signal, 0.0, 20.0, ic);
    ASSERT_EQ(p.size(), truth.size());
    EXPECT_LT((p.states - truth.states).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Predict, DivergentRolloutThrows)
{
    const auto tr = scalar_traj(vec({1, 2, 4, 8, 16}), vec({0, 0, 0, 0, 0}));
    const LinearPredictor pred(fit_dmdc(tr));
    EXPECT_THROW(predict(pred, vec({1e306}), dynamics::zero_signal(), 0.0, 10.0), DivergenceError);
}

TEST(ModelJson, SparseRoundTrip)
{
    const auto m = fit_sindyc(lotka_data(30.0), features::polynomial_library(2, 1, 2), vec({1e-3, 1e-3}));
    const auto back = sparse_model_from_json(nlohmann::json::parse(to_json(m).dump()));
    EXPECT_TRUE((back.xi.array() == m.xi.array()).all());
    EXPECT_EQ(back.library, m.library);
    EXPECT_EQ(back.dt, m.dt);
    EXPECT_NE(coefficient_report(m).find("x1*x2"), std::string::npos);
}

TEST(ModelJson, LinearRoundTrip)
{
    const auto m = fit_delay_dmdc(lotka_data(30.0), 3, vec({100.0, 20.0}), 2);
    const auto j = to_json(m);
    const auto back = linear_model_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_TRUE((back.a.array() == m.a.array()).all());
    EXPECT_TRUE((back.b.array() == m.b.array()).all());
    ASSERT_TRUE(back.state_offset.has_value());
    EXPECT_EQ(*back.state_offset, *m.state_offset);
    EXPECT_EQ(std::get<DelayEmbedding>(back.embedding).lag, 2);
    nlohmann::json bad = j;
    bad["type"] = "sparse";
    EXPECT_THROW(linear_model_from_json(bad), ParseError);
}
