// Acceptance run: one PASS/FAIL line per criterion, with runtime and the measured quantities.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "sindympc/bench/experiment.hpp"

using namespace sindympc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

int failures = 0;

void criterion(const std::string& id, const std::string& title, double limit_s, const std::function<Outcome()>& body)
{
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > limit_s) {
        o.pass = false;
        o.detail += "; runtime over " + fmt(limit_s) + " s";
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << "  " << title << "  (" << fmt(secs) << " s)  " << o.detail
              << std::endl;
}

Eigen::Index column(const features::LibrarySpec& lib, const std::string& name)
{
    const auto names = features::column_names(lib);
    const auto it = std::find(names.begin(), names.end(), name);
    require(it != names.end(), "no library column " + name);
    return it - names.begin();
}

// True coefficient matrix assembled from (row, term, value) entries.
Matrix true_xi(const features::LibrarySpec& lib, int n, const std::vector<std::tuple<int, std::string, double>>& terms)
{
    Matrix xi = Matrix::Zero(n, features::num_columns(lib));
    for (const auto& [row, name, value] : terms) xi(row, column(lib, name)) = value;
    return xi;
}

bool same_support(const Matrix& a, const Matrix& b)
{
    return ((a.array() != 0.0) == (b.array() != 0.0)).all();
}

double max_relative_error(const Matrix& xi, const Matrix& truth)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < truth.rows(); ++i)
        for (Eigen::Index j = 0; j < truth.cols(); ++j)
            if (truth(i, j) != 0.0) worst = std::max(worst, std::abs(xi(i, j) - truth(i, j)) / std::abs(truth(i, j)));
    return worst;
}

const sysid::SparseModel& sparse_of(const bench::FittedModel& f)
{
    return std::get<sysid::SparseModel>(*f.model);
}

bench::ModelRecipe recipe_of(const bench::ExperimentPlan& plan, bench::ModelKind kind)
{
    for (const auto& r : plan.recipes)
        if (r.kind == kind) return r;
    throw InvalidInput("plan has no recipe of the requested kind");
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Compares every artifact of two run trees except wall-clock timings.
bool same_tree(const fs::path& a, const fs::path& b, int& files)
{
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file() || e.path().filename() == "timings.csv") continue;
        const auto other = b / fs::relative(e.path(), a);
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) return false;
        ++files;
    }
    return files > 0;
}

// ---------------------------------------------------------------------------------------------

Outcome library_counts()
{
    const int a = features::num_columns(features::polynomial_library(5, 1, 3));
    const int b = features::num_columns(features::polynomial_library(3, 1, 3));
    const int c = features::num_columns(features::library_without_constant(features::polynomial_library(5, 1, 3)));
    return {a == 84 && b == 35 && c == 83, "6 vars: " + std::to_string(a) + ", 4 vars: " + std::to_string(b) +
                                                ", 6 vars without constant: " + std::to_string(c)};
}

Outcome lotka_recovery()
{
    const auto plan = bench::preset_plan("lotka");
    const auto stages = bench::simulate_stages(plan);
    const auto fit = bench::fit_model(recipe_of(plan, bench::ModelKind::SINDYc), stages.training, plan);
    const auto& m = sparse_of(fit);
    const auto& s = plan.system;
    const Matrix truth = true_xi(m.library, 2,
                                 {{0, "x1", s.param("a")},
                                  {0, "x1*x2", -s.param("b")},
                                  {1, "x2", -s.param("c")},
                                  {1, "x1*x2", s.param("d")},
                                  {1, "u1", 1.0}});
    const double err = max_relative_error(m.xi, truth);
    const bool support = same_support(m.xi, truth);
    return {support && err <= 1e-6, std::to_string(stages.training.size()) + " samples, " + std::to_string(m.num_active()) +
                                        " terms, max relative coefficient error " + fmt(err)};
}

Outcome lorenz_recovery()
{
    const auto plan = bench::preset_plan("lorenz");
    const auto stages = bench::simulate_stages(plan);
    const auto fit = bench::fit_model(recipe_of(plan, bench::ModelKind::SINDYc), stages.training, plan);
    const auto& m = sparse_of(fit);
    const auto& s = plan.system;
    const double sigma = s.param("sigma"), rho = s.param("rho"), beta = s.param("beta");
    const Matrix truth = true_xi(m.library, 3,
                                 {{0, "x1", -sigma},
                                  {0, "x2", sigma},
                                  {0, "u1", 1.0},
                                  {1, "x1", rho},
                                  {1, "x2", -1.0},
                                  {1, "x1*x3", -1.0},
                                  {2, "x1*x2", 1.0},
                                  {2, "x3", -beta}});
    const double err = max_relative_error(m.xi, truth);
    const bool support = same_support(m.xi, truth);
    return {support && err <= 1e-6, std::to_string(m.num_active()) + " nonzero (7 state terms + input), support " +
                                        (support ? "exact" : "differs") + ", max relative coefficient error " + fmt(err)};
}

Outcome hiv_recovery()
{
    const auto plan = bench::preset_plan("hiv");
    const auto stages = bench::simulate_stages(plan);
    const auto fit = bench::fit_model(plan.recipes.front(), stages.training, plan);
    const auto& m = sparse_of(fit);
    const auto& s = plan.system;
    const double beta = s.param("beta"), eta = s.param("eta"), c2 = s.param("c2"), q = s.param("q");
    const Matrix truth = true_xi(m.library, 5,
                                 {{0, "1", s.param("lambda")},
                                  {0, "x1", -s.param("d")},
                                  {0, "x1*x2", -beta},
                                  {0, "x1*x2*u1", beta * eta},
                                  {1, "x2", -s.param("a")},
                                  {1, "x1*x2", beta},
                                  {1, "x2*x4", -s.param("p1")},
                                  {1, "x2*x5", -s.param("p2")},
                                  {1, "x1*x2*u1", -beta * eta},
                                  {2, "x3", -s.param("b2")},
                                  {2, "x2*x3", -c2 * q},
                                  {2, "x1*x2*x3", c2},
                                  {3, "x4", -s.param("b1")},
                                  {3, "x2*x4", s.param("c1")},
                                  {4, "x5", -s.param("h")},
                                  {4, "x2*x3", c2 * q}});
    const bool support = same_support(m.xi, truth);
    const double err = (m.xi - truth).cwiseAbs().maxCoeff();
    return {support && err <= 1e-2, std::to_string(m.num_active()) + " nonzero vs 16 true, support " +
                                        (support ? "identical" : "differs") + ", max absolute coefficient error " + fmt(err)};
}

Outcome lorenz_horizon()
{
    std::vector<double> horizons;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto plan = bench::preset_plan("lorenz");
        plan.seed = seed;
        const auto stages = bench::simulate_stages(plan);
        const auto o = bench::evaluate_cell(plan, recipe_of(plan, bench::ModelKind::SINDYc), stages.training, stages, false, 0);
        horizons.push_back(o.report.prediction_horizon);
    }
    const double med = bench::median(horizons);
    return {med >= 2.5, "median horizon " + fmt(med) + " (min " + fmt(*std::min_element(horizons.begin(), horizons.end())) +
                            ", max " + fmt(*std::max_element(horizons.begin(), horizons.end())) + ")"};
}

Outcome closed_loop_lotka()
{
    const auto plan = bench::preset_plan("lotka");
    const auto res = bench::run_experiment(plan);
    const auto& o = res.outcome("sindyc");
    if (!o.control) return {false, "no closed loop: " + o.report.status + " " + o.report.message};
    const auto& tr = o.control->trajectory;
    const Vector last = tr.states.col(tr.size() - 1);
    const double rel = std::max(std::abs(last(0) - 100.0) / 100.0, std::abs(last(1) - 20.0) / 20.0);
    const double min_x2 = tr.states.row(1).minCoeff();
    return {rel <= 0.01 && min_x2 >= 9.5, "final (" + fmt(last(0)) + ", " + fmt(last(1)) + "), max relative deviation " +
                                              fmt(rel) + ", min x2 " + fmt(min_x2)};
}

Outcome closed_loop_lorenz()
{
    auto plan = bench::preset_plan("lorenz");
    // Run past the 5 time units so that "remains in the ball" is observed.
    plan.control.duration = 10.0;
    const auto res = bench::run_experiment(plan);
    const auto& o = res.outcome("sindyc");
    if (!o.control) return {false, "no closed loop: " + o.report.status + " " + o.report.message};
    const auto& tr = o.control->trajectory;
    const Vector goal = plan.goal_state();
    int entry = tr.size();
    for (int k = tr.size() - 1; k >= 0 && (tr.states.col(k) - goal).norm() < 3.0; --k) entry = k;
    const double t_entry = entry < tr.size() ? tr.times(entry) - tr.times(0) : std::numeric_limits<double>::infinity();
    const double final_err = (tr.states.col(tr.size() - 1) - goal).norm();
    return {t_entry <= 5.0, "in the ball from t = " + fmt(t_entry) + " to the end of a 10-unit run, final error " + fmt(final_err)};
}

Outcome closed_loop_f8()
{
    const auto plan = bench::preset_plan("f8");
    const auto res = bench::run_experiment(plan);
    const auto& o = res.outcome("sindyc");
    if (!o.control) return {false, "no closed loop: " + o.report.status + " " + o.report.message};
    const auto& tr = o.control->trajectory;
    const double lo = tr.states.row(0).minCoeff(), hi = tr.states.row(0).maxCoeff();
    double abs_err = 0.0;
    for (int k = 0; k < tr.size(); ++k)
        abs_err += std::abs(tr.states(0, k) - dynamics::f8_reference(tr.times(k) - res.stages.control_t0));
    abs_err /= tr.size();
    return {lo >= -0.2 && hi <= 0.4 && abs_err < 0.05,
            "y in [" + fmt(lo) + ", " + fmt(hi) + "], mean absolute tracking error " + fmt(abs_err) + " rad"};
}

Outcome closed_loop_hiv()
{
    const auto plan = bench::preset_plan("hiv");
    bench::ExperimentPlan run = plan;
    run.recipes = {recipe_of(plan, bench::ModelKind::SINDYc), recipe_of(plan, bench::ModelKind::DMDc)};
    const auto res = bench::run_experiment(run);
    const Vector xb = plan.goal_state();
    const auto deviation = [&](const bench::CellOutcome& o) {
        if (!o.control || o.control->failed) return std::numeric_limits<double>::infinity();
        const auto& tr = o.control->trajectory;
        const Vector last = tr.states.col(tr.size() - 1);
        return std::max(std::abs(last(0) - xb(0)) / xb(0), std::abs(last(2) - xb(2)) / xb(2));
    };
    const double sindy = deviation(res.outcome("sindyc"));
    const double dmdc = deviation(res.outcome("dmdc"));
    const bool sindy_ok = sindy <= 0.1, dmdc_fails = !(dmdc <= 0.1);
    return {sindy_ok && dmdc_fails, "after 50 weeks max relative deviation of (x1, x3) from x^B: SINDYc " + fmt(sindy) +
                                        (sindy_ok ? " (within 10%)" : " (not within 10%)") + ", DMDc " + fmt(dmdc) +
                                        (dmdc_fails ? " (fails, as expected)" : " (unexpectedly succeeds)")};
}

Outcome noise_ordering()
{
    const auto plan = bench::preset_plan("lotka");
    const auto res = bench::sweep_noise(plan, {0.25}, 50);
    const double s = bench::median_of(res.rows, "sindyc", &bench::MetricsReport::avg_rel_error);
    const double d = bench::median_of(res.rows, "dmdc", &bench::MetricsReport::avg_rel_error);
    return {s < d, "median validation error over 50 realizations: SINDYc " + fmt(s) + ", DMDc " + fmt(d)};
}

Outcome property_suites()
{
    std::vector<std::string> failed;
    std::mt19937_64 rng(derive_seed(0, "acceptance"));
    std::normal_distribution<double> gauss;
    const auto random = [&](int r, int c) {
        Matrix m(r, c);
        for (int j = 0; j < c; ++j)
            for (int i = 0; i < r; ++i) m(i, j) = gauss(rng);
        return m;
    };

    // STLS: the active set never grows between passes.
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix theta = random(80, 15);
        const Matrix y = (theta * random(15, 3)).transpose() + 0.3 * random(3, 80);
        const auto res = sysid::stls(theta, y, Vector::Constant(3, 0.2 + 0.02 * trial));
        for (std::size_t it = 1; it < res.support_history.size(); ++it)
            for (std::size_t k = 0; k < 3; ++k)
                if (res.support_history[it][k] > res.support_history[it - 1][k]) failed.push_back("stls monotonicity");
    }

    // Discrete SINDYc on the linear library at eps = 0 against DMDc.
    {
        const auto plan = bench::preset_plan("lorenz");
        const auto stages = bench::simulate_stages(plan);
        sysid::SindyOptions opt;
        opt.form = sysid::ModelForm::DiscreteTime;
        const auto lib = features::library_without_constant(features::polynomial_library(3, 1, 1));
        const auto s = sysid::fit_sindyc(stages.training, lib, Vector::Zero(3), opt);
        const auto d = sysid::fit_dmdc(stages.training);
        Matrix ab(3, 4);
        ab << d.a, d.b;
        if (!((s.xi - ab).cwiseAbs().maxCoeff() <= 1e-10)) failed.push_back("sindyc vs dmdc " + fmt((s.xi - ab).cwiseAbs().maxCoeff()));
    }

    // Optimizer gradient against central differences on every benchmark objective.
    double worst_gradient = 0.0;
    for (const auto& name : bench::preset_names()) {
        const auto plan = bench::preset_plan(name);
        const sysid::PlantPredictor model(plan.system, plan.model_dt, plan.sample_every());
        const auto cfg = bench::model_config(plan, model);
        const auto ref = bench::make_reference(plan, model, cfg, 0.0);
        const Vector u_prev = Vector::Zero(cfg.num_inputs());
        const mpc::InputParametrization param(cfg, u_prev);
        std::uniform_real_distribution<double> unit(0.2, 0.8);
        for (int trial = 0; trial < 10; ++trial) {
            Vector x = plan.goal_state();
            for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += (unit(rng) - 0.5) * (0.2 * std::abs(x(i)) + 0.1);
            Vector v(param.lower().size());
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                const double lo = std::isfinite(param.lower()(i)) ? param.lower()(i) : -1.0;
                const double hi = std::isfinite(param.upper()(i)) ? param.upper()(i) : 1.0;
                v(i) = lo + unit(rng) * (hi - lo);
            }
            const auto f = mpc::make_objective(model, x, u_prev, ref, 0.0, cfg, param);
            const double fx = f(v);
            const Vector g = mpc::fd_gradient(f, v, fx, param.lower(), param.upper());
            Vector gc(v.size());
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                const double h = 1e-5 * std::max(1.0, std::abs(v(i)));
                Vector a = v, b = v;
                a(i) += h;
                b(i) -= h;
                gc(i) = (f(a) - f(b)) / (2.0 * h);
            }
            worst_gradient = std::max(worst_gradient, (g - gc).cwiseAbs().maxCoeff() / std::max(1.0, gc.cwiseAbs().maxCoeff()));
        }
    }
    if (!(worst_gradient <= 1e-4)) failed.push_back("gradient " + fmt(worst_gradient));

    // RK4 order on dx/dt = -x.
    const auto decay_error = [](double dt) {
        const auto sys = dynamics::identified_sparse(1, 1, [](const Vector& x, const Vector&, double) { return Vector(-x); });
        dynamics::IntegratorConfig ic;
        ic.dt = dt;
        const auto tr = dynamics::integrate(sys, Vector::Ones(1), dynamics::zero_signal(), 0.0, 1.0, ic);
        return std::abs(tr.states(0, tr.size() - 1) - std::exp(-1.0));
    };
    const double order = std::log2(decay_error(0.1) / decay_error(0.05));
    if (!(order > 3.8 && order < 4.2)) failed.push_back("rk4 order " + fmt(order));

    // Same seed, same artifacts, whatever the worker count.
    const auto root = fs::temp_directory_path() / ("sindympc-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(root);
    int files = 0;
    for (const auto& name : bench::preset_names()) {
        auto plan = bench::preset_plan(name);
        plan.control.duration = std::min(plan.control.duration, 5.0);
        bench::run_experiment(plan, {(root / "a").string(), 1, {}});
        bench::run_experiment(plan, {(root / "b").string(), 2, {}});
        if (!same_tree(root / "a" / plan.name, root / "b" / plan.name, files)) failed.push_back("artifacts of " + name);
    }
    {
        auto plan = bench::preset_plan("lotka");
        plan.training.noise_eta = 0.05;
        plan.control.duration = 5.0;
        bench::sweep_training_length(plan, {20, 100}, 3, {(root / "a").string(), 1, {}});
        bench::sweep_training_length(plan, {20, 100}, 3, {(root / "b").string(), 2, {}});
        const std::string run = plan.name + "-length-sweep";
        if (!same_tree(root / "a" / run, root / "b" / run, files)) failed.push_back("length sweep artifacts");
    }
    fs::remove_all(root);

    std::string detail = "stls monotone over 50 problems, sindyc==dmdc, gradient rel diff " + fmt(worst_gradient) + ", rk4 order " +
                         fmt(order) + ", " + std::to_string(files) + " artifacts identical";
    if (!failed.empty()) {
        detail += "; failed:";
        for (const auto& f : failed) detail += " " + f;
    }
    return {failed.empty(), detail};
}

} // namespace

int main()
{
    criterion("1 ", "library column counts", 1.0, library_counts);
    criterion("2 ", "Lotka-Volterra coefficient recovery", 10.0, lotka_recovery);
    criterion("3 ", "Lorenz coefficient recovery", 30.0, lorenz_recovery);
    criterion("4 ", "HIV support recovery", 120.0, hiv_recovery);
    criterion("5 ", "Lorenz prediction horizon", 600.0, lorenz_horizon);
    criterion("6a", "Lotka-Volterra MPC", 300.0, closed_loop_lotka);
    criterion("6b", "Lorenz MPC", 300.0, closed_loop_lorenz);
    criterion("6c", "F8 MPC", 300.0, closed_loop_f8);
    criterion("6d", "HIV MPC", 300.0, closed_loop_hiv);
    criterion("7 ", "SINDYc vs DMDc at noise 0.25", 600.0, noise_ordering);
    criterion("8 ", "property suites", 600.0, property_suites);
    std::cout << failures << " criteria failed" << std::endl;
    return failures == 0 ? 0 : 1;
}
