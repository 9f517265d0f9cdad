#include "maxreg/commands.hpp"
#include "maxreg/config.hpp"
#include "maxreg/example_pde.hpp"
#include "maxreg/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace maxreg;
namespace fs = std::filesystem;

namespace {

SchrodingerParams schrodinger(PotentialWeight w, double alpha = 0.5) {
    SchrodingerParams prm;
    prm.weight = w;
    prm.alpha = alpha;
    return prm;
}

std::vector<BuiltExample> all_examples() {
    RobinParams square;
    square.domain = RobinDomain::square;
    square.mesh_n = 4;
    return {build_schrodinger(schrodinger(PotentialWeight::bounded)),
            build_schrodinger(schrodinger(PotentialWeight::hardy, 0.7)),
            build_robin({}),
            build_robin(square),
            build_wentzell({}),
            build_matrix({})};
}

bool bitwise_symmetric(const MatrixXd& m) { return (m.array() == m.transpose().array()).all(); }

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("maxreg_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) const {
        const auto path = dir_ / name;
        std::ofstream(path) << text;
        return path.string();
    }
    std::string out(const std::string& base) const { return (dir_ / base).string(); }

    fs::path dir_;
};

} // namespace

// ---- builders ----------------------------------------------------------------

TEST(Builders, CertifiedBoundsWithSmallShift) {
    for (const auto& ex : all_examples()) {
        const auto b = certify_bounds(ex.family, uniform_times(ex.family.tau(), 16));
        EXPECT_TRUE(std::isfinite(b.M)) << ex.id;
        EXPECT_GT(b.alpha1, 0.0) << ex.id;
        EXPECT_LE(b.delta, 1.0) << ex.id;
    }
}

TEST(Builders, SymmetricAssemblyIsBitwiseSymmetric) {
    const auto s = build_schrodinger(schrodinger(PotentialWeight::hardy));
    EXPECT_TRUE(s.family.is_symmetric());
    EXPECT_TRUE(bitwise_symmetric(s.family.form_at(0.37)));
    EXPECT_TRUE(bitwise_symmetric(build_wentzell({}).family.form_at(0.81)));
    RobinParams no_drift;
    no_drift.drift_amplitude = 0.0;
    EXPECT_TRUE(bitwise_symmetric(build_robin(no_drift).family.form_at(0.5)));
    EXPECT_FALSE(build_robin({}).family.is_symmetric());
}

TEST(Builders, ConstantProfilesGiveAutonomousFamilies) {
    auto s = schrodinger(PotentialWeight::bounded);
    s.time_dependent = false;
    RobinParams r;
    r.time_dependent = false;
    WentzellParams w;
    w.time_dependent = false;
    for (const auto& ex : {build_schrodinger(s), build_robin(r), build_wentzell(w)}) {
        EXPECT_TRUE(ex.family.is_autonomous()) << ex.id;
        const auto c = estimate_modulus(ex.family, ex.expected.beta, ex.expected.gamma, default_modulus_gaps(1.0));
        for (auto [h, v] : c.samples) {
            EXPECT_EQ(v, 0.0) << ex.id;
        }
    }
}

TEST(Builders, HolderExponentRoundTrip) {
    RobinParams r;
    r.alpha = 0.3;
    WentzellParams w;
    w.alpha = 0.1;
    const std::vector<std::pair<BuiltExample, double>> cases = {
        {build_schrodinger(schrodinger(PotentialWeight::bounded, 0.5)), 0.5},
        {build_schrodinger(schrodinger(PotentialWeight::hardy, 0.7)), 0.7},
        {build_robin(r), 0.3},
        {build_wentzell(w), 0.1}};
    for (const auto& [ex, alpha] : cases) {
        const auto c = estimate_modulus(ex.family, ex.expected.beta, ex.expected.gamma, default_modulus_gaps(1.0));
        EXPECT_NEAR(c.holder_alpha, alpha, 0.1) << ex.id;
        EXPECT_TRUE(c.fit_accepted) << ex.id;
    }
}

TEST(Builders, AdvertisedExponents) {
    const auto sb = build_schrodinger(schrodinger(PotentialWeight::bounded));
    EXPECT_EQ(sb.expected.beta, 0.0);
    EXPECT_EQ(sb.expected.alpha_threshold, 0.0);
    const auto sh = build_schrodinger(schrodinger(PotentialWeight::hardy));
    EXPECT_EQ(sh.expected.gamma, 1.0);
    EXPECT_EQ(sh.expected.alpha_threshold, 0.5);
    const auto r = build_robin({});
    EXPECT_EQ(r.expected.beta, 1.0);
    EXPECT_EQ(r.expected.gamma, 0.5);
    EXPECT_EQ(r.expected.alpha_threshold, 0.25);
    EXPECT_EQ(r.expected.alpha_threshold_p(4.0), 0.5);
    EXPECT_EQ(r.expected.alpha_threshold_p(2.0), 0.25);
    EXPECT_EQ(build_wentzell({}).expected.alpha_threshold, 0.0);
}

TEST(Builders, RejectInvalidParameters) {
    auto s = schrodinger(PotentialWeight::bounded);
    s.m0 = -1.0;
    EXPECT_THROW((void)build_schrodinger(s), InvalidInput);
    auto odd = schrodinger(PotentialWeight::hardy);
    odd.mesh_n = 63;
    EXPECT_THROW((void)build_schrodinger(odd), InvalidInput);
    RobinParams r;
    r.boundary_amplitude = -1.0;
    EXPECT_THROW((void)build_robin(r), InvalidInput);
    WentzellParams w;
    w.alpha = 0.0;
    EXPECT_THROW((void)build_wentzell(w), InvalidInput);
}

TEST(Builders, WentzellStateSpaceCarriesBoundaryMass) {
    WentzellParams w;
    w.mesh_n = 10;
    const auto ex = build_wentzell(w);
    const auto asm1 = fem::assemble_1d(fem::nodes_1d(0.0, 1.0, 10));
    const MatrixXd expected = asm1.mass + fem::endpoint_mass(11);
    EXPECT_EQ(ex.family.gram().gram_h(), expected);
    // the constant function has H-norm^2 = |Omega| + #boundary points
    EXPECT_NEAR(ex.family.gram().norm_h(VectorXd::Ones(11)), std::sqrt(3.0), 1e-12);
}

TEST(Builders, SquareRobinSmoke) {
    RobinParams r;
    r.domain = RobinDomain::square;
    r.mesh_n = 3;
    const auto ex = build_robin(r);
    EXPECT_EQ(ex.family.dim(), 16);
    // boundary mass integrates 1 over the perimeter
    const VectorXd one = VectorXd::Ones(16);
    EXPECT_NEAR(one.dot(fem::assemble_square(3).boundary_mass * one), 4.0, 1e-12);
    EXPECT_NEAR(one.dot(ex.family.gram().gram_h() * one), 1.0, 1e-12);
}

TEST(SobolevWeight, BoundedWeightMatchesMass) {
    const auto prm = schrodinger(PotentialWeight::bounded);
    const auto ex = build_schrodinger(prm);
    const double c = sobolev_weight_constant(schrodinger_weight_mass(prm), 0.0, build_spectral_scale(ex.family.gram()));
    EXPECT_NEAR(c, 1.0, 1e-10);
    EXPECT_TRUE(certify_sobolev_weight(prm, 0.0).pass);
}

TEST(SobolevWeight, HardyWeightNeedsFullIndex) {
    const auto prm = schrodinger(PotentialWeight::hardy);
    const auto one = certify_sobolev_weight(prm, 1.0);
    EXPECT_TRUE(one.pass);
    EXPECT_LE(one.C, 8.0);
    EXPECT_LE(one.C_refined, 8.0);
    const auto zero = certify_sobolev_weight(prm, 0.0);
    EXPECT_FALSE(zero.pass);
    EXPECT_GT(zero.C_refined, 1.5 * zero.C);
}

// ---- Dini classification and thresholds -------------------------------------

TEST(Dini, MainConditionExamples) {
    const auto r = dini_classify(0.3, 0.5, 1.0, 2.0, 1.0);
    EXPECT_TRUE(r.cond_main);
    EXPECT_NEAR(r.main_value, 1.0 / 0.05, 1e-12);
    // beta = gamma = 1: integral of omega / t^{3/2}
    EXPECT_FALSE(dini_classify(0.5, 1.0, 1.0, 2.0, 1.0).cond_main);
    EXPECT_TRUE(dini_classify(0.51, 1.0, 1.0, 2.0, 1.0).cond_main);
    EXPECT_NEAR(dini_classify(0.75, 1.0, 1.0, 2.0, 2.0).main_value, std::pow(2.0, 0.25) / 0.25, 1e-12);
    const auto edge = dini_classify(0.25, 0.5, 1.0, 2.0, 1.0);
    EXPECT_FALSE(edge.cond_main);
    EXPECT_TRUE(std::isinf(edge.main_value));
    EXPECT_THROW((void)dini_classify(0.3, 0.5, 1.0, 2.0, 0.0), InvalidInput);
}

TEST(Dini, PConditionClosedForm) {
    // p (alpha - (beta+gamma)/2) = 4 (0.3 - 0.75) = -1.8
    EXPECT_FALSE(dini_classify(0.3, 0.5, 1.0, 4.0, 1.0).cond_p);
    // 2 (0.3 - 0.75) = -0.9
    const auto r = dini_classify(0.3, 0.5, 1.0, 2.0, 1.0);
    EXPECT_TRUE(r.cond_p);
    EXPECT_NEAR(r.p_value, 1.0 / 0.1, 1e-12);
}

TEST(Dini, ThresholdTableMatchesStatedConditions) {
    const std::vector<double> ps = {1.5, 2.0, 3.0, 4.0, 8.0};
    for (int i = 1; i <= 100; ++i) {
        const double alpha = i / 100.0 - 0.001;
        for (double p : ps) {
            // Schroedinger with sobolev index sigma: alpha > sigma/2 and alpha > max(sigma/2, sigma - 1/p)
            for (double sigma : {0.0, 1.0}) {
                const auto d = dini_classify(alpha, sigma, sigma, p, 1.0);
                EXPECT_EQ(admissible(d, true), alpha > sigma / 2);
                EXPECT_EQ(admissible(d, false), alpha > std::max(sigma / 2, sigma - 1.0 / p));
            }
            const auto r = dini_classify(alpha, 0.5, 1.0, p, 1.0);
            EXPECT_EQ(admissible(r, true), alpha > 0.25);
            EXPECT_EQ(admissible(r, false), alpha > std::max(0.25, 0.75 - 1.0 / p));
            const auto w = dini_classify(alpha, 0.0, 0.0, p, 1.0);
            EXPECT_TRUE(admissible(w, false));
        }
    }
    EXPECT_EQ(build_robin({}).expected.alpha_threshold_p(4.0), std::max(0.25, 0.75 - 0.25));
}

TEST(Dini, ExampleVerdicts) {
    // bounded potential, alpha = 0.05: sigma = 0 admits every alpha > 0
    const auto sb = build_schrodinger(schrodinger(PotentialWeight::bounded, 0.05));
    EXPECT_TRUE(admissible(dini_classify(0.05, sb.expected.gamma, sb.expected.beta, 2.0, 1.0), false));
    const auto sh = build_schrodinger(schrodinger(PotentialWeight::hardy));
    EXPECT_FALSE(admissible(dini_classify(0.5, sh.expected.gamma, sh.expected.beta, 2.0, 1.0), true));
    EXPECT_TRUE(admissible(dini_classify(0.51, sh.expected.gamma, sh.expected.beta, 2.0, 1.0), true));
    const auto r = build_robin({});
    EXPECT_TRUE(admissible(dini_classify(0.3, r.expected.gamma, r.expected.beta, 2.0, 1.0), false));
    EXPECT_FALSE(admissible(dini_classify(0.3, r.expected.gamma, r.expected.beta, 4.0, 1.0), false));
    for (double p : {1.1, 2.0, 10.0, 100.0}) {
        EXPECT_TRUE(admissible(dini_classify(0.05, 0.0, 0.0, p, 1.0), false));
    }
}

// ---- verify_maxreg -----------------------------------------------------------

TEST(VerifyMaxreg, ZeroDataReportsZeroDenominator) {
    RunConfig cfg;
    cfg.example = "robin";
    cfg.mesh_n = 10;
    cfg.f_kind = SourceKind::zero;
    const auto prob = make_problem(cfg, 0.3);
    const auto rep = verify_maxreg(prob, {20, 40}, 0.3, {});
    EXPECT_EQ(rep.u_Lp, 0.0);
    EXPECT_EQ(rep.Au_Lp, 0.0);
    EXPECT_EQ(rep.C_est, 0.0);
    EXPECT_TRUE(rep.zero_denominator);
    EXPECT_EQ(rep.refinement_trace.size(), 2u);
}

TEST(VerifyMaxreg, RobinSqrtDomainInitialValueIsAdmissible) {
    RunConfig cfg;
    cfg.example = "robin";
    cfg.mesh_n = 16;
    cfg.u0_class = U0Class::sqrt_domain;
    const auto prob = make_problem(cfg, 0.3);
    const auto rep = verify_maxreg(prob, {50, 100}, 0.3, {});
    EXPECT_TRUE(rep.admissible);
    EXPECT_GT(rep.u0_interp, 0.0);
    EXPECT_GT(rep.C_est, 0.0);
    EXPECT_TRUE(rep.stable);
    for (const auto& row : rep.refinement_trace) {
        EXPECT_LE(row.ode_residual, 1e-8);
        EXPECT_GT(row.q_norm_est, 0.0);
    }
}

TEST(VerifyMaxreg, EstimateInvariantUnderSourceScaling) {
    RunConfig cfg;
    cfg.example = "robin";
    cfg.mesh_n = 12;
    auto prob = make_problem(cfg, 0.3);
    VerifyOptions opt;
    opt.estimate_q = false;
    const auto a = verify_maxreg(prob, {40}, 0.3, opt);
    const auto f = prob.f;
    prob.f = [f](double t) -> VectorXd { return 3.7 * f(t); };
    const auto b = verify_maxreg(prob, {40}, 0.3, opt);
    EXPECT_NEAR(b.C_est, a.C_est, 1e-10 * a.C_est);
    EXPECT_NEAR(b.u_Lp, 3.7 * a.u_Lp, 1e-10 * b.u_Lp);
}

TEST(VerifyMaxreg, ShiftedSolveAgreesWithUnshifted) {
    RunConfig cfg;
    cfg.example = "robin";
    cfg.mesh_n = 12;
    cfg.u0_class = U0Class::real_interp;
    const auto prob = make_problem(cfg, 0.3);
    VerifyOptions opt;
    opt.estimate_q = false;
    const auto a = verify_maxreg(prob, {40}, 0.3, opt);
    opt.mu_shift = 20.0;
    const auto b = verify_maxreg(prob, {40}, 0.3, opt);
    EXPECT_NEAR(b.u_Lp, a.u_Lp, 1e-6 * a.u_Lp);
    EXPECT_NEAR(b.Au_Lp, a.Au_Lp, 1e-6 * a.Au_Lp);
    EXPECT_NEAR(b.C_est, a.C_est, 1e-6 * a.C_est);
}

TEST(VerifyMaxreg, ManufacturedSourceRecoversExactSolution) {
    RunConfig cfg;
    cfg.example = "matrix";
    cfg.mesh_n = 6;
    cfg.f_kind = SourceKind::manufactured;
    const auto prob = make_problem(cfg, 0.5);
    VerifyOptions opt;
    opt.estimate_q = false;
    const auto rep = verify_maxreg(prob, {20, 40, 80}, 0.5, opt);
    const auto& t = rep.refinement_trace;
    EXPECT_LT(t[2].exact_error, t[1].exact_error);
    EXPECT_LT(t[1].exact_error, t[0].exact_error);
    EXPECT_LT(t[2].exact_error, 1e-3 * t[2].u_Lp);
}

TEST(VerifyMaxreg, RejectsBadExponent) {
    RunConfig cfg;
    cfg.example = "robin";
    cfg.mesh_n = 6;
    auto prob = make_problem(cfg, 0.3);
    prob.p = 1.0;
    EXPECT_THROW((void)verify_maxreg(prob, {10}, 0.3, {}), InvalidInput);
}

TEST(InitialValues, ClassesLandWithMargin) {
    EXPECT_NEAR(initial_value_smoothing(U0Class::real_interp, 2.0), 0.6, 1e-15);
    EXPECT_NEAR(initial_value_smoothing(U0Class::real_interp, 4.0), 0.85, 1e-15);
    EXPECT_EQ(initial_value_smoothing(U0Class::real_interp, 100.0), 1.0);
    EXPECT_EQ(initial_value_smoothing(U0Class::zero, 2.0), 0.0);
    const auto ex = build_robin({});
    EXPECT_EQ(initial_value_norm(ex.family, VectorXd::Zero(ex.family.dim()), U0Class::real_interp, 2.0), 0.0);
}

TEST(Sweep, RobinTheoryFlagsFlipAtQuarter) {
    RunConfig cfg;
    cfg.example = "robin";
    cfg.mesh_n = 8;
    cfg.alphas = {0.1, 0.2, 0.3, 0.5};
    cfg.grids = {16, 32};
    cfg.quadrature.panels_per_interval = 1;
    const auto rows = exponent_sweep(cfg);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_FALSE(rows[0].admissible_theory);
    EXPECT_FALSE(rows[1].admissible_theory);
    EXPECT_TRUE(rows[2].admissible_theory);
    EXPECT_TRUE(rows[3].admissible_theory);
}

TEST(Sweep, WentzellAndBoundedSchrodingerAllAdmissible) {
    for (const char* example : {"wentzell", "schrodinger"}) {
        RunConfig cfg;
        cfg.example = example;
        cfg.mesh_n = 8;
        cfg.alphas = {0.05, 0.2};
        cfg.grids = {16, 32};
        for (const auto& row : exponent_sweep(cfg)) {
            EXPECT_TRUE(row.admissible_theory) << example << " " << row.alpha;
            EXPECT_TRUE(row.stable) << example << " " << row.alpha;
        }
    }
}

// ---- configuration and commands ----------------------------------------------

TEST(Config, MinimalDocumentUsesDefaults) {
    const auto cfg = parse_config(R"({"example": "robin", "p": 2})");
    EXPECT_EQ(cfg.mesh_n, 50);
    EXPECT_EQ(cfg.alphas, std::vector<double>{0.3});
    EXPECT_EQ(cfg.grids, (std::vector<int>{100, 200, 400, 800}));
    EXPECT_EQ(cfg.u0_class, U0Class::zero);
    EXPECT_EQ(cfg.f_kind, SourceKind::random_smooth);
}

TEST(Config, FullDocumentParses) {
    const auto cfg = parse_config(R"({
        "example": "schrodinger", "mesh_n": 32, "tau": 2.0, "p": 3, "alpha": [0.6, 0.8],
        "beta_gamma": [1, 1], "potential": "hardy", "u0_class": "real_interp", "u0_seed": 4,
        "f_spec": {"kind": "random_smooth", "seed": 9}, "grids": [10, 20],
        "quadrature": {"gauss_order": 8, "grading_ratio": 0.25, "panels": 2}, "mu_shift": 1.5,
        "output": "out/report"
    })");
    EXPECT_EQ(cfg.mesh_n, 32);
    EXPECT_EQ(cfg.alphas, (std::vector<double>{0.6, 0.8}));
    EXPECT_EQ(cfg.potential, "hardy");
    EXPECT_EQ(cfg.quadrature.gauss_order, 8);
    EXPECT_EQ(cfg.quadrature.panels_per_interval, 2);
    EXPECT_EQ(cfg.f_seed, 9u);
    EXPECT_EQ(cfg.mu_shift, 1.5);
    const auto ex = build_example(cfg, 0.6);
    EXPECT_EQ(ex.expected.gamma, 1.0);
    EXPECT_EQ(ex.family.tau(), 2.0);
}

TEST(Config, DiagnosticsNameFieldAndLine) {
    try {
        (void)parse_config("{\n  \"example\": \"robin\",\n  \"p\": 2,\n  \"colour\": 1\n}");
        FAIL() << "unknown field accepted";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("colour"), std::string::npos);
        EXPECT_NE(msg.find("config:4"), std::string::npos);
    }
    try {
        (void)parse_config(R"({"example": "robin"})");
        FAIL() << "missing p accepted";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("'p'"), std::string::npos);
    }
    EXPECT_THROW((void)parse_config(R"({"example": "robin", "p": 2, "f_spec": {"kind": "x"}})"), ConfigError);
    EXPECT_THROW((void)parse_config(R"({"example": "robin", "p": 2, "quadrature": {"order": 3}})"), ConfigError);
    EXPECT_THROW((void)parse_config(R"({"example": "robin", "p": 0.5})"), ConfigError);
    EXPECT_THROW((void)parse_config(R"({"example": "robin", "p": 2, "mesh_n": 1000})"), ConfigError);
    EXPECT_THROW((void)parse_config(R"({"example": "robin", "p": 2,)"), ConfigError);
    EXPECT_THROW((void)parse_config(R"({"example": "robin", "p": 2, "u0_class": "real_interp",
                                        "f_spec": {"kind": "manufactured"}})"),
                 ConfigError);
}

TEST(Commands, CsvColumnOrder) {
    EXPECT_EQ(csv_header(), "example,n,N,p,alpha,beta,gamma,u_Lp,uprime_Lp,Au_Lp,f_Lp,u0_interp,C_est,dini_main,"
                            "dini_p,admissible,q_norm_est,neumann_iters");
}

TEST_F(TempDir, SolveWritesReports) {
    const auto path = write("cfg.json", R"({"example": "robin", "p": 2, "mesh_n": 8, "grids": [10, 20],
                                            "output": ")" + out("rep") + R"("})");
    std::ostringstream log;
    EXPECT_EQ(run_config(path, "solve", log), exit_ok) << log.str();
    ASSERT_TRUE(fs::exists(out("rep.json")));
    ASSERT_TRUE(fs::exists(out("rep.csv")));
    std::ifstream csv(out("rep.csv"));
    std::string header, row, extra;
    std::getline(csv, header);
    std::getline(csv, row);
    EXPECT_EQ(header, csv_header());
    EXPECT_EQ(row.rfind("robin,9,20,", 0), 0u) << row;
    EXPECT_FALSE(std::getline(csv, extra));
    const auto doc = Json::parse(std::ifstream(out("rep.json")));
    EXPECT_EQ(doc["command"], "solve");
    EXPECT_TRUE(doc["reports"][0]["dini"]["admissible"].get<bool>());
}

TEST_F(TempDir, VerifyAndCheckHypotheses) {
    const auto path = write("cfg.json", R"({"example": "wentzell", "p": 3, "mesh_n": 8, "grids": [10, 20],
                                            "u0_class": "real_interp", "output": ")" + out("rep") + R"("})");
    std::ostringstream log;
    EXPECT_EQ(run_config(path, "verify-maxreg", log), exit_ok) << log.str();
    const auto doc = Json::parse(std::ifstream(out("rep.json")));
    EXPECT_EQ(doc["reports"][0]["refinement_trace"].size(), 2u);
    EXPECT_EQ(run_config(path, "check-hypotheses", log), exit_ok) << log.str();
    const auto hyp = Json::parse(std::ifstream(out("rep.json")));
    EXPECT_LE(hyp["results"][0]["bounds"]["delta"].get<double>(), 1.0);
    EXPECT_TRUE(hyp["results"][0]["admissible_nonzero_u0"].get<bool>());
}

TEST_F(TempDir, MissingExponentExitsWithConfigError) {
    const auto path = write("cfg.json", R"({"example": "robin"})");
    std::ostringstream log;
    EXPECT_EQ(run_config(path, "solve", log), exit_config);
    EXPECT_NE(log.str().find("'p'"), std::string::npos);
    EXPECT_EQ(run_config(out("missing.json"), "solve", log), exit_config);
}

TEST_F(TempDir, DiniViolationExitsWithNumericalCode) {
    const auto path = write("cfg.json", R"({"example": "robin", "p": 2, "alpha": 0.2, "mesh_n": 8,
                                            "grids": [10], "output": ")" + out("rep") + R"("})");
    std::ostringstream log;
    EXPECT_EQ(run_config(path, "solve", log), exit_numerical);
    EXPECT_NE(log.str().find("Dini condition violated"), std::string::npos);
    EXPECT_FALSE(fs::exists(out("rep.json")));
}

TEST_F(TempDir, SweepEmitsTable) {
    const auto path = write("cfg.json", R"({"example": "robin", "p": 2, "alpha": [0.2, 0.3], "mesh_n": 6,
                                            "grids": [8, 16], "output": ")" + out("sw") + R"("})");
    std::ostringstream log;
    EXPECT_EQ(run_config(path, "sweep", log), exit_ok) << log.str();
    const auto doc = Json::parse(std::ifstream(out("sw.json")));
    ASSERT_EQ(doc["table"].size(), 2u);
    EXPECT_FALSE(doc["table"][0]["admissible_theory"].get<bool>());
    EXPECT_TRUE(doc["table"][1]["admissible_theory"].get<bool>());
    EXPECT_EQ(doc["table"][1]["C_est_trace"].size(), 2u);
}

TEST(Commands, NonFiniteNumbersBecomeNull) {
    DiniResult d;
    const Json j = to_json(d);
    EXPECT_TRUE(j["integral_value"].is_null());
    EXPECT_FALSE(j["cond_main"].get<bool>());
}
