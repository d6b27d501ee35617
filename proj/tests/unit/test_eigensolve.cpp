#include "doctest.h"

#include <cmath>
#include <numbers>

#include "eigmg/eigensolve.hpp"
#include "eigmg/error.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace eigmg;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

EigenPair pair_from(const Eigen::VectorXd& v, const DiscreteForms& f, int level) {
  EigenPair p;
  p.coeffs = oracle::stdvec(v);
  scale(1.0 / energy_norm(f, p.coeffs), p.coeffs);
  p.lambda = rayleigh_quotient(f, p.coeffs);
  p.level = level;
  return p;
}

// One dense inverse-power step with an explicit solve.
Eigen::VectorXd dense_step(const Eigen::MatrixXd& a, const Eigen::MatrixXd& m, double alpha, const Eigen::VectorXd& u) {
  Eigen::VectorXd x = (a - alpha * m).lu().solve(m * u);
  x /= std::sqrt(x.dot(a * x));
  if (x.dot(m * u) < 0) x = -x;
  return x;
}

ShiftedSystemSolver two_level_solver(const fixture::Levels& l) {
  return ShiftedSystemSolver(std::span<const DiscreteForms>(l.forms).first(2), l.hierarchy.prolongations, {});
}

}  // namespace

TEST_SUITE("eigensolve") {
  TEST_CASE("rayleigh quotient") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(4), 1, laplace_problem());
    const DiscreteForms& f = l.forms[0];
    const Eigen::VectorXd v1 = l.eigvec(0, 0);
    CHECK(rayleigh_quotient(f, oracle::stdvec(v1)) == doctest::Approx(l.spectra[0].values(0)).epsilon(1e-12));
    gen::Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
      Vector v = rng.vector(f.size());
      const double rq = rayleigh_quotient(f, v);
      CHECK(rq >= l.spectra[0].values(0));
      scale(3.7, v);
      CHECK(rayleigh_quotient(f, v) == doctest::Approx(rq).epsilon(1e-13));
    }
    CHECK_THROWS_AS(rayleigh_quotient(f, Vector(f.size(), 0.0)), NumericalError);
  }

  TEST_CASE("coarse eigensolve") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(4), 1, laplace_problem());
    const EigenSet s = coarse_eigensolve(l.forms[0], 1);
    CHECK(s.lambdas[0] == doctest::Approx(l.spectra[0].values(0)).epsilon(1e-12));
    CHECK(s.lambdas[0] > 2.0 * kPi2);
    CHECK(energy_norm(l.forms[0], s.vectors[0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(coarse_eigensolve(l.forms[0], 1, 4), ResourceError);
    CHECK_THROWS_AS(coarse_eigensolve(l.forms[0], 10), DimensionError);

    const EigenSet all = coarse_eigensolve(l.forms[0], 9);
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(b_inner(l.forms[0], all.vectors[i], all.vectors[j])) < 1e-10);
    }
  }

  TEST_CASE("coarse eigensolve on tiny pencils") {
    const DiscreteForms scalar = fixture::dense_pencil_forms(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Identity(1, 1));
    const EigenSet s = coarse_eigensolve(scalar, 1);
    CHECK(s.lambdas[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.vectors[0][0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

    gen::Rng rng(2);
    const Eigen::MatrixXd a = gen::spd(3, 1.0, 5.0, rng);
    const Eigen::MatrixXd m = gen::spd(3, 0.5, 2.0, rng);
    const EigenSet full = coarse_eigensolve(fixture::dense_pencil_forms(a, m), 3);
    const double trace = (m.inverse() * a).trace();
    CHECK(full.lambdas[0] + full.lambdas[1] + full.lambdas[2] == doctest::Approx(trace).epsilon(1e-12));
    const oracle::Pencil ref = oracle::eigen_pencil(a, m);
    for (int j = 0; j < 3; ++j) CHECK(full.lambdas[j] == doctest::Approx(ref.values(j)).epsilon(1e-12));
  }

  TEST_CASE("shift selection") {
    ShiftConfig cfg;
    CHECK(shift_select(19.8, 50.0, cfg) == doctest::Approx(108.4 / 7.0).epsilon(1e-14));
    CHECK(shift_select(2.0, 50.0, cfg) == 0.0);
    cfg.mode = ShiftMode::zero;
    CHECK(shift_select(19.8, 50.0, cfg) == 0.0);
    cfg.mode = ShiftMode::rayleigh;
    CHECK(shift_select(19.8, 50.0, cfg) == 19.8);

    ShiftConfig bad;
    bad.sigma = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.sigma = 8.0;
    bad.inner_steps = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(parse_shift_mode("rayleigh") == ShiftMode::rayleigh);
    CHECK(to_string(ShiftMode::paper) == "paper");
    CHECK_THROWS_AS(parse_shift_mode("bogus"), ConfigError);
  }

  TEST_CASE("theta factor") {
    CHECK(theta_factor(20.0, 50.0, 20.0) == 0.0);
    CHECK(theta_factor(20.0, 50.0, 0.0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(theta_factor(20.0, 50.0, 15.4857) == doctest::Approx(4.5143 / 34.5143).epsilon(1e-12));
    CHECK_THROWS_AS(theta_factor(20.0, 50.0, 50.0), NumericalError);
  }

  TEST_CASE("correction step on a diagonal 2x2 pencil") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 10.0;
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
    const DiscreteForms f = fixture::dense_pencil_forms(a, m);
    const ShiftedSystemSolver solver(f, {});
    const EigenPair start = pair_from(Eigen::Vector2d(1.0, 1.0), f, 1);
    ShiftConfig cfg;
    const auto [out, trace] = correction_step(solver, nullptr, 0.0, start, cfg);
    const Eigen::VectorXd ref = dense_step(a, m, 0.0, oracle::vec(start.coeffs));
    CHECK((oracle::vec(out.coeffs) - ref).norm() < 1e-12);
    CHECK(out.lambda == doctest::Approx(ref.dot(a * ref) / ref.dot(ref)).epsilon(1e-12));
    CHECK(trace.alpha_used == 0.0);

    cfg.mode = ShiftMode::zero;
    cfg.inner_steps = 3;
    const MultiStepResult three = multi_correction_step(solver, nullptr, 0.0, start, cfg);
    Eigen::VectorXd r3 = oracle::vec(start.coeffs);
    for (int k = 0; k < 3; ++k) r3 = dense_step(a, m, 0.0, r3);
    CHECK(three.steps.size() == 3);
    CHECK((oracle::vec(three.pair.coeffs) - r3).norm() < 1e-12);
  }

  TEST_CASE("inner steps collapse to one correction step") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(4), 2, laplace_problem());
    const ShiftedSystemSolver solver = two_level_solver(l);
    const EigenPair coarse = coarse_eigensolve(l.forms[0], 1).pair(0);
    const ShiftConfig cfg;
    const auto [single, trace] = correction_step(solver, &l.hierarchy.prolongations[0], 10.0, coarse, cfg);
    const MultiStepResult multi = multi_correction_step(solver, &l.hierarchy.prolongations[0], 10.0, coarse, cfg);
    CHECK(multi.steps.size() == 1);
    CHECK(multi.pair.lambda == single.lambda);
    CHECK(multi.pair.coeffs == single.coeffs);
  }

  TEST_CASE("two inner steps contract at least quadratically") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(8), 2, laplace_problem());
    const ShiftedSystemSolver solver = two_level_solver(l);
    const EigenSet coarse_set = coarse_eigensolve(l.forms[0], 2);
    const SparseMatrix& p = l.hierarchy.prolongations[0];
    ShiftConfig cfg;
    const double paper_alpha = shift_select(coarse_set.lambdas[0], coarse_set.lambdas[1], cfg);
    for (const double alpha : {0.0, paper_alpha}) {
      CAPTURE(alpha);
      // Inner iterations start on the fine level, after the prolongated step.
      const EigenPair start = correction_step(solver, &p, alpha, coarse_set.pair(0), cfg).first;
      const double before = l.distance(1, start.coeffs);
      const auto [one, trace] = correction_step(solver, nullptr, alpha, start, cfg);
      cfg.inner_steps = 2;
      const MultiStepResult two = multi_correction_step(solver, nullptr, alpha, start, cfg);
      cfg.inner_steps = 1;
      REQUIRE(two.steps.size() == 2);
      const double rho = l.distance(1, one.coeffs) / before;
      CHECK(rho < 1.0);
      CHECK(l.distance(1, two.pair.coeffs) / before <= rho * rho * 1.1);
    }
  }

  TEST_CASE("one correction step obeys the contraction bound") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(8), 2, laplace_problem());
    const ShiftedSystemSolver solver = two_level_solver(l);
    const SparseMatrix& p = l.hierarchy.prolongations[0];
    const double l1 = l.spectra[1].values(0), l2 = l.spectra[1].values(1);
    const EigenSet coarse = coarse_eigensolve(l.forms[0], 2);
    const EigenPair start = coarse.pair(0);
    const double eps0 = l.distance(1, p * start.coeffs);
    for (const double alpha : {0.0, shift_select(start.lambda, coarse.lambdas[1], {}), 0.9 * l1}) {
      const auto [out, trace] = correction_step(solver, &p, alpha, start, {});
      const double theta = theta_factor(l1, l2, trace.alpha_used);
      CHECK(l.distance(1, out.coeffs) <= theta * eps0 / (1.0 - (1.0 + theta) * eps0));
    }
  }

  TEST_CASE("single-level scheme returns the coarse solve") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(6), 1, laplace_problem());
    const MultigridResult r = eigen_multigrid(l.forms, l.hierarchy.prolongations, {});
    const EigenSet coarse = coarse_eigensolve(l.forms[0], 2);
    CHECK(r.pair.lambda == coarse.lambdas[0]);
    CHECK(r.pair.coeffs == coarse.vectors[0]);
    CHECK(r.lambda2_coarse == coarse.lambdas[1]);
    CHECK(r.traces.size() == 1);
  }

  TEST_CASE("four-level Laplace scheme tracks the finest discrete eigenvalue") {
    const MeshHierarchy h = build_hierarchy(generate_unit_square(4), 4);
    const std::vector<DiscreteForms> forms = assemble_hierarchy(h, laplace_problem());
    const MultigridResult r = eigen_multigrid(forms, h.prolongations, {});
    const oracle::Pencil finest = oracle::eigen_pencil(forms.back().stiffness, forms.back().mass);
    const double ldir = finest.values(0);
    CHECK(r.pair.level == 4);
    CHECK(std::abs(r.pair.lambda - ldir) <= 0.5 * (ldir - 2.0 * kPi2));
    CHECK(r.pair.lambda >= ldir);
    CHECK(energy_norm(forms.back(), r.pair.coeffs) == doctest::Approx(1.0).epsilon(1e-10));
    for (const LevelTrace& t : r.traces) {
      for (double th : t.theta_estimates) CHECK(th >= 0.0);
    }
  }

  TEST_CASE("shifted scheme contracts faster than the unshifted one") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(8), 3, laplace_problem());
    SchemeConfig paper, zero;
    paper.record_iterates = zero.record_iterates = true;
    zero.shift.mode = ShiftMode::zero;
    const MultigridResult rp = eigen_multigrid(l.forms, l.hierarchy.prolongations, paper);
    const MultigridResult rz = eigen_multigrid(l.forms, l.hierarchy.prolongations, zero);
    for (std::size_t k = 1; k < l.forms.size(); ++k) {
      const SparseMatrix& p = l.hierarchy.prolongations[k - 1];
      const double tp = l.distance(k, rp.iterates[k].coeffs) / l.distance(k, p * rp.iterates[k - 1].coeffs);
      const double tz = l.distance(k, rz.iterates[k].coeffs) / l.distance(k, p * rz.iterates[k - 1].coeffs);
      CHECK(tp <= tz);
    }
  }

  TEST_CASE("cg and multigrid solvers agree") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(6), 3, general_ex2_problem(), false);
    SchemeConfig mg, cg;
    cg.solver.multigrid = false;
    const MultigridResult a = eigen_multigrid(l.forms, l.hierarchy.prolongations, mg);
    const MultigridResult b = eigen_multigrid(l.forms, l.hierarchy.prolongations, cg);
    CHECK(a.pair.lambda == doctest::Approx(b.pair.lambda).epsilon(1e-9));
    CHECK(a.traces.back().matvec_total < b.traces.back().matvec_total);
  }

  TEST_CASE("indefinite shifts fall back through halving") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(6), 2, laplace_problem());
    const ShiftedSystemSolver solver = two_level_solver(l);
    const EigenPair coarse = coarse_eigensolve(l.forms[0], 1).pair(0);
    const double l1 = l.spectra[1].values(0), l2 = l.spectra[1].values(1);
    const auto [out, trace] = correction_step(solver, &l.hierarchy.prolongations[0], 0.5 * (l1 + l2), coarse, {});
    CHECK(trace.shift_retries >= 1);
    CHECK(trace.alpha_used < trace.alpha_requested);
    CHECK(out.lambda == doctest::Approx(l1).epsilon(1e-3));
  }

  TEST_CASE("Gram-Schmidt correction") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(6), 2, laplace_problem());
    const ShiftedSystemSolver solver = two_level_solver(l);
    const SparseMatrix& p = l.hierarchy.prolongations[0];
    const ShiftConfig cfg;

    const EigenSet c1 = coarse_eigensolve(l.forms[0], 1);
    const std::vector<double> a1{12.0};
    const MultiSetStep gs1 = correction_step_multi_gs(solver, &p, a1, c1, cfg);
    const auto [single, trace] = correction_step(solver, &p, 12.0, c1.pair(0), cfg);
    CHECK(gs1.set.lambdas[0] == doctest::Approx(single.lambda).epsilon(1e-14));
    CHECK((oracle::vec(gs1.set.vectors[0]) - oracle::vec(single.coeffs)).norm() < 1e-12);

    const EigenSet c4 = coarse_eigensolve(l.forms[0], 4);
    const std::vector<double> zeros(4, 0.0);
    const MultiSetStep gs = correction_step_multi_gs(solver, &p, zeros, c4, cfg);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        CHECK(a_inner(l.forms[1], gs.set.vectors[i], gs.set.vectors[j]) ==
              doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
      }
    }
    EigenSet degenerate = c4;
    degenerate.vectors[1] = degenerate.vectors[0];
    CHECK_THROWS_AS(correction_step_multi_gs(solver, &p, zeros, degenerate, cfg), NumericalError);
  }

  TEST_CASE("multi-vector step on a random pencil reduces subspace angles") {
    gen::Rng rng(31);
    const Eigen::MatrixXd a = gen::spd(5, 1.0, 20.0, rng);
    const Eigen::MatrixXd m = gen::spd(5, 0.5, 2.0, rng);
    const DiscreteForms f = fixture::dense_pencil_forms(a, m);
    const ShiftedSystemSolver solver(f, {});
    const oracle::Pencil ref = oracle::eigen_pencil(a, m);
    const Eigen::MatrixXd target = ref.vectors.leftCols(3);
    EigenSet prev;
    for (int j = 0; j < 3; ++j) {
      const Eigen::VectorXd v = ref.vectors.col(j) + 0.3 * Eigen::VectorXd::NullaryExpr(5, [&] { return rng.uniform(); });
      prev.vectors.push_back(oracle::stdvec(v));
    }
    // a-orthonormalize the perturbed start.
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < j; ++i) axpy(-a_inner(f, prev.vectors[j], prev.vectors[i]), prev.vectors[i], prev.vectors[j]);
      scale(1.0 / energy_norm(f, prev.vectors[j]), prev.vectors[j]);
      prev.lambdas.push_back(rayleigh_quotient(f, prev.vectors[j]));
    }
    auto worst_angle = [&](const EigenSet& s) {
      double worst = 0.0;
      for (const auto& v : s.vectors) worst = std::max(worst, oracle::a_distance(a, target, oracle::vec(v)));
      return worst;
    };
    const std::vector<double> zeros(3, 0.0);
    const double before = worst_angle(prev);
    CHECK(worst_angle(correction_step_multi_gs(solver, nullptr, zeros, prev, {}).set) < before);
    CHECK(worst_angle(correction_step_multi_rr(solver, nullptr, zeros, prev, {}).set) < before);
  }

  TEST_CASE("Rayleigh-Ritz correction") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(8), 2, laplace_problem());
    const ShiftedSystemSolver solver = two_level_solver(l);
    const SparseMatrix& p = l.hierarchy.prolongations[0];
    const ShiftConfig cfg;

    const EigenSet c1 = coarse_eigensolve(l.forms[0], 1);
    const std::vector<double> a1{12.0};
    const MultiSetStep rr1 = correction_step_multi_rr(solver, &p, a1, c1, cfg);
    const auto [single, trace] = correction_step(solver, &p, 12.0, c1.pair(0), cfg);
    CHECK(rr1.set.lambdas[0] == doctest::Approx(single.lambda).epsilon(1e-13));
    CHECK(std::abs(std::abs(a_inner(l.forms[1], rr1.set.vectors[0], single.coeffs)) - 1.0) < 1e-12);

    const EigenSet coarse = coarse_eigensolve(l.forms[0], 7);
    EigenSet prev = coarse;
    prev.lambdas.pop_back();
    prev.vectors.pop_back();
    const std::vector<double> alphas = multi_shifts(prev.lambdas, coarse.lambdas.back(), cfg);
    const MultiSetStep rr = correction_step_multi_rr(solver, &p, alphas, prev, cfg);
    for (int j = 0; j < 6; ++j) {
      const double ldir = l.spectra[1].values(j);
      CHECK(rr.set.lambdas[static_cast<std::size_t>(j)] >= ldir * (1.0 - 1e-14));
      CHECK(rr.set.lambdas[static_cast<std::size_t>(j)] - ldir <= 1e-3 * ldir);
    }

    // Fed with the fine discrete eigenvectors, the step reproduces them,
    // including both members of each double pair.
    EigenSet exact;
    exact.level = 2;
    for (int j = 0; j < 6; ++j) {
      exact.vectors.push_back(oracle::stdvec(l.eigvec(1, j)));
      exact.lambdas.push_back(l.spectra[1].values(j));
    }
    const MultiSetStep fixed = correction_step_multi_rr(solver, nullptr, multi_shifts(exact.lambdas, l.spectra[1].values(6), cfg), exact, cfg);
    for (int j = 0; j < 6; ++j) {
      CHECK(std::abs(fixed.set.lambdas[static_cast<std::size_t>(j)] - l.spectra[1].values(j)) <= 1e-8);
    }
  }

  TEST_CASE("multi scheme with one eigenvalue matches the single scheme") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(6), 3, laplace_problem(), false);
    const MultigridResult single = eigen_multigrid(l.forms, l.hierarchy.prolongations, {});
    const MultiMultigridResult multi = eigen_multigrid_multi(l.forms, l.hierarchy.prolongations, 1, {});
    for (std::size_t k = 0; k < l.forms.size(); ++k) {
      CHECK(multi.traces[k].lambdas[0] == doctest::Approx(single.traces[k].lambdas[0]).epsilon(1e-12));
      if (k > 0) CHECK(multi.traces[k].alphas[0] == doctest::Approx(single.traces[k].alphas[0]).epsilon(1e-12));
    }
  }

  TEST_CASE("six Laplace eigenvalues on four levels") {
    const MeshHierarchy h = build_hierarchy(generate_unit_square(4), 4);
    const std::vector<DiscreteForms> forms = assemble_hierarchy(h, laplace_problem());
    const MultiMultigridResult r = eigen_multigrid_multi(forms, h.prolongations, 6, {});
    const oracle::Pencil finest = oracle::eigen_pencil(forms.back().stiffness, forms.back().mass);
    const std::vector<double> exact{2, 5, 5, 8, 10, 10};
    for (int j = 0; j < 6; ++j) {
      const double ldir = finest.values(j);
      CHECK(std::abs(r.set.lambdas[static_cast<std::size_t>(j)] - ldir) <= 0.5 * (ldir - exact[static_cast<std::size_t>(j)] * kPi2));
    }
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) {
        CHECK(a_inner(forms.back(), r.set.vectors[i], r.set.vectors[j]) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
      }
    }
  }

  TEST_CASE("general problem eigenvalues decrease across levels") {
    const MeshHierarchy h = build_hierarchy(generate_unit_square(8), 3);
    const std::vector<DiscreteForms> forms = assemble_hierarchy(h, general_ex2_problem());
    const MultiMultigridResult r = eigen_multigrid_multi(forms, h.prolongations, 6, {});
    for (std::size_t k = 1; k < r.traces.size(); ++k) {
      for (std::size_t j = 0; j < 6; ++j) CHECK(r.traces[k].lambdas[j] < r.traces[k - 1].lambdas[j]);
    }
  }

  TEST_CASE("configuration errors") {
    const fixture::Levels l = fixture::make_levels(generate_unit_square(2), 2, laplace_problem(), false);
    CHECK_THROWS_AS(eigen_multigrid(l.forms, l.hierarchy.prolongations, {}), DimensionError);
    CHECK_THROWS_AS(eigen_multigrid_multi(l.forms, l.hierarchy.prolongations, 1, {}), DimensionError);
    SchemeConfig bad;
    bad.shift.sigma = 1.0;
    CHECK_THROWS_AS(eigen_multigrid(l.forms, l.hierarchy.prolongations, bad), ConfigError);
  }
}

TEST_SUITE("eigensolve-properties") {
  TEST_CASE("discrete eigenvectors are fixed points of the correction step") {
    gen::Rng rng(41);
    for (int trial = 0; trial < 6; ++trial) {
      const TriangleMesh m = gen::jittered_square(rng.integer(4, 7), 0.25, rng);
      const fixture::Levels l = fixture::make_levels(m, 1, trial % 2 == 0 ? laplace_problem() : general_ex2_problem());
      const DiscreteForms& f = l.forms[0];
      const ShiftedSystemSolver solver(f, {});
      const double l1 = l.spectra[0].values(0), l2 = l.spectra[0].values(1);
      const EigenPair u = pair_from(l.eigvec(0, 0), f, 1);
      ShiftConfig cfg;
      for (const double alpha : {0.0, 0.5 * l1, shift_select(l1, l2, cfg)}) {
        const auto [out, trace] = correction_step(solver, nullptr, alpha, u, cfg);
        CHECK(l.distance(0, out.coeffs) <= 1e-9);
        CHECK(out.lambda == doctest::Approx(l1).epsilon(1e-10));
        CHECK(b_inner(f, out.coeffs, u.coeffs) > 0.0);
      }
    }
  }

  TEST_CASE("scaling the previous vector does not change the step") {
    gen::Rng rng(42);
    const fixture::Levels l = fixture::make_levels(generate_unit_square(5), 2, general_ex2_problem(), false);
    const ShiftedSystemSolver solver = two_level_solver(l);
    for (int trial = 0; trial < 10; ++trial) {
      EigenPair u;
      u.coeffs = rng.vector(l.forms[0].size());
      u.lambda = rayleigh_quotient(l.forms[0], u.coeffs);
      EigenPair scaled = u;
      scale(rng.uniform(0.01, 100.0), scaled.coeffs);
      const double alpha = rng.uniform(0.0, 15.0);
      const auto [a, ta] = correction_step(solver, &l.hierarchy.prolongations[0], alpha, u, {});
      const auto [b, tb] = correction_step(solver, &l.hierarchy.prolongations[0], alpha, scaled, {});
      CHECK(a.lambda == doctest::Approx(b.lambda).epsilon(1e-12));
      Vector d = a.coeffs;
      axpy(-1.0, b.coeffs, d);
      CHECK(energy_norm(l.forms[1], d) <= 1e-9);
    }
  }

  TEST_CASE("contraction bound over random starts and shifts") {
    gen::Rng rng(43);
    const fixture::Levels l = fixture::make_levels(generate_unit_square(6), 2, laplace_problem());
    const ShiftedSystemSolver solver = two_level_solver(l);
    const SparseMatrix& p = l.hierarchy.prolongations[0];
    const double l1 = l.spectra[1].values(0), l2 = l.spectra[1].values(1);
    const EigenSet coarse = coarse_eigensolve(l.forms[0], 2);
    int checked = 0;
    for (int trial = 0; trial < 30; ++trial) {
      EigenPair start = coarse.pair(0);
      axpy(rng.uniform(0.0, 0.3), rng.vector(l.forms[0].size()), start.coeffs);
      scale(1.0 / energy_norm(l.forms[0], start.coeffs), start.coeffs);
      start.lambda = rayleigh_quotient(l.forms[0], start.coeffs);
      const double eps0 = l.distance(1, p * start.coeffs);
      for (const double alpha : {0.0, shift_select(start.lambda, coarse.lambdas[1], {}), 0.9 * l1}) {
        if (!(alpha < l2)) continue;
        const auto [out, trace] = correction_step(solver, &p, alpha, start, {});
        const double theta = theta_factor(l1, l2, trace.alpha_used);
        if ((1.0 + theta) * eps0 >= 1.0) continue;
        CHECK(l.distance(1, out.coeffs) <= 1.05 * theta * eps0 / (1.0 - (1.0 + theta) * eps0));
        ++checked;
      }
    }
    CHECK(checked >= 20);
  }

  TEST_CASE("every Laplace iterate bounds the exact eigenvalue from above") {
    gen::Rng rng(44);
    for (int trial = 0; trial < 4; ++trial) {
      const MeshHierarchy h = build_hierarchy(generate_unit_square(rng.integer(4, 8)), 3);
      const std::vector<DiscreteForms> forms = assemble_hierarchy(h, laplace_problem());
      SchemeConfig cfg;
      cfg.shift.mode = static_cast<ShiftMode>(trial % 3);
      cfg.record_iterates = true;
      const MultiMultigridResult r = eigen_multigrid_multi(forms, h.prolongations, 4, cfg);
      const std::vector<double> exact{2, 5, 5, 8};
      for (std::size_t k = 0; k < r.iterates.size(); ++k) {
        const EigenSet& s = r.iterates[k];
        for (std::size_t j = 0; j < 4; ++j) {
          CHECK(s.lambdas[j] > exact[j] * kPi2);
          if (j > 0) CHECK(s.lambdas[j - 1] <= s.lambdas[j]);
          CHECK(energy_norm(forms[k], s.vectors[j]) == doctest::Approx(1.0).epsilon(1e-10));
          CHECK(rayleigh_quotient(forms[k], s.vectors[j]) == doctest::Approx(s.lambdas[j]).epsilon(1e-12));
        }
      }
    }
  }
}
