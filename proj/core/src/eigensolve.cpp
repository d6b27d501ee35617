#include "eigmg/eigensolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "eigmg/dense.hpp"
#include "eigmg/error.hpp"
#include "eigmg/log.hpp"

namespace eigmg {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector prolong(const SparseMatrix* p, const Vector& v) { return p == nullptr ? v : (*p) * v; }

void accumulate(SolveReport& total, const SolveReport& part) {
  total.iterations += part.iterations;
  total.matvec_count += part.matvec_count;
  total.precond_count += part.precond_count;
  total.work += part.work;
  total.relative_residual = part.relative_residual;
  total.converged = part.converged;
  total.indefinite_detected = total.indefinite_detected || part.indefinite_detected;
}

// Solve (A - alpha M) x = rhs with the shift-retry policy. Returns the solution
// and fills `trace` (alpha actually used, retries, cumulative work).
Vector shifted_solve(const ShiftedSystemSolver& solver, double alpha, std::span<const double> rhs,
                     const ShiftConfig& config, bool tolerate_indefinite, StepTrace& trace) {
  const int level = solver.forms().level;
  trace.alpha_requested = alpha;
  trace.shift_retries = 0;
  trace.report = SolveReport{};

  if (tolerate_indefinite) {
    CgResult r = solver.solve_indefinite(alpha, rhs);
    accumulate(trace.report, r.report);
    if (r.report.converged) {
      trace.alpha_used = alpha;
      return std::move(r.x);
    }
    log::warn("level ", level, ": indefinite-tolerant solve at alpha=", alpha,
              " did not converge; switching to the shift-retry policy");
    alpha *= 0.5;
    ++trace.shift_retries;
  }

  for (;;) {
    CgResult r = solver.solve_definite(alpha, rhs);
    accumulate(trace.report, r.report);
    if (r.report.converged && !r.report.indefinite_detected) {
      trace.alpha_used = alpha;
      trace.report.indefinite_detected = trace.shift_retries > 0 || trace.report.indefinite_detected;
      return std::move(r.x);
    }
    if (!r.report.indefinite_detected) {
      throw NumericalError("level " + std::to_string(level) + ": shifted solve did not converge (alpha=" +
                           std::to_string(alpha) + ", relative residual " +
                           std::to_string(r.report.relative_residual) + ")");
    }
    if (alpha == 0.0) {
      throw NumericalError("level " + std::to_string(level) + ": unshifted system is not positive definite");
    }
    ++trace.shift_retries;
    alpha = trace.shift_retries <= config.max_shift_retries ? 0.5 * alpha : 0.0;
    log::info("level ", level, ": indefinite shifted system, retrying with alpha=", alpha);
  }
}

// a-normalize, fix the sign against `reference` (b-inner product >= 0) and
// return the Rayleigh quotient.
double normalize_pair(const DiscreteForms& forms, Vector& u, std::span<const double> reference) {
  const double norm = energy_norm(forms, u);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("correction step produced a zero vector");
  scale(1.0 / norm, u);
  if (!reference.empty() && b_inner(forms, u, reference) < 0.0) scale(-1.0, u);
  return rayleigh_quotient(forms, u);
}

double theta_estimate(double lambda, double lambda_above, double alpha) {
  if (!(alpha < lambda_above)) return std::numeric_limits<double>::infinity();
  return theta_factor(lambda, lambda_above, alpha);
}

// Deterministic sign: the largest-magnitude entry is positive.
void fix_sign(Vector& v) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  }
  if (!v.empty() && v[imax] < 0.0) scale(-1.0, v);
}

std::vector<SparseMatrix> prolongation_copies(std::span<const SparseMatrix> prolongations, std::size_t count) {
  return {prolongations.begin(), prolongations.begin() + static_cast<std::ptrdiff_t>(count)};
}

}  // namespace

ShiftMode parse_shift_mode(const std::string& text) {
  if (text == "paper") return ShiftMode::paper;
  if (text == "zero") return ShiftMode::zero;
  if (text == "rayleigh") return ShiftMode::rayleigh;
  throw ConfigError("unknown shift mode '" + text + "' (expected paper, zero or rayleigh)");
}

std::string to_string(ShiftMode mode) {
  switch (mode) {
    case ShiftMode::paper: return "paper";
    case ShiftMode::zero: return "zero";
    case ShiftMode::rayleigh: return "rayleigh";
  }
  return "?";
}

void ShiftConfig::validate() const {
  if (!(sigma > 1.0)) throw ConfigError("shift constant sigma must satisfy sigma > 1");
  if (inner_steps < 1) throw ConfigError("inner_steps must be >= 1");
  if (max_shift_retries < 0) throw ConfigError("max_shift_retries must be >= 0");
}

ShiftedSystemSolver::ShiftedSystemSolver(const DiscreteForms& forms, SolverConfig config)
    : stiffness_{&forms.stiffness}, mass_{&forms.mass}, forms_(&forms), config_(config) {
  config_.multigrid = false;
}

ShiftedSystemSolver::ShiftedSystemSolver(std::span<const DiscreteForms> levels,
                                         std::span<const SparseMatrix> prolongations, SolverConfig config)
    : forms_(&levels.back()), config_(config) {
  if (levels.empty() || prolongations.size() + 1 < levels.size()) {
    throw DimensionError("ShiftedSystemSolver: inconsistent level data");
  }
  for (const auto& f : levels) {
    stiffness_.push_back(&f.stiffness);
    mass_.push_back(&f.mass);
  }
  prolongations_ = prolongation_copies(prolongations, levels.size() - 1);
}

CgResult ShiftedSystemSolver::solve_definite(double alpha, std::span<const double> rhs) const {
  const LinearOperator op = shifted_operator(*stiffness_.back(), *mass_.back(), alpha);
  const CgOptions options{config_.cg_tol, config_.cg_max_iterations, true};
  if (!config_.multigrid) return cg_solve(op, rhs, options);

  if (!cached_vcycle_ || cached_alpha_ != alpha) {
    try {
      cached_vcycle_ = make_shifted_vcycle(stiffness_, mass_, prolongations_, alpha, config_.smoothing_sweeps);
      cached_alpha_ = alpha;
    } catch (const NumericalError&) {
      // A coarse level is already indefinite at this shift.
      cached_vcycle_.reset();
      CgResult failed;
      failed.x.assign(rhs.size(), 0.0);
      failed.report.indefinite_detected = true;
      failed.report.relative_residual = 1.0;
      return failed;
    }
  }
  const LinearOperator pc = cached_vcycle_->as_operator();
  return cg_solve(op, rhs, options, &pc);
}

CgResult ShiftedSystemSolver::solve_indefinite(double alpha, std::span<const double> rhs) const {
  const LinearOperator op = shifted_operator(*stiffness_.back(), *mass_.back(), alpha);
  const CgOptions options{config_.cg_tol, config_.cg_max_iterations, false};
  if (!config_.multigrid) return cg_solve(op, rhs, options);
  if (!unshifted_vcycle_) {
    unshifted_vcycle_ = make_shifted_vcycle(stiffness_, mass_, prolongations_, 0.0, config_.smoothing_sweeps);
  }
  const LinearOperator pc = unshifted_vcycle_->as_operator();
  return cg_solve(op, rhs, options, &pc);
}

double rayleigh_quotient(const DiscreteForms& forms, std::span<const double> v) {
  const double bb = b_inner(forms, v, v);
  if (!(bb > 0.0)) throw NumericalError("rayleigh_quotient: zero vector");
  return a_inner(forms, v, v) / bb;
}

double eigen_residual(const DiscreteForms& forms, double lambda, std::span<const double> u) {
  Vector r = shifted_apply(forms.stiffness, forms.mass, lambda, u);
  const auto offsets = forms.mass.row_offsets();
  const auto vals = forms.mass.values();
  double s = 0.0;
  for (int i = 0; i < forms.size(); ++i) {
    double lumped = 0.0;
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) lumped += vals[k];
    s += r[i] * r[i] / lumped;
  }
  return std::sqrt(s);
}

EigenSet coarse_eigensolve(const DiscreteForms& forms, int count, int dense_budget) {
  const int n = forms.size();
  if (count < 1 || count > n) {
    throw DimensionError("coarse_eigensolve: requested " + std::to_string(count) + " eigenpairs of a " +
                         std::to_string(n) + "-dimensional problem");
  }
  if (n > dense_budget) {
    throw ResourceError("coarse_eigensolve: " + std::to_string(n) + " unknowns exceed the dense budget of " +
                        std::to_string(dense_budget));
  }
  const SymmetricEigen eig =
      generalized_symmetric_eigen(DenseMatrix::from_sparse(forms.stiffness), DenseMatrix::from_sparse(forms.mass));
  EigenSet set;
  set.level = forms.level;
  for (int j = 0; j < count; ++j) {
    Vector v = eig.vectors.column(j);
    fix_sign(v);
    scale(1.0 / energy_norm(forms, v), v);
    set.lambdas.push_back(rayleigh_quotient(forms, v));
    set.vectors.push_back(std::move(v));
  }
  return set;
}

double shift_select(double lambda_k, double lambda_next, const ShiftConfig& config) {
  switch (config.mode) {
    case ShiftMode::zero: return 0.0;
    case ShiftMode::rayleigh: return lambda_k;
    case ShiftMode::paper: break;
  }
  const double s = config.sigma;
  return std::max(0.0, (s * lambda_k - lambda_next) / (s - 1.0));
}

double theta_factor(double lambda1_fine, double lambda2_fine, double alpha) {
  if (!(alpha < lambda2_fine)) {
    throw NumericalError("theta_factor: shift must lie below the second eigenvalue (alpha < lambda2)");
  }
  return std::abs(lambda1_fine - alpha) / (lambda2_fine - alpha);
}

std::pair<EigenPair, StepTrace> correction_step(const ShiftedSystemSolver& solver, const SparseMatrix* prolongation,
                                                double alpha, const EigenPair& u_prev, const ShiftConfig& config) {
  const DiscreteForms& forms = solver.forms();
  const Vector start = prolong(prolongation, u_prev.coeffs);
  if (start.size() != static_cast<std::size_t>(forms.size())) {
    throw DimensionError("correction_step: previous vector does not match the fine level");
  }
  const Vector rhs = forms.mass * start;

  StepTrace trace;
  const bool tolerate = config.mode == ShiftMode::rayleigh;
  Vector u = shifted_solve(solver, alpha, rhs, config, tolerate, trace);

  EigenPair out;
  out.level = forms.level;
  out.lambda = normalize_pair(forms, u, start);
  out.coeffs = std::move(u);
  trace.lambda = out.lambda;
  trace.shift_distance = std::abs(out.lambda - trace.alpha_used);
  return {std::move(out), trace};
}

MultiStepResult multi_correction_step(const ShiftedSystemSolver& solver, const SparseMatrix* prolongation,
                                      double alpha, const EigenPair& u_prev, const ShiftConfig& config,
                                      double residual_target) {
  if (config.inner_steps < 1) throw ConfigError("multi_correction_step: inner_steps must be >= 1");
  MultiStepResult result;
  auto [pair, trace] = correction_step(solver, prolongation, alpha, u_prev, config);
  result.steps.push_back(trace);
  for (int step = 1; step < config.inner_steps; ++step) {
    if (residual_target > 0.0 && eigen_residual(solver.forms(), pair.lambda, pair.coeffs) < residual_target) break;
    const double next_alpha = config.mode == ShiftMode::rayleigh ? pair.lambda : alpha;
    auto [next_pair, next_trace] = correction_step(solver, nullptr, next_alpha, pair, config);
    pair = std::move(next_pair);
    result.steps.push_back(next_trace);
  }
  result.pair = std::move(pair);
  return result;
}

MultigridResult eigen_multigrid(std::span<const DiscreteForms> levels, std::span<const SparseMatrix> prolongations,
                                const SchemeConfig& config) {
  config.shift.validate();
  if (levels.empty()) throw DimensionError("eigen_multigrid: no levels");
  if (prolongations.size() + 1 < levels.size()) throw DimensionError("eigen_multigrid: missing prolongations");

  MultigridResult result;
  auto start = Clock::now();
  const int coarse_count = std::min(2, levels.front().size());
  const EigenSet coarse = coarse_eigensolve(levels.front(), coarse_count, config.dense_budget);
  if (coarse.size() < 2 && config.shift.mode == ShiftMode::paper && levels.size() > 1) {
    throw DimensionError("eigen_multigrid: shift mode paper needs at least two coarse unknowns");
  }
  result.lambda2_coarse = coarse.size() > 1 ? coarse.lambdas[1] : std::numeric_limits<double>::infinity();
  EigenPair current = coarse.pair(0);

  LevelTrace first;
  first.level = current.level;
  first.ndof = levels.front().size();
  first.lambdas = {current.lambda};
  first.residual = eigen_residual(levels.front(), current.lambda, current.coeffs);
  first.wall_seconds = seconds_since(start);
  result.traces.push_back(first);
  if (config.record_iterates) result.iterates.push_back(current);

  for (std::size_t k = 1; k < levels.size(); ++k) {
    start = Clock::now();
    const ShiftedSystemSolver solver = config.solver.multigrid
                                           ? ShiftedSystemSolver(levels.first(k + 1), prolongations, config.solver)
                                           : ShiftedSystemSolver(levels[k], config.solver);
    const double alpha = shift_select(current.lambda, result.lambda2_coarse, config.shift);
    const double target = 0.1 * result.traces.back().residual;
    MultiStepResult step = multi_correction_step(solver, &prolongations[k - 1], alpha, current, config.shift, target);
    current = std::move(step.pair);

    LevelTrace trace;
    trace.level = current.level;
    trace.ndof = levels[k].size();
    trace.alphas = {step.steps.front().alpha_used};
    trace.lambdas = {current.lambda};
    trace.theta_estimates = {theta_estimate(current.lambda, result.lambda2_coarse, trace.alphas[0])};
    trace.inner_steps_used = static_cast<int>(step.steps.size());
    for (const auto& s : step.steps) {
      trace.matvec_total += s.report.matvec_count;
      trace.work_total += s.report.work;
    }
    trace.steps = std::move(step.steps);
    trace.residual = eigen_residual(levels[k], current.lambda, current.coeffs);
    trace.wall_seconds = seconds_since(start);
    log::info("level ", trace.level, ": ndof=", trace.ndof, " alpha=", trace.alphas[0], " lambda=", current.lambda,
              " matvecs=", trace.matvec_total);
    result.traces.push_back(std::move(trace));
    if (config.record_iterates) result.iterates.push_back(current);
  }
  result.pair = std::move(current);
  return result;
}

MultigridResult eigen_multigrid(const MeshHierarchy& hierarchy, const ProblemDefinition& problem,
                                const SchemeConfig& config) {
  const auto forms = assemble_hierarchy(hierarchy, problem);
  return eigen_multigrid(forms, hierarchy.prolongations, config);
}

namespace {

// Shifted solve for every j. j = 0 with a non-Rayleigh shift is designed to
// sit below the first eigenvalue and uses the SPD-guarded path; the other
// shifts lie inside the spectrum by construction.
std::vector<Vector> solve_all(const ShiftedSystemSolver& solver, const SparseMatrix* prolongation,
                              std::span<const double> alphas, const EigenSet& prev, const ShiftConfig& config,
                              std::vector<Vector>& starts, std::vector<StepTrace>& steps) {
  const DiscreteForms& forms = solver.forms();
  if (alphas.size() != prev.size()) throw DimensionError("multi correction: one shift per eigenpair required");
  std::vector<Vector> solutions;
  for (std::size_t j = 0; j < prev.size(); ++j) {
    Vector start = prolong(prolongation, prev.vectors[j]);
    if (start.size() != static_cast<std::size_t>(forms.size())) {
      throw DimensionError("multi correction: previous vectors do not match the fine level");
    }
    const Vector rhs = forms.mass * start;
    StepTrace trace;
    const bool tolerate = j > 0 || config.mode == ShiftMode::rayleigh;
    Vector u = shifted_solve(solver, alphas[j], rhs, config, tolerate, trace);
    const double norm = energy_norm(forms, u);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw NumericalError("multi correction: shifted solve " + std::to_string(j + 1) + " returned a zero vector");
    }
    scale(1.0 / norm, u);
    solutions.push_back(std::move(u));
    starts.push_back(std::move(start));
    steps.push_back(trace);
  }
  return solutions;
}

void sort_ascending(EigenSet& set) {
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return set.lambdas[l] < set.lambdas[r]; });
  EigenSet sorted;
  sorted.level = set.level;
  for (std::size_t j : order) {
    sorted.lambdas.push_back(set.lambdas[j]);
    sorted.vectors.push_back(std::move(set.vectors[j]));
  }
  set = std::move(sorted);
}

}  // namespace

MultiSetStep correction_step_multi_gs(const ShiftedSystemSolver& solver, const SparseMatrix* prolongation,
                                      std::span<const double> alphas, const EigenSet& prev, const ShiftConfig& config) {
  const DiscreteForms& forms = solver.forms();
  MultiSetStep out;
  std::vector<Vector> starts;
  std::vector<Vector> solutions = solve_all(solver, prolongation, alphas, prev, config, starts, out.steps);

  out.set.level = forms.level;
  std::vector<Vector> accepted_a;  // A u_l for accepted vectors
  for (std::size_t j = 0; j < solutions.size(); ++j) {
    Vector u = std::move(solutions[j]);
    // Two classical Gram-Schmidt passes in the a-inner product.
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<double> coeffs(out.set.vectors.size());
      for (std::size_t l = 0; l < out.set.vectors.size(); ++l) coeffs[l] = dot(u, accepted_a[l]);
      for (std::size_t l = 0; l < out.set.vectors.size(); ++l) axpy(-coeffs[l], out.set.vectors[l], u);
    }
    const double norm = energy_norm(forms, u);
    if (!(norm >= 1e-12)) {
      throw NumericalError("multi correction (Gram-Schmidt): vector " + std::to_string(j + 1) +
                           " is linearly dependent on the previous ones");
    }
    scale(1.0 / norm, u);
    if (b_inner(forms, u, starts[j]) < 0.0) scale(-1.0, u);
    out.steps[j].lambda = rayleigh_quotient(forms, u);
    out.steps[j].shift_distance = std::abs(out.steps[j].lambda - out.steps[j].alpha_used);
    out.set.lambdas.push_back(out.steps[j].lambda);
    accepted_a.push_back(forms.stiffness * u);
    out.set.vectors.push_back(std::move(u));
  }
  sort_ascending(out.set);
  return out;
}

MultiSetStep correction_step_multi_rr(const ShiftedSystemSolver& solver, const SparseMatrix* prolongation,
                                      std::span<const double> alphas, const EigenSet& prev, const ShiftConfig& config) {
  const DiscreteForms& forms = solver.forms();
  MultiSetStep out;
  std::vector<Vector> starts;
  const std::vector<Vector> basis = solve_all(solver, prolongation, alphas, prev, config, starts, out.steps);
  const int m = static_cast<int>(basis.size());

  std::vector<Vector> a_basis, m_basis;
  for (const auto& v : basis) {
    a_basis.push_back(forms.stiffness * v);
    m_basis.push_back(forms.mass * v);
  }
  DenseMatrix ga(m, m), gm(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      ga(i, j) = ga(j, i) = 0.5 * (dot(basis[i], a_basis[j]) + dot(basis[j], a_basis[i]));
      gm(i, j) = gm(j, i) = 0.5 * (dot(basis[i], m_basis[j]) + dot(basis[j], m_basis[i]));
    }
  }
  const SymmetricEigen gm_spectrum = symmetric_eigen(gm);
  const double gmin = gm_spectrum.values.front();
  const double gmax = gm_spectrum.values.back();
  if (!(gmin > 0.0) || gmax / gmin > 1e12) {
    throw NumericalError("multi correction (Rayleigh-Ritz): spanning set is rank deficient (condition " +
                         std::to_string(gmin > 0.0 ? gmax / gmin : std::numeric_limits<double>::infinity()) + ")");
  }
  const SymmetricEigen ritz = generalized_symmetric_eigen(ga, gm);

  out.set.level = forms.level;
  for (int j = 0; j < m; ++j) {
    Vector u(static_cast<std::size_t>(forms.size()), 0.0);
    for (int i = 0; i < m; ++i) axpy(ritz.vectors(i, j), basis[i], u);
    scale(1.0 / energy_norm(forms, u), u);
    if (b_inner(forms, u, starts[j]) < 0.0) scale(-1.0, u);
    const double lambda = rayleigh_quotient(forms, u);
    out.steps[j].lambda = lambda;
    out.steps[j].shift_distance = std::abs(lambda - out.steps[j].alpha_used);
    out.set.lambdas.push_back(lambda);
    out.set.vectors.push_back(std::move(u));
  }
  sort_ascending(out.set);
  return out;
}

std::vector<double> multi_shifts(std::span<const double> lambdas, double lambda_next_coarse, const ShiftConfig& config) {
  std::vector<double> alphas(lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const double above = j + 1 < lambdas.size() ? lambdas[j + 1] : lambda_next_coarse;
    alphas[j] = shift_select(lambdas[j], above, config);
  }
  return alphas;
}

MultiMultigridResult eigen_multigrid_multi(std::span<const DiscreteForms> levels,
                                           std::span<const SparseMatrix> prolongations, int m,
                                           const SchemeConfig& config) {
  config.shift.validate();
  if (m < 1) throw ConfigError("eigen_multigrid_multi: m must be >= 1");
  if (levels.empty()) throw DimensionError("eigen_multigrid_multi: no levels");
  if (prolongations.size() + 1 < levels.size()) throw DimensionError("eigen_multigrid_multi: missing prolongations");
  if (levels.front().size() < m + 1) {
    throw DimensionError("eigen_multigrid_multi: coarse level must resolve m+1 = " + std::to_string(m + 1) +
                         " eigenvalues");
  }

  MultiMultigridResult result;
  auto start = Clock::now();
  EigenSet coarse = coarse_eigensolve(levels.front(), m + 1, config.dense_budget);
  result.lambda_next_coarse = coarse.lambdas.back();
  coarse.lambdas.pop_back();
  coarse.vectors.pop_back();
  EigenSet current = std::move(coarse);

  auto residual_of = [](const DiscreteForms& forms, const EigenSet& set) {
    double r = 0.0;
    for (std::size_t j = 0; j < set.size(); ++j) r = std::max(r, eigen_residual(forms, set.lambdas[j], set.vectors[j]));
    return r;
  };

  LevelTrace first;
  first.level = current.level;
  first.ndof = levels.front().size();
  first.lambdas = current.lambdas;
  first.residual = residual_of(levels.front(), current);
  first.wall_seconds = seconds_since(start);
  result.traces.push_back(first);
  if (config.record_iterates) result.iterates.push_back(current);

  for (std::size_t k = 1; k < levels.size(); ++k) {
    start = Clock::now();
    const ShiftedSystemSolver solver = config.solver.multigrid
                                           ? ShiftedSystemSolver(levels.first(k + 1), prolongations, config.solver)
                                           : ShiftedSystemSolver(levels[k], config.solver);
    const std::vector<double> alphas = multi_shifts(current.lambdas, result.lambda_next_coarse, config.shift);
    LevelTrace trace;
    trace.level = levels[k].level;
    trace.ndof = levels[k].size();
    const double target = 0.1 * result.traces.back().residual;
    const SparseMatrix* p = &prolongations[k - 1];
    std::vector<double> step_alphas = alphas;
    for (int step = 0; step < config.shift.inner_steps; ++step) {
      MultiSetStep next = config.multi == MultiCorrection::rayleigh_ritz
                              ? correction_step_multi_rr(solver, p, step_alphas, current, config.shift)
                              : correction_step_multi_gs(solver, p, step_alphas, current, config.shift);
      if (step == 0) {
        for (const auto& s : next.steps) trace.alphas.push_back(s.alpha_used);
      }
      current = std::move(next.set);
      for (auto& s : next.steps) {
        trace.matvec_total += s.report.matvec_count;
        trace.work_total += s.report.work;
        trace.steps.push_back(std::move(s));
      }
      ++trace.inner_steps_used;
      p = nullptr;
      if (config.shift.mode == ShiftMode::rayleigh) step_alphas = current.lambdas;
      if (target > 0.0 && residual_of(levels[k], current) < target) break;
    }
    trace.lambdas = current.lambdas;
    for (std::size_t j = 0; j < current.size(); ++j) {
      const double above = j + 1 < current.size() ? current.lambdas[j + 1] : result.lambda_next_coarse;
      trace.theta_estimates.push_back(theta_estimate(current.lambdas[j], above, trace.alphas[j]));
    }
    trace.residual = residual_of(levels[k], current);
    trace.wall_seconds = seconds_since(start);
    log::info("level ", trace.level, ": ndof=", trace.ndof, " lambda_1=", current.lambdas.front(),
              " matvecs=", trace.matvec_total);
    result.traces.push_back(std::move(trace));
    if (config.record_iterates) result.iterates.push_back(current);
  }
  result.set = std::move(current);
  return result;
}

MultiMultigridResult eigen_multigrid_multi(const MeshHierarchy& hierarchy, const ProblemDefinition& problem, int m,
                                           const SchemeConfig& config) {
  const auto forms = assemble_hierarchy(hierarchy, problem);
  return eigen_multigrid_multi(forms, hierarchy.prolongations, m, config);
}

}  // namespace eigmg
