#include "eigmg/verify.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "eigmg/dense.hpp"
#include "eigmg/error.hpp"
#include "eigmg/log.hpp"

namespace eigmg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nnz()));
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) triplets.emplace_back(i, cols[k], vals[k]);
  }
  Eigen::SparseMatrix<double> out(a.rows(), a.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Vector to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void fix_sign(Vector& v) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  }
  if (!v.empty() && v[imax] < 0.0) scale(-1.0, v);
}

void check_count(const DiscreteForms& forms, int count) {
  if (count < 1 || count > forms.size()) {
    throw DimensionError("direct_discrete_solve: count " + std::to_string(count) + " outside [1, " +
                         std::to_string(forms.size()) + "]");
  }
}

struct Mode {
  int p = 1;
  int q = 1;
  int key() const { return p * p + q * q; }
};

constexpr int kMaxModeKey = 200;

std::vector<Mode> laplace_modes() {
  std::vector<Mode> modes;
  for (int p = 1; p * p < kMaxModeKey; ++p) {
    for (int q = 1; p * p + q * q <= kMaxModeKey; ++q) modes.push_back({p, q});
  }
  std::stable_sort(modes.begin(), modes.end(), [](const Mode& l, const Mode& r) {
    return l.key() != r.key() ? l.key() < r.key() : l.p < r.p;
  });
  return modes;
}

// Degree-4 rule on the reference triangle: barycentric points and weights
// (weights sum to 1).
struct QuadPoint {
  std::array<double, 3> bary;
  double weight;
};

std::array<QuadPoint, 6> degree4_rule() {
  constexpr double a = 0.445948490915965, wa = 0.223381589678011;
  constexpr double b = 0.091576213509771, wb = 0.109951743655322;
  return {{{{a, a, 1.0 - 2.0 * a}, wa},
           {{a, 1.0 - 2.0 * a, a}, wa},
           {{1.0 - 2.0 * a, a, a}, wa},
           {{b, b, 1.0 - 2.0 * b}, wb},
           {{b, 1.0 - 2.0 * b, b}, wb},
           {{1.0 - 2.0 * b, b, b}, wb}}};
}

EigenBasis basis_from_set(const DiscreteForms& forms, const EigenSet& set) {
  EigenBasis basis;
  basis.level = set.level;
  basis.values = set.lambdas;
  for (const auto& v : set.vectors) {
    Vector w = v;
    scale(1.0 / std::sqrt(b_inner(forms, w, w)), w);
    basis.vectors.push_back(std::move(w));
  }
  return basis;
}

Vector a_normalized(const DiscreteForms& forms, Vector v) {
  scale(1.0 / energy_norm(forms, v), v);
  return v;
}

// err_energy against the direct reference: sign-aligned difference for a
// simple eigenvalue, subspace distance for a cluster.
double energy_error_vs_direct(const EigenBasis& basis, std::span<const int> cluster, const Vector& u,
                              const DiscreteForms& forms) {
  if (cluster.size() > 1) return eigenspace_distance(basis, cluster, u, forms);
  Vector ref = a_normalized(forms, basis.vectors[static_cast<std::size_t>(cluster[0])]);
  if (b_inner(forms, u, ref) < 0.0) scale(-1.0, ref);
  axpy(-1.0, u, ref);
  return energy_norm(forms, ref);
}

}  // namespace

EigenBasis dense_discrete_solve(const DiscreteForms& forms, int count) {
  check_count(forms, count);
  const Eigen::MatrixXd a = Eigen::MatrixXd(to_eigen(forms.stiffness));
  const Eigen::MatrixXd m = Eigen::MatrixXd(to_eigen(forms.mass));
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, m);
  if (solver.info() != Eigen::Success) throw NumericalError("dense_discrete_solve: eigensolver failed");
  EigenBasis basis;
  basis.level = forms.level;
  for (int j = 0; j < count; ++j) {
    Vector v = to_vector(solver.eigenvectors().col(j));
    fix_sign(v);
    // The Rayleigh quotient is the value most consistent with the stored vector.
    basis.values.push_back(rayleigh_quotient(forms, v));
    basis.vectors.push_back(std::move(v));
  }
  return basis;
}

EigenBasis iterative_discrete_solve(const DiscreteForms& forms, int count, const DirectOptions& options,
                                    std::span<const Vector> guess) {
  check_count(forms, count);
  const int n = forms.size();
  const int p = std::min(n, count + std::max(0, options.guard));
  const Eigen::SparseMatrix<double> a = to_eigen(forms.stiffness);
  const Eigen::SparseMatrix<double> m = to_eigen(forms.mass);
  const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("iterative_discrete_solve: stiffness factorization failed");
  const double a_norm = forms.stiffness.norm_inf();

  Eigen::MatrixXd x(n, p);
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  for (int j = 0; j < p; ++j) {
    if (static_cast<std::size_t>(j) < guess.size() && guess[static_cast<std::size_t>(j)].size() == static_cast<std::size_t>(n)) {
      x.col(j) = Eigen::Map<const Eigen::VectorXd>(guess[static_cast<std::size_t>(j)].data(), n);
    } else {
      for (int i = 0; i < n; ++i) x(i, j) = uniform(rng);
    }
  }

  Eigen::VectorXd values;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const Eigen::MatrixXd y = llt.solve(m * x);
    const Eigen::MatrixXd ay = a * y;
    const Eigen::MatrixXd my = m * y;
    Eigen::MatrixXd ga = y.transpose() * ay;
    Eigen::MatrixXd gm = y.transpose() * my;
    ga = 0.5 * (ga + ga.transpose()).eval();
    gm = 0.5 * (gm + gm.transpose()).eval();
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(ga, gm);
    if (ritz.info() != Eigen::Success) throw NumericalError("iterative_discrete_solve: Rayleigh-Ritz failed");
    x = y * ritz.eigenvectors();
    values = ritz.eigenvalues();

    const Eigen::MatrixXd r = ay * ritz.eigenvectors() - (my * ritz.eigenvectors()) * values.asDiagonal();
    double worst = 0.0;
    for (int j = 0; j < count; ++j) worst = std::max(worst, r.col(j).norm() / (a_norm * x.col(j).norm()));
    if (worst <= options.tol) {
      log::debug("iterative_discrete_solve: ", sweep + 1, " sweeps, residual ", worst);
      EigenBasis basis;
      basis.level = forms.level;
      for (int j = 0; j < count; ++j) {
        Vector v = to_vector(x.col(j));
        scale(1.0 / std::sqrt(b_inner(forms, v, v)), v);
        fix_sign(v);
        basis.values.push_back(rayleigh_quotient(forms, v));
        basis.vectors.push_back(std::move(v));
      }
      return basis;
    }
  }
  throw NumericalError("iterative_discrete_solve: no convergence after " + std::to_string(options.max_sweeps) +
                       " sweeps");
}

EigenBasis direct_discrete_solve(const DiscreteForms& forms, int count, const DirectOptions& options,
                                 std::span<const Vector> guess) {
  check_count(forms, count);
  if (forms.size() <= options.dense_cap) return dense_discrete_solve(forms, count);
  if (forms.size() <= options.iterative_cap) return iterative_discrete_solve(forms, count, options, guess);
  throw ResourceError("direct_discrete_solve: " + std::to_string(forms.size()) + " unknowns exceed the cap of " +
                      std::to_string(options.iterative_cap));
}

double basis_residual(const DiscreteForms& forms, const EigenBasis& basis) {
  const double a_norm = forms.stiffness.norm_inf();
  double worst = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const Vector r = shifted_apply(forms.stiffness, forms.mass, basis.values[j], basis.vectors[j]);
    worst = std::max(worst, norm2(r) / (a_norm * norm2(basis.vectors[j])));
  }
  return worst;
}

std::vector<std::vector<int>> eigen_clusters(std::span<const double> values, double rel_gap) {
  std::vector<std::vector<int>> clusters;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const bool join = j > 0 && std::abs(values[j] - values[j - 1]) < rel_gap * std::abs(values[j]);
    if (!join) clusters.emplace_back();
    clusters.back().push_back(static_cast<int>(j));
  }
  return clusters;
}

std::vector<int> cluster_of(std::span<const double> values, int j, double rel_gap) {
  for (auto& c : eigen_clusters(values, rel_gap)) {
    if (std::find(c.begin(), c.end(), j) != c.end()) return c;
  }
  throw DimensionError("cluster_of: index " + std::to_string(j) + " out of range");
}

double eigenspace_distance(const EigenBasis& basis, std::span<const int> cluster, std::span<const double> v,
                           const DiscreteForms& forms) {
  if (cluster.empty()) throw DimensionError("eigenspace_distance: empty cluster");
  const int k = static_cast<int>(cluster.size());
  std::vector<Vector> a_vectors;
  for (int idx : cluster) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= basis.size()) {
      throw DimensionError("eigenspace_distance: cluster index out of range");
    }
    a_vectors.push_back(forms.stiffness * basis.vectors[static_cast<std::size_t>(idx)]);
  }
  Eigen::MatrixXd gram(k, k);
  Eigen::VectorXd rhs(k);
  for (int i = 0; i < k; ++i) {
    rhs(i) = dot(a_vectors[i], v);
    for (int j = 0; j < k; ++j) gram(i, j) = dot(a_vectors[i], basis.vectors[static_cast<std::size_t>(cluster[j])]);
  }
  const Eigen::VectorXd c = gram.ldlt().solve(rhs);
  Vector w(v.begin(), v.end());
  for (int i = 0; i < k; ++i) axpy(-c(i), basis.vectors[static_cast<std::size_t>(cluster[i])], w);
  return energy_norm(forms, w);
}

std::vector<double> laplace_exact_eigenvalues() {
  std::vector<double> out;
  for (const Mode& mode : laplace_modes()) out.push_back(mode.key() * kPi * kPi);
  return out;
}

ExactErrors laplace_exact_errors(const EigenPair& pair, const TriangleMesh& mesh, const DiscreteForms& forms,
                                 int index) {
  const std::vector<Mode> modes = laplace_modes();
  if (index < 0 || static_cast<std::size_t>(index) >= modes.size()) {
    throw DimensionError("laplace_exact_errors: index " + std::to_string(index) + " outside the analytic table");
  }
  if (pair.coeffs.size() != static_cast<std::size_t>(forms.size())) {
    throw DimensionError("laplace_exact_errors: vector does not match the level");
  }
  const int key = modes[static_cast<std::size_t>(index)].key();
  std::vector<Mode> cluster;
  for (const Mode& mode : modes) {
    if (mode.key() == key) cluster.push_back(mode);
  }

  const double u_norm = energy_norm(forms, pair.coeffs);
  const auto rule = degree4_rule();
  std::vector<double> proj(cluster.size(), 0.0);
  for (const Triangle& t : mesh.triangles) {
    const Point& p0 = mesh.vertices[t[0]];
    const Point& p1 = mesh.vertices[t[1]];
    const Point& p2 = mesh.vertices[t[2]];
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    const double area = 0.5 * det;
    // Gradients of the barycentric coordinates.
    const std::array<std::array<double, 2>, 3> grads = {{{(p1.y - p2.y) / det, (p2.x - p1.x) / det},
                                                          {(p2.y - p0.y) / det, (p0.x - p2.x) / det},
                                                          {(p0.y - p1.y) / det, (p1.x - p0.x) / det}}};
    double gx = 0.0, gy = 0.0;
    for (int q = 0; q < 3; ++q) {
      const int f = forms.free_dof_map[static_cast<std::size_t>(t[q])];
      if (f < 0) continue;
      const double c = pair.coeffs[static_cast<std::size_t>(f)] / u_norm;
      gx += c * grads[q][0];
      gy += c * grads[q][1];
    }
    if (gx == 0.0 && gy == 0.0) continue;
    for (std::size_t m = 0; m < cluster.size(); ++m) {
      const double pp = cluster[m].p * kPi, qq = cluster[m].q * kPi;
      const double scaling = 2.0 / (kPi * std::sqrt(static_cast<double>(key)));
      double ix = 0.0, iy = 0.0;
      for (const auto& qp : rule) {
        const double x = qp.bary[0] * p0.x + qp.bary[1] * p1.x + qp.bary[2] * p2.x;
        const double y = qp.bary[0] * p0.y + qp.bary[1] * p1.y + qp.bary[2] * p2.y;
        ix += qp.weight * pp * std::cos(pp * x) * std::sin(qq * y);
        iy += qp.weight * qq * std::sin(pp * x) * std::cos(qq * y);
      }
      proj[m] += scaling * area * (gx * ix + gy * iy);
    }
  }
  double proj_norm2 = 0.0;
  for (double c : proj) proj_norm2 += c * c;
  ExactErrors out;
  out.err_lambda = pair.lambda - key * kPi * kPi;
  out.err_energy = std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(proj_norm2)));
  return out;
}

double richardson_reference(double lambda_coarse, double lambda_fine, int order) {
  if (order < 1) throw ConfigError("richardson_reference: order must be >= 1");
  const double factor = std::ldexp(1.0, order);
  return (factor * lambda_fine - lambda_coarse) / (factor - 1.0);
}

double rayleigh_identity_residual(const DiscreteForms& forms, double lambda, std::span<const double> u,
                                  std::span<const double> psi) {
  Vector e(u.begin(), u.end());
  axpy(-1.0, psi, e);
  const double bpp = b_inner(forms, psi, psi);
  const double rq = a_inner(forms, psi, psi) / bpp;
  const double lhs = rq - lambda;
  const double rhs = (a_inner(forms, e, e) - lambda * b_inner(forms, e, e)) / bpp;
  return std::abs(lhs - rhs) / (std::abs(rq) + std::abs(lambda));
}

bool is_unit_square(const TriangleMesh& mesh) {
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (const Point& p : mesh.vertices) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  constexpr double tol = 1e-12;
  return std::abs(xmin) < tol && std::abs(ymin) < tol && std::abs(xmax - 1.0) < tol && std::abs(ymax - 1.0) < tol &&
         std::abs(mesh.total_area() - 1.0) < 1e-10;
}

namespace {

struct SchemeRun {
  std::vector<EigenSet> iterates;
  std::vector<LevelTrace> traces;
};

SchemeRun run_scheme(std::span<const DiscreteForms> forms, std::span<const SparseMatrix> prolongations, int nev,
                     SchemeConfig scheme) {
  scheme.record_iterates = true;
  SchemeRun run;
  if (nev == 1) {
    MultigridResult r = eigen_multigrid(forms, prolongations, scheme);
    for (const EigenPair& pair : r.iterates) run.iterates.push_back({{pair.lambda}, {pair.coeffs}, pair.level});
    run.traces = std::move(r.traces);
  } else {
    MultiMultigridResult r = eigen_multigrid_multi(forms, prolongations, nev, scheme);
    run.iterates = std::move(r.iterates);
    run.traces = std::move(r.traces);
  }
  return run;
}

}  // namespace

StudyResult convergence_study(const ProblemDefinition& problem, const TriangleMesh& initial, const StudyConfig& config) {
  if (config.levels < 1) throw ConfigError("convergence_study: levels must be >= 1");
  if (config.nev < 1) throw ConfigError("convergence_study: nev must be >= 1");
  ReferenceKind kind = config.reference;
  if (kind == ReferenceKind::automatic) {
    kind = problem.name == "laplace" && is_unit_square(initial) ? ReferenceKind::laplace_exact
                                                                : ReferenceKind::extrapolated;
  }
  const int total_levels = config.levels + (kind == ReferenceKind::extrapolated ? 1 : 0);
  MeshHierarchy hierarchy = build_hierarchy(initial, total_levels);
  const std::vector<DiscreteForms> forms = assemble_hierarchy(hierarchy, problem);
  const auto scheme_forms = std::span<const DiscreteForms>(forms).first(static_cast<std::size_t>(config.levels));

  const SchemeRun run = run_scheme(scheme_forms, hierarchy.prolongations, config.nev, config.scheme);

  // Direct references; the extra level (if any) only feeds the extrapolation.
  std::vector<std::optional<EigenBasis>> direct(forms.size());
  for (std::size_t k = 0; k < forms.size(); ++k) {
    const int count = std::min(forms[k].size(), config.nev + 2);
    if (k == 0) {
      // The coarse solve of the scheme is itself a direct solve.
      direct[k] = basis_from_set(forms[k], coarse_eigensolve(forms[k], count, config.scheme.dense_budget));
      continue;
    }
    if (forms[k].size() > config.direct.iterative_cap) {
      log::warn("level ", forms[k].level, ": direct reference skipped (", forms[k].size(), " unknowns exceed cap)");
      continue;
    }
    std::vector<Vector> guess;
    if (k < run.iterates.size()) guess = run.iterates[k].vectors;
    if (direct[k - 1]) {
      for (std::size_t j = guess.size(); j < direct[k - 1]->size(); ++j) {
        guess.push_back(hierarchy.prolongations[k - 1] * direct[k - 1]->vectors[j]);
      }
    }
    direct[k] = direct_discrete_solve(forms[k], count, config.direct, guess);
  }

  StudyResult result;
  result.traces = run.traces;
  const std::vector<double> exact = laplace_exact_eigenvalues();
  std::vector<double> reference(static_cast<std::size_t>(config.nev), kNaN);
  for (int j = 0; j < config.nev; ++j) {
    ReferenceValue ref;
    ref.j = j + 1;
    if (kind == ReferenceKind::laplace_exact) {
      ref.lambda_ref = static_cast<std::size_t>(j) < exact.size() ? exact[static_cast<std::size_t>(j)] : kNaN;
      ref.source = "exact";
    } else {
      const std::size_t last = forms.size() - 1;
      if (last >= 1 && direct[last] && direct[last - 1]) {
        ref.lambda_ref = richardson_reference(direct[last - 1]->values[j], direct[last]->values[j]);
        ref.source = "extrapolated-direct";
      } else {
        const std::size_t l = run.iterates.size() - 1;
        ref.lambda_ref = l >= 1 ? richardson_reference(run.iterates[l - 1].lambdas[j], run.iterates[l].lambdas[j])
                                : kNaN;
        ref.source = "extrapolated-multigrid";
      }
    }
    reference[static_cast<std::size_t>(j)] = ref.lambda_ref;
    result.references.push_back(ref);
  }

  for (std::size_t k = 0; k < run.iterates.size(); ++k) {
    const EigenSet& set = run.iterates[k];
    const LevelTrace& trace = run.traces[k];
    for (int j = 0; j < config.nev; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      ConvergenceRecord rec;
      rec.level = set.level;
      rec.ndof = forms[k].size();
      rec.j = j + 1;
      rec.lambda_mg = set.lambdas[ju];
      rec.err_lambda_exact = rec.lambda_mg - reference[ju];
      rec.alpha = k == 0 ? kNaN : trace.alphas[ju];
      rec.matvec_total = trace.matvec_total;
      rec.wall_seconds = trace.wall_seconds;
      rec.lambda_dir = kNaN;
      rec.err_energy = kNaN;
      rec.theta_measured = kNaN;
      rec.eigenspace_dist = kNaN;
      if (direct[k]) {
        const EigenBasis& basis = *direct[k];
        const std::vector<int> cluster = cluster_of(basis.values, j);
        const Vector u = a_normalized(forms[k], set.vectors[ju]);
        rec.lambda_dir = basis.values[ju];
        rec.eigenspace_dist = eigenspace_distance(basis, cluster, u, forms[k]);
        rec.err_energy = energy_error_vs_direct(basis, cluster, u, forms[k]);
        if (k > 0) {
          const Vector before = a_normalized(forms[k], hierarchy.prolongations[k - 1] * run.iterates[k - 1].vectors[ju]);
          const double dist_before = eigenspace_distance(basis, cluster, before, forms[k]);
          if (dist_before > 0.0) rec.theta_measured = rec.eigenspace_dist / dist_before;
        }
      }
      result.records.push_back(rec);
    }
  }
  return result;
}

BaselineResult counted_baseline(std::span<const DiscreteForms> levels, std::span<const SparseMatrix> prolongations,
                                int count, const SolverConfig& solver_config, std::uint64_t seed, double tol,
                                int max_sweeps) {
  if (levels.empty()) throw DimensionError("counted_baseline: no levels");
  const DiscreteForms& forms = levels.back();
  check_count(forms, count);
  const ShiftedSystemSolver solver = solver_config.multigrid && levels.size() > 1
                                         ? ShiftedSystemSolver(levels, prolongations, solver_config)
                                         : ShiftedSystemSolver(forms, solver_config);
  const int n = forms.size();
  const int p = std::min(n, count + 2);
  const std::int64_t a_cost = forms.stiffness.nnz();
  const std::int64_t m_cost = forms.mass.nnz();

  BaselineResult out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<Vector> x(static_cast<std::size_t>(p), Vector(static_cast<std::size_t>(n)));
  for (auto& v : x) {
    for (double& e : v) e = uniform(rng);
  }

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    std::vector<Vector> y;
    for (const auto& v : x) {
      const Vector rhs = forms.mass * v;
      CgResult r = solver.solve_definite(0.0, rhs);
      if (!r.report.converged) throw NumericalError("counted_baseline: inner solve did not converge");
      out.matvec_total += r.report.matvec_count + 1;
      out.work_total += r.report.work + m_cost;
      y.push_back(std::move(r.x));
    }
    std::vector<Vector> ay, my;
    for (const auto& v : y) {
      ay.push_back(forms.stiffness * v);
      my.push_back(forms.mass * v);
    }
    out.matvec_total += 2 * p;
    out.work_total += p * (a_cost + m_cost);
    DenseMatrix ga(p, p), gm(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = i; j < p; ++j) {
        ga(i, j) = ga(j, i) = 0.5 * (dot(y[i], ay[j]) + dot(y[j], ay[i]));
        gm(i, j) = gm(j, i) = 0.5 * (dot(y[i], my[j]) + dot(y[j], my[i]));
      }
    }
    const SymmetricEigen ritz = generalized_symmetric_eigen(ga, gm);
    bool converged = true;
    for (int j = 0; j < p; ++j) {
      Vector v(static_cast<std::size_t>(n), 0.0), av(static_cast<std::size_t>(n), 0.0), mv(static_cast<std::size_t>(n), 0.0);
      for (int i = 0; i < p; ++i) {
        axpy(ritz.vectors(i, j), y[i], v);
        axpy(ritz.vectors(i, j), ay[i], av);
        axpy(ritz.vectors(i, j), my[i], mv);
      }
      if (j < count) {
        axpy(-ritz.values[j], mv, av);
        const auto offsets = forms.mass.row_offsets();
        const auto vals = forms.mass.values();
        double s = 0.0;
        for (int r = 0; r < n; ++r) {
          double lumped = 0.0;
          for (int k = offsets[r]; k < offsets[r + 1]; ++k) lumped += vals[k];
          s += av[r] * av[r] / lumped;
        }
        // A Ritz vector has a(v,v) = lambda b(v,v); scale the residual to ||v||_a = 1.
        const double norm = std::sqrt(ritz.values[j] * b_inner(forms, v, v));
        if (std::sqrt(s) / norm > tol * ritz.values[j]) converged = false;
      }
      x[static_cast<std::size_t>(j)] = std::move(v);
    }
    out.sweeps = sweep;
    if (converged) {
      out.set.level = forms.level;
      for (int j = 0; j < count; ++j) {
        Vector v = a_normalized(forms, x[static_cast<std::size_t>(j)]);
        fix_sign(v);
        out.set.lambdas.push_back(ritz.values[j]);
        out.set.vectors.push_back(std::move(v));
      }
      return out;
    }
  }
  throw NumericalError("counted_baseline: no convergence after " + std::to_string(max_sweeps) + " sweeps");
}

std::vector<CompareRecord> compare_study(const ProblemDefinition& problem, const TriangleMesh& initial,
                                         const StudyConfig& config) {
  if (config.levels < 1) throw ConfigError("compare_study: levels must be >= 1");
  MeshHierarchy hierarchy = build_hierarchy(initial, config.levels);
  const std::vector<DiscreteForms> forms = assemble_hierarchy(hierarchy, problem);
  const SchemeRun run = run_scheme(forms, hierarchy.prolongations, config.nev, config.scheme);

  std::vector<CompareRecord> out;
  for (std::size_t k = 0; k < forms.size(); ++k) {
    CompareRecord rec;
    rec.level = forms[k].level;
    rec.ndof = forms[k].size();
    rec.mg_matvec_total = run.traces[k].matvec_total;
    rec.mg_wall_seconds = run.traces[k].wall_seconds;
    if (k == 0) {
      rec.dir_matvec_total = rec.mg_matvec_total;
      rec.dir_wall_seconds = rec.mg_wall_seconds;
    } else {
      const auto start = Clock::now();
      const BaselineResult base = counted_baseline(std::span<const DiscreteForms>(forms).first(k + 1),
                                                   hierarchy.prolongations, config.nev, config.scheme.solver,
                                                   config.seed);
      rec.dir_wall_seconds = seconds_since(start);
      rec.dir_matvec_total = base.matvec_total;
    }
    rec.mg_growth = k >= 1 && out.back().mg_matvec_total > 0
                        ? static_cast<double>(rec.mg_matvec_total) / static_cast<double>(out.back().mg_matvec_total)
                        : kNaN;
    out.push_back(rec);
  }
  return out;
}

}  // namespace eigmg
