#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "eigmg/assembly.hpp"
#include "eigmg/eigensolve.hpp"
#include "eigmg/linsolve.hpp"
#include "eigmg/mesh.hpp"

using namespace eigmg;

namespace {

// Hierarchy from n = 8 with `levels` levels, assembled once per size.
struct Setup {
  MeshHierarchy hierarchy;
  std::vector<DiscreteForms> forms;

  explicit Setup(int levels) : hierarchy(build_hierarchy(generate_unit_square(8), levels)) {
    forms = assemble_hierarchy(hierarchy, laplace_problem());
  }
};

const Setup& setup(int levels) {
  static std::vector<std::unique_ptr<Setup>> cache(8);
  auto& slot = cache[static_cast<std::size_t>(levels)];
  if (!slot) slot = std::make_unique<Setup>(levels);
  return *slot;
}

void set_dofs(benchmark::State& state, const Setup& s) {
  state.counters["ndof"] = s.forms.back().size();
  state.SetComplexityN(s.forms.back().size());
}

void BM_Assemble(benchmark::State& state) {
  const TriangleMesh mesh = generate_unit_square(static_cast<int>(state.range(0)));
  const ProblemDefinition problem = state.range(1) == 0 ? laplace_problem() : general_ex2_problem();
  for (auto _ : state) benchmark::DoNotOptimize(assemble(mesh, problem));
  state.counters["triangles"] = static_cast<double>(mesh.num_triangles());
}
BENCHMARK(BM_Assemble)->ArgsProduct({{32, 64, 128}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Refine(benchmark::State& state) {
  const TriangleMesh mesh = generate_unit_square(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(refine_regular(mesh));
}
BENCHMARK(BM_Refine)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_VCycleApply(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)));
  std::vector<const SparseMatrix*> a, m;
  for (const DiscreteForms& f : s.forms) {
    a.push_back(&f.stiffness);
    m.push_back(&f.mass);
  }
  const VCyclePtr v = make_shifted_vcycle(a, m, s.hierarchy.prolongations, 0.0);
  const Vector r(static_cast<std::size_t>(v->size()), 1.0);
  Vector z(r.size());
  for (auto _ : state) {
    v->apply(r, z);
    benchmark::ClobberMemory();
  }
  set_dofs(state, s);
}
BENCHMARK(BM_VCycleApply)->DenseRange(3, 6)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oN);

void BM_ShiftedSolve(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)));
  const ShiftedSystemSolver solver(s.forms, s.hierarchy.prolongations, {});
  const Vector rhs = s.forms.back().mass * Vector(static_cast<std::size_t>(s.forms.back().size()), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve_definite(15.0, rhs));
  set_dofs(state, s);
}
BENCHMARK(BM_ShiftedSolve)->DenseRange(3, 6)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oN);

void BM_EigenMultigrid(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eigen_multigrid(s.forms, s.hierarchy.prolongations, {}));
  set_dofs(state, s);
}
BENCHMARK(BM_EigenMultigrid)->DenseRange(3, 6)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oN);

void BM_EigenMultigridSix(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eigen_multigrid_multi(s.forms, s.hierarchy.prolongations, 6, {}));
  set_dofs(state, s);
}
BENCHMARK(BM_EigenMultigridSix)->DenseRange(3, 5)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oN);

}  // namespace
BENCHMARK_MAIN();
