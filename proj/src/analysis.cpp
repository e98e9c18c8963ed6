#include "mcf/analysis.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace mcf {

double sphere_radius(double r0, double t) {
  const double rsq = r0 * r0 - 4.0 * t;
  if (rsq <= 0) throw std::invalid_argument("sphere is gone by t = " + std::to_string(r0 * r0 / 4.0));
  return std::sqrt(rsq);
}

double sphere_extinction_time(double r0) { return r0 * r0 / 4.0; }

SurfaceMesh build_sphere_mesh(int subdivisions, int fe_order, double radius) {
  if (fe_order != 1 && fe_order != 2) throw std::invalid_argument("element order must be 1 or 2");
  SurfaceMesh mesh = build_icosphere(subdivisions, radius);
  if (fe_order == 1) return mesh;
  const ImplicitSurface sphere = make_sphere_surface(radius);
  return elevate_to_quadratic(mesh, &sphere);
}

NodalState exact_sphere_state(const SurfaceMesh& mesh, double r0, double t) {
  const double r = sphere_radius(r0, t);
  const double scale = r / r0;
  const double h = 2.0 / r;
  const int n = mesh.num_nodes();
  NodalState state = make_nodal_state(t, n);
  const std::vector<double>& ref = mesh.reference_positions();
  for (int j = 0; j < n; ++j) {
    const Vec3 p = node_vec(ref, n, j);
    const Vec3 nu = (1.0 / norm(p)) * p;
    set_node_vec(state.x, n, j, scale * p);
    set_node_vec(state.nu, n, j, nu);
    set_node_vec(state.v, n, j, -h * nu);
    state.h[j] = h;
  }
  return state;
}

NodalState initial_state_from_implicit(const SurfaceMesh& mesh, const ImplicitSurface& surface) {
  const int n = mesh.num_nodes();
  NodalState state = make_nodal_state(0.0, n);
  state.x = mesh.reference_positions();
  for (int j = 0; j < n; ++j) {
    const Vec3 p = node_vec(state.x, n, j);
    const Vec3 nu = level_set_normal(surface, p);
    const double h = level_set_mean_curvature(surface, p);
    set_node_vec(state.nu, n, j, nu);
    set_node_vec(state.v, n, j, -h * nu);
    state.h[j] = h;
  }
  return state;
}

double mass_norm(const SparseMatrix& mass, std::span<const double> w) {
  return std::sqrt(mass.quadratic_form(w, w));
}

double stiffness_seminorm(const SparseMatrix& stiffness, std::span<const double> w) {
  return std::sqrt(std::max(0.0, stiffness.quadratic_form(w, w)));
}

double energy_norm(const SparseMatrix& mass, const SparseMatrix& stiffness, std::span<const double> w) {
  return std::sqrt(mass.quadratic_form(w, w) + std::max(0.0, stiffness.quadratic_form(w, w)));
}

double block_energy_norm(const SparseMatrix& mass, const SparseMatrix& stiffness, std::span<const double> w,
                         int blocks) {
  const std::size_t n = w.size() / blocks;
  if (n * blocks != w.size()) throw std::invalid_argument("field size is not a multiple of the block count");
  double sum = 0.0;
  for (int b = 0; b < blocks; ++b) {
    const std::span<const double> block = w.subspan(b * n, n);
    sum += mass.quadratic_form(block, block) + std::max(0.0, stiffness.quadratic_form(block, block));
  }
  return std::sqrt(sum);
}

SphereErrors sphere_errors(const SurfaceMesh& mesh, const NodalState& state, double r0) {
  const NodalState exact = exact_sphere_state(mesh, r0, state.t);
  const SparseMatrix mass = assemble_mass(mesh, exact.x);
  const SparseMatrix stiffness = assemble_stiffness(mesh, exact.x, 0, mass.pattern_ptr());
  auto diff = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
  };
  SphereErrors e;
  e.x = block_energy_norm(mass, stiffness, diff(state.x, exact.x), 3);
  e.v = block_energy_norm(mass, stiffness, diff(state.v, exact.v), 3);
  e.nu = block_energy_norm(mass, stiffness, diff(state.nu, exact.nu), 3);
  e.h = energy_norm(mass, stiffness, diff(state.h, exact.h));
  return e;
}

SphereErrorEvaluator::SphereErrorEvaluator(const SurfaceMesh& mesh, double r0)
    : mesh_(&mesh),
      r0_(r0),
      mass_(assemble_mass(mesh, mesh.reference_positions())),
      stiffness_(assemble_stiffness(mesh, mesh.reference_positions(), 0, mass_.pattern_ptr())) {}

SphereErrors SphereErrorEvaluator::operator()(const NodalState& state) const {
  const NodalState exact = exact_sphere_state(*mesh_, r0_, state.t);
  const double scale = sphere_radius(r0_, state.t) / r0_;
  const double mass_factor = scale * scale;
  const std::size_t n = static_cast<std::size_t>(mesh_->num_nodes());
  std::vector<double> d(n);
  auto energy_sq = [&](const std::vector<double>& a, const std::vector<double>& b, int block) {
    for (std::size_t i = 0; i < n; ++i) d[i] = a[block * n + i] - b[block * n + i];
    return mass_factor * mass_.quadratic_form(d, d) + std::max(0.0, stiffness_.quadratic_form(d, d));
  };
  SphereErrors e;
  for (int c = 0; c < 3; ++c) {
    e.x += energy_sq(state.x, exact.x, c);
    e.v += energy_sq(state.v, exact.v, c);
    e.nu += energy_sq(state.nu, exact.nu, c);
  }
  e.h = energy_sq(state.h, exact.h, 0);
  e.x = std::sqrt(e.x);
  e.v = std::sqrt(e.v);
  e.nu = std::sqrt(e.nu);
  e.h = std::sqrt(e.h);
  return e;
}

void max_errors(SphereErrors& accumulated, const SphereErrors& step) {
  accumulated.x = std::max(accumulated.x, step.x);
  accumulated.v = std::max(accumulated.v, step.v);
  accumulated.nu = std::max(accumulated.nu, step.nu);
  accumulated.h = std::max(accumulated.h, step.h);
}

int thread_budget() {
  const char* env = std::getenv("MCF_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || v < 1) return 1;
  return static_cast<int>(std::min(v, 64L));
}

namespace {

void parallel_for(int count, const std::function<void(int)>& body) {
  const int workers = std::min(thread_budget(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

FlowConfig study_flow_config(const SphereStudyConfig& config, double tau) {
  FlowConfig fc;
  fc.scheme = config.scheme;
  fc.bdf_order = config.bdf_order;
  fc.tau = tau;
  fc.end_time = config.end_time;
  fc.alpha = config.alpha;
  fc.cg = config.cg;
  fc.quadrature_degree = config.quadrature_degree;
  return fc;
}

void fill_eoc(ConvergenceTable& table) {
  table.eoc.clear();
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const ConvergenceRow& a = table.rows[i - 1];
    const ConvergenceRow& b = table.rows[i];
    const double ratio = table.rate_in_tau ? a.tau / b.tau : a.width / b.width;
    const double denom = std::log(ratio);
    auto rate = [&](double ea, double eb) { return std::log(ea / eb) / denom; };
    SphereErrors r;
    r.x = rate(a.error.x, b.error.x);
    r.v = rate(a.error.v, b.error.v);
    r.nu = rate(a.error.nu, b.error.nu);
    r.h = rate(a.error.h, b.error.h);
    table.eoc.push_back(r);
  }
}

}  // namespace

ConvergenceTable temporal_convergence(const SphereStudyConfig& config, double tau0, int levels, int subdivision) {
  if (levels < 1) throw std::invalid_argument("need at least one level");
  const SurfaceMesh mesh = build_sphere_mesh(subdivision, config.fe_order, config.radius);
  const NodalState initial = exact_sphere_state(mesh, config.radius, 0.0);
  const double width = mesh_width(mesh, initial.x);

  const SphereErrorEvaluator evaluate(mesh, config.radius);

  ConvergenceTable table;
  table.rate_in_tau = true;
  table.rows.resize(levels);
  parallel_for(levels, [&](int i) {
    const double tau = tau0 / static_cast<double>(1 << i);
    SphereErrors worst;
    const FlowResult result = run_flow(mesh, study_flow_config(config, tau), initial,
                                       [&](const NodalState& s) { max_errors(worst, evaluate(s)); });
    ConvergenceRow row;
    row.tau = tau;
    row.width = width;
    row.nodes = mesh.num_nodes();
    row.stop = result.stop;
    row.error = worst;
    table.rows[i] = row;
  });
  fill_eoc(table);
  return table;
}

ConvergenceTable spatial_convergence(const SphereStudyConfig& config, double tau, std::span<const int> subdivisions) {
  if (subdivisions.empty()) throw std::invalid_argument("need at least one subdivision level");
  ConvergenceTable table;
  table.rate_in_tau = false;
  table.rows.resize(subdivisions.size());
  parallel_for(static_cast<int>(subdivisions.size()), [&](int i) {
    const SurfaceMesh mesh = build_sphere_mesh(subdivisions[i], config.fe_order, config.radius);
    const NodalState initial = exact_sphere_state(mesh, config.radius, 0.0);
    const SphereErrorEvaluator evaluate(mesh, config.radius);
    SphereErrors worst;
    const FlowResult result = run_flow(mesh, study_flow_config(config, tau), initial,
                                       [&](const NodalState& s) { max_errors(worst, evaluate(s)); });
    ConvergenceRow row;
    row.tau = tau;
    row.width = mesh_width(mesh, initial.x);
    row.nodes = mesh.num_nodes();
    row.stop = result.stop;
    row.error = worst;
    table.rows[i] = row;
  });
  fill_eoc(table);
  return table;
}

double neck_radius(const SurfaceMesh& mesh, std::span<const double> x, double band) {
  const int n = mesh.num_nodes();
  if (band <= 0) band = mesh_width(mesh, x);
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const Vec3 p = node_vec(x, n, j);
    if (std::abs(p[2]) < band) best = std::min(best, std::hypot(p[0], p[1]));
  }
  return best;
}

}  // namespace mcf
