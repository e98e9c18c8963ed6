#include "mcf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mcf {

namespace {

long long binomial(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_state(const NodalState& state, int num_nodes) {
  const std::size_t n3 = 3 * static_cast<std::size_t>(num_nodes);
  if (state.x.size() != n3 || state.v.size() != n3 || state.nu.size() != n3 ||
      state.h.size() != static_cast<std::size_t>(num_nodes))
    throw std::invalid_argument("nodal state size mismatch");
}

bool state_finite(const NodalState& state) {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(state.x) && ok(state.v) && ok(state.nu) && ok(state.h);
}

}  // namespace

BdfScheme bdf_coefficients(int order) {
  if (order < 1 || order > 5) throw std::invalid_argument("bdf order must be in 1..5");
  BdfScheme s;
  s.order = order;
  long long den = 1;
  for (int l = 1; l <= order; ++l) den = std::lcm(den, static_cast<long long>(l));
  s.delta_denominator = den;
  s.delta_numerators.assign(order + 1, 0);
  for (int l = 1; l <= order; ++l) {
    for (int j = 0; j <= l; ++j) {
      const long long sign = (j % 2 == 0) ? 1 : -1;
      s.delta_numerators[j] += den / l * binomial(l, j) * sign;
    }
  }
  s.delta.resize(order + 1);
  for (int j = 0; j <= order; ++j) s.delta[j] = static_cast<double>(s.delta_numerators[j]) / static_cast<double>(den);
  s.gamma.resize(order);
  for (int j = 0; j < order; ++j) {
    const long long sign = (j % 2 == 0) ? 1 : -1;
    s.gamma[j] = static_cast<double>(sign * binomial(order, j + 1));
  }
  return s;
}

NodalState make_nodal_state(double t, int num_nodes) {
  NodalState s;
  s.t = t;
  s.x.assign(3 * static_cast<std::size_t>(num_nodes), 0.0);
  s.v.assign(3 * static_cast<std::size_t>(num_nodes), 0.0);
  s.nu.assign(3 * static_cast<std::size_t>(num_nodes), 0.0);
  s.h.assign(num_nodes, 0.0);
  return s;
}

FlowHistory::FlowHistory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("history capacity must be positive");
}

void FlowHistory::push(NodalState state) {
  if (!states_.empty()) {
    const double dt = state.t - states_.back().t;
    if (!(dt > 0)) throw std::invalid_argument("history times must increase");
    if (states_.size() >= 2) {
      const double tau = spacing();
      if (std::abs(dt - tau) > 1e-9 * std::max(1.0, std::abs(tau)))
        throw std::invalid_argument("history spacing must stay uniform");
    }
    if (state.x.size() != states_.back().x.size()) throw std::invalid_argument("history state size changed");
  }
  states_.push_back(std::move(state));
  if (states_.size() > capacity_) states_.pop_front();
}

const NodalState& FlowHistory::newest(std::size_t back) const {
  if (back >= states_.size()) throw std::out_of_range("not enough history");
  return states_[states_.size() - 1 - back];
}

double FlowHistory::spacing() const {
  if (states_.size() < 2) throw std::logic_error("history spacing needs two states");
  return states_[1].t - states_[0].t;
}

ExtrapolatedState extrapolate(const FlowHistory& history, const BdfScheme& scheme) {
  const int q = scheme.order;
  if (history.size() < static_cast<std::size_t>(q)) throw std::invalid_argument("history too short to extrapolate");
  const std::size_t n3 = history.newest().x.size();
  const std::size_t n = n3 / 3;
  ExtrapolatedState ex;
  ex.x.assign(n3, 0.0);
  ex.nu.assign(n3, 0.0);
  ex.h.assign(n, 0.0);
  for (int j = 0; j < q; ++j) {
    const NodalState& s = history.newest(j);
    const double c = scheme.gamma[j];
    for (std::size_t i = 0; i < n3; ++i) {
      ex.x[i] += c * s.x[i];
      ex.nu[i] += c * s.nu[i];
    }
    for (std::size_t i = 0; i < n; ++i) ex.h[i] += c * s.h[i];
  }
  return ex;
}

namespace {

// sum_{j=1..q} delta_j * field(n-j), per scalar component block
std::vector<double> history_combination(const FlowHistory& history, const BdfScheme& scheme,
                                        std::vector<double> NodalState::* field) {
  const std::size_t size = (history.newest().*field).size();
  std::vector<double> acc(size, 0.0);
  for (int j = 1; j <= scheme.order; ++j) {
    const NodalState& s = history.newest(j - 1);
    const double c = scheme.delta[j];
    const auto& data = s.*field;
    for (std::size_t i = 0; i < size; ++i) acc[i] += c * data[i];
  }
  return acc;
}

void check_step_inputs(const SurfaceMesh& mesh, const FlowHistory& history, const BdfScheme& scheme, double tau) {
  if (tau <= 0) throw std::invalid_argument("step size must be positive");
  if (history.size() < static_cast<std::size_t>(scheme.order))
    throw std::invalid_argument("history holds fewer states than the BDF order needs");
  check_state(history.newest(), mesh.num_nodes());
  if (history.size() >= 2) {
    const double dt = history.spacing();
    if (std::abs(dt - tau) > 1e-9 * std::max(1.0, tau))
      throw std::invalid_argument("history spacing disagrees with the step size");
  }
}

}  // namespace

NodalState esfem_step(const SurfaceMesh& mesh, const FlowHistory& history, const BdfScheme& scheme, double tau,
                      const StepOptions& options, StepStats* stats) {
  check_step_inputs(mesh, history, scheme, tau);
  const int n = mesh.num_nodes();
  const ExtrapolatedState ex = extrapolate(history, scheme);

  auto pattern = options.pattern ? options.pattern : std::make_shared<const SparsityPattern>(mesh);
  const SparseMatrix mass = assemble_mass(mesh, ex.x, options.quadrature_degree, pattern);
  const SparseMatrix stiffness = assemble_stiffness(mesh, ex.x, options.quadrature_degree, pattern);

  NodalState next = make_nodal_state(history.newest().t + tau, n);

  // velocity law: (M + A) v = g blockwise
  {
    const SparseMatrix k = SparseMatrix::combined(1.0, mass, 1.0, stiffness);
    std::vector<double> g;
    if (options.zero_forcing) {
      g.assign(3 * static_cast<std::size_t>(n), 0.0);
    } else {
      g = assemble_g(mesh, ex.x, ex.nu, ex.h, options.quadrature_degree);
    }
    for (int c = 0; c < 3; ++c) {
      CgResult r = cg_solve(k, std::span<const double>(g.data() + c * n, n), options.cg);
      if (stats) stats->cg_iterations_velocity += r.iterations;
      std::copy(r.solution.begin(), r.solution.end(), next.v.begin() + c * n);
    }
  }

  // normal and curvature: (delta_0/tau M + A) u = f - (1/tau) M sum delta_j u
  {
    const SparseMatrix shifted = SparseMatrix::combined(scheme.delta[0] / tau, mass, 1.0, stiffness);
    ForcingVectors f;
    if (options.zero_forcing) {
      f.f1.assign(3 * static_cast<std::size_t>(n), 0.0);
      f.f2.assign(n, 0.0);
    } else {
      f = assemble_f(mesh, ex.x, ex.nu, ex.h, options.quadrature_degree);
    }
    if (options.alpha != 0.0) {
      const std::vector<double> s = stabilization_term(mesh, ex.x, ex.nu, options.alpha, options.quadrature_degree);
      for (std::size_t i = 0; i < f.f1.size(); ++i) f.f1[i] += s[i];
    }
    const std::vector<double> nu_tail = history_combination(history, scheme, &NodalState::nu);
    const std::vector<double> h_tail = history_combination(history, scheme, &NodalState::h);
    std::vector<double> ms(n), rhs(n);
    for (int c = 0; c < 3; ++c) {
      mass.multiply(std::span<const double>(nu_tail.data() + c * n, n), ms);
      for (int i = 0; i < n; ++i) rhs[i] = f.f1[c * n + i] - ms[i] / tau;
      CgResult r = cg_solve(shifted, rhs, options.cg);
      if (stats) stats->cg_iterations_u += r.iterations;
      std::copy(r.solution.begin(), r.solution.end(), next.nu.begin() + c * n);
    }
    mass.multiply(h_tail, ms);
    for (int i = 0; i < n; ++i) rhs[i] = f.f2[i] - ms[i] / tau;
    CgResult r = cg_solve(shifted, rhs, options.cg);
    if (stats) stats->cg_iterations_u += r.iterations;
    next.h = std::move(r.solution);
  }

  // backward difference for the positions
  const std::vector<double> x_tail = history_combination(history, scheme, &NodalState::x);
  for (std::size_t i = 0; i < next.x.size(); ++i)
    next.x[i] = (tau * next.v[i] - x_tail[i]) / scheme.delta[0];
  return next;
}

NodalState dziuk_step(const SurfaceMesh& mesh, const FlowHistory& history, const BdfScheme& scheme, double tau,
                      const StepOptions& options, StepStats* stats) {
  check_step_inputs(mesh, history, scheme, tau);
  const int n = mesh.num_nodes();
  const ExtrapolatedState ex = extrapolate(history, scheme);

  auto pattern = options.pattern ? options.pattern : std::make_shared<const SparsityPattern>(mesh);
  const SparseMatrix mass = assemble_mass(mesh, ex.x, options.quadrature_degree, pattern);
  const SparseMatrix stiffness = assemble_stiffness(mesh, ex.x, options.quadrature_degree, pattern);
  const SparseMatrix shifted = SparseMatrix::combined(scheme.delta[0] / tau, mass, 1.0, stiffness);

  NodalState next = make_nodal_state(history.newest().t + tau, n);
  const std::vector<double> x_tail = history_combination(history, scheme, &NodalState::x);
  std::vector<double> ms(n), rhs(n);
  for (int c = 0; c < 3; ++c) {
    mass.multiply(std::span<const double>(x_tail.data() + c * n, n), ms);
    for (int i = 0; i < n; ++i) rhs[i] = -ms[i] / tau;
    CgResult r = cg_solve(shifted, rhs, options.cg);
    if (stats) stats->cg_iterations_velocity += r.iterations;
    std::copy(r.solution.begin(), r.solution.end(), next.x.begin() + c * n);
  }
  for (std::size_t i = 0; i < next.x.size(); ++i)
    next.v[i] = (scheme.delta[0] * next.x[i] + x_tail[i]) / tau;
  next.nu = nodal_element_normals(mesh, next.x);
  next.h = lumped_mean_curvature(mesh, next.x, next.nu);
  return next;
}

NodalState normalize_normals(NodalState state, int num_nodes) {
  check_state(state, num_nodes);
  for (int j = 0; j < num_nodes; ++j) {
    const Vec3 v = node_vec(state.nu, num_nodes, j);
    const double len = norm(v);
    if (len < 1e-13)
      throw std::runtime_error("cannot normalize zero-norm normal at node " + std::to_string(j));
    set_node_vec(state.nu, num_nodes, j, (1.0 / len) * v);
  }
  return state;
}

namespace {

NodalState advance(const SurfaceMesh& mesh, const FlowHistory& history, const BdfScheme& scheme, double tau,
                   SchemeKind kind, const StepOptions& options) {
  NodalState s = kind == SchemeKind::dziuk ? dziuk_step(mesh, history, scheme, tau, options)
                                           : esfem_step(mesh, history, scheme, tau, options);
  if (kind == SchemeKind::esfem_normalized) s = normalize_normals(std::move(s), mesh.num_nodes());
  return s;
}

}  // namespace

std::vector<NodalState> bootstrap_start(const SurfaceMesh& mesh, const NodalState& initial,
                                        const BdfScheme& scheme, double tau, SchemeKind kind,
                                        const StepOptions& options) {
  if (tau <= 0) throw std::invalid_argument("step size must be positive");
  check_state(initial, mesh.num_nodes());
  const int q = scheme.order;
  if (q == 1) return {initial};
  if (q == 2) {
    FlowHistory history(1);
    history.push(initial);
    return {initial, advance(mesh, history, bdf_coefficients(1), tau, kind, options)};
  }
  const int m = std::max(1, static_cast<int>(std::ceil(std::pow(tau, -0.5 * (q - 2)) - 1e-9)));
  const double sigma = tau / m;
  FlowHistory fine(q);
  fine.push(initial);
  std::vector<NodalState> coarse = {initial};
  const int total = (q - 1) * m;
  for (int k = 1; k <= total; ++k) {
    const int order = std::min(static_cast<int>(fine.size()), q - 1);
    NodalState s = advance(mesh, fine, bdf_coefficients(order), sigma, kind, options);
    if (k % m == 0) coarse.push_back(s);
    fine.push(std::move(s));
  }
  return coarse;
}

StepDiagnostics compute_step_diagnostics(const SurfaceMesh& mesh, const NodalState& state) {
  const int n = mesh.num_nodes();
  check_state(state, n);
  StepDiagnostics d;
  d.t = state.t;
  d.area = surface_area(mesh, state.x);
  d.h = mesh_width(mesh, state.x);
  d.min_area_element = min_area_element(mesh, state.x);
  d.min_nu_norm = std::numeric_limits<double>::infinity();
  d.max_nu_norm = 0.0;
  for (int j = 0; j < n; ++j) {
    const double len = norm(node_vec(state.nu, n, j));
    d.min_nu_norm = std::min(d.min_nu_norm, len);
    d.max_nu_norm = std::max(d.max_nu_norm, len);
  }
  d.max_h = *std::max_element(state.h.begin(), state.h.end());
  return d;
}

FlowResult run_flow(const SurfaceMesh& mesh, const FlowConfig& config, const NodalState& initial,
                    const StateObserver& observer) {
  if (config.tau <= 0) throw std::invalid_argument("tau must be positive");
  const BdfScheme scheme = bdf_coefficients(config.bdf_order);
  if (config.end_time < config.bdf_order * config.tau - 1e-12)
    throw std::invalid_argument("end time too short: no steps beyond the starting values");
  check_state(initial, mesh.num_nodes());

  StepOptions options;
  options.alpha = config.alpha;
  options.quadrature_degree = config.quadrature_degree;
  options.cg = config.cg;
  options.pattern = std::make_shared<const SparsityPattern>(mesh);

  FlowResult result;
  result.final_state = initial;
  result.stop = StopReason::reached_end;

  long long accepted = 0;
  double prev_area = 0.0;
  // Appends the state unless the area monotonicity guard rejects it; a
  // rejected state is discarded and the previous one stays final.
  auto record = [&](const NodalState& state) {
    StepDiagnostics diag = compute_step_diagnostics(mesh, state);
    if (config.halt_on_area_growth && accepted > 0 && diag.area > prev_area) {
      result.stop = StopReason::area_growth;
      return false;
    }
    prev_area = diag.area;
    result.diagnostics.push_back(diag);
    if (observer) observer(state);
    if (accepted == 0 || (config.snapshot_every > 0 && accepted % config.snapshot_every == 0))
      result.snapshots.push_back(state);
    ++accepted;
    result.final_state = state;
    return true;
  };

  FlowHistory history(scheme.order);
  bool halted = false;
  try {
    const std::vector<NodalState> start = bootstrap_start(mesh, initial, scheme, config.tau, config.scheme, options);
    for (const NodalState& s : start) {
      if (!record(s)) {
        halted = true;
        break;
      }
      history.push(s);
    }
  } catch (const MeshDegeneration&) {
    result.stop = StopReason::degenerate_geometry;
    halted = true;
  } catch (const CgFailure&) {
    result.stop = StopReason::cg_failure;
    halted = true;
  } catch (const std::runtime_error&) {
    result.stop = StopReason::normal_collapse;
    halted = true;
  }

  const long long num_steps = static_cast<long long>(std::floor(config.end_time / config.tau + 1e-9));
  for (long long step = scheme.order; !halted && step <= num_steps; ++step) {
    NodalState next;
    try {
      next = advance(mesh, history, scheme, config.tau, config.scheme, options);
    } catch (const MeshDegeneration&) {
      result.stop = StopReason::degenerate_geometry;
      break;
    } catch (const CgFailure&) {
      result.stop = StopReason::cg_failure;
      break;
    } catch (const std::runtime_error&) {
      result.stop = StopReason::normal_collapse;
      break;
    }
    if (!state_finite(next)) {
      result.stop = StopReason::nonfinite_state;
      break;
    }
    try {
      if (!record(next)) break;
    } catch (const MeshDegeneration&) {
      result.final_state = next;
      result.stop = StopReason::degenerate_geometry;
      break;
    }
    history.push(std::move(next));
    const StepDiagnostics& d = result.diagnostics.back();
    if (d.min_area_element < config.min_area_element) {
      result.stop = StopReason::degenerate_geometry;
      break;
    }
    if (d.max_nu_norm > config.max_normal_norm) {
      result.stop = StopReason::normal_blowup;
      break;
    }
  }

  result.stop_time = result.final_state.t;
  if (result.snapshots.empty() || result.snapshots.back().t != result.final_state.t)
    result.snapshots.push_back(result.final_state);
  return result;
}

}  // namespace mcf
