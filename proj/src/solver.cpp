#include "topo/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace topo {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool is_signal(const PersistencePair& p, const TargetSpec& spec, double field_range,
               const std::set<PairKey>* keep) {
  if (!p.finite) return true;
  switch (spec.mode) {
    case TargetSpec::Mode::PersistenceThreshold:
      return p.persistence() >= spec.threshold_fraction * field_range;
    case TargetSpec::Mode::RemoveDimensionPairs:
      return p.dim != spec.remove_dim;
    case TargetSpec::Mode::KeepInfiniteOnly:
      return false;
    case TargetSpec::Mode::ExplicitList:
      return keep->count(key_of_pair(p)) > 0;
  }
  return true;
}

}  // namespace

PersistenceDiagram build_target(const PersistenceDiagram& d, const TargetSpec& spec,
                                double field_range) {
  std::set<PairKey> keep(spec.keep_keys.begin(), spec.keep_keys.end());
  if (spec.mode == TargetSpec::Mode::ExplicitList) {
    std::set<PairKey> present;
    for (const auto& p : d.pairs) present.insert(key_of_pair(p));
    for (const auto& k : keep) {
      if (!present.count(k)) {
        throw StructuralError("target references a pair absent from the diagram");
      }
    }
    for (const auto& p : d.pairs) {
      if (!p.finite && !keep.count(key_of_pair(p))) {
        throw StructuralError("target must retain every infinite generator");
      }
    }
  }
  PersistenceDiagram out;
  for (const auto& p : d.pairs) {
    if (is_signal(p, spec, field_range, &keep)) out.pairs.push_back(p);
  }
  return out;
}

std::pair<double, Assignment> loss(const PersistenceDiagram& d,
                                   const PersistenceDiagram& target) {
  auto [dist, a] = wasserstein(d, target, 2.0);
  (void)dist;
  return {a.total_cost, a};
}

std::pair<double, Assignment> loss(const PersistenceDiagram& d,
                                   const PersistenceDiagram& target, const Assignment& prev,
                                   const PersistenceDiagram& previous) {
  return update_assignment(prev, d, previous, target, 2.0);
}

namespace {

// Target coordinates of one diagram point under the assignment: the
// matched target point, or the point's own diagonal projection.
std::pair<double, double> target_coords(const PersistencePair& p, const PairTarget& t,
                                        const PersistenceDiagram& target) {
  if (t.kind == TargetKind::Point) {
    return {target.pairs[t.index].birth, target.pairs[t.index].death};
  }
  const double m = diagonal_midpoint(p.birth, p.death);
  return {m, m};
}

}  // namespace

Vec loss_gradient(const ScalarField& field, const PersistenceDiagram& d,
                  const PersistenceDiagram& target, const Assignment& assignment) {
  Vec grad = Vec::Zero(field.values.size());
  for (std::size_t i = 0; i < d.pairs.size(); ++i) {
    const PersistencePair& p = d.pairs[i];
    const auto [tb, td] = target_coords(p, assignment.target_of[i], target);
    grad[p.birth_vertex] += 2.0 * (field.values[p.birth_vertex] - tb);
    if (p.finite) {
      grad[p.death_vertex] += 2.0 * (field.values[p.death_vertex] - td);
    }
  }
  return grad;
}

std::pair<ScalarField, UpdatedVertexSet> gradient_step(const ScalarField& field,
                                                       const PersistenceDiagram& d,
                                                       const PersistenceDiagram& target,
                                                       const Assignment& assignment,
                                                       double alpha_b, double alpha_d) {
  Vec delta = Vec::Zero(field.values.size());
  for (std::size_t i = 0; i < d.pairs.size(); ++i) {
    const PersistencePair& p = d.pairs[i];
    const auto [tb, td] = target_coords(p, assignment.target_of[i], target);
    delta[p.birth_vertex] += alpha_b * 2.0 * (field.values[p.birth_vertex] - tb);
    if (p.finite) {
      delta[p.death_vertex] += alpha_d * 2.0 * (field.values[p.death_vertex] - td);
    }
  }
  ScalarField out{field.dims, field.values - delta};
  UpdatedVertexSet updated;
  for (Index v = 0; v < delta.size(); ++v) {
    if (out.values[v] != field.values[v]) updated.push_back(v);
  }
  return {std::move(out), std::move(updated)};
}

ScalarField adam_step(const ScalarField& field, const Vec& gradient, AdamState& state) {
  const Index n = field.values.size();
  if (state.m.size() != n) {
    state.m = Vec::Zero(n);
    state.v = Vec::Zero(n);
    state.t = 0;
  }
  const AdamParams& ap = state.params;
  ++state.t;
  state.m = ap.beta1 * state.m + (1.0 - ap.beta1) * gradient;
  state.v = ap.beta2 * state.v + (1.0 - ap.beta2) * gradient.cwiseProduct(gradient);
  const double bc1 = 1.0 - std::pow(ap.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(ap.beta2, double(state.t));
  const Vec mhat = state.m / bc1;
  const Vec vhat = state.v / bc2;
  const Vec denom = vhat.array().sqrt().matrix() + Vec::Constant(n, ap.eps);
  return ScalarField{field.dims, field.values - ap.lr * mhat.cwiseQuotient(denom)};
}

DisplacementStats signal_displacement_stats(const PersistenceDiagram& target,
                                            const PersistenceDiagram& output) {
  DisplacementStats stats;
  if (target.pairs.empty()) return stats;
  auto [dist, a] = wasserstein(target, output, 2.0);
  (void)dist;
  double lo = std::numeric_limits<double>::infinity(), hi = 0, sum = 0;
  for (std::size_t i = 0; i < target.pairs.size(); ++i) {
    const PersistencePair& p = target.pairs[i];
    double displacement;
    if (a.target_of[i].kind == TargetKind::Point) {
      const PersistencePair& o = output.pairs[a.target_of[i].index];
      displacement = std::hypot(p.birth - o.birth, p.death - o.death);
    } else {
      const double m = diagonal_midpoint(p.birth, p.death);
      displacement = std::hypot(p.birth - m, p.death - m);
    }
    lo = std::min(lo, displacement);
    hi = std::max(hi, displacement);
    sum += displacement;
  }
  stats.min = lo;
  stats.max = hi;
  stats.avg = sum / double(target.pairs.size());
  return stats;
}

FieldDistances field_distances(const ScalarField& f, const ScalarField& g) {
  if (!(f.dims == g.dims)) throw StructuralError("fields have different grids");
  const Vec diff = f.values - g.values;
  return FieldDistances{diff.norm(), diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0};
}

SolverResult simplify(const ScalarField& field, const TargetSpec& spec,
                      const SolverConfig& config) {
  validate_field(field);
  if (config.optimizer == Optimizer::Direct && config.alpha_b + config.alpha_d <= 0) {
    throw InputError("direct descent requires alpha_b + alpha_d > 0");
  }
  const GridComplex K(field.dims);
  const double range = field.values.size()
                           ? field.values.maxCoeff() - field.values.minCoeff()
                           : 0.0;

  SolverResult result;
  SolverReport& report = result.report;
  report.method = config.method == Method::Baseline ? "baseline" : "accelerated";
  report.optimizer = config.optimizer == Optimizer::Direct ? "direct" : "adam";
  report.alpha_b = config.alpha_b;
  report.alpha_d = config.alpha_d;
  report.stop_fraction = config.stop_fraction;
  report.max_iterations = config.max_iterations;

  auto t0 = Clock::now();
  VertexOrder order = build_vertex_order(field);
  DiscreteGradient gradient = build_gradient(K, field, order);
  const double grad0_ms = ms_since(t0);
  t0 = Clock::now();
  PersistenceDiagram diagram = pair_critical_cells(K, field, order, gradient);
  const double diag0_ms = ms_since(t0);

  result.target = build_target(diagram, spec, range);

  t0 = Clock::now();
  auto [loss_value, assignment] = loss(diagram, result.target);
  IterationRecord rec0;
  rec0.loss = loss_value;
  rec0.times.gradient_ms = grad0_ms;
  rec0.times.diagram_ms = diag0_ms;
  rec0.times.assignment_ms = ms_since(t0);
  report.records.push_back(rec0);
  report.loss0 = loss_value;

  ScalarField current = field;
  AdamState adam;
  adam.params = config.adam;
  Index j = 0;
  const double stop_at = config.stop_fraction * report.loss0;

  while (report.records.back().loss > stop_at && j < config.max_iterations) {
    ++j;
    IterationRecord rec;

    t0 = Clock::now();
    ScalarField next;
    UpdatedVertexSet updated;
    if (config.optimizer == Optimizer::Direct) {
      std::tie(next, updated) =
          gradient_step(current, diagram, result.target, assignment, config.alpha_b,
                        config.alpha_d);
    } else {
      const Vec g = loss_gradient(current, diagram, result.target, assignment);
      next = adam_step(current, g, adam);
      for (Index v = 0; v < next.values.size(); ++v) {
        if (next.values[v] != current.values[v]) updated.push_back(v);
      }
    }
    rec.times.step_ms = ms_since(t0);
    rec.updated_vertex_fraction =
        double(updated.size()) / double(std::max<Index>(1, K.vertex_count()));

    PersistenceDiagram previous = std::move(diagram);
    if (config.method == Method::Accelerated) {
      t0 = Clock::now();
      VertexOrder new_order = build_vertex_order(next);
      DiscreteGradient new_gradient = update_gradient(K, gradient, next, new_order, updated);
      rec.times.gradient_ms = ms_since(t0);
      t0 = Clock::now();
      diagram = pair_critical_cells(K, next, new_order, new_gradient);
      rec.times.diagram_ms = ms_since(t0);
      order = std::move(new_order);
      gradient = std::move(new_gradient);

      t0 = Clock::now();
      auto [lv, a] = loss(diagram, result.target, assignment, previous);
      rec.times.assignment_ms = ms_since(t0);
      rec.loss = lv;
      assignment = std::move(a);
    } else {
      t0 = Clock::now();
      order = build_vertex_order(next);
      gradient = build_gradient(K, next, order);
      rec.times.gradient_ms = ms_since(t0);
      t0 = Clock::now();
      diagram = pair_critical_cells(K, next, order, gradient);
      rec.times.diagram_ms = ms_since(t0);
      t0 = Clock::now();
      auto [lv, a] = loss(diagram, result.target);
      rec.times.assignment_ms = ms_since(t0);
      rec.loss = lv;
      assignment = std::move(a);
    }
    current = std::move(next);

    const auto stills = still_pairs(diagram, previous);
    rec.still_pair_fraction =
        diagram.pairs.empty() ? 1.0 : double(stills.size()) / double(diagram.pairs.size());
    Index signal = 0, non_still_signal = 0;
    std::vector<char> still_flag(diagram.pairs.size(), 0);
    for (const auto& sp : stills) still_flag[sp.current] = 1;
    for (std::size_t i = 0; i < diagram.pairs.size(); ++i) {
      if (assignment.target_of[i].kind != TargetKind::Point) continue;
      ++signal;
      if (!still_flag[i]) ++non_still_signal;
    }
    rec.non_still_signal_pair_fraction =
        signal == 0 ? 0.0 : double(non_still_signal) / double(signal);
    report.records.push_back(rec);
  }

  report.iterations = j;
  report.loss_final = report.records.back().loss;
  report.max_iterations_reached = report.loss_final > stop_at;
  const FieldDistances fd = field_distances(field, current);
  report.l2 = fd.l2;
  report.linf = fd.linf;
  report.signal_displacement = signal_displacement_stats(result.target, diagram);

  result.field = std::move(current);
  result.diagram = std::move(diagram);
  return result;
}

}  // namespace topo
