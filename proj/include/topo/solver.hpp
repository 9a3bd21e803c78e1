#pragma once

#include <optional>
#include <string>
#include <vector>

#include "topo/assignment.hpp"
#include "topo/persistence.hpp"

namespace topo {

// Key identifying one diagram point across runs and files.
struct PairKey {
  int dim = 0;
  Index birth_vertex = -1, death_vertex = -1;
  bool finite = true;
  friend bool operator<(const PairKey& a, const PairKey& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    if (a.birth_vertex != b.birth_vertex) return a.birth_vertex < b.birth_vertex;
    if (a.death_vertex != b.death_vertex) return a.death_vertex < b.death_vertex;
    return a.finite < b.finite;
  }
  friend bool operator==(const PairKey& a, const PairKey& b) {
    return a.dim == b.dim && a.birth_vertex == b.birth_vertex &&
           a.death_vertex == b.death_vertex && a.finite == b.finite;
  }
};

inline PairKey key_of_pair(const PersistencePair& p) {
  return PairKey{p.dim, p.birth_vertex, p.death_vertex, p.finite};
}

// Classification of diagram points into signal (preserved) and non-signal
// (cancelled) pairs. Infinite generators are always signal.
struct TargetSpec {
  enum class Mode { PersistenceThreshold, RemoveDimensionPairs, KeepInfiniteOnly, ExplicitList };
  Mode mode = Mode::PersistenceThreshold;
  double threshold_fraction = 0.01;  // of the input field range
  int remove_dim = 1;
  std::vector<PairKey> keep_keys;

  static TargetSpec persistence_threshold(double fraction) {
    TargetSpec s;
    s.mode = Mode::PersistenceThreshold;
    s.threshold_fraction = fraction;
    return s;
  }
  static TargetSpec remove_dimension_pairs(int dim) {
    TargetSpec s;
    s.mode = Mode::RemoveDimensionPairs;
    s.remove_dim = dim;
    return s;
  }
  static TargetSpec keep_infinite_only() {
    TargetSpec s;
    s.mode = Mode::KeepInfiniteOnly;
    return s;
  }
  static TargetSpec explicit_list(std::vector<PairKey> keys) {
    TargetSpec s;
    s.mode = Mode::ExplicitList;
    s.keep_keys = std::move(keys);
    return s;
  }
};

enum class Method { Baseline, Accelerated };
enum class Optimizer { Direct, Adam };

struct AdamParams {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct SolverConfig {
  Method method = Method::Accelerated;
  double alpha_b = 0.5, alpha_d = 0.5;
  double stop_fraction = 0.01;
  Index max_iterations = 1000;
  Optimizer optimizer = Optimizer::Direct;
  AdamParams adam;
};

struct PhaseTimes {
  double gradient_ms = 0, diagram_ms = 0, assignment_ms = 0, step_ms = 0;
};

struct IterationRecord {
  double loss = 0;
  double still_pair_fraction = 0;
  double non_still_signal_pair_fraction = 0;
  double updated_vertex_fraction = 0;
  PhaseTimes times;
};

struct DisplacementStats {
  double min = 0, avg = 0, max = 0;
};

struct SolverReport {
  std::string method, optimizer;
  double alpha_b = 0, alpha_d = 0, stop_fraction = 0;
  Index max_iterations = 0;
  double loss0 = 0, loss_final = 0;
  Index iterations = 0;
  bool max_iterations_reached = false;
  double l2 = 0, linf = 0;
  DisplacementStats signal_displacement;
  std::vector<IterationRecord> records;  // record 0 describes the input state
};

struct SolverResult {
  ScalarField field;
  SolverReport report;
  PersistenceDiagram diagram;  // diagram of the output field
  PersistenceDiagram target;
};

// Target diagram: the signal pairs of D. Throws StructuralError when the
// spec would remove an infinite generator or references unknown pairs.
PersistenceDiagram build_target(const PersistenceDiagram& d, const TargetSpec& spec,
                                double field_range);

// Simplification energy: squared Wasserstein-2 distance to the target,
// with the optimal assignment for the descent step.
std::pair<double, Assignment> loss(const PersistenceDiagram& d,
                                   const PersistenceDiagram& target);
std::pair<double, Assignment> loss(const PersistenceDiagram& d,
                                   const PersistenceDiagram& target, const Assignment& prev,
                                   const PersistenceDiagram& previous);

// One direct descent step: each diagram point moves toward its assigned
// target; contributions of pairs sharing a vertex sum; infinite pairs
// contribute only a birth term. Returns the new field and the set of
// vertices whose value changed.
std::pair<ScalarField, UpdatedVertexSet> gradient_step(const ScalarField& field,
                                                       const PersistenceDiagram& d,
                                                       const PersistenceDiagram& target,
                                                       const Assignment& assignment,
                                                       double alpha_b, double alpha_d);

// Dense loss gradient at fixed assignment (birth + death terms).
Vec loss_gradient(const ScalarField& field, const PersistenceDiagram& d,
                  const PersistenceDiagram& target, const Assignment& assignment);

struct AdamState {
  Vec m, v;
  Index t = 0;
  AdamParams params;
};

ScalarField adam_step(const ScalarField& field, const Vec& gradient, AdamState& state);

// The optimization loop. Baseline recomputes diagram and assignment from
// scratch each iteration; accelerated uses the localized diagram update
// and the still-pair assignment update. Identical stopping rule.
SolverResult simplify(const ScalarField& field, const TargetSpec& spec,
                      const SolverConfig& config);

// Birth-death displacement of each target point under the optimal
// assignment from the target to the output diagram.
DisplacementStats signal_displacement_stats(const PersistenceDiagram& target,
                                            const PersistenceDiagram& output);

struct FieldDistances {
  double l2 = 0, linf = 0;
};
FieldDistances field_distances(const ScalarField& f, const ScalarField& g);

}  // namespace topo
