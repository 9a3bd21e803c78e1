// topopt: persistence-driven simplification of scalar fields on regular
// grids. Subcommands: diagram, simplify, compare, filaments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "topo/io.hpp"
#include "topo/morse.hpp"
#include "topo/persistence.hpp"
#include "topo/solver.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsageError = 2;
constexpr int kGuardExceeded = 3;
constexpr int kStructuralMismatch = 4;

topo::ScalarField load_field(const std::string& path, bool normalize) {
  auto [field, info] = topo::read_field(path);
  (void)info;
  if (normalize) {
    const double lo = field.values.minCoeff();
    const double hi = field.values.maxCoeff();
    if (hi > lo) {
      field.values = (field.values.array() - lo) / (hi - lo);
    } else {
      field.values.setZero();
    }
  }
  return std::move(field);
}

int run_diagram(const std::string& input, const std::string& out, const std::string& method,
                bool normalize) {
  const topo::ScalarField field = load_field(input, normalize);
  const topo::GridComplex K(field.dims);
  topo::PersistenceDiagram diagram;
  if (method == "oracle") {
    diagram = topo::brute_force_diagram(K, field);
  } else {
    diagram = topo::compute_diagram(K, field).diagram;
  }
  topo::write_diagram_csv(out, diagram);
  return kOk;
}

struct SimplifyArgs {
  std::string input, out, report, diagram_out;
  std::optional<double> threshold;
  bool remove_saddle_pairs = false;
  bool keep_infinite_only = false;
  std::string target_file;
  std::string method = "accelerated";
  std::string optimizer = "direct";
  double alpha_b = 0.5, alpha_d = 0.5, stop = 0.01;
  topo::Index max_iter = 1000;
  double adam_lr = 1e-4;
  bool normalize = false;
};

int run_simplify(const SimplifyArgs& args) {
  int target_flags = 0;
  target_flags += args.threshold.has_value() ? 1 : 0;
  target_flags += args.remove_saddle_pairs ? 1 : 0;
  target_flags += args.keep_infinite_only ? 1 : 0;
  target_flags += args.target_file.empty() ? 0 : 1;
  if (target_flags != 1) {
    std::cerr << "simplify: exactly one of --threshold, --remove-saddle-pairs, "
                 "--keep-infinite-only, --target is required\n";
    return kUsageError;
  }

  const topo::ScalarField field = load_field(args.input, args.normalize);

  topo::TargetSpec spec;
  if (args.threshold) {
    spec = topo::TargetSpec::persistence_threshold(*args.threshold);
  } else if (args.remove_saddle_pairs) {
    spec = topo::TargetSpec::remove_dimension_pairs(1);
  } else if (args.keep_infinite_only) {
    spec = topo::TargetSpec::keep_infinite_only();
  } else {
    const topo::PersistenceDiagram target = topo::read_diagram_csv(args.target_file);
    std::vector<topo::PairKey> keys;
    keys.reserve(target.pairs.size());
    for (const auto& p : target.pairs) keys.push_back(topo::key_of_pair(p));
    spec = topo::TargetSpec::explicit_list(std::move(keys));
  }

  topo::SolverConfig config;
  config.method =
      args.method == "baseline" ? topo::Method::Baseline : topo::Method::Accelerated;
  config.optimizer = args.optimizer == "adam" ? topo::Optimizer::Adam : topo::Optimizer::Direct;
  config.alpha_b = args.alpha_b;
  config.alpha_d = args.alpha_d;
  config.stop_fraction = args.stop;
  config.max_iterations = args.max_iter;
  config.adam.lr = args.adam_lr;

  const topo::SolverResult result = topo::simplify(field, spec, config);
  if (!args.out.empty()) topo::write_field(args.out, result.field);
  if (!args.report.empty()) topo::write_report_json(args.report, result.report);
  if (!args.diagram_out.empty()) topo::write_diagram_csv(args.diagram_out, result.diagram);
  std::printf("loss %.6g -> %.6g in %lld iterations%s\n", result.report.loss0,
              result.report.loss_final, static_cast<long long>(result.report.iterations),
              result.report.max_iterations_reached ? " (iteration cap reached)" : "");
  return kOk;
}

int run_compare(const std::string& d1_path, const std::string& d2_path, double q, bool exact) {
  const topo::PersistenceDiagram d1 = topo::read_diagram_csv(d1_path);
  const topo::PersistenceDiagram d2 = topo::read_diagram_csv(d2_path);
  const auto [dist, assignment] =
      exact ? topo::exact_assignment(d1, d2, q) : topo::wasserstein(d1, d2, q);
  (void)assignment;
  std::printf("%.17g\n", dist);
  return kOk;
}

int run_filaments(const std::string& input, double min_value, bool simplify_saddles,
                  const std::string& out, const std::string& histogram_out, bool normalize) {
  const topo::ScalarField field = load_field(input, normalize);
  if (field.dims.rank != 3) {
    std::cerr << "filaments: a 3D field is required\n";
    return kUsageError;
  }
  const topo::GridComplex K(field.dims);
  topo::DiagramResult res = topo::compute_diagram(K, field);
  topo::SkipHistogram hist;
  if (simplify_saddles) {
    const double range = field.values.maxCoeff() - field.values.minCoeff();
    hist = topo::cancel_saddle_pairs(K, res.gradient, res.diagram.pairs, range);
  }
  const auto filaments = topo::extract_filaments(K, field, res.gradient, min_value);
  if (!out.empty()) topo::write_polylines_csv(out, filaments);
  if (!histogram_out.empty()) topo::write_histogram_json(histogram_out, hist);
  std::printf("%zu filaments\n", filaments.size());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology-aware simplification of scalar fields on regular grids"};
  app.require_subcommand(1);

  // diagram
  auto* diagram = app.add_subcommand("diagram", "compute the persistence diagram of a field");
  std::string diag_input, diag_out, diag_method = "dms";
  bool diag_normalize = false;
  diagram->add_option("input", diag_input, "field header (.json)")->required();
  diagram->add_option("--out", diag_out, "output diagram CSV")->required();
  diagram->add_option("--method", diag_method, "dms | oracle")
      ->check(CLI::IsMember({"dms", "oracle"}));
  diagram->add_flag("--normalize", diag_normalize, "scale values to [0,1] on ingest");

  // simplify
  auto* simplify = app.add_subcommand("simplify", "optimize a field toward a target diagram");
  SimplifyArgs sa;
  double threshold_value = 0.0;
  simplify->add_option("input", sa.input, "field header (.json)")->required();
  auto* thr = simplify->add_option("--threshold", threshold_value,
                                   "cancel pairs less persistent than this fraction of range");
  simplify->add_flag("--remove-saddle-pairs", sa.remove_saddle_pairs,
                     "cancel every saddle pair");
  simplify->add_flag("--keep-infinite-only", sa.keep_infinite_only,
                     "cancel every finite pair");
  simplify->add_option("--target", sa.target_file, "explicit target diagram CSV");
  simplify->add_option("--method", sa.method, "baseline | accelerated")
      ->check(CLI::IsMember({"baseline", "accelerated"}));
  simplify->add_option("--optimizer", sa.optimizer, "direct | adam")
      ->check(CLI::IsMember({"direct", "adam"}));
  simplify->add_option("--alpha-b", sa.alpha_b, "birth gradient step size");
  simplify->add_option("--alpha-d", sa.alpha_d, "death gradient step size");
  simplify->add_option("--stop", sa.stop, "stop at this fraction of the initial loss");
  simplify->add_option("--max-iter", sa.max_iter, "iteration cap");
  simplify->add_option("--adam-lr", sa.adam_lr, "adam learning rate");
  simplify->add_option("--out", sa.out, "output field header (.json)");
  simplify->add_option("--report", sa.report, "output run report (JSON)");
  simplify->add_option("--diagram-out", sa.diagram_out, "output diagram CSV of the result");
  simplify->add_flag("--normalize", sa.normalize, "scale values to [0,1] on ingest");

  // compare
  auto* compare = app.add_subcommand("compare", "Wasserstein distance between two diagrams");
  std::string cmp_d1, cmp_d2;
  double cmp_q = 2.0;
  bool cmp_exact = false;
  compare->add_option("d1", cmp_d1, "first diagram CSV")->required();
  compare->add_option("d2", cmp_d2, "second diagram CSV")->required();
  compare->add_option("--q", cmp_q, "Wasserstein exponent");
  compare->add_flag("--exact", cmp_exact, "use the exact assignment solver");

  // filaments
  auto* filaments = app.add_subcommand("filaments", "extract ascending separatrices");
  std::string fil_input, fil_out, fil_hist;
  double fil_min_value = 0.1;
  bool fil_simplify = false, fil_normalize = false;
  filaments->add_option("input", fil_input, "field header (.json)")->required();
  filaments->add_option("--min-value", fil_min_value,
                        "start only from saddles whose lowest vertex reaches this value");
  filaments->add_flag("--simplify-saddles", fil_simplify,
                      "cancel saddle pairs by connector reversal first");
  filaments->add_option("--out", fil_out, "output polylines CSV");
  filaments->add_option("--histogram-out", fil_hist, "output skip histogram JSON");
  filaments->add_flag("--normalize", fil_normalize, "scale values to [0,1] on ingest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (diagram->parsed()) {
      return run_diagram(diag_input, diag_out, diag_method, diag_normalize);
    }
    if (simplify->parsed()) {
      if (thr->count() > 0) sa.threshold = threshold_value;
      return run_simplify(sa);
    }
    if (compare->parsed()) {
      return run_compare(cmp_d1, cmp_d2, cmp_q, cmp_exact);
    }
    if (filaments->parsed()) {
      return run_filaments(fil_input, fil_min_value, fil_simplify, fil_out, fil_hist,
                           fil_normalize);
    }
  } catch (const topo::SizeGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kGuardExceeded;
  } catch (const topo::StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStructuralMismatch;
  } catch (const topo::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kOk;
}
