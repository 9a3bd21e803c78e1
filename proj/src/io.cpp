#include "topo/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace topo {

namespace fs = std::filesystem;
using nlohmann::json;

std::pair<ScalarField, FieldFileInfo> read_field(const fs::path& header_path) {
  std::ifstream in(header_path);
  if (!in) throw InputError("cannot open field header: " + header_path.string());
  json header;
  try {
    in >> header;
  } catch (const json::exception& e) {
    throw InputError("bad field header: " + std::string(e.what()));
  }
  if (!header.contains("dims") || !header.contains("dtype") || !header.contains("data")) {
    throw InputError("field header must name dims, dtype and data");
  }
  if (header.value("layout", "x-fastest") != "x-fastest") {
    throw InputError("unsupported layout (expected x-fastest)");
  }
  std::vector<Index> extents;
  for (const auto& e : header.at("dims")) extents.push_back(e.get<Index>());
  const GridDims dims = make_dims(extents);

  FieldFileInfo info;
  const std::string dtype = header.at("dtype").get<std::string>();
  if (dtype == "f32") {
    info.dtype = FieldDType::F32;
  } else if (dtype == "f64") {
    info.dtype = FieldDType::F64;
  } else {
    throw InputError("unsupported dtype: " + dtype);
  }
  fs::path data = header.at("data").get<std::string>();
  if (data.is_relative()) data = header_path.parent_path() / data;
  info.data_path = data;

  std::ifstream raw(data, std::ios::binary);
  if (!raw) throw InputError("cannot open field data: " + data.string());
  const Index nv = dims.vertex_count();
  ScalarField field{dims, Vec(nv)};
  const std::size_t word = info.dtype == FieldDType::F32 ? 4 : 8;
  raw.seekg(0, std::ios::end);
  if (static_cast<std::size_t>(raw.tellg()) != word * static_cast<std::size_t>(nv)) {
    throw InputError("field data size does not match dims and dtype");
  }
  raw.seekg(0);
  if (info.dtype == FieldDType::F32) {
    std::vector<float> buf(nv);
    raw.read(reinterpret_cast<char*>(buf.data()), word * nv);
    for (Index i = 0; i < nv; ++i) field.values[i] = buf[i];
  } else {
    raw.read(reinterpret_cast<char*>(field.values.data()), word * nv);
  }
  if (!raw) throw InputError("short read on field data: " + data.string());
  validate_field(field);
  return {std::move(field), info};
}

void write_field(const fs::path& header_path, const ScalarField& field, FieldDType dtype) {
  validate_field(field);
  fs::path data = header_path;
  data.replace_extension(".raw");

  json header;
  std::vector<Index> extents;
  for (int i = 0; i < field.dims.rank; ++i) extents.push_back(field.dims.extent[i]);
  header["dims"] = extents;
  header["dtype"] = dtype == FieldDType::F32 ? "f32" : "f64";
  header["layout"] = "x-fastest";
  header["data"] = data.filename().string();

  std::ofstream out(header_path);
  if (!out) throw InputError("cannot write field header: " + header_path.string());
  out << header.dump(2) << "\n";

  std::ofstream raw(data, std::ios::binary);
  if (!raw) throw InputError("cannot write field data: " + data.string());
  const Index nv = field.values.size();
  if (dtype == FieldDType::F32) {
    std::vector<float> buf(nv);
    for (Index i = 0; i < nv; ++i) buf[i] = static_cast<float>(field.values[i]);
    raw.write(reinterpret_cast<const char*>(buf.data()), 4 * nv);
  } else {
    raw.write(reinterpret_cast<const char*>(field.values.data()), 8 * nv);
  }
  if (!raw) throw InputError("short write on field data: " + data.string());
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void write_diagram_csv(const fs::path& path, const PersistenceDiagram& d) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write diagram: " + path.string());
  out << "dim,birth,death,birthVertex,deathVertex,finite\n";
  std::vector<const PersistencePair*> rows;
  rows.reserve(d.pairs.size());
  for (const auto& p : d.pairs) rows.push_back(&p);
  std::sort(rows.begin(), rows.end(), [](const PersistencePair* a, const PersistencePair* b) {
    if (a->dim != b->dim) return a->dim < b->dim;
    if (a->birth != b->birth) return a->birth < b->birth;
    if (a->death != b->death) return a->death < b->death;
    return a->birth_vertex < b->birth_vertex;
  });
  for (const PersistencePair* p : rows) {
    out << p->dim << ',' << format_double(p->birth) << ',' << format_double(p->death) << ','
        << p->birth_vertex << ',' << p->death_vertex << ',' << (p->finite ? 1 : 0) << "\n";
  }
}

PersistenceDiagram read_diagram_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open diagram: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("dim,birth,death", 0) != 0) {
    throw InputError("bad diagram header in " + path.string());
  }
  PersistenceDiagram d;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string tok;
    PersistencePair p;
    auto next = [&]() -> std::string {
      if (!std::getline(row, tok, ',')) throw InputError("short diagram row: " + line);
      return tok;
    };
    try {
      p.dim = std::stoi(next());
      p.birth = std::stod(next());
      p.death = std::stod(next());
      p.birth_vertex = std::stoll(next());
      p.death_vertex = std::stoll(next());
      p.finite = std::stoi(next()) != 0;
    } catch (const std::exception&) {
      throw InputError("bad diagram row: " + line);
    }
    d.pairs.push_back(p);
  }
  return d;
}

namespace {

json times_json(const PhaseTimes& t) {
  return json{{"gradient", t.gradient_ms},
              {"diagram", t.diagram_ms},
              {"assignment", t.assignment_ms},
              {"step", t.step_ms}};
}

}  // namespace

void write_report_json(const fs::path& path, const SolverReport& report) {
  json j;
  j["method"] = report.method;
  j["optimizer"] = report.optimizer;
  j["alphaB"] = report.alpha_b;
  j["alphaD"] = report.alpha_d;
  j["stopFraction"] = report.stop_fraction;
  j["maxIter"] = report.max_iterations;
  j["loss0"] = report.loss0;
  j["lossFinal"] = report.loss_final;
  j["iterations"] = report.iterations;
  j["maxIterations"] = report.max_iterations_reached;
  j["l2"] = report.l2;
  j["linf"] = report.linf;
  j["signalDisplacement"] = json{{"min", report.signal_displacement.min},
                                 {"avg", report.signal_displacement.avg},
                                 {"max", report.signal_displacement.max}};
  json records = json::array();
  for (const auto& r : report.records) {
    records.push_back(json{{"loss", r.loss},
                           {"stillPairFraction", r.still_pair_fraction},
                           {"nonStillSignalPairFraction", r.non_still_signal_pair_fraction},
                           {"updatedVertexFraction", r.updated_vertex_fraction},
                           {"timesMs", times_json(r.times)}});
  }
  j["iterationRecords"] = std::move(records);

  std::ofstream out(path);
  if (!out) throw InputError("cannot write report: " + path.string());
  out << j.dump(2) << "\n";
}

void write_polylines_csv(const fs::path& path, const std::vector<Filament>& filaments) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write polylines: " + path.string());
  out << "polylineId,x,y,z\n";
  Index id = 0;
  for (const auto& fil : filaments) {
    for (const auto& pt : fil.points) {
      out << id << ',' << format_double(pt[0]) << ',' << format_double(pt[1]) << ','
          << format_double(pt[2]) << "\n";
    }
    ++id;
  }
}

void write_histogram_json(const fs::path& path, const SkipHistogram& hist) {
  json j;
  j["binEdges"] = hist.bin_edges;
  j["counts"] = hist.counts;
  j["processed"] = hist.processed;
  j["cancelled"] = hist.cancelled;
  j["skipped"] = hist.skipped;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write histogram: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace topo
