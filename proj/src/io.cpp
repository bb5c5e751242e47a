#include "lrho/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace lrho {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kVersion = 1;

void check_header(const json& doc, const std::string& format) {
  if (!doc.is_object() || doc.value("format", "") != format)
    throw IoError("not a " + format + " document");
  if (doc.value("version", 0) != kVersion) throw IoError(format + ": unsupported version");
}

json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(what + ": " + e.what());
  }
}

// Runs a reader, turning JSON access errors into IoError.
template <class F>
auto guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw IoError(what + ": " + e.what());
  }
}

std::string compact(const ojson& j) { return j.dump(); }

// Pretty top level with one compact line per list element, so large arrays stay readable.
class DocWriter {
 public:
  void field(const std::string& key, const ojson& value) { fields_.push_back(quote(key) + ": " + compact(value)); }
  void list(const std::string& key, const std::vector<std::string>& lines, int depth = 1) {
    std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    std::string s = quote(key) + ": [";
    for (std::size_t i = 0; i < lines.size(); ++i) s += (i ? ",\n" : "\n") + pad + lines[i];
    s += lines.empty() ? "]" : "\n  ]";
    fields_.push_back(s);
  }
  std::string str() const {
    std::string s = "{\n";
    for (std::size_t i = 0; i < fields_.size(); ++i) s += "  " + fields_[i] + (i + 1 < fields_.size() ? ",\n" : "\n");
    return s + "}\n";
  }

 private:
  static std::string quote(const std::string& k) { return ojson(k).dump(); }
  std::vector<std::string> fields_;
};

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, p);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

// ---- instances

std::string instance_to_text(const FjspInstance& inst) {
  DocWriter w;
  w.field("format", "lrho-instance");
  w.field("version", kVersion);
  w.field("objective", std::string(to_string(inst.objective())));
  w.field("num_machines", inst.num_machines());
  w.field("seed", inst.seed());
  std::vector<std::string> ops;
  for (OpId id = 0; id < inst.num_ops(); ++id) {
    const Operation& op = inst.op(id);
    ojson o;
    o["job"] = op.job_id;
    ojson machines = ojson::array();
    for (const auto& md : op.compatible) machines.push_back({md.machine, md.duration});
    o["machines"] = machines;
    if (op.release_time) o["release"] = *op.release_time;
    if (op.target_end_time) o["target"] = *op.target_end_time;
    ops.push_back(compact(o));
  }
  w.list("operations", ops);
  return w.str();
}

FjspInstance instance_from_text(const std::string& text) {
  json doc = parse(text, "instance");
  check_header(doc, "lrho-instance");
  return guarded("instance", [&] {
    std::vector<std::vector<Operation>> jobs;
    for (const auto& o : doc.at("operations")) {
      int job = o.at("job").get<int>();
      if (job < 0) throw IoError("instance: negative job id");
      if (job != static_cast<int>(jobs.size()) - 1 && job != static_cast<int>(jobs.size()))
        throw IoError("instance: operations must be grouped by job in order");
      if (job == static_cast<int>(jobs.size())) jobs.emplace_back();
      Operation op;
      op.job_id = job;
      op.op_index = static_cast<int>(jobs.back().size()) + 1;
      for (const auto& md : o.at("machines")) op.compatible.push_back({md.at(0).get<MachineId>(), md.at(1).get<Time>()});
      if (o.contains("release")) op.release_time = o["release"].get<Time>();
      if (o.contains("target")) op.target_end_time = o["target"].get<Time>();
      jobs.back().push_back(std::move(op));
    }
    try {
      return FjspInstance(doc.at("num_machines").get<int>(), std::move(jobs),
                          objective_from_string(doc.at("objective").get<std::string>()),
                          doc.at("seed").get<std::uint64_t>());
    } catch (const ConfigError& e) {
      throw IoError(std::string("instance: ") + e.what());
    }
  });
}

void save_instance(const std::filesystem::path& path, const FjspInstance& inst) { write_text(path, instance_to_text(inst)); }
FjspInstance load_instance(const std::filesystem::path& path) { return instance_from_text(read_text(path)); }

// ---- solutions

std::string solution_to_text(const Solution& sol) {
  DocWriter w;
  w.field("format", "lrho-solution");
  w.field("version", kVersion);
  w.field("num_ops", sol.size());
  std::vector<std::string> rows;
  for (OpId op : sol.assigned_ops()) rows.push_back(compact(ojson::array({op, sol.machine(op), sol.start(op)})));
  w.list("placements", rows);
  return w.str();
}

Solution solution_from_text(const std::string& text) {
  json doc = parse(text, "solution");
  check_header(doc, "lrho-solution");
  return guarded("solution", [&] {
    const int n = doc.at("num_ops").get<int>();
    if (n < 0) throw IoError("solution: negative op count");
    Solution sol(n);
    for (const auto& row : doc.at("placements")) {
      OpId op = row.at(0).get<OpId>();
      if (op < 0 || op >= n) throw IoError("solution: op out of range");
      if (sol.has(op)) throw IoError("solution: op placed twice");
      sol.set(op, {row.at(1).get<MachineId>(), row.at(2).get<Time>()});
    }
    return sol;
  });
}

void save_solution(const std::filesystem::path& path, const Solution& sol) { write_text(path, solution_to_text(sol)); }
Solution load_solution(const std::filesystem::path& path) { return solution_from_text(read_text(path)); }

// ---- models

namespace {

const char* kLayerNames[MlpModel::kLayers] = {"op1", "op2", "machine1", "machine2", "fuse", "head"};

ojson layer_json(const Linear& l) {
  ojson j;
  j["in"] = l.in;
  j["out"] = l.out;
  j["w"] = l.w;
  j["b"] = l.b;
  return j;
}

Linear layer_from(const json& j) {
  Linear l(j.at("in").get<int>(), j.at("out").get<int>());
  auto w = j.at("w").get<std::vector<double>>();
  auto b = j.at("b").get<std::vector<double>>();
  if (w.size() != l.w.size() || b.size() != l.b.size()) throw IoError("model: layer shape mismatch");
  l.w = std::move(w);
  l.b = std::move(b);
  return l;
}

}  // namespace

std::string model_to_text(const MlpModel& model) {
  DocWriter w;
  w.field("format", "lrho-model");
  w.field("version", kVersion);
  w.field("variant", std::string(to_string(model.variant)));
  w.field("hidden", model.hidden);
  std::vector<std::string> norm;
  const auto& n = model.normalizer;
  for (auto [name, v] : {std::pair{"op_mean", &n.op_mean}, std::pair{"op_std", &n.op_std},
                         std::pair{"machine_mean", &n.machine_mean}, std::pair{"machine_std", &n.machine_std}})
    norm.push_back(compact(ojson{{"name", name}, {"values", *v}}));
  w.list("normalizer", norm);
  std::vector<std::string> layers;
  for (int i = 0; i < MlpModel::kLayers; ++i) {
    ojson j = layer_json(model.layer(i));
    ojson named;
    named["name"] = kLayerNames[i];
    for (auto& [k, v] : j.items()) named[k] = v;
    layers.push_back(compact(named));
  }
  w.list("layers", layers);
  return w.str();
}

MlpModel model_from_text(const std::string& text) {
  json doc = parse(text, "model");
  check_header(doc, "lrho-model");
  return guarded("model", [&] {
    MlpModel m = MlpModel::init(variant_from_string(doc.at("variant").get<std::string>()), 0, doc.at("hidden").get<int>());
    const auto& layers = doc.at("layers");
    if (layers.size() != MlpModel::kLayers) throw IoError("model: expected 6 layers");
    for (int i = 0; i < MlpModel::kLayers; ++i) {
      const auto& j = layers.at(static_cast<std::size_t>(i));
      if (j.at("name").get<std::string>() != kLayerNames[i]) throw IoError("model: unexpected layer order");
      Linear l = layer_from(j);
      if (l.in != m.layer(i).in || l.out != m.layer(i).out) throw IoError("model: layer dims disagree with variant");
      m.layer(i) = std::move(l);
    }
    auto& n = m.normalizer;
    for (const auto& entry : doc.at("normalizer")) {
      const auto name = entry.at("name").get<std::string>();
      auto values = entry.at("values").get<std::vector<double>>();
      if (name == "op_mean") n.op_mean = std::move(values);
      else if (name == "op_std") n.op_std = std::move(values);
      else if (name == "machine_mean") n.machine_mean = std::move(values);
      else if (name == "machine_std") n.machine_std = std::move(values);
      else throw IoError("model: unknown normalizer field " + name);
    }
    auto [d_o, d_m] = feature_dims(m.variant);
    if (n.fitted() && (n.op_mean.size() != static_cast<std::size_t>(d_o) || n.op_std.size() != n.op_mean.size() ||
                       n.machine_mean.size() != static_cast<std::size_t>(d_m) ||
                       n.machine_std.size() != n.machine_mean.size()))
      throw IoError("model: normalizer shape mismatch");
    return m;
  });
}

void save_model(const std::filesystem::path& path, const MlpModel& model) { write_text(path, model_to_text(model)); }
MlpModel load_model(const std::filesystem::path& path) { return model_from_text(read_text(path)); }

// ---- datasets

namespace {

ojson matrix_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (int r = 0; r < m.rows; ++r) {
    ojson row = ojson::array();
    for (int c = 0; c < m.cols; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from(const json& j, int cols) {
  Matrix m(static_cast<int>(j.size()), cols);
  for (int r = 0; r < m.rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<int>(row.size()) != cols) throw IoError("dataset: feature row has wrong width");
    for (int c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

}  // namespace

void write_dataset(std::ostream& out, FeatureVariant variant, const std::vector<StateRecord>& records) {
  ojson schema;
  schema["format"] = "lrho-dataset";
  schema["version"] = kVersion;
  schema["variant"] = std::string(to_string(variant));
  schema["op_features"] = op_feature_names(variant);
  schema["machine_features"] = machine_feature_names(variant);
  out << schema.dump() << '\n';
  for (const auto& r : records) {
    if (r.variant != variant) throw IoError("dataset: record variant differs from the schema");
    ojson j;
    j["instance"] = r.instance;
    j["iteration"] = r.iteration;
    j["op_features"] = matrix_json(r.op_features);
    j["machine_features"] = matrix_json(r.machine_features);
    ojson mask = ojson::array();
    for (char c : r.overlap_mask) mask.push_back(c ? 1 : 0);
    j["overlap_mask"] = mask;
    j["prev_machine_index"] = r.prev_machine_index;
    j["labels"] = r.labels ? ojson(*r.labels) : ojson(nullptr);
    out << j.dump() << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset: missing schema line");
  json schema = parse(line, "dataset schema");
  check_header(schema, "lrho-dataset");
  Dataset ds;
  guarded("dataset schema", [&] {
    ds.variant = variant_from_string(schema.at("variant").get<std::string>());
    if (schema.at("op_features").get<std::vector<std::string>>() != op_feature_names(ds.variant) ||
        schema.at("machine_features").get<std::vector<std::string>>() != machine_feature_names(ds.variant))
      throw IoError("dataset: feature columns do not match variant " + std::string(to_string(ds.variant)));
    return 0;
  });
  auto [d_o, d_m] = feature_dims(ds.variant);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "dataset line " + std::to_string(lineno);
    json j = parse(line, where);
    StateRecord r = guarded(where, [&] {
      StateRecord rec;
      rec.variant = ds.variant;
      rec.instance = j.at("instance").get<int>();
      rec.iteration = j.at("iteration").get<int>();
      rec.op_features = matrix_from(j.at("op_features"), d_o);
      rec.machine_features = matrix_from(j.at("machine_features"), d_m);
      for (int v : j.at("overlap_mask").get<std::vector<int>>()) rec.overlap_mask.push_back(v ? 1 : 0);
      rec.prev_machine_index = j.at("prev_machine_index").get<std::vector<int>>();
      if (!j.at("labels").is_null()) rec.labels = j["labels"].get<std::vector<int>>();
      return rec;
    });
    try {
      r.validate();
    } catch (const Error& e) {
      throw IoError(where + ": " + e.what());
    }
    ds.records.push_back(std::move(r));
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, FeatureVariant variant, const std::vector<StateRecord>& records) {
  std::ostringstream ss;
  write_dataset(ss, variant, records);
  write_text(path, ss.str());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::istringstream ss(read_text(path));
  return read_dataset(ss);
}

// ---- CSV

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IoError("csv: no column " + name);
}

namespace {

std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) return f;
  std::string s = "\"";
  for (char c : f) s += c == '"' ? std::string("\"\"") : std::string(1, c);
  return s + "\"";
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string s;
  for (std::size_t i = 0; i < fields.size(); ++i) s += (i ? "," : "") + csv_field(fields[i]);
  return s + "\n";
}

}  // namespace

std::string csv_to_text(const CsvTable& table) {
  std::string s = csv_line(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw IoError("csv: row width differs from header");
    s += csv_line(row);
  }
  return s;
}

CsvTable csv_from_text(const std::string& text) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        lines.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw IoError("csv: unterminated quote");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    lines.push_back(std::move(row));
  }
  CsvTable t;
  if (lines.empty()) return t;
  t.header = std::move(lines.front());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].size() != t.header.size()) throw IoError("csv: row " + std::to_string(i) + " has wrong width");
    t.rows.push_back(std::move(lines[i]));
  }
  return t;
}

void save_csv(const std::filesystem::path& path, const CsvTable& table) { write_text(path, csv_to_text(table)); }
CsvTable load_csv(const std::filesystem::path& path) { return csv_from_text(read_text(path)); }

void append_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  if (!fresh) {
    CsvTable existing = load_csv(path);
    if (existing.header != table.header) throw IoError("csv: header of " + path.string() + " differs");
  } else if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + path.string());
  if (fresh) out << csv_line(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw IoError("csv: row width differs from header");
    out << csv_line(row);
  }
}

}  // namespace lrho
