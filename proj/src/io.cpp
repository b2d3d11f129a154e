#include "shapley_sets/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shapley_sets/error.hpp"

namespace shapsets {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& field, std::size_t line, std::size_t col) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw InvalidDataError("cannot parse '" + t + "' as a number at line " + std::to_string(line) +
                           ", column " + std::to_string(col));
  }
  return v;
}

template <typename T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidDataError(std::string("document is missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidDataError(std::string("field '") + key + "' has the wrong type: " + e.what());
  }
}

}  // namespace

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j) out += ',';
    out += table.header[j];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
      if (j) out += ',';
      out += format_double(table.values(i, j));
    }
    out += '\n';
  }
  return out;
}

Table parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  Table table;
  if (!std::getline(is, line)) throw InvalidDataError("comma-separated input is empty");
  for (auto& name : split(line, ',')) table.header.push_back(trim(name));
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != table.header.size()) {
      throw InvalidDataError("line " + std::to_string(line_no) + " has " +
                             std::to_string(fields.size()) + " fields, header has " +
                             std::to_string(table.header.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < fields.size(); ++c) row.push_back(parse_double(fields[c], line_no, c));
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return table;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_dataset(const std::string& path, const Matrix& samples) {
  Table t;
  for (Eigen::Index j = 0; j < samples.cols(); ++j) t.header.push_back("x" + std::to_string(j));
  t.values = samples;
  write_text_file(path, format_csv(t));
}

Matrix read_dataset(const std::string& path) { return parse_csv(read_text_file(path)).values; }

void write_targets(const std::string& path, std::span<const double> targets) {
  Table t;
  t.header = {"y"};
  t.values.resize(static_cast<Eigen::Index>(targets.size()), 1);
  for (std::size_t i = 0; i < targets.size(); ++i) t.values(static_cast<Eigen::Index>(i), 0) = targets[i];
  write_text_file(path, format_csv(t));
}

std::vector<double> read_targets(const std::string& path) {
  const Table t = parse_csv(read_text_file(path));
  if (t.values.cols() != 1) throw InvalidDataError("targets file '" + path + "' must have one column");
  return {t.values.data(), t.values.data() + t.values.rows()};
}

Json to_json(const FeatureIndexSet& s) { return Json(s.indices()); }

FeatureIndexSet index_set_from_json(const Json& j) {
  try {
    return FeatureIndexSet(j.get<std::vector<std::size_t>>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidDataError(std::string("malformed index set: ") + e.what());
  }
}

Json to_json(const Partition& p) {
  Json groups = Json::array();
  for (const auto& g : p.groups()) groups.push_back(to_json(g));
  return {{"n", p.feature_count()}, {"groups", groups}};
}

Partition partition_from_json(const Json& j) {
  std::vector<FeatureIndexSet> groups;
  for (const auto& g : get<Json>(j, "groups")) groups.push_back(index_set_from_json(g));
  return Partition(std::move(groups), get<std::size_t>(j, "n"));
}

Json to_json(const ValueFunctionConfig& cfg) {
  Json j = {{"kind", to_string(cfg.kind)}};
  j["baseline"] = cfg.baseline ? Json(*cfg.baseline) : Json(nullptr);
  j["mc_samples"] = cfg.mc_samples;
  j["ridge"] = cfg.ridge ? Json(*cfg.ridge) : Json(nullptr);
  j["seed"] = cfg.seed;
  return j;
}

ValueFunctionConfig value_config_from_json(const Json& j) {
  ValueFunctionConfig cfg;
  cfg.kind = parse_value_kind(get<std::string>(j, "kind"));
  if (j.contains("baseline") && !j.at("baseline").is_null()) cfg.baseline = get<FeatureVector>(j, "baseline");
  cfg.mc_samples = get<int>(j, "mc_samples");
  if (j.contains("ridge") && !j.at("ridge").is_null()) cfg.ridge = get<double>(j, "ridge");
  cfg.seed = get<std::uint64_t>(j, "seed");
  return cfg;
}

Json to_json(const EpsilonPolicy& eps) {
  return {{"alpha", eps.alpha},
          {"num_candidates", eps.num_candidates},
          {"epsilon", eps.resolved_epsilon},
          {"seed", eps.seed}};
}

EpsilonPolicy epsilon_from_json(const Json& j) {
  EpsilonPolicy eps;
  eps.alpha = get<double>(j, "alpha");
  eps.num_candidates = get<int>(j, "num_candidates");
  eps.resolved_epsilon = get<double>(j, "epsilon");
  eps.seed = get<std::uint64_t>(j, "seed");
  return eps;
}

Json to_json(const DecompositionResult& r) {
  Json seps = Json::array();
  Json nonseps = Json::array();
  for (const auto& g : r.seps) seps.push_back(to_json(g));
  for (const auto& g : r.nonseps) nonseps.push_back(to_json(g));
  return {{"partition", to_json(r.partition)},
          {"seps", seps},
          {"nonseps", nonseps},
          {"value_evaluations", r.value_evaluations},
          {"epsilon", r.epsilon_used}};
}

DecompositionResult decomposition_from_json(const Json& j) {
  DecompositionResult r;
  r.partition = partition_from_json(get<Json>(j, "partition"));
  for (const auto& g : get<Json>(j, "seps")) r.seps.push_back(index_set_from_json(g));
  for (const auto& g : get<Json>(j, "nonseps")) r.nonseps.push_back(index_set_from_json(g));
  r.value_evaluations = get<std::size_t>(j, "value_evaluations");
  r.epsilon_used = get<double>(j, "epsilon");
  return r;
}

Json to_json(const AttributionReport& r) {
  Json seeds = Json::object();
  for (const auto& [name, seed] : r.seeds) seeds[name] = seed;
  return {{"value_function", to_json(r.value)},
          {"stream", r.stream},
          {"epsilon", r.epsilon_used},
          {"seeds", seeds},
          {"sample", r.sample},
          {"partition", to_json(r.partition)},
          {"values", r.values},
          {"grand_value", r.grand_value},
          {"efficiency_residual", r.efficiency_residual},
          {"value_calls", r.value_calls}};
}

AttributionReport report_from_json(const Json& j) {
  AttributionReport r;
  r.value = value_config_from_json(get<Json>(j, "value_function"));
  r.stream = get<std::uint64_t>(j, "stream");
  r.epsilon_used = get<double>(j, "epsilon");
  const Json seeds = get<Json>(j, "seeds");
  for (const auto& [name, seed] : seeds.items()) r.seeds[name] = seed.get<std::uint64_t>();
  r.sample = get<FeatureVector>(j, "sample");
  r.partition = partition_from_json(get<Json>(j, "partition"));
  r.values = get<std::vector<double>>(j, "values");
  r.grand_value = get<double>(j, "grand_value");
  r.efficiency_residual = get<double>(j, "efficiency_residual");
  r.value_calls = get<std::size_t>(j, "value_calls");
  if (r.values.size() != r.partition.group_count()) {
    throw InvalidDataError("report has " + std::to_string(r.values.size()) + " values for " +
                           std::to_string(r.partition.group_count()) + " groups");
  }
  return r;
}

Json to_json(const MetricResult& m) {
  return {{"mean", m.mean}, {"std", m.std}, {"per_sample", m.per_sample}};
}

MetricResult metric_from_json(const Json& j) {
  MetricResult m;
  m.mean = get<double>(j, "mean");
  m.std = get<double>(j, "std");
  m.per_sample = get<std::vector<double>>(j, "per_sample");
  return m;
}

std::string format_curve_csv(const DeletionCurve& curve, const Partition& partition) {
  std::string out = "step,removed_group,prediction\n";
  for (std::size_t s = 0; s < curve.predictions.size(); ++s) {
    std::string removed;
    if (s > 0) {
      const auto& g = partition.group(curve.order[s - 1]);
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (k) removed += ' ';
        removed += std::to_string(g[k]);
      }
    }
    out += std::to_string(s) + "," + removed + "," + format_double(curve.predictions[s]) + "\n";
  }
  return out;
}

Json document(const std::string& kind, Json body) {
  Json doc = {{"format", "shapley-sets." + kind}, {"format_version", kFormatVersion}};
  for (auto& [key, value] : body.items()) doc[key] = value;
  return doc;
}

const Json& expect_document(const Json& doc, const std::string& kind) {
  const std::string tag = "shapley-sets." + kind;
  if (!doc.is_object() || !doc.contains("format") || doc.at("format") != tag) {
    throw InvalidDataError("expected a '" + tag + "' document");
  }
  if (!doc.contains("format_version") || doc.at("format_version") != kFormatVersion) {
    throw InvalidDataError("unsupported format_version for '" + tag + "'");
  }
  return doc;
}

Json model_to_json(const LinearModel& model) {
  return document("model", {{"type", "linear"},
                            {"dimension", model.dimension()},
                            {"coefficients", model.coefficients()},
                            {"intercept", model.intercept()}});
}

Json model_to_json(const BoostedTreesModel& model) {
  Json trees = Json::array();
  for (const auto& tree : model.trees()) {
    Json feature = Json::array(), threshold = Json::array(), left = Json::array(),
         right = Json::array(), value = Json::array();
    for (const auto& node : tree.nodes) {
      feature.push_back(node.feature);
      threshold.push_back(node.threshold);
      left.push_back(node.left);
      right.push_back(node.right);
      value.push_back(node.value);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"value", value}});
  }
  return document("model", {{"type", "boosted_trees"},
                            {"dimension", model.dimension()},
                            {"base", model.base()},
                            {"learning_rate", model.learning_rate()},
                            {"trees", trees}});
}

std::shared_ptr<const PredictiveModel> model_from_json(const Json& j) {
  expect_document(j, "model");
  const auto type = get<std::string>(j, "type");
  const auto dimension = get<std::size_t>(j, "dimension");
  if (type == "linear") {
    auto coefficients = get<std::vector<double>>(j, "coefficients");
    if (coefficients.size() != dimension) throw InvalidDataError("coefficient count != dimension");
    return std::make_shared<LinearModel>(std::move(coefficients), get<double>(j, "intercept"));
  }
  if (type == "boosted_trees") {
    std::vector<RegressionTree> trees;
    for (const auto& t : get<Json>(j, "trees")) {
      const auto feature = get<std::vector<int>>(t, "feature");
      const auto threshold = get<std::vector<double>>(t, "threshold");
      const auto left = get<std::vector<int>>(t, "left");
      const auto right = get<std::vector<int>>(t, "right");
      const auto value = get<std::vector<double>>(t, "value");
      const std::size_t count = feature.size();
      if (threshold.size() != count || left.size() != count || right.size() != count ||
          value.size() != count) {
        throw InvalidDataError("tree node arrays have different lengths");
      }
      RegressionTree tree;
      for (std::size_t k = 0; k < count; ++k) {
        tree.nodes.push_back({feature[k], threshold[k], left[k], right[k], value[k]});
      }
      trees.push_back(std::move(tree));
    }
    return std::make_shared<BoostedTreesModel>(dimension, get<double>(j, "base"),
                                               get<double>(j, "learning_rate"), std::move(trees));
  }
  throw InvalidDataError("unknown model type '" + type + "'");
}

std::shared_ptr<const PredictiveModel> load_model(const std::string& source) {
  for (SyntheticId id : {SyntheticId::f1, SyntheticId::f2, SyntheticId::f3, SyntheticId::example1,
                         SyntheticId::example2, SyntheticId::linear_g}) {
    if (source == to_string(id)) return make_synthetic(id).first;
  }
  const std::string text = read_text_file(source);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidDataError("model file '" + source + "' is not valid: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace shapsets
