#ifndef SHAPLEY_SETS_IO_HPP
#define SHAPLEY_SETS_IO_HPP

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapley_sets/attribution.hpp"
#include "shapley_sets/boosting.hpp"
#include "shapley_sets/core.hpp"
#include "shapley_sets/decomposition.hpp"
#include "shapley_sets/eval.hpp"
#include "shapley_sets/models.hpp"
#include "shapley_sets/value_function.hpp"

namespace shapsets {

inline constexpr int kFormatVersion = 1;

using Json = nlohmann::ordered_json;

// Comma-separated text. Values are written with 17 significant digits so a
// read returns the exact doubles that were written.
struct Table {
  std::vector<std::string> header;
  Matrix values;
};

std::string format_csv(const Table& table);
Table parse_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

void write_dataset(const std::string& path, const Matrix& samples);
Matrix read_dataset(const std::string& path);
void write_targets(const std::string& path, std::span<const double> targets);
std::vector<double> read_targets(const std::string& path);

// Structured documents.
Json to_json(const FeatureIndexSet& s);
FeatureIndexSet index_set_from_json(const Json& j);
Json to_json(const Partition& p);
Partition partition_from_json(const Json& j);
Json to_json(const ValueFunctionConfig& cfg);
ValueFunctionConfig value_config_from_json(const Json& j);
Json to_json(const EpsilonPolicy& eps);
EpsilonPolicy epsilon_from_json(const Json& j);
Json to_json(const DecompositionResult& r);
DecompositionResult decomposition_from_json(const Json& j);
Json to_json(const AttributionReport& r);
AttributionReport report_from_json(const Json& j);
Json to_json(const MetricResult& m);
MetricResult metric_from_json(const Json& j);

/// Columns step,removed_group,prediction. Step 0 is the unmasked prediction.
std::string format_curve_csv(const DeletionCurve& curve, const Partition& partition);

/// Wraps a payload with the format tag and version.
Json document(const std::string& kind, Json body);
/// Checks the format tag and version and returns the document.
const Json& expect_document(const Json& doc, const std::string& kind);

Json model_to_json(const LinearModel& model);
Json model_to_json(const BoostedTreesModel& model);
std::shared_ptr<const PredictiveModel> model_from_json(const Json& j);

/// `source` is a builtin id (see SyntheticId) or a path to a serialized model.
std::shared_ptr<const PredictiveModel> load_model(const std::string& source);

}  // namespace shapsets

#endif  // SHAPLEY_SETS_IO_HPP
