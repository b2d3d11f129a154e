#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapley_sets/attribution.hpp"
#include "shapley_sets/boosting.hpp"
#include "shapley_sets/core.hpp"
#include "shapley_sets/decomposition.hpp"
#include "shapley_sets/error.hpp"
#include "shapley_sets/eval.hpp"
#include "shapley_sets/experiments.hpp"
#include "shapley_sets/io.hpp"
#include "shapley_sets/models.hpp"
#include "shapley_sets/rng.hpp"

using namespace shapsets;
namespace ex = shapsets::experiments;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kValidation = 2, kCapacity = 3, kIo = 4 };

struct ValueOptions {
  std::string kind = "marg";
  std::string baseline;
  int mc = 256;
  std::optional<double> lambda;
};

struct DecomposeOptions {
  double alpha = 1e-3;
  int k = 10;
  int reps = 3;
};

struct Common {
  std::string data;
  std::string model;
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Common& c, bool needs_model) {
  cmd->add_option("--data", c.data, "dataset (comma-separated, header row)");
  auto* model = cmd->add_option("--model", c.model, "builtin id (f1, f2, f3, example1, example2, linear_g) or model file");
  if (needs_model) model->required();
  cmd->add_option("--out", c.out, "output path (stdout when omitted)");
  cmd->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", c.seed, "root seed");
}

void add_value(CLI::App* cmd, ValueOptions& v) {
  cmd->add_option("--value", v.kind, "value function")->check(CLI::IsMember({"bs", "marg", "cond"}));
  cmd->add_option("--baseline", v.baseline, "reference vector: 'zero' or a one-row dataset file");
  cmd->add_option("--mc", v.mc, "Monte-Carlo draws per conditional query")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", v.lambda, "ridge on the conditioning block");
}

void add_decompose(CLI::App* cmd, DecomposeOptions& d) {
  cmd->add_option("--alpha", d.alpha, "epsilon scale")->check(CLI::PositiveNumber);
  cmd->add_option("--k", d.k, "epsilon candidates")->check(CLI::PositiveNumber);
  cmd->add_option("--reps", d.reps, "candidates per fitness test")->check(CLI::PositiveNumber);
}

ex::DecomposeSettings settings(const DecomposeOptions& d) { return {d.alpha, d.k, d.reps}; }

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(c.out, text);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::optional<DatasetMatrix> load_data(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return estimate_statistics(read_dataset(path));
}

FeatureVector parse_vector(const std::string& text) {
  FeatureVector out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(field, &used));
      if (field.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(field);
    } catch (const std::logic_error&) {
      throw InvalidDataError("cannot parse '" + field + "' as a number");
    }
  }
  return out;
}

ValueFunctionConfig value_config(const ValueOptions& v, std::size_t n, std::uint64_t seed,
                                 bool baseline_required) {
  ValueFunctionConfig cfg;
  cfg.kind = parse_value_kind(v.kind);
  cfg.mc_samples = v.mc;
  cfg.ridge = v.lambda;
  cfg.seed = substream_seed(seed, {3});
  if (cfg.kind == ValueKind::baseline) {
    if (v.baseline == "zero") {
      cfg.baseline = FeatureVector(n, 0.0);
    } else if (!v.baseline.empty()) {
      const Matrix z = read_dataset(v.baseline);
      if (z.rows() != 1) throw InvalidDataError("baseline file must hold exactly one row");
      cfg.baseline = FeatureVector(z.data(), z.data() + z.cols());
    } else if (baseline_required) {
      throw PreconditionError("--value bs needs --baseline");
    }
    if (cfg.baseline) validate_vector(*cfg.baseline, n, "baseline");
  }
  return cfg;
}

void check_dimensions(const PredictiveModel& model, const std::optional<DatasetMatrix>& data) {
  if (data && data->cols() != model.dimension()) {
    throw DimensionError("dataset has " + std::to_string(data->cols()) + " columns, model expects " +
                         std::to_string(model.dimension()));
  }
}

Json seeds_json(std::uint64_t root) {
  return {{"root", root},
          {"epsilon", substream_seed(root, {1})},
          {"probe", substream_seed(root, {2})},
          {"value_function", substream_seed(root, {3})}};
}

std::string partition_label(const FeatureIndexSet& g) {
  std::string s;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (k) s += ' ';
    s += std::to_string(g[k]);
  }
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- datagen ---------------------------------------------------------------

struct DatagenOptions {
  GeneratorConfig gen;
  std::string dependence = "iid";
  std::string out;
  std::string targets;
  std::string model;
};

int cmd_datagen(DatagenOptions& o) {
  o.gen.dependence = parse_dependence(o.dependence);
  o.gen.validate();
  const Matrix samples = generate_samples(o.gen);
  write_dataset(o.out, samples);
  if (!o.targets.empty()) {
    if (o.model.empty()) throw PreconditionError("--targets needs --model to label the rows");
    const auto model = load_model(o.model);
    if (model->dimension() != static_cast<std::size_t>(samples.cols())) {
      throw DimensionError("model dimension does not match the generated columns");
    }
    write_targets(o.targets, predict_rows(*model, samples));
  }
  const DatasetMatrix data = estimate_statistics(samples);
  std::cout << "seed " << o.gen.seed << "\n"
            << "rows " << data.rows() << " cols " << data.cols() << "\n";
  for (std::size_t j = 0; j < data.cols(); ++j) {
    std::cout << "x" << j << " mean " << fmt(data.mean()(static_cast<Eigen::Index>(j))) << " variance "
              << fmt(data.covariance()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)))
              << "\n";
  }
  return kOk;
}

// --- fit -------------------------------------------------------------------

struct FitOptions {
  std::string data;
  std::string targets;
  std::string learner = "ols";
  std::string out;
  int rounds = 200;
  int depth = 1;
  double learning_rate = 0.1;
};

int cmd_fit(const FitOptions& o) {
  const Matrix samples = read_dataset(o.data);
  const std::vector<double> y = read_targets(o.targets);
  Json doc;
  std::vector<double> predicted;
  if (o.learner == "ols") {
    const auto model = fit_ols(samples, y);
    doc = model_to_json(*model);
    predicted = predict_rows(*model, samples);
  } else {
    const auto model = fit_boosted_stumps(samples, y, o.rounds, o.depth, o.learning_rate);
    doc = model_to_json(*model);
    predicted = predict_rows(*model, samples);
  }
  write_text_file(o.out, dump(doc));
  std::cout << "train r_squared " << fmt(r_squared(y, predicted)) << "\n";
  return kOk;
}

// --- decompose -------------------------------------------------------------

int cmd_decompose(const Common& c, const ValueOptions& v, const DecomposeOptions& d,
                  const std::string& trace_path) {
  const auto model = load_model(c.model);
  const auto data = load_data(c.data);
  if (!data) throw PreconditionError("decompose needs --data for candidate sampling");
  check_dimensions(*model, data);
  const ValueFunctionConfig cfg = value_config(v, model->dimension(), c.seed, false);
  std::ostringstream trace;
  const DecompositionResult r = ex::run_decomposition(*model, *data, cfg, settings(d), c.seed,
                                                      trace_path.empty() ? nullptr : &trace);
  if (!trace_path.empty()) write_text_file(trace_path, trace.str());

  if (c.format == "csv") {
    std::string out = "group,feature\n";
    for (std::size_t g = 0; g < r.partition.group_count(); ++g) {
      for (std::size_t i : r.partition.group(g)) out += std::to_string(g) + "," + std::to_string(i) + "\n";
    }
    emit(c, out);
    return kOk;
  }
  Json body = to_json(r);
  body["model"] = c.model;
  body["value_function"] = to_json(cfg);
  body["alpha"] = d.alpha;
  body["epsilon_candidates"] = d.k;
  body["repetitions"] = d.reps;
  body["seeds"] = seeds_json(c.seed);
  emit(c, dump(document("decomposition", body)));
  return kOk;
}

// --- attribute -------------------------------------------------------------

struct AttributeOptions {
  std::string partition;
  std::optional<std::size_t> row;
  std::string sample;
  bool with_oracle = false;
};

int cmd_attribute(const Common& c, const ValueOptions& v, const DecomposeOptions& d,
                  const AttributeOptions& a) {
  const auto model = load_model(c.model);
  const auto data = load_data(c.data);
  check_dimensions(*model, data);
  const std::size_t n = model->dimension();
  const ValueFunctionConfig cfg = value_config(v, n, c.seed, true);
  if (cfg.kind != ValueKind::baseline && !data) {
    throw PreconditionError("--value " + v.kind + " needs --data");
  }

  FeatureVector x;
  if (a.row) {
    if (!data) throw PreconditionError("--row needs --data");
    if (*a.row >= data->rows()) throw PreconditionError("--row is outside the dataset");
    const auto r = data->row(*a.row);
    x.assign(r.begin(), r.end());
  } else if (!a.sample.empty()) {
    x = parse_vector(a.sample);
  } else {
    throw PreconditionError("attribute needs --row or --sample");
  }
  validate_vector(x, n, "sample");

  Partition partition;
  double epsilon = 0.0;
  if (!a.partition.empty()) {
    Json doc;
    try {
      doc = Json::parse(read_text_file(a.partition));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidDataError("partition file '" + a.partition + "' is not valid: " + e.what());
    }
    const DecompositionResult r = decomposition_from_json(expect_document(doc, "decomposition"));
    partition = r.partition;
    epsilon = r.epsilon_used;
  } else {
    if (!data) throw PreconditionError("attribute without --partition needs --data to decompose");
    const DecompositionResult r = ex::run_decomposition(*model, *data, cfg, settings(d), c.seed);
    partition = r.partition;
    epsilon = r.epsilon_used;
  }
  if (partition.feature_count() != n) throw DimensionError("partition does not match the model dimension");

  const CoalitionValue value(*model, data ? &*data : nullptr, cfg);
  AttributionReport report = shapley_sets(value, x, partition);
  report.epsilon_used = epsilon;
  report.seeds = {{"root", c.seed},
                  {"epsilon", substream_seed(c.seed, {1})},
                  {"probe", substream_seed(c.seed, {2})},
                  {"value_function", cfg.seed}};
  std::optional<std::vector<double>> oracle;
  if (a.with_oracle) oracle = shapley_over_features(value, x);

  if (c.format == "csv") {
    std::string out = "group,features,value\n";
    for (std::size_t g = 0; g < partition.group_count(); ++g) {
      out += std::to_string(g) + "," + partition_label(partition.group(g)) + "," + fmt(report.values[g]) + "\n";
    }
    if (oracle) {
      for (std::size_t i = 0; i < n; ++i) out += "oracle," + std::to_string(i) + "," + fmt((*oracle)[i]) + "\n";
    }
    emit(c, out);
    return kOk;
  }
  Json body = to_json(report);
  body["model"] = c.model;
  if (oracle) body["oracle_shapley"] = *oracle;
  emit(c, dump(document("attribution", body)));
  return kOk;
}

// --- reproduce -------------------------------------------------------------

struct ReproduceOptions {
  std::string experiment;
  std::size_t samples = 0;
  int mc = 0;
  int rounds = 0;
  int depth = 0;
  double learning_rate = 0.0;
};

Json score_json(const ex::MethodScore& s) {
  return {{"method", s.method}, {"mae", s.mae.mean}, {"std", s.mae.std}};
}

int cmd_reproduce(const Common& c, const DecomposeOptions& d, const ReproduceOptions& r) {
  Json body = {{"experiment", r.experiment}, {"seeds", {{"root", c.seed}}}};
  body["decomposition"] = {{"alpha", d.alpha}, {"epsilon_candidates", d.k}, {"repetitions", d.reps}};
  std::string csv;

  if (r.experiment == "table1") {
    ex::Table1Config cfg;
    cfg.seed = c.seed;
    cfg.decomposition = settings(d);
    if (r.samples) cfg.samples = r.samples;
    body["samples"] = cfg.samples;
    Json rows = Json::array();
    csv = "function,partition,ss_mae,ss_std,sv_mae,sv_std\n";
    for (const auto& row : ex::table1(cfg)) {
      rows.push_back({{"function", to_string(row.id)},
                      {"partition", to_json(row.partition)},
                      {"ss", score_json(row.shapley_sets)},
                      {"sv", score_json(row.shapley_values)}});
      csv += to_string(row.id) + "," + row.partition.to_string() + "," + fmt(row.shapley_sets.mae.mean) +
             "," + fmt(row.shapley_sets.mae.std) + "," + fmt(row.shapley_values.mae.mean) + "," +
             fmt(row.shapley_values.mae.std) + "\n";
    }
    body["rows"] = rows;
  } else if (r.experiment == "table2" || r.experiment == "dummy") {
    ex::Table2Config cfg;
    cfg.seed = c.seed;
    cfg.decomposition = settings(d);
    if (r.samples) cfg.test = r.samples;
    if (r.mc) cfg.mc_samples = r.mc;
    if (r.rounds) cfg.boost_rounds = r.rounds;
    if (r.depth) cfg.boost_depth = r.depth;
    if (r.learning_rate > 0.0) cfg.learning_rate = r.learning_rate;
    body["train"] = cfg.train;
    body["test"] = cfg.test;
    body["rho"] = cfg.rho;
    body["mc_samples"] = cfg.mc_samples;
    body["boosting"] = {{"rounds", cfg.boost_rounds}, {"depth", cfg.boost_depth}, {"learning_rate", cfg.learning_rate}};
    const auto rows = ex::table2(cfg, true);
    Json out = Json::array();
    csv = "model,partition,train_r2,ss_cond_mae,ss_cond_std,sv_marg_mae,sv_marg_std,sv_cond_mae,sv_cond_std\n";
    for (const auto& row : rows) {
      if (r.experiment == "table2" || row.model != "g1") {
        out.push_back({{"model", row.model},
                       {"n", row.n},
                       {"train_r_squared", row.train_r_squared},
                       {"partition", to_json(row.partition)},
                       {"ss_cond", score_json(row.shapley_sets)},
                       {"sv_marg", score_json(row.shapley_marginal)},
                       {"sv_cond", score_json(row.shapley_conditional)}});
        csv += row.model + "," + row.partition.to_string() + "," + fmt(row.train_r_squared) + "," +
               fmt(row.shapley_sets.mae.mean) + "," + fmt(row.shapley_sets.mae.std) + "," +
               fmt(row.shapley_marginal.mae.mean) + "," + fmt(row.shapley_marginal.mae.std) + "," +
               fmt(row.shapley_conditional.mae.mean) + "," + fmt(row.shapley_conditional.mae.std) + "\n";
      }
    }
    body["rows"] = out;
    if (r.experiment == "dummy") {
      const ex::DummySummary s = ex::dummy_summary(rows);
      body["ss_shift"] = s.shapley_sets_shift;
      body["sv_cond_mae_before"] = s.conditional_mae_g2;
      body["sv_cond_mae_after"] = s.conditional_mae_g3;
    }
  } else if (r.experiment == "prop1") {
    ex::Prop1Config cfg;
    cfg.seed = c.seed;
    cfg.decomposition = settings(d);
    cfg.decomposition_seeds = {c.seed};
    if (r.samples) cfg.samples = r.samples;
    if (r.mc) cfg.mc_samples = r.mc;
    body["samples"] = cfg.samples;
    body["mc_samples"] = cfg.mc_samples;
    Json rows = Json::array();
    csv = "function,value,partition,comparisons,bit_identical,max_abs_difference,max_standard_errors\n";
    for (const auto& row : ex::prop1(cfg)) {
      rows.push_back({{"function", row.function},
                      {"value", to_string(row.kind)},
                      {"partition", to_json(row.partition)},
                      {"comparisons", row.comparisons},
                      {"bit_identical", row.bit_identical},
                      {"max_abs_difference", row.max_abs_difference},
                      {"max_standard_errors", row.max_standard_errors}});
      csv += row.function + "," + to_string(row.kind) + "," + row.partition.to_string() + "," +
             std::to_string(row.comparisons) + "," + std::to_string(row.bit_identical) + "," +
             fmt(row.max_abs_difference) + "," + fmt(row.max_standard_errors) + "\n";
    }
    body["rows"] = rows;
  } else if (r.experiment == "curves") {
    ex::CurvesConfig cfg;
    cfg.seed = c.seed;
    cfg.decomposition = settings(d);
    if (r.samples) cfg.samples = r.samples;
    body["function"] = to_string(cfg.id);
    body["samples"] = cfg.samples;
    Json rows = Json::array();
    csv = "method,sample,step,removed_group,prediction\n";
    for (const auto& rec : ex::curves(cfg)) {
      rows.push_back({{"method", rec.method},
                      {"sample", rec.sample},
                      {"partition", to_json(rec.partition)},
                      {"order", rec.curve.order},
                      {"predictions", rec.curve.predictions},
                      {"original_prediction", rec.curve.original_prediction},
                      {"target_prediction", rec.curve.target_prediction}});
      std::istringstream lines(format_curve_csv(rec.curve, rec.partition));
      std::string line;
      std::getline(lines, line);  // header
      while (std::getline(lines, line)) csv += rec.method + "," + std::to_string(rec.sample) + "," + line + "\n";
    }
    body["curves"] = rows;
  } else {
    throw PreconditionError("unknown experiment '" + r.experiment + "'");
  }
  emit(c, c.format == "csv" ? csv : dump(document("experiment", body)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shapley Sets: decomposition-based feature attribution"};
  app.require_subcommand(1);

  DatagenOptions dg;
  auto* datagen = app.add_subcommand("datagen", "generate a synthetic dataset");
  datagen->add_option("--n", dg.gen.n, "features");
  datagen->add_option("--k", dg.gen.k, "rows");
  datagen->add_option("--mean", dg.gen.mean, "feature mean");
  datagen->add_option("--variance", dg.gen.variance, "feature variance");
  datagen->add_option("--dependence", dg.dependence, "iid, rho_link or with_dummy")
      ->check(CLI::IsMember({"iid", "rho_link", "with_dummy"}));
  datagen->add_option("--rho", dg.gen.rho, "link coefficient for column 1");
  datagen->add_option("--seed", dg.gen.seed, "generator seed");
  datagen->add_option("--out", dg.out, "dataset path")->required();
  datagen->add_option("--targets", dg.targets, "targets path");
  datagen->add_option("--model", dg.model, "model labelling the targets");

  FitOptions fo;
  auto* fit = app.add_subcommand("fit", "train a surrogate model");
  fit->add_option("--data", fo.data, "dataset")->required();
  fit->add_option("--targets", fo.targets, "targets")->required();
  fit->add_option("--learner", fo.learner, "ols or boost")->check(CLI::IsMember({"ols", "boost"}));
  fit->add_option("--rounds", fo.rounds, "boosting rounds");
  fit->add_option("--depth", fo.depth, "tree depth (1-3)");
  fit->add_option("--lr", fo.learning_rate, "learning rate");
  fit->add_option("--out", fo.out, "model path")->required();

  Common dc;
  ValueOptions dv;
  DecomposeOptions dd;
  std::string trace;
  auto* decompose_cmd = app.add_subcommand("decompose", "recover non-separable variable groups");
  add_common(decompose_cmd, dc, true);
  add_value(decompose_cmd, dv);
  add_decompose(decompose_cmd, dd);
  dv.kind = "bs";
  decompose_cmd->add_option("--trace", trace, "write one JSON line per fitness test");

  Common ac;
  ValueOptions av;
  DecomposeOptions ad;
  AttributeOptions ao;
  auto* attribute = app.add_subcommand("attribute", "attribute one sample");
  add_common(attribute, ac, true);
  add_value(attribute, av);
  add_decompose(attribute, ad);
  attribute->add_option("--partition", ao.partition, "decomposition document to reuse");
  attribute->add_option("--row", ao.row, "row of --data to explain");
  attribute->add_option("--sample", ao.sample, "comma-separated sample to explain");
  attribute->add_flag("--with-oracle", ao.with_oracle, "also compute exact per-feature Shapley values");

  Common rc;
  DecomposeOptions rd;
  ReproduceOptions ro;
  auto* reproduce = app.add_subcommand("reproduce", "run a synthetic experiment");
  reproduce->add_option("experiment", ro.experiment, "table1, table2, prop1, dummy or curves")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "prop1", "dummy", "curves"}));
  reproduce->add_option("--out", rc.out, "output path (stdout when omitted)");
  reproduce->add_option("--format", rc.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  reproduce->add_option("--seed", rc.seed, "root seed");
  reproduce->add_option("--samples", ro.samples, "override the sample count");
  reproduce->add_option("--mc", ro.mc, "override the Monte-Carlo budget")->check(CLI::PositiveNumber);
  reproduce->add_option("--rounds", ro.rounds, "boosting rounds for table2/dummy")->check(CLI::PositiveNumber);
  reproduce->add_option("--depth", ro.depth, "tree depth for table2/dummy")->check(CLI::Range(1, 3));
  reproduce->add_option("--lr", ro.learning_rate, "learning rate for table2/dummy")->check(CLI::PositiveNumber);
  add_decompose(reproduce, rd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*datagen) return cmd_datagen(dg);
    if (*fit) return cmd_fit(fo);
    if (*decompose_cmd) return cmd_decompose(dc, dv, dd, trace);
    if (*attribute) return cmd_attribute(ac, av, ad, ao);
    if (*reproduce) return cmd_reproduce(rc, rd, ro);
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kCapacity;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "unexpected failure: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
