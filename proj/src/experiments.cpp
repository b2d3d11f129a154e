#include "shapley_sets/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "shapley_sets/boosting.hpp"
#include "shapley_sets/error.hpp"
#include "shapley_sets/rng.hpp"

namespace shapsets::experiments {

namespace {

constexpr SyntheticId kNonlinear[] = {SyntheticId::f1, SyntheticId::f2, SyntheticId::f3};

std::uint64_t key(SyntheticId id) { return static_cast<std::uint64_t>(id); }

Matrix draw_samples(GeneratorConfig gen, std::size_t count) {
  gen.k = std::max<std::size_t>(count, 2);
  Matrix m = generate_samples(gen);
  return m.topRows(static_cast<Eigen::Index>(count));
}

std::span<const double> row_of(const Matrix& m, Eigen::Index j) {
  return {m.data() + j * m.cols(), static_cast<std::size_t>(m.cols())};
}

void set_row(Matrix& m, Eigen::Index j, const std::vector<double>& values) {
  for (Eigen::Index i = 0; i < m.cols(); ++i) m(j, i) = values[static_cast<std::size_t>(i)];
}

MethodScore score(std::string method, Matrix attributions, const Matrix& truth) {
  MethodScore s;
  s.method = std::move(method);
  s.mae = mae(attributions, truth);
  s.attributions = std::move(attributions);
  return s;
}

}  // namespace

ValueFunctionConfig pairwise_baseline() {
  ValueFunctionConfig cfg;
  cfg.kind = ValueKind::baseline;
  return cfg;
}

GeneratorConfig independent_setup(std::uint64_t seed, std::size_t k) {
  GeneratorConfig gen;
  gen.n = 7;
  gen.k = k;
  gen.dependence = Dependence::iid;
  gen.seed = seed;
  return gen;
}

DecompositionResult run_decomposition(const PredictiveModel& model, const DatasetMatrix& data,
                                      const ValueFunctionConfig& value, const DecomposeSettings& s,
                                      std::uint64_t seed, std::ostream* trace) {
  const EpsilonPolicy eps =
      compute_epsilon(model, data, s.alpha, s.epsilon_candidates, substream_seed(seed, {1}));
  InteractionProbe probe(value, s.repetitions, substream_seed(seed, {2}));
  probe.set_trace(trace);
  return decompose(model, data, probe, eps);
}

std::vector<GoldenRun> golden_decompositions(const std::vector<std::uint64_t>& seeds,
                                             const DecomposeSettings& s) {
  std::vector<GoldenRun> runs;
  for (SyntheticId id : kNonlinear) {
    const auto [model, spec] = make_synthetic(id);
    for (std::uint64_t seed : seeds) {
      const DatasetMatrix data = generate_data(independent_setup(seed));
      GoldenRun run;
      run.id = id;
      run.seed = seed;
      run.expected = spec.partition;
      run.result = run_decomposition(*model, data, pairwise_baseline(), s, seed);
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

std::vector<Table1Row> table1(const Table1Config& cfg) {
  std::vector<Table1Row> rows;
  for (SyntheticId id : kNonlinear) {
    const auto [model, spec] = make_synthetic(id);
    const DatasetMatrix data =
        generate_data(independent_setup(substream_seed(cfg.seed, {key(id), 0})));
    Table1Row row;
    row.id = id;
    row.partition = run_decomposition(*model, data, pairwise_baseline(), cfg.decomposition,
                                      substream_seed(cfg.seed, {key(id), 1}))
                        .partition;
    const Matrix samples =
        draw_samples(independent_setup(substream_seed(cfg.seed, {key(id), 2})), cfg.samples);
    const FeatureVector mean = data.mean_vector();
    const CoalitionValue v(*model, &data, ValueFunctionConfig::marginal());

    const auto k = samples.rows();
    const auto n = samples.cols();
    Matrix ss(k, n), sv(k, n), truth(k, n);
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto x = row_of(samples, j);
      set_row(ss, j, per_feature(row.partition, shapley_sets(v, x, row.partition).values));
      set_row(sv, j, shapley_over_features(v, x));
      set_row(truth, j, ground_truth_per_feature(spec, x, mean));
    }
    row.shapley_sets = score("SS", std::move(ss), truth);
    row.shapley_values = score("SV", std::move(sv), truth);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Table2Row> table2(const Table2Config& cfg, bool with_dummy) {
  GeneratorConfig train_gen;
  train_gen.n = 5;
  train_gen.k = cfg.train;
  train_gen.dependence = Dependence::rho_link;
  train_gen.rho = cfg.rho;
  train_gen.seed = substream_seed(cfg.seed, {0});
  GeneratorConfig test_gen = train_gen;
  test_gen.seed = substream_seed(cfg.seed, {1});

  const auto target = make_synthetic(SyntheticId::linear_g).first;
  const std::vector<double> c = {1.0, 0.5, 0.2, 0.8, 0.5, 0.0};

  auto evaluate = [&](const std::string& name, const PredictiveModel& g, const Matrix& train,
                      const std::vector<double>& y, const Matrix& test) {
    Table2Row row;
    row.model = name;
    row.n = g.dimension();
    row.train_r_squared = r_squared(y, predict_rows(g, train));
    const DatasetMatrix data = estimate_statistics(train);
    const ValueFunctionConfig cond =
        ValueFunctionConfig::conditional(cfg.mc_samples, substream_seed(cfg.seed, {3}));
    row.partition = run_decomposition(g, data, cond, cfg.decomposition, substream_seed(cfg.seed, {2}))
                        .partition;

    const CoalitionValue vc(g, &data, cond);
    const CoalitionValue vm(g, &data, ValueFunctionConfig::marginal());
    const Eigen::VectorXd& mu = data.mean();
    const auto k = test.rows();
    const auto n = test.cols();
    Matrix ss(k, n), marg(k, n), condl(k, n), truth(k, n), group_truth(k, n);
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto x = row_of(test, j);
      const auto stream = static_cast<std::uint64_t>(j);
      for (Eigen::Index i = 0; i < n; ++i) truth(j, i) = c[static_cast<std::size_t>(i)] * (x[i] - mu(i));
      for (const auto& group : row.partition.groups()) {
        double sum = 0.0;
        for (std::size_t i : group) sum += truth(j, static_cast<Eigen::Index>(i));
        for (std::size_t i : group) group_truth(j, static_cast<Eigen::Index>(i)) = sum;
      }
      set_row(ss, j, per_feature(row.partition, shapley_sets(vc, x, row.partition, stream).values));
      set_row(condl, j, shapley_over_features(vc, x, stream));
      set_row(marg, j, shapley_over_features(vm, x));
    }
    row.shapley_sets = score("SS cond", std::move(ss), group_truth);
    row.shapley_marginal = score("SV marg", std::move(marg), truth);
    row.shapley_conditional = score("SV cond", std::move(condl), truth);
    return row;
  };

  const Matrix train = generate_samples(train_gen);
  const Matrix test = generate_samples(test_gen);
  const std::vector<double> y = predict_rows(*target, train);

  std::vector<Table2Row> rows;
  const auto g1 = fit_ols(train, y);
  rows.push_back(evaluate("g1", *g1, train, y, test));
  const auto g2 = fit_boosted_stumps(train, y, cfg.boost_rounds, cfg.boost_depth, cfg.learning_rate);
  rows.push_back(evaluate("g2", *g2, train, y, test));
  if (with_dummy) {
    train_gen.dependence = Dependence::with_dummy;
    test_gen.dependence = Dependence::with_dummy;
    const Matrix train3 = generate_samples(train_gen);
    const Matrix test3 = generate_samples(test_gen);
    const auto g3 =
        fit_boosted_stumps(train3, y, cfg.boost_rounds, cfg.boost_depth, cfg.learning_rate);
    rows.push_back(evaluate("g3", *g3, train3, y, test3));
  }
  return rows;
}

DummySummary dummy_summary(const std::vector<Table2Row>& rows) {
  auto find = [&](const std::string& name) -> const Table2Row& {
    for (const auto& row : rows) {
      if (row.model == name) return row;
    }
    throw PreconditionError("table has no row for " + name);
  };
  const Table2Row& g2 = find("g2");
  const Table2Row& g3 = find("g3");
  const Matrix& before = g2.shapley_sets.attributions;
  const Matrix after = g3.shapley_sets.attributions.leftCols(before.cols());
  DummySummary s;
  s.shapley_sets_shift = mae(after, before).mean;
  s.conditional_mae_g2 = g2.shapley_conditional.mae.mean;
  s.conditional_mae_g3 = g3.shapley_conditional.mae.mean;
  return s;
}

std::vector<Prop1Row> prop1(const Prop1Config& cfg) {
  const std::vector<GoldenRun> runs = golden_decompositions(cfg.decomposition_seeds, cfg.decomposition);
  std::vector<Prop1Row> rows;
  std::vector<std::pair<SyntheticId, Partition>> seen;
  std::uint64_t case_index = 0;
  for (const GoldenRun& run : runs) {
    const auto found = std::find_if(seen.begin(), seen.end(), [&](const auto& entry) {
      return entry.first == run.id && entry.second == run.result.partition;
    });
    if (found != seen.end()) continue;
    seen.emplace_back(run.id, run.result.partition);
    const Partition& partition = run.result.partition;
    const auto model = make_synthetic(run.id).first;
    const DatasetMatrix data = generate_data(independent_setup(run.seed));
    const Matrix samples =
        draw_samples(independent_setup(substream_seed(cfg.seed, {case_index, 0})), cfg.samples);

    Rng rng = make_rng(cfg.seed, {case_index, 1});
    std::uniform_int_distribution<std::size_t> pick(0, data.rows() - 1);
    const auto z = data.row(pick(rng));
    const CoalitionValue vb(*model, nullptr,
                            ValueFunctionConfig::with_baseline(FeatureVector(z.begin(), z.end())));
    const ValueFunctionConfig cond =
        ValueFunctionConfig::conditional(cfg.mc_samples, substream_seed(cfg.seed, {case_index, 2}));
    const CoalitionValue vc(*model, &data, cond);
    ++case_index;

    Prop1Row bs, cd;
    bs.function = cd.function = to_string(run.id);
    bs.kind = ValueKind::baseline;
    cd.kind = ValueKind::conditional;
    bs.partition = cd.partition = partition;
    bs.samples = cd.samples = static_cast<std::size_t>(samples.rows());
    for (Eigen::Index j = 0; j < samples.rows(); ++j) {
      const auto x = row_of(samples, j);
      const auto stream = static_cast<std::uint64_t>(j);

      const std::vector<double> ss = shapley_sets(vb, x, partition).values;
      const std::vector<double> phi = exact_shapley(super_feature_game(vb, x, partition));
      for (std::size_t g = 0; g < ss.size(); ++g) {
        ++bs.comparisons;
        if (ss[g] == phi[g]) ++bs.bit_identical;
        bs.max_abs_difference = std::max(bs.max_abs_difference, std::abs(ss[g] - phi[g]));
      }

      const std::vector<double> ss_c = shapley_sets(vc, x, partition, stream).values;
      const std::vector<double> phi_c = exact_shapley(super_feature_game(vc, x, partition, stream));
      for (std::size_t g = 0; g < ss_c.size(); ++g) {
        const double diff = std::abs(ss_c[g] - phi_c[g]);
        const double se =
            v_cond_estimate(*model, data, x, partition.group(g), cond, stream).standard_error;
        ++cd.comparisons;
        if (ss_c[g] == phi_c[g]) ++cd.bit_identical;
        cd.max_abs_difference = std::max(cd.max_abs_difference, diff);
        const double ratio = diff == 0.0 ? 0.0 : (se > 0.0 ? diff / se : INFINITY);
        cd.max_standard_errors = std::max(cd.max_standard_errors, ratio);
      }
    }
    rows.push_back(std::move(bs));
    rows.push_back(std::move(cd));
  }
  return rows;
}

std::vector<CurveRecord> curves(const CurvesConfig& cfg) {
  const auto [model, spec] = make_synthetic(cfg.id);
  GeneratorConfig gen = independent_setup(substream_seed(cfg.seed, {0}));
  gen.n = spec.n;
  const DatasetMatrix data = generate_data(gen);
  const Partition partition = run_decomposition(*model, data, pairwise_baseline(), cfg.decomposition,
                                                substream_seed(cfg.seed, {1}))
                                  .partition;
  gen.seed = substream_seed(cfg.seed, {2});
  const Matrix samples = draw_samples(gen, cfg.samples);
  const CoalitionValue v(*model, &data, ValueFunctionConfig::marginal());

  std::vector<CurveRecord> out;
  for (Eigen::Index j = 0; j < samples.rows(); ++j) {
    const auto x = row_of(samples, j);
    const AttributionReport ss = shapley_sets(v, x, partition);
    out.push_back({"SS", static_cast<std::size_t>(j), partition, deletion_curve(v, x, ss)});

    AttributionReport sv;
    sv.partition = Partition::singletons(spec.n);
    sv.values = shapley_over_features(v, x);
    sv.sample.assign(x.begin(), x.end());
    out.push_back({"SV", static_cast<std::size_t>(j), sv.partition, deletion_curve(v, x, sv)});
  }
  return out;
}

std::shared_ptr<const PredictiveModel> additive_model(std::size_t n) {
  return std::make_shared<FunctionModel>(n, [](std::span<const double> x) {
    double y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) y += (1.0 + static_cast<double>(i % 3) / 2.0) * x[i];
    return y;
  });
}

std::vector<ComplexityPoint> complexity_sweep(const std::vector<std::size_t>& sizes,
                                              std::uint64_t seed, const DecomposeSettings& s) {
  std::vector<ComplexityPoint> points;
  for (std::size_t n : sizes) {
    GeneratorConfig gen;
    gen.n = n;
    gen.k = 500;
    gen.seed = substream_seed(seed, {n});
    const DatasetMatrix data = generate_data(gen);
    const auto model = additive_model(n);
    const DecompositionResult r =
        run_decomposition(*model, data, pairwise_baseline(), s, substream_seed(seed, {n, 1}));
    points.push_back({n, r.value_evaluations});
  }
  return points;
}

NLogNFit fit_n_log_n(const std::vector<ComplexityPoint>& points) {
  if (points.size() < 2) throw PreconditionError("a growth fit needs at least two points");
  double ty = 0.0, tt = 0.0, mean = 0.0;
  for (const auto& p : points) {
    const double t = static_cast<double>(p.n) * std::log2(static_cast<double>(p.n));
    ty += t * static_cast<double>(p.evaluations);
    tt += t * t;
    mean += static_cast<double>(p.evaluations);
  }
  mean /= static_cast<double>(points.size());
  NLogNFit fit;
  fit.c = ty / tt;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& p : points) {
    const double y = static_cast<double>(p.evaluations);
    const double t = static_cast<double>(p.n) * std::log2(static_cast<double>(p.n));
    ss_res += (y - fit.c * t) * (y - fit.c * t);
    ss_tot += (y - mean) * (y - mean);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace shapsets::experiments
