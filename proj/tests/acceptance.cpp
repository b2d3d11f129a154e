// Acceptance suite: one PASS/FAIL line per criterion, thresholds fixed below.
// Usage: acceptance <path-to-cli>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <unistd.h>

#include "shapley_sets/attribution.hpp"
#include "shapley_sets/decomposition.hpp"
#include "shapley_sets/eval.hpp"
#include "shapley_sets/experiments.hpp"
#include "shapley_sets/io.hpp"
#include "shapley_sets/models.hpp"
#include "shapley_sets/value_function.hpp"

using namespace shapsets;
namespace ex = shapsets::experiments;

namespace {

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------
constexpr double kGoldenSeconds = 5.0;
constexpr double kTable1SsTolerance = 1e-9;
constexpr double kTable1SvFloor = 0.05;
constexpr double kTable1Seconds = 60.0;
constexpr double kProp1StandardErrors = 3.0;
constexpr double kProp1Seconds = 120.0;
constexpr double kAxiomEfficiency = 1e-12;
constexpr double kAxiomTolerance = 1e-12;
constexpr double kWorkedGameTolerance = 1e-12;
constexpr double kTable2Pad = 1e-2;
constexpr double kTable2Seconds = 600.0;
constexpr double kDummyShift = 1e-2;
constexpr double kDummyIncrease = 1e-3;
constexpr double kComplexityR2 = 0.95;
constexpr double kExactSensitivity = 1e-10;
constexpr double kGaussianMeanErrors = 4.0;
constexpr double kGaussianCovRelative = 0.05;
constexpr std::size_t kGaussianOracleSamples = 100000;

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

int failures = 0;

void verdict(bool pass, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------

void golden() {
  Stopwatch clock;
  const auto runs = ex::golden_decompositions(kSeeds);
  const double elapsed = clock.seconds();
  std::map<std::string, int> hits;
  for (const auto& run : runs) hits[to_string(run.id)] += run.recovered() ? 1 : 0;

  ex::DecomposeSettings wide;
  wide.repetitions = 30;
  std::map<std::string, int> wide_hits;
  for (const auto& run : ex::golden_decompositions(kSeeds, wide)) {
    wide_hits[to_string(run.id)] += run.recovered() ? 1 : 0;
  }

  bool all = elapsed < kGoldenSeconds;
  std::string detail;
  for (const auto& [name, count] : hits) {
    all = all && count == static_cast<int>(kSeeds.size());
    detail += name + " " + std::to_string(count) + "/" + std::to_string(kSeeds.size()) + ", ";
  }
  detail += num(elapsed, 3) + " s (r=30 for reference:";
  for (const auto& [name, count] : wide_hits) detail += " " + name + " " + std::to_string(count);
  detail += ")";
  verdict(all, "golden decompositions at r=3 over 10 seeds", detail);
}

void table1() {
  Stopwatch clock;
  ex::Table1Config cfg;
  const auto rows = ex::table1(cfg);
  const double elapsed = clock.seconds();
  bool pass = elapsed < kTable1Seconds;
  std::string detail;
  for (const auto& row : rows) {
    const double ss = row.shapley_sets.mae.mean;
    const double sv = row.shapley_values.mae.mean;
    pass = pass && ss <= kTable1SsTolerance && sv > kTable1SvFloor;
    detail += to_string(row.id) + " SS " + num(ss) + " SV " + num(sv) + ", ";
  }
  detail += num(elapsed, 3) + " s";
  verdict(pass, "table1 SS MAE <= 1e-9 and SV MAE > 0.05", detail);
}

void prop1() {
  Stopwatch clock;
  ex::Prop1Config cfg;
  cfg.decomposition_seeds = kSeeds;
  const auto rows = ex::prop1(cfg);
  const double elapsed = clock.seconds();
  std::size_t bs_total = 0, bs_exact = 0;
  double bs_max = 0.0, cond_worst = 0.0;
  std::size_t cond_bad_rows = 0;
  for (const auto& row : rows) {
    if (row.kind == ValueKind::baseline) {
      bs_total += row.comparisons;
      bs_exact += row.bit_identical;
      bs_max = std::max(bs_max, row.max_abs_difference);
    } else {
      cond_worst = std::max(cond_worst, row.max_standard_errors);
      if (row.max_standard_errors > kProp1StandardErrors) ++cond_bad_rows;
    }
  }
  const bool pass = bs_exact == bs_total && cond_worst <= kProp1StandardErrors && elapsed < kProp1Seconds;
  verdict(pass, "super-feature game equivalence",
          "v_bs bit-identical " + std::to_string(bs_exact) + "/" + std::to_string(bs_total) +
              " (max |diff| " + num(bs_max) + "), v_cond worst " + num(cond_worst) + " SE with " +
              std::to_string(cond_bad_rows) + "/" + std::to_string(rows.size() / 2) +
              " partitions over 3 SE, " + num(elapsed, 3) + " s");
}

void axioms() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> size(1, 8);
  int bad_eff = 0, bad_dummy = 0, bad_sym = 0, bad_add = 0;
  for (int t = 0; t < 100; ++t) {
    const auto m = static_cast<std::size_t>(size(rng));
    const std::size_t count = std::size_t{1} << m;

    std::vector<double> table(count);
    for (std::size_t s = 1; s < count; ++s) table[s] = u(rng);
    const SetGame game = SetGame::from_table(table);
    const auto phi = exact_shapley(game);
    const double total = std::accumulate(phi.begin(), phi.end(), 0.0);
    if (std::abs(total - table[count - 1]) > kAxiomEfficiency * std::abs(table[count - 1])) ++bad_eff;

    // Dummy: player d never changes a coalition's worth.
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    const std::size_t d = pick(rng);
    std::vector<double> dummy(count);
    for (std::size_t s = 0; s < count; ++s) dummy[s] = table[s & ~(std::size_t{1} << d)];
    dummy[0] = 0.0;
    if (exact_shapley(SetGame::from_table(dummy))[d] != 0.0) ++bad_dummy;

    // Symmetry: relabel players by a random permutation.
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> relabelled(count);
    for (std::size_t s = 0; s < count; ++s) {
      std::size_t image = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (s >> i & 1U) image |= std::size_t{1} << perm[i];
      }
      relabelled[image] = table[s];
    }
    const auto phi_perm = exact_shapley(SetGame::from_table(relabelled));
    for (std::size_t i = 0; i < m; ++i) {
      if (std::abs(phi_perm[perm[i]] - phi[i]) > kAxiomTolerance) {
        ++bad_sym;
        break;
      }
    }

    // Additive game.
    std::vector<double> a(m);
    for (double& ai : a) ai = u(rng);
    std::vector<double> additive(count, 0.0);
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t i = 0; i < m; ++i) {
        if (s >> i & 1U) additive[s] += a[i];
      }
    }
    const auto phi_add = exact_shapley(SetGame::from_table(additive));
    for (std::size_t i = 0; i < m; ++i) {
      if (std::abs(phi_add[i] - a[i]) > kAxiomTolerance) {
        ++bad_add;
        break;
      }
    }
  }
  const bool pass = bad_eff + bad_dummy + bad_sym + bad_add == 0;
  verdict(pass, "shapley axioms on 100 random games",
          "violations: efficiency " + std::to_string(bad_eff) + ", dummy " + std::to_string(bad_dummy) +
              ", symmetry " + std::to_string(bad_sym) + ", additivity " + std::to_string(bad_add));
}

void worked_game() {
  // Independent check: average marginal contributions over all orderings.
  const std::vector<double> worth = {0, 1, 0, 1, 0, 1, 2, 3};
  std::vector<double> by_orderings(3, 0.0);
  std::vector<int> order = {0, 1, 2};
  int orderings = 0;
  do {
    std::size_t coalition = 0;
    for (int p : order) {
      const std::size_t next = coalition | (std::size_t{1} << p);
      by_orderings[static_cast<std::size_t>(p)] += worth[next] - worth[coalition];
      coalition = next;
    }
    ++orderings;
  } while (std::next_permutation(order.begin(), order.end()));
  const auto phi = exact_shapley(SetGame::from_table(worth));
  bool pass = true;
  std::string detail = "phi =";
  for (std::size_t i = 0; i < 3; ++i) {
    pass = pass && std::abs(phi[i] - 1.0) <= kWorkedGameTolerance &&
           std::abs(by_orderings[i] / orderings - 1.0) <= kWorkedGameTolerance;
    detail += " " + num(phi[i], 17);
  }
  verdict(pass, "three-player worked game", detail);
}

void example2() {
  const auto model = make_synthetic(SyntheticId::example2).first;
  GeneratorConfig gen = ex::independent_setup(11);
  gen.n = 3;
  const DatasetMatrix data = generate_data(gen);
  const auto result = ex::run_decomposition(*model, data, ex::pairwise_baseline(), {}, 11);
  const FeatureVector x = {1.0, 1.0, 1.0};
  const CoalitionValue v(*model, nullptr, ValueFunctionConfig::with_baseline({0.0, 0.0, 0.0}));
  const AttributionReport report = shapley_sets(v, x, result.partition);
  const Partition expected({FeatureIndexSet{0}, FeatureIndexSet{1, 2}}, 3);
  const bool pass = result.partition == expected && report.values == std::vector<double>{1.0, 2.0};
  std::string detail = "partition " + result.partition.to_string() + ", values";
  for (double value : report.values) detail += " " + num(value, 17);
  verdict(pass, "example 2 set values", detail);
}

void table2_and_dummy() {
  Stopwatch clock;
  const auto rows = ex::table2({}, true);
  const double elapsed = clock.seconds();
  const auto& g1 = rows[0];
  const auto& g2 = rows[1];
  auto scores = [](const ex::Table2Row& r) {
    return r.model + " SS " + num(r.shapley_sets.mae.mean) + " SVcond " +
           num(r.shapley_conditional.mae.mean) + " SVmarg " + num(r.shapley_marginal.mae.mean) +
           " partition " + r.partition.to_string();
  };
  const bool g1_ok = g1.shapley_sets.mae.mean <= g1.shapley_conditional.mae.mean &&
                     g1.shapley_conditional.mae.mean <= g1.shapley_marginal.mae.mean + kTable2Pad;
  const bool g2_ok = g2.shapley_sets.mae.mean < g2.shapley_conditional.mae.mean &&
                     g2.shapley_sets.mae.mean < g2.shapley_marginal.mae.mean;
  verdict(g1_ok && g2_ok && elapsed < kTable2Seconds, "table2 orderings",
          std::string(g1_ok ? "" : "[g1 ordering violated] ") + scores(g1) + "; " +
              std::string(g2_ok ? "" : "[g2 ordering violated] ") + scores(g2) + "; " + num(elapsed, 3) + " s");

  const ex::DummySummary s = ex::dummy_summary(rows);
  const double increase = s.conditional_mae_g3 - s.conditional_mae_g2;
  verdict(s.shapley_sets_shift < kDummyShift && increase > kDummyIncrease, "dummy robustness",
          "SS shift " + num(s.shapley_sets_shift) + ", SV cond MAE " + num(s.conditional_mae_g2) + " -> " +
              num(s.conditional_mae_g3) + " (" + scores(rows[2]) + ")");
}

void complexity() {
  const auto points = ex::complexity_sweep({8, 16, 32, 64}, 5);
  const ex::NLogNFit fit = ex::fit_n_log_n(points);

  const auto model = make_synthetic(SyntheticId::f1).first;
  const DatasetMatrix data = generate_data(ex::independent_setup(5));
  const Partition partition = make_synthetic(SyntheticId::f1).second.partition;
  const CoalitionValue v(*model, &data, ValueFunctionConfig::marginal());
  const AttributionReport report = shapley_sets(v, data.row(0), partition);
  const bool calls_ok = v.calls() == partition.group_count() && report.value_calls == partition.group_count();

  std::string detail = "evaluations";
  for (const auto& p : points) detail += " n=" + std::to_string(p.n) + ":" + std::to_string(p.evaluations);
  detail += ", c " + num(fit.c) + ", R^2 " + num(fit.r_squared) + ", shapley_sets calls " +
            std::to_string(v.calls()) + " for m=" + std::to_string(partition.group_count());
  verdict(fit.r_squared >= kComplexityR2 && calls_ok, "n log n evaluation growth", detail);
}

void sensitivity_bound() {
  std::size_t reports = 0, over = 0, exact_over = 0;
  double worst_ratio = 0.0, worst_exact = 0.0;
  std::map<std::string, std::size_t> over_by;
  std::size_t zero_epsilon = 0;
  for (SyntheticId id : {SyntheticId::f1, SyntheticId::f2, SyntheticId::f3}) {
    const auto model = make_synthetic(id).first;
    over_by[to_string(id)] = 0;
    for (std::uint64_t seed : kSeeds) {
      const DatasetMatrix data = generate_data(ex::independent_setup(seed));
      std::ostringstream trace;
      const auto result = ex::run_decomposition(*model, data, ex::pairwise_baseline(), {}, seed, &trace);
      const double bound = static_cast<double>(result.partition.group_count()) * result.epsilon_used;
      if (result.epsilon_used == 0.0) ++zero_epsilon;
      std::istringstream lines(trace.str());
      std::string line;
      while (std::getline(lines, line)) {
        const auto rows = nlohmann::json::parse(line).at("rows").get<std::vector<std::size_t>>();
        for (std::size_t k = 0; k + 1 < rows.size(); k += 2) {
          const auto x = data.row(rows[k]);
          const auto z = data.row(rows[k + 1]);
          const CoalitionValue v(*model, nullptr,
                                 ValueFunctionConfig::with_baseline(FeatureVector(z.begin(), z.end())));
          const double as = sensitivity(v, x, shapley_sets(v, x, result.partition));
          ++reports;
          if (as > bound) {
            ++over;
            ++over_by[to_string(id)];
          }
          worst_ratio = std::max(worst_ratio, bound > 0.0 ? as / bound : (as > 0.0 ? INFINITY : 0.0));

          AttributionReport sv;
          sv.partition = Partition::singletons(model->dimension());
          sv.values = shapley_over_features(v, x);
          const double as_sv = sensitivity(v, x, sv);
          worst_exact = std::max(worst_exact, as_sv);
          if (as_sv > kExactSensitivity) ++exact_over;
        }
      }
    }
  }
  std::string split;
  for (const auto& [name, count] : over_by) split += " " + name + ":" + std::to_string(count);
  verdict(over == 0 && exact_over == 0, "sensitivity bounds",
          std::to_string(over) + "/" + std::to_string(reports) + " SS reports above m*eps (" + split.substr(1) +
              ", worst " + num(worst_ratio) + " x bound, " + std::to_string(zero_epsilon) +
              " runs with eps 0), exact Shapley worst AS " + num(worst_exact));
}

// Rejection sampling from the joint: keep draws whose conditioning
// coordinates fall in a small box around x_S.
void gaussian_conditional() {
  std::mt19937_64 rng(777);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int bad = 0;
  double worst_mean = 0.0, worst_cov = 0.0;
  for (int g = 0; g < 20; ++g) {
    Eigen::Vector4d mu;
    Eigen::Matrix4d a;
    for (int i = 0; i < 4; ++i) {
      mu(i) = 2.0 * u(rng);
      for (int j = 0; j < 4; ++j) a(i, j) = normal(rng);
    }
    const Eigen::Matrix4d sigma = a * a.transpose() / 4.0 + 0.3 * Eigen::Matrix4d::Identity();
    const Eigen::Matrix4d chol = sigma.llt().matrixL();

    std::vector<std::size_t> idx = {0, 1, 2, 3};
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t s_size = 1 + static_cast<std::size_t>(g % 2);
    FeatureIndexSet S(std::vector<std::size_t>(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s_size)));
    std::vector<double> xs, half_width;
    for (std::size_t i : S) {
      const double sd = std::sqrt(sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
      xs.push_back(mu(static_cast<Eigen::Index>(i)) + 0.5 * sd * u(rng));
      half_width.push_back((s_size == 1 ? 0.05 : 0.1) * sd);
    }
    const FeatureIndexSet free = S.complement(4);
    const auto r = static_cast<Eigen::Index>(free.size());

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(r);
    Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(r, r);
    std::size_t accepted = 0;
    Eigen::Vector4d xi, draw;
    while (accepted < kGaussianOracleSamples) {
      for (int i = 0; i < 4; ++i) xi(i) = normal(rng);
      draw = mu + chol * xi;
      bool inside = true;
      for (std::size_t k = 0; k < S.size() && inside; ++k) {
        inside = std::abs(draw(static_cast<Eigen::Index>(S[k])) - xs[k]) <= half_width[k];
      }
      if (!inside) continue;
      Eigen::VectorXd y(r);
      for (Eigen::Index k = 0; k < r; ++k) y(k) = draw(static_cast<Eigen::Index>(free[static_cast<std::size_t>(k)]));
      sum += y;
      outer += y * y.transpose();
      ++accepted;
    }
    const double count = static_cast<double>(accepted);
    const Eigen::VectorXd mean = sum / count;
    const Eigen::MatrixXd cov = (outer - count * mean * mean.transpose()) / (count - 1.0);

    const ConditionalGaussian c = condition_gaussian(mu, sigma, S, xs, 1e-12);
    bool ok = true;
    for (Eigen::Index i = 0; i < r; ++i) {
      const double se = std::sqrt(cov(i, i) / count);
      const double z = std::abs(mean(i) - c.mean(i)) / se;
      worst_mean = std::max(worst_mean, z);
      ok = ok && z <= kGaussianMeanErrors;
      for (Eigen::Index j = 0; j < r; ++j) {
        const double scale = std::sqrt(c.covariance(i, i) * c.covariance(j, j));
        const double rel = std::abs(cov(i, j) - c.covariance(i, j)) / scale;
        worst_cov = std::max(worst_cov, rel);
        ok = ok && rel <= kGaussianCovRelative;
      }
    }
    if (!ok) ++bad;
  }
  verdict(bad == 0, "gaussian conditional vs rejection sampling",
          std::to_string(bad) + "/20 failing, worst mean " + num(worst_mean) + " SE, worst covariance " +
              num(worst_cov) + " relative");
}

// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void cli_determinism(const std::string& cli_arg) {
  namespace fs = std::filesystem;
  const std::string cli = fs::absolute(cli_arg).string();
  const fs::path root = fs::temp_directory_path() / ("shapley_sets_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  struct Command {
    std::string name;
    std::string args;
    std::vector<std::string> outputs;
  };
  const std::vector<Command> commands = {
      {"datagen", "datagen --n 7 --k 2000 --seed 42 --out data.csv --targets y.csv --model f1", {"data.csv", "y.csv"}},
      {"datagen-linear", "datagen --n 5 --k 2000 --dependence rho_link --seed 3 --out lin.csv --targets lin_y.csv --model linear_g",
       {"lin.csv", "lin_y.csv"}},
      {"fit-ols", "fit --data lin.csv --targets lin_y.csv --learner ols --out g1.json", {"g1.json"}},
      {"fit-boost", "fit --data lin.csv --targets lin_y.csv --learner boost --rounds 50 --out g2.json", {"g2.json"}},
      {"decompose", "decompose --data data.csv --model f1 --seed 9 --trace trace.jsonl --out dec.json",
       {"dec.json", "trace.jsonl"}},
      {"decompose-cond", "decompose --data lin.csv --model g2.json --value cond --mc 64 --out dec2.json", {"dec2.json"}},
      {"attribute", "attribute --data data.csv --model f1 --value marg --partition dec.json --row 3 --with-oracle --out att.json",
       {"att.json"}},
      {"attribute-cond", "attribute --data lin.csv --model g1.json --value cond --mc 64 --row 0 --format csv --out att.csv",
       {"att.csv"}},
      {"reproduce-table1", "reproduce table1 --samples 20 --out t1.json", {"t1.json"}},
      {"reproduce-table2", "reproduce table2 --samples 5 --rounds 50 --format csv --out t2.csv", {"t2.csv"}},
      {"reproduce-dummy", "reproduce dummy --samples 5 --rounds 50 --out dummy.json", {"dummy.json"}},
      {"reproduce-prop1", "reproduce prop1 --samples 3 --mc 256 --out p1.json", {"p1.json"}},
      {"reproduce-curves", "reproduce curves --format csv --out curves.csv", {"curves.csv"}},
  };
  std::vector<std::string> mismatched;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = root / ("run" + std::to_string(pass));
    fs::create_directories(dir);
    for (const auto& c : commands) {
      const std::string line = "cd '" + dir.string() + "' && '" + cli + "' " + c.args + " > " + c.name +
                               ".stdout 2> " + c.name + ".stderr";
      if (std::system(line.c_str()) != 0) mismatched.push_back(c.name + " (exit status)");
    }
  }
  std::size_t compared = 0;
  for (const auto& c : commands) {
    std::vector<std::string> files = c.outputs;
    files.push_back(c.name + ".stdout");
    for (const auto& f : files) {
      const std::string a = slurp(root / "run0" / f);
      const std::string b = slurp(root / "run1" / f);
      ++compared;
      if (a.empty() && f.find(".stdout") == std::string::npos) mismatched.push_back(f + " (empty)");
      if (a != b) mismatched.push_back(f);
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(compared) + " files compared";
  for (const auto& m : mismatched) detail += ", differs: " + m;
  verdict(mismatched.empty(), "cli determinism", detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <shapley_sets_cli>\n", argv[0]);
    return 2;
  }
  golden();
  table1();
  prop1();
  axioms();
  worked_game();
  example2();
  table2_and_dummy();
  complexity();
  sensitivity_bound();
  gaussian_conditional();
  cli_determinism(argv[1]);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
