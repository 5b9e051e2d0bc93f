// mtdemand command-line driver.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtdemand/bench.hpp"
#include "mtdemand/panel_io.hpp"
#include "mtdemand/retail.hpp"
#include "mtdemand/theory.hpp"

namespace fs = std::filesystem;
using namespace mtdemand;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path);
  return f;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return f;
}

struct GenerateArgs {
  std::string world = "AppendixB";
  std::size_t n_tasks = 5000;
  std::size_t k_obs = 2;
  double sigma_c = 0.0;
  std::uint64_t seed = 0;
  std::string out = "panels.csv";
};

int run_generate(const GenerateArgs& a) {
  const World w = parse_world(a.world);
  GenConfig c = w == World::Example1 ? GenConfig::example1(a.n_tasks, a.seed)
                : w == World::TwoPointProbe ? GenConfig::two_point_probe(a.k_obs, a.n_tasks, a.seed)
                                            : GenConfig::appendix_b(a.sigma_c, a.n_tasks, a.seed);
  if (w != World::Example1) c.k_obs = a.k_obs;
  if (w != World::Example1) c.confound_sigma = a.sigma_c;
  const auto panels = generate(c);
  auto out = open_out(a.out);
  if (fs::path(a.out).extension() == ".jsonl")
    write_panels_jsonl(out, panels);
  else
    write_panels_csv(out, panels);
  std::cerr << "wrote " << panels.size() << " tasks to " << a.out << '\n';
  return 0;
}

struct BenchArgs {
  std::string config;
  std::vector<std::string> set;
  std::string seeds;
  std::string out;
  std::size_t jobs = 1;
};

int run_bench(const BenchArgs& a) {
  ExperimentConfig cfg;
  if (!a.config.empty()) {
    auto in = open_in(a.config);
    cfg = parse_experiment_config(in, cfg);
  }
  for (const auto& kv : a.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidConfig, "--set expects key=value");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!a.seeds.empty()) apply_setting(cfg, "seeds", a.seeds);
  if (!a.out.empty()) cfg.out_dir = a.out;
  if (cfg.out_dir.empty()) cfg.out_dir = "bench_out";
  cfg.jobs = a.jobs;
  const BenchReport rep = run_benchmark(cfg);
  emit_outputs(rep, cfg, cfg.out_dir);
  std::printf("%-14s %7s %12s %12s %12s %12s %4s\n", "method", "sigma_c", "slope_mse", "+-",
              "icept_mse", "+-", "n");
  for (const auto& s : rep.summaries)
    std::printf("%-14s %7.3g %12.5g %12.3g %12.5g %12.3g %4zu\n",
                std::string(to_string(s.method)).c_str(), s.sigma_c, s.slope_mse, s.slope_hw,
                s.intercept_mse, s.intercept_hw, s.n_seeds);
  std::size_t failed = 0;
  for (const auto& c : rep.cells)
    if (!c.ok) ++failed;
  if (failed) std::cerr << failed << " cell(s) failed; see failures.csv\n";
  std::cerr << "outputs in " << cfg.out_dir << '\n';
  return 0;
}

struct TheoryArgs {
  std::uint64_t seed = 20240601;
  std::size_t draws = 100000;
  std::string out;
};

int run_theory(const TheoryArgs& a) {
  TheorySuiteConfig cfg;
  cfg.seed = a.seed;
  cfg.eigen_draws = a.draws;
  cfg.mc_tasks = a.draws;
  cfg.probe_tasks = a.draws;
  const TheoryReport rep = run_theory_suite(cfg);
  const std::string json = rep.to_json().dump(2);
  if (a.out.empty()) {
    std::cout << json << '\n';
  } else {
    auto f = open_out(a.out);
    f << json << '\n';
    for (const auto& c : rep.checks)
      std::printf("[%s] %s\n", c.pass ? "PASS" : "FAIL", c.check.c_str());
  }
  return rep.all_pass() ? 0 : 1;
}

struct RetailArgs {
  std::string input;
  std::size_t synthetic = 0;
  std::string kind = "static-top3";
  std::string embeddings;
  std::size_t k_obs = 2;
  int max_gap = 7;
  std::string out = "retail_out";
  std::vector<std::string> methods{"DCMOML", "META", "META-NA", "SHARED", "PER-TASK"};
  std::string seeds = "0..4";
  std::size_t width = 256;
  std::size_t depth = 2;
  std::uint64_t seed = 0;
};

std::vector<retail::TransactionRecord> load_records(const RetailArgs& a) {
  if (a.synthetic > 0) {
    retail::SyntheticRetailConfig sc;
    sc.n_products = a.synthetic;
    sc.seed = a.seed;
    auto rows = retail::generate_transactions(sc);
    std::stringstream ss;
    retail::write_transactions_csv(ss, rows);
    retail::ParseStats st;
    auto recs = retail::parse_transactions(ss, &st);
    std::cerr << "synthetic rows " << st.rows << ", kept " << st.kept << '\n';
    return recs;
  }
  if (a.input.empty()) throw Error(ErrorKind::InvalidConfig, "--input or --synthetic is required");
  auto in = open_in(a.input);
  retail::ParseStats st;
  auto recs = retail::parse_transactions(in, &st);
  std::cerr << "rows " << st.rows << ", kept " << st.kept << ", cancelled " << st.cancelled
            << ", non-positive " << st.nonpositive << ", malformed " << st.malformed << '\n';
  return recs;
}

std::vector<retail::RetailTask> build_tasks(const RetailArgs& a,
                                            const std::vector<retail::ProductHistory>& products) {
  std::optional<retail::FeatureMap> emb;
  if (!a.embeddings.empty()) {
    auto in = open_in(a.embeddings);
    emb = retail::read_embeddings_csv(in);
  }
  retail::TaskBuildStats st;
  std::vector<retail::RetailTask> tasks;
  if (retail::parse_task_kind(a.kind) == retail::TaskKind::StaticTop3)
    tasks = retail::build_static_top3(products, &st, emb ? &*emb : nullptr);
  else
    tasks = retail::build_exposure_sequence(products, {a.k_obs, a.max_gap}, &st,
                                            emb ? &*emb : nullptr);
  std::cerr << "products " << st.products << ", tasks " << st.retained << ", dropped "
            << st.dropped << '\n';
  return tasks;
}

int run_retail_build(const RetailArgs& a) {
  const auto products = retail::aggregate_products(load_records(a));
  const auto summary = retail::summarize(products);
  std::printf("products %zu, with >= 3 prices %zu, mean distinct prices %.4f, modal day share %.4f, "
              "top-2 day share %.4f\n",
              summary.products, summary.products_with_3_prices, summary.mean_distinct_prices,
              summary.modal_day_share, summary.top2_day_share);
  const auto tasks = build_tasks(a, products);
  const fs::path dir(a.out);
  auto panels = open_out(dir / "tasks.csv");
  auto features = open_out(dir / "features.csv");
  retail::write_tasks(panels, features, tasks);
  std::cerr << "wrote " << (dir / "tasks.csv").string() << " and "
            << (dir / "features.csv").string() << '\n';
  return 0;
}

int run_retail_bench(const RetailArgs& a) {
  const auto products = retail::aggregate_products(load_records(a));
  const auto tasks = build_tasks(a, products);
  retail::RetailBenchConfig cfg;
  cfg.methods.clear();
  for (const auto& m : a.methods) cfg.methods.push_back(retail::parse_retail_method(m));
  cfg.seeds = detail::parse_seeds(a.seeds);
  cfg.train.hidden_width = a.width;
  cfg.train.depth = a.depth;
  const auto results = retail::retail_bench(tasks, cfg);
  auto out = open_out(fs::path(a.out) / "retail_results.csv");
  out << "task_kind,method,rmse_mean,rmse_hw,n_seeds\n";
  for (const auto& r : results) {
    out << retail::to_string(retail::parse_task_kind(a.kind)) << ',' << retail::to_string(r.method)
        << ',' << csv::format_double(r.summary.mean) << ','
        << csv::format_double(r.summary.half_width()) << ',' << r.rmse.size() << '\n';
    std::printf("%-9s rmse %.5g +- %.3g (%zu seeds)\n", std::string(retail::to_string(r.method)).c_str(),
                r.summary.mean, r.summary.half_width(), r.rmse.size());
  }
  return 0;
}

void add_retail_source(CLI::App* cmd, RetailArgs& a) {
  cmd->add_option("--input", a.input, "Transaction CSV (eight standard columns)");
  cmd->add_option("--synthetic", a.synthetic, "Use N synthetic products instead of --input");
  cmd->add_option("--kind", a.kind, "static-top3 or exposure-sequence");
  cmd->add_option("--embeddings", a.embeddings, "CSV product_id,f_0,... overriding hashed features");
  cmd->add_option("--k", a.k_obs, "Training runs per exposure-sequence task");
  cmd->add_option("--max-gap", a.max_gap, "Longest unobserved gap (days) inside a run");
  cmd->add_option("--seed", a.seed, "Seed for synthetic data");
  cmd->add_option("--out", a.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task linear demand estimation under endogenous pricing"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write synthetic task panels");
  g->add_option("--world", gen.world, "Example1, AppendixB or TwoPointProbe");
  g->add_option("--n-tasks", gen.n_tasks, "Number of tasks");
  g->add_option("--k", gen.k_obs, "Observations per task");
  g->add_option("--sigma-c", gen.sigma_c, "Confounding noise (fraction of p*)");
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--out", gen.out, "Output file (.csv or .jsonl)");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run the synthetic benchmark grid");
  b->add_option("--config", bench.config, "key = value configuration file");
  b->add_option("--set", bench.set, "Override one setting, key=value (repeatable)");
  b->add_option("--seed", bench.seeds, "Seed list or range, e.g. 0..9");
  b->add_option("--out", bench.out, "Output directory");
  b->add_option("--jobs", bench.jobs, "Worker threads");

  TheoryArgs theory;
  auto* t = app.add_subcommand("theory-check", "Run the numerical theory checks");
  t->add_option("--seed", theory.seed, "Seed");
  t->add_option("--draws", theory.draws, "Monte Carlo draws per check");
  t->add_option("--out", theory.out, "Write the JSON report here");
  t->add_option("--jobs", bench.jobs, "Accepted for uniformity; checks run serially");

  auto* r = app.add_subcommand("retail", "Retail transaction pipeline");
  r->require_subcommand(1);
  RetailArgs rbuild, rbench;
  auto* rb = r->add_subcommand("build-tasks", "Build Static-Top3 or Exposure-Sequence tasks");
  add_retail_source(rb, rbuild);
  auto* rn = r->add_subcommand("bench", "Train retail methods and report holdout RMSE");
  add_retail_source(rn, rbench);
  rn->add_option("--methods", rbench.methods, "DCMOML META META-NA SHARED PER-TASK")->delimiter(',');
  rn->add_option("--seeds", rbench.seeds, "Training seeds, list or range");
  rn->add_option("--width", rbench.width, "Hidden width");
  rn->add_option("--depth", rbench.depth, "Hidden layers");
  std::size_t retail_jobs = 1;
  rn->add_option("--jobs", retail_jobs, "Accepted for uniformity; training runs serially");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*g) return run_generate(gen);
    if (*b) return run_bench(bench);
    if (*t) return run_theory(theory);
    if (*rb) return run_retail_build(rbuild);
    if (*rn) return run_retail_bench(rbench);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
