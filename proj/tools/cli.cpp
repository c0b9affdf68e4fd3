#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "odebc/analysis.hpp"
#include "odebc/bcsearch.hpp"
#include "odebc/config.hpp"
#include "odebc/errors.hpp"
#include "odebc/parallel.hpp"
#include "odebc/presets.hpp"
#include "odebc/rng.hpp"
#include "odebc/tensor_io.hpp"
#include "odebc/verify.hpp"
#include "odebc/worldgen.hpp"

namespace odebc::cli {

namespace fs = std::filesystem;
using config::Json;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  int workers = 0;
  std::string out;
  bool pgm = false;
  std::string bc_path;
  std::string y_path;
  std::string output_path;
};

/// Everything a subcommand needs, resolved once.
struct Context {
  Json cfg;
  int workers = 1;
  fs::path out;
  GmmWorld world;
  DiscreteSchedule schedule;
  GmmDenoiser model;
  SolverConfig solver;
  DistanceMetric metric;
};

Context make_context(const Options& opt) {
  Json file;
  if (!opt.config_path.empty()) {
    file = config::load_file(opt.config_path);
    // A run manifest carries its configuration under "config".
    if (file.contains("command") && file.contains("config")) file = file.at("config");
  }
  Json cfg = config::resolve(file, opt.sets);
  if (!opt.out.empty()) cfg["run"]["out"] = opt.out;
  int workers = opt.workers > 0 ? opt.workers : cfg["run"]["workers"].get<int>();
  if (workers <= 0) workers = default_workers();
  GmmWorld world = config::world_from_json(cfg["world"]);
  DiscreteSchedule s = default_schedule();
  GmmDenoiser model(world, s);
  SolverConfig solver = config::solver_from_json(cfg["solver"], s);
  DistanceMetric metric = config::metric_from_json(cfg["metric"]);
  return {cfg, workers, fs::path(cfg["run"]["out"].get<std::string>()), world, s, model,
          solver, metric};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

/// Resolved configuration without the run section, so the echo does not
/// depend on the worker count or output location.
void write_manifest(const Context& ctx, const std::string& command) {
  Json echo = ctx.cfg;
  echo.erase("run");
  const Json manifest{{"command", command}, {"version", "0.1.0"}, {"config", echo}};
  write_text(ctx.out / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<ReferencePair> load_pairs(const Context& ctx) {
  const auto& data = ctx.cfg["data"];
  const auto dir = data["dir"].get<std::string>();
  std::vector<ReferencePair> pairs =
      dir.empty() ? sample_pairs(ctx.world, data["count"].get<std::size_t>(),
                                 data["seed"].get<std::uint64_t>())
                  : read_pairs(dir);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    require(pairs[i].z.size() == ctx.world.dim(),
            "pair " + std::to_string(i) + ": HR image does not match the world shape " +
                ctx.world.hr_shape().str());
    require(pairs[i].y.size() == ctx.world.lr_dim(),
            "pair " + std::to_string(i) + ": LR image does not match the world LR shape " +
                ctx.world.lr_shape().str());
  }
  return pairs;
}

ReferenceSet slice(const std::vector<ReferencePair>& pairs, std::size_t begin, std::size_t count,
                   const std::string& what) {
  require(count >= 1, what + " needs at least one pair");
  require(begin + count <= pairs.size(), what + " needs pairs [" + std::to_string(begin) + ", " +
                                             std::to_string(begin + count) + ") but the data has " +
                                             std::to_string(pairs.size()));
  ReferenceSet r;
  r.pairs.assign(pairs.begin() + static_cast<std::ptrdiff_t>(begin),
                 pairs.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return r;
}

std::size_t R_of(const Context& ctx) { return ctx.cfg["search"]["R"].get<std::size_t>(); }

ReferenceSet holdout_of(const Context& ctx, const std::vector<ReferencePair>& pairs) {
  return slice(pairs, R_of(ctx), ctx.cfg["search"]["holdout"].get<std::size_t>(), "holdout");
}

void render(const Context& ctx, const fs::path& path, const Tensor& t) {
  const auto [lo, hi] = value_range(ctx.world);
  write_pgm(path, t, lo, hi);
}

SearchResult run_search(const Context& ctx, const ReferenceSet& refs) {
  const auto& sc = ctx.cfg["search"];
  const CandidateSet cands(sc["seed"].get<std::uint64_t>(), sc["K"].get<std::size_t>(),
                           ctx.world.hr_shape());
  return search_optimal_bc(cands, refs, ctx.schedule, ctx.solver, ctx.model, ctx.metric,
                           ctx.workers);
}

std::string table_csv(const SearchResult& r) {
  std::ostringstream os;
  os << "candidate";
  for (std::size_t i = 0; i < r.references; ++i) os << ",ref_" << i;
  os << '\n';
  for (std::size_t k = 0; k < r.candidates; ++k) {
    os << k;
    for (std::size_t i = 0; i < r.references; ++i) os << ',' << format_double(r.at(k, i));
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

int cmd_gen_world(const Options& opt, std::ostream& out) {
  const auto ctx = make_context(opt);
  ensure_dir(ctx.out);
  const auto& data = ctx.cfg["data"];
  const auto seed = data["seed"].get<std::uint64_t>();
  const auto pairs = sample_pairs(ctx.world, data["count"].get<std::size_t>(), seed);
  write_text(ctx.out / "world.json", config::world_to_json(ctx.world).dump(2) + "\n");
  write_pairs(ctx.out / "pairs", pairs, seed);
  if (opt.pgm)
    for (std::size_t i = 0; i < std::min<std::size_t>(pairs.size(), 4); ++i)
      render(ctx, ctx.out / ("z_" + std::to_string(i) + ".pgm"), pairs[i].z);
  write_manifest(ctx, "gen-world");
  out << "wrote " << pairs.size() << " pairs to " << (ctx.out / "pairs").string() << '\n';
  return 0;
}

int cmd_search(const Options& opt, std::ostream& out) {
  const auto ctx = make_context(opt);
  ensure_dir(ctx.out);
  const auto pairs = load_pairs(ctx);
  const auto refs = slice(pairs, 0, R_of(ctx), "reference set");
  const auto res = run_search(ctx, refs);
  const auto& sc = ctx.cfg["search"];

  write_tensor(ctx.out / "best_bc.t", res.best_bc);
  write_text(ctx.out / "objective_table.csv", table_csv(res));
  std::ostringstream summary;
  summary << "seed,K,R,solver,metric,best_index,best_sum\n"
          << sc["seed"].get<std::uint64_t>() << ',' << res.candidates << ',' << res.references
          << ',' << ctx.solver.label() << ',' << ctx.metric.name << ',' << res.best_index << ','
          << format_double(res.best_sum()) << '\n';
  write_text(ctx.out / "summary.csv", summary.str());

  const auto n_holdout = sc["holdout"].get<std::size_t>();
  if (n_holdout > 0) {
    const auto holdout = holdout_of(ctx, pairs);
    const auto rep = held_out_gain(res.best_bc, holdout, ctx.schedule, ctx.solver, ctx.model,
                                   ctx.metric, sc["n_random"].get<int>(),
                                   rng::derive_key(sc["seed"].get<std::uint64_t>(),
                                                   rng::Stream::kRandomBc, 0),
                                   ctx.workers);
    std::ostringstream h;
    h << "bc_mean,random_mean,random_std,gap_std_units,n_random,holdout\n"
      << format_double(rep.bc_mean) << ',' << format_double(rep.random_mean) << ','
      << format_double(rep.random_std) << ',' << format_double(rep.gap_std_units) << ','
      << rep.random_means.size() << ',' << holdout.size() << '\n';
    write_text(ctx.out / "heldout.csv", h.str());
    std::ostringstream rm;
    rm << "random_bc,mean\n";
    for (std::size_t i = 0; i < rep.random_means.size(); ++i)
      rm << i << ',' << format_double(rep.random_means[i]) << '\n';
    write_text(ctx.out / "random_bc.csv", rm.str());
    out << "held-out mean " << format_double(rep.bc_mean) << " vs random "
        << format_double(rep.random_mean) << " +- " << format_double(rep.random_std) << " (gap "
        << format_double(rep.gap_std_units) << " std)\n";
  }
  if (opt.pgm)
    for (std::size_t i = 0; i < std::min<std::size_t>(refs.size(), 4); ++i) {
      render(ctx, ctx.out / ("sample_" + std::to_string(i) + ".pgm"),
             sample_with_bc(res.best_bc, refs.pairs[i].y, ctx.schedule, ctx.solver, ctx.model));
      render(ctx, ctx.out / ("z_" + std::to_string(i) + ".pgm"), refs.pairs[i].z);
    }
  write_manifest(ctx, "search");
  out << "best_index " << res.best_index << " best_sum " << format_double(res.best_sum()) << '\n';
  return 0;
}

int cmd_sample(const Options& opt, std::ostream& out) {
  const auto ctx = make_context(opt);
  require(!opt.bc_path.empty() && !opt.y_path.empty() && !opt.output_path.empty(),
          "sample needs --bc, --y and --output");
  const Tensor bc = read_tensor(opt.bc_path);
  const Tensor y = read_tensor(opt.y_path);
  require(bc.size() == ctx.world.dim(), "--bc " + opt.bc_path + ": shape " + bc.shape().str() +
                                            " does not match the world HR shape " +
                                            ctx.world.hr_shape().str());
  require(y.size() == ctx.world.lr_dim(), "--y " + opt.y_path + ": shape " + y.shape().str() +
                                              " does not match the world LR shape " +
                                              ctx.world.lr_shape().str());
  const Tensor x_T(ctx.world.hr_shape(), bc.vec());
  const Tensor x0 = sample(ctx.model, ctx.schedule, ctx.solver, x_T, Condition::observed(y));
  write_tensor(opt.output_path, x0);
  if (opt.pgm) render(ctx, fs::path(opt.output_path).replace_extension(".pgm"), x0);
  out << "wrote " << opt.output_path << '\n';
  return 0;
}

int cmd_benchmark(const Options& opt, std::ostream& out) {
  const auto ctx = make_context(opt);
  ensure_dir(ctx.out);
  const auto pairs = load_pairs(ctx);
  const auto holdout = holdout_of(ctx, pairs);
  Tensor bc;
  if (!opt.bc_path.empty()) {
    bc = read_tensor(opt.bc_path);
    require(bc.size() == ctx.world.dim(), "--bc " + opt.bc_path + " does not match the HR shape");
    bc = Tensor(ctx.world.hr_shape(), bc.vec());
  } else {
    bc = run_search(ctx, slice(pairs, 0, R_of(ctx), "reference set")).best_bc;
  }
  const auto& bm = ctx.cfg["benchmark"];
  std::vector<SolverConfig> solvers, det;
  for (const auto& j : bm["solvers"]) {
    solvers.push_back(config::solver_from_json(j, ctx.schedule));
    if (solvers.back().deterministic()) det.push_back(solvers.back());
  }
  std::vector<DistanceMetric> metrics;
  for (const auto& m : bm["metrics"])
    metrics.push_back(config::metric_from_json(Json{{"name", m}, {"peak", ctx.cfg["metric"]["peak"]}}));
  const auto seed = bm["seed"].get<std::uint64_t>();
  auto rows = benchmark_samplers(ctx.model, ctx.schedule, holdout, solvers, std::nullopt, metrics,
                                 seed, ctx.workers);
  if (!det.empty()) {
    const auto with_bc = benchmark_samplers(ctx.model, ctx.schedule, holdout, det, bc, metrics,
                                            seed, ctx.workers);
    rows.insert(rows.end(), with_bc.begin(), with_bc.end());
  }
  const auto csv = benchmark_csv(rows);
  write_text(ctx.out / "benchmark.csv", csv);
  write_manifest(ctx, "benchmark");
  out << csv;
  return 0;
}

int cmd_ablate(const Options& opt, std::ostream& out, bool vary_r) {
  const auto ctx = make_context(opt);
  ensure_dir(ctx.out);
  const auto pairs = load_pairs(ctx);
  const auto holdout = holdout_of(ctx, pairs);
  const auto& ab = ctx.cfg["ablation"];
  const int repeats = ab["repeats"].get<int>();
  const auto seed = ab["seed"].get<std::uint64_t>();
  AblationCurve curve;
  std::string stem;
  if (vary_r) {
    const auto pool = slice(pairs, 0, R_of(ctx), "reference pool");
    curve = ablate_reference_size(ctx.model, ctx.schedule, pool, holdout,
                                  ab["r_sizes"].get<std::vector<std::size_t>>(), repeats,
                                  ab["k_fixed"].get<std::size_t>(), ctx.solver, ctx.metric, seed,
                                  ctx.workers);
    stem = "ablate_r";
  } else {
    const auto refs = slice(pairs, 0, ab["r_fixed"].get<std::size_t>(), "fixed reference set");
    curve = ablate_candidate_size(ctx.model, ctx.schedule, refs, holdout,
                                  ab["k_sizes"].get<std::vector<std::size_t>>(), repeats,
                                  ctx.solver, ctx.metric, seed, ctx.workers);
    stem = "ablate_k";
  }
  write_text(ctx.out / (stem + ".csv"), ablation_csv(curve));
  const auto summary = ablation_summary_csv(curve);
  write_text(ctx.out / (stem + "_summary.csv"), summary);
  write_manifest(ctx, vary_r ? "ablate-r" : "ablate-k");
  out << summary;
  return 0;
}

int cmd_independence(const Options& opt, std::ostream& out) {
  const auto ctx = make_context(opt);
  ensure_dir(ctx.out);
  const auto pairs = load_pairs(ctx);
  const auto& ic = ctx.cfg["independence"];
  const auto conds = slice(pairs, 0, ic["conditions"].get<std::size_t>(), "independence study");
  const CandidateSet cands(ic["seed"].get<std::uint64_t>(), ic["candidates"].get<std::size_t>(),
                           ctx.world.hr_shape());
  const auto res = independence_matrix(ctx.model, ctx.schedule, conds, cands, ctx.solver,
                                       ctx.metric, ctx.workers);
  write_text(ctx.out / "independence.csv", independence_csv(res));
  write_text(ctx.out / "sequences.csv", sequences_csv(res));
  if (opt.pgm)
    for (std::size_t k = 0; k < std::min<std::size_t>(cands.size(), 3); ++k)
      for (std::size_t j = 0; j < conds.size(); ++j)
        render(ctx,
               ctx.out / ("sample_c" + std::to_string(k) + "_y" + std::to_string(j) + ".pgm"),
               sample_with_bc(cands.candidate(k), conds.pairs[j].y, ctx.schedule, ctx.solver,
                              ctx.model));
  write_manifest(ctx, "independence");
  out << "median off-diagonal pearson " << format_double(res.median_off_diagonal()) << '\n';
  return 0;
}

int cmd_verify(const Options& opt, std::ostream& out) {
  int workers = opt.workers > 0 ? opt.workers : default_workers();
  bool ok = true;
  for (const auto& c : run_verify_suite(workers)) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Boundary-condition search for diffusion samplers on analytic worlds", "odebc"};
  app.require_subcommand(1);
  Options opt;
  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opt.config_path, "JSON config or run manifest");
    sub->add_option("-s,--set", opt.sets, "Override a config key: section.key=value");
    sub->add_option("-w,--workers", opt.workers, "Worker threads (default: ODEBC_WORKERS or all cores)");
    sub->add_option("-o,--out", opt.out, "Output directory");
  };
  auto* gen = app.add_subcommand("gen-world", "Write the world spec and sampled HR/LR pairs");
  common(gen);
  gen->add_flag("--pgm", opt.pgm, "Also render a few HR images");
  auto* search = app.add_subcommand("search", "Search the boundary condition over K candidates");
  common(search);
  search->add_flag("--pgm", opt.pgm, "Render samples produced with the best boundary condition");
  auto* samp = app.add_subcommand("sample", "Solve from a boundary condition for one LR image");
  common(samp);
  samp->add_option("--bc", opt.bc_path, "Boundary condition tensor file")->required();
  samp->add_option("--y", opt.y_path, "LR tensor file")->required();
  samp->add_option("--output", opt.output_path, "Output tensor file")->required();
  samp->add_flag("--pgm", opt.pgm, "Also write a PGM next to the output");
  auto* bench = app.add_subcommand("benchmark", "Compare samplers with random and searched x_T");
  common(bench);
  bench->add_option("--bc", opt.bc_path, "Use this boundary condition instead of searching");
  auto* abr = app.add_subcommand("ablate-r", "Held-out objective versus reference-set size");
  common(abr);
  auto* abk = app.add_subcommand("ablate-k", "Held-out objective versus candidate-set size");
  common(abk);
  auto* ind = app.add_subcommand("independence", "Pearson matrix of distance sequences");
  common(ind);
  ind->add_flag("--pgm", opt.pgm, "Render samples for the first candidates");
  auto* ver = app.add_subcommand("verify", "Run the oracle property suite");
  ver->add_option("-w,--workers", opt.workers, "Worker threads");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  try {
    if (opt.workers < 0) throw ValidationError("--workers must be >= 1");
    if (*gen) return cmd_gen_world(opt, out);
    if (*search) return cmd_search(opt, out);
    if (*samp) return cmd_sample(opt, out);
    if (*bench) return cmd_benchmark(opt, out);
    if (*abr) return cmd_ablate(opt, out, true);
    if (*abk) return cmd_ablate(opt, out, false);
    if (*ind) return cmd_independence(opt, out);
    if (*ver) return cmd_verify(opt, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: config: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace odebc::cli
