#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "isorank/bench.hpp"
#include "isorank/io.hpp"
#include "isorank/isr.hpp"
#include "isorank/reconstruct.hpp"
#include "isorank/rng.hpp"
#include "isorank/sampling.hpp"

using namespace isorank;
using io::Json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // instance
  std::string family = "lower-bound";
  int n = 32;
  std::optional<int> d;
  double lambda = 1.0;
  std::string noise = "gaussian";
  std::string input;
  std::string stream_path;
  std::uint64_t seed = 0;
  // ISR
  std::string preset = "practical";
  std::optional<int> T;
  double kappa = 1.0;
  std::string grid = "arithmetic";
  std::optional<double> grid_scale;
  std::optional<double> delta;
  std::string extension;
  std::string tie_score;
  std::optional<double> time_budget;
  bool trace = false;
  std::string trace_out;
  // output
  std::string out;
  std::string format;  // csv for sweep, json elsewhere
  // subcommand specific
  std::string mode = "iso";
  std::optional<double> gamma;
  std::string ns = "32";
  std::string ds;
  std::string lambdas = "1";
  int replicates = 1;
  bool deterministic = false;
  bool with_stream = false;
  int p = 16;
  int q = 4096;
  double sigma2 = 0.05;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const std::string& flag) {
  std::vector<T> out;
  for (const auto& item : split(s, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw UsageError(flag + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// key=value lines; '#' starts a comment; values may be double-quoted.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    out.emplace_back(key, value);
  }
  return out;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot open output file " + path);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void warn(const std::string& message) { std::cerr << Json{{"warning", message}}.dump() << '\n'; }

void check_lambda_range(int n, int d, double lambda) {
  if (lambda < 1.0 / d || lambda > 8.0 * n * n) {
    std::ostringstream os;
    os << "lambda=" << lambda << " lies outside [1/d, 8 n^2] = [" << 1.0 / d << ", " << 8.0 * n * n
       << "]; no guarantee applies";
    warn(os.str());
  }
}

struct Problem {
  sampling::SignalInstance instance;
  sampling::ObservationStream stream;
};

sampling::SignalInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input " + path);
  char magic[4] = {};
  in.read(magic, 4);
  in.clear();
  in.seekg(0);
  if (std::string(magic, 4) == "ISRK") return io::read_instance_binary(in);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw std::runtime_error("cannot parse " + path + ": " + e.what());
  }
  return io::instance_from_json(j.contains("instance") ? j.at("instance") : j);
}

Problem make_problem(const Options& o) {
  const Rng root(o.seed);
  Problem pr;
  if (!o.input.empty()) {
    pr.instance = load_instance(o.input);
  } else {
    pr.instance = bench::draw_instance(o.family, {o.n, o.d.value_or(o.n), o.lambda}, root.derive(1).key());
  }
  if (!o.stream_path.empty()) {
    std::ifstream in(o.stream_path);
    if (!in) throw std::runtime_error("cannot open stream " + o.stream_path);
    Json j;
    in >> j;
    pr.stream = io::stream_from_json(j);
    if (pr.stream.n != pr.instance.n() || pr.stream.d != pr.instance.d())
      throw std::runtime_error("stream and instance sizes differ");
  } else {
    pr.stream = sampling::poissonize(pr.instance, {sampling::parse_noise(o.noise)}, root.derive(2).key());
  }
  check_lambda_range(pr.instance.n(), pr.instance.d(), pr.stream.lambda);
  return pr;
}

isr::ISRConfig make_isr_config(const Options& o, int n, int d, double lambda) {
  isr::ISRConfig cfg;
  if (o.preset == "theoretical") {
    cfg = isr::theoretical_preset(n, d, lambda, o.delta);
    if (o.T) cfg.T = *o.T;
  } else {
    isr::PracticalConstants pc;
    pc.kappa = o.kappa;
    if (o.T) pc.T = *o.T;
    cfg = isr::practical_preset(n, d, lambda, o.delta, pc);
  }
  const auto kind = isr::parse_grid_kind(o.grid);
  if (kind != cfg.grid.kind || o.grid_scale)
    cfg.grid = isr::build_grid(kind, n, d, cfg.grid.delta, o.grid_scale.value_or(cfg.grid.unit));
  if (!o.extension.empty()) cfg.extension = isr::parse_extension(o.extension);
  if (!o.tie_score.empty()) cfg.tie_score = isr::parse_tie_score(o.tie_score);
  cfg.time_budget_seconds = o.time_budget;
  cfg.seed = Rng(o.seed).derive(4).key();
  return cfg;
}

// Keeps the trace file alive for the duration of a run.
struct TraceTarget {
  std::ofstream file;
  std::ostream* os = nullptr;
};

void attach_trace(const Options& o, isr::ISRConfig& cfg, TraceTarget& target) {
  if (!o.trace) return;
  if (o.trace_out.empty()) {
    target.os = &std::cerr;
  } else {
    target.file.open(o.trace_out);
    if (!target.file) throw std::runtime_error("cannot open trace file " + o.trace_out);
    target.os = &target.file;
  }
  std::ostream* os = target.os;
  cfg.trace = [os](const slr::PassTrace& t) { *os << io::trace_to_json(t).dump() << '\n'; };
}

int cmd_generate(const Options& o) {
  const Problem pr = make_problem(o);
  Output out(o.out);
  if (o.format == "csv") {
    auto& os = out.stream();
    os << std::setprecision(17);
    for (int i = 0; i < pr.instance.n(); ++i) {
      for (int k = 0; k < pr.instance.d(); ++k) os << (k ? "," : "") << pr.instance.M(i, k);
      os << '\n';
    }
    return 0;
  }
  Json j{{"schema", io::kSchema},
         {"kind", "generated"},
         {"family", o.input.empty() ? o.family : "input"},
         {"seed", o.seed},
         {"instance", io::instance_to_json(pr.instance)}};
  if (o.with_stream) j["stream"] = io::stream_to_json(pr.stream);
  out.stream() << j.dump() << '\n';
  return 0;
}

struct IsrRun {
  Problem problem;
  isr::ISRConfig config;
  isr::ISRResult result;
};

IsrRun run_isr(const Options& o) {
  IsrRun run;
  run.problem = make_problem(o);
  const auto& inst = run.problem.instance;
  run.config = make_isr_config(o, inst.n(), inst.d(), run.problem.stream.lambda);
  TraceTarget trace;
  attach_trace(o, run.config, trace);
  const auto batches =
      sampling::subsample_batches(run.problem.stream, run.config.T, Rng(o.seed).derive(3).key());
  run.result = isr::run_isr(batches, run.config);
  if (run.result.timed_out) warn("ISR stopped at the time budget; the result reflects the partial graph");
  return run;
}

int cmd_run_isr(const Options& o) {
  const IsrRun run = run_isr(o);
  const auto& inst = run.problem.instance;
  const double loss = bench::permutation_loss(inst.M, inst.pi_star, run.result.pi_hat);
  const double base = bench::permutation_loss(inst.M, inst.pi_star, bench::baseline_rowsum(run.problem.stream));
  Output out(o.out);
  if (o.format == "csv") {
    out.stream() << "row,rank\n";
    for (int i = 0; i < run.result.pi_hat.size(); ++i) out.stream() << i << ',' << run.result.pi_hat(i) << '\n';
    return 0;
  }
  Json m = io::run_manifest(run.config, o.seed, run.result, Json{{"loss_perm", loss}, {"loss_perm_rowsum", base}});
  m["pi_hat"] = io::permutation_to_json(run.result.pi_hat);
  out.stream() << m.dump() << '\n';
  return 0;
}

int cmd_reconstruct(const Options& o) {
  const Problem pr = make_problem(o);
  reconstruct::ReconstructConfig rc;
  rc.seed = Rng(o.seed).derive(3).key();
  rc.make_isr = [&o](int n, int d, double lambda) { return make_isr_config(o, n, d, lambda); };
  Json j{{"schema", io::kSchema}, {"kind", "reconstruction"}, {"mode", o.mode}, {"seed", o.seed}};
  reconstruct::IsotonicFit fit;
  if (o.mode == "iso") {
    auto r = reconstruct::reconstruct_iso(pr.stream, rc);
    j["pi_hat"] = io::permutation_to_json(r.pi_hat);
    j["loss_perm"] = bench::permutation_loss(pr.instance.M, pr.instance.pi_star, r.pi_hat);
    fit = std::move(r.fit);
  } else {
    auto r = reconstruct::reconstruct_biso(pr.stream, rc);
    j["pi_hat"] = io::permutation_to_json(r.pi_hat);
    j["eta_hat"] = io::permutation_to_json(r.eta_hat);
    fit = std::move(r.fit);
  }
  j["loss_reco"] = bench::reconstruction_loss(fit.M_hat, pr.instance.M);
  Output out(o.out);
  if (o.format == "csv") {
    auto& os = out.stream();
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < fit.M_hat.rows(); ++i) {
      for (Eigen::Index k = 0; k < fit.M_hat.cols(); ++k) os << (k ? "," : "") << fit.M_hat(i, k);
      os << '\n';
    }
    return 0;
  }
  j["fit"] = io::fit_to_json(fit);
  out.stream() << j.dump() << '\n';
  return 0;
}

int cmd_sweep(const Options& o) {
  bench::SweepConfig c;
  c.family = o.family;
  c.replicates = o.replicates;
  c.seed = o.seed;
  c.noise = sampling::parse_noise(o.noise);
  c.constants.kappa = o.kappa;
  c.T = o.T;
  c.grid_kind = isr::parse_grid_kind(o.grid);
  c.grid_scale = o.grid_scale;
  c.delta = o.delta;
  if (!o.extension.empty()) c.extension = isr::parse_extension(o.extension);
  if (!o.tie_score.empty()) c.tie_score = isr::parse_tie_score(o.tie_score);
  c.time_budget_seconds = o.time_budget;
  const auto ns = parse_list<int>(o.ns, "--n");
  const auto lambdas = parse_list<double>(o.lambdas, "--lambda");
  const std::vector<int> ds = o.ds.empty() ? std::vector<int>{} : parse_list<int>(o.ds, "--d");
  for (int n : ns)
    for (double lambda : lambdas) {
      if (ds.empty()) c.points.push_back({n, n, lambda});
      for (int d : ds) c.points.push_back({n, d, lambda});
    }
  const auto report = bench::rate_sweep(c);
  for (const auto& w : report.warnings) warn(w);
  Output out(o.out);
  if (o.format == "csv")
    bench::write_csv(out.stream(), report, o.deterministic);
  else
    out.stream() << io::sweep_to_json(report, o.deterministic).dump() << '\n';
  return 0;
}

int cmd_concentration(const Options& o) {
  const auto s = bench::concentration_check(o.p, o.q, o.sigma2, o.replicates, o.seed);
  Output out(o.out);
  if (o.format == "csv") {
    out.stream() << "p,q,sigma2,replicates,expected_diagonal,median,quantile95\n"
                 << std::setprecision(17) << s.p << ',' << s.q << ',' << s.sigma2 << ',' << s.replicates << ','
                 << s.expected_diagonal << ',' << s.median << ',' << s.quantile95 << '\n';
    return 0;
  }
  out.stream() << io::concentration_to_json(s).dump() << '\n';
  return 0;
}

int cmd_dump_graph(const Options& o) {
  const IsrRun run = run_isr(o);
  const double gamma = o.gamma.value_or(run.result.gamma_hat);
  Output out(o.out);
  if (o.format == "csv") {
    auto& os = out.stream();
    os << "i,j,weight\n" << std::setprecision(17);
    const Matrix& W = run.result.W.weights();
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j)
        if (W(i, j) > gamma) os << i << ',' << j << ',' << W(i, j) << '\n';
    return 0;
  }
  io::write_graph_jsonl(out.stream(), run.result.W, gamma);
  return 0;
}

void add_instance_options(CLI::App* sub, Options& o) {
  sub->add_option("--family", o.family, "lower-bound, separated, toy, uniform-sorted, block, smooth");
  sub->add_option("--n", o.n, "experts")->check(CLI::PositiveNumber);
  sub->add_option("--d", o.d, "questions (default n)")->check(CLI::PositiveNumber);
  sub->add_option("--lambda", o.lambda, "expected observations per entry")->check(CLI::PositiveNumber);
  sub->add_option("--noise", o.noise)->check(CLI::IsMember({"gaussian", "bernoulli", "none"}));
  sub->add_option("--input", o.input, "instance file (JSON or binary) instead of --family");
  sub->add_option("--stream", o.stream_path, "observation stream JSON instead of sampling one");
  sub->add_option("--seed", o.seed);
}

void add_isr_options(CLI::App* sub, Options& o) {
  sub->add_option("--preset", o.preset)->check(CLI::IsMember({"practical", "theoretical"}));
  sub->add_option("--T", o.T, "ISR steps")->check(CLI::PositiveNumber);
  sub->add_option("--kappa", o.kappa, "practical grid spacing factor")->check(CLI::PositiveNumber);
  sub->add_option("--grid", o.grid)->check(CLI::IsMember({"arithmetic", "geometric"}));
  sub->add_option("--grid-scale", o.grid_scale, "grid unit c")->check(CLI::PositiveNumber);
  sub->add_option("--delta", o.delta)->check(CLI::Range(0.0, 1.0));
  sub->add_option("--extension", o.extension)->check(CLI::IsMember({"mirsky", "guided"}));
  sub->add_option("--tie-score", o.tie_score)->check(CLI::IsMember({"index", "weight", "row-mean"}));
  sub->add_option("--time-budget", o.time_budget, "seconds per ISR run")->check(CLI::PositiveNumber);
}

void add_trace_options(CLI::App* sub, Options& o) {
  sub->add_flag("--trace", o.trace, "per-pass JSON lines");
  sub->add_option("--trace-out", o.trace_out, "trace file (default stderr)");
}

void add_output_options(CLI::App* sub, Options& o) {
  sub->add_option("--out", o.out, "output path (default stdout)");
  sub->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));
}

// Config entries become --key=value arguments placed before the user's own,
// so the last occurrence (the flag) wins.
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  std::string path;
  for (std::size_t a = 0; a < args.size(); ++a) {
    if (args[a] == "--config" && a + 1 < args.size()) path = args[a + 1];
    if (args[a].rfind("--config=", 0) == 0) path = args[a].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  CLI::App* sub = nullptr;
  for (CLI::App* s : app.get_subcommands([](CLI::App*) { return true; }))
    if (s->get_name() == args.front()) sub = s;
  if (!sub) return args;
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config(path)) {
    if (key == "config") continue;
    if (!sub->get_option_no_throw("--" + key)) {
      bool known = false;
      for (CLI::App* s : app.get_subcommands([](CLI::App*) { return true; }))
        known = known || s->get_option_no_throw("--" + key) != nullptr;
      if (!known) throw UsageError("config: unknown key '" + key + "'");
      continue;  // belongs to another subcommand
    }
    injected.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Ranking experts from partial observations of an isotonic matrix"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;

  auto* generate = app.add_subcommand("generate", "draw a synthetic instance");
  add_instance_options(generate, o);
  add_output_options(generate, o);
  generate->add_flag("--with-stream", o.with_stream, "include the sampled observations");

  auto* run = app.add_subcommand("run-isr", "run ISR and report the estimated permutation");
  add_instance_options(run, o);
  add_isr_options(run, o);
  add_trace_options(run, o);
  add_output_options(run, o);

  auto* reco = app.add_subcommand("reconstruct", "estimate the matrix by ISR then least squares");
  add_instance_options(reco, o);
  add_isr_options(reco, o);
  add_output_options(reco, o);
  reco->add_option("--mode", o.mode)->check(CLI::IsMember({"iso", "biso"}));

  auto* sweep = app.add_subcommand("sweep", "ISR and row-sum losses over a grid of sizes");
  sweep->add_option("--family", o.family);
  sweep->add_option("--n", o.ns, "comma-separated list");
  sweep->add_option("--d", o.ds, "comma-separated list (default d = n)");
  sweep->add_option("--lambda", o.lambdas, "comma-separated list");
  sweep->add_option("--noise", o.noise)->check(CLI::IsMember({"gaussian", "bernoulli", "none"}));
  sweep->add_option("--replicates", o.replicates)->check(CLI::PositiveNumber);
  sweep->add_option("--seed", o.seed);
  sweep->add_flag("--deterministic", o.deterministic, "write 0 for timings");
  add_isr_options(sweep, o);
  add_output_options(sweep, o);

  auto* conc = app.add_subcommand("concentration", "Monte Carlo operator norm of X X^T - E[X X^T]");
  conc->add_option("--p", o.p)->check(CLI::PositiveNumber);
  conc->add_option("--q", o.q)->check(CLI::PositiveNumber);
  conc->add_option("--sigma2", o.sigma2)->check(CLI::Range(0.0, 1.0));
  conc->add_option("--replicates", o.replicates)->check(CLI::PositiveNumber);
  conc->add_option("--seed", o.seed);
  add_output_options(conc, o);

  auto* dump = app.add_subcommand("dump-graph", "run ISR and write the thresholded graph as JSON lines");
  add_instance_options(dump, o);
  add_isr_options(dump, o);
  add_trace_options(dump, o);
  add_output_options(dump, o);
  dump->add_option("--gamma", o.gamma, "threshold (default gamma_hat)");

  for (CLI::App* s : {generate, run, reco, sweep, conc, dump})
    s->add_option("--config", config_path, "key=value file; flags override it");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << Json{{"error", e.what()}, {"kind", "usage"}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", e.what()}, {"kind", "usage"}}.dump() << '\n';
    return 2;
  }

  try {
    if (o.format.empty()) o.format = sweep->parsed() ? "csv" : "json";
    if (*generate) return cmd_generate(o);
    if (*run) return cmd_run_isr(o);
    if (*reco) return cmd_reconstruct(o);
    if (*sweep) return cmd_sweep(o);
    if (*conc) return cmd_concentration(o);
    if (*dump) return cmd_dump_graph(o);
  } catch (const UsageError& e) {
    std::cerr << Json{{"error", e.what()}, {"kind", "usage"}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", e.what()}, {"kind", "runtime"}}.dump() << '\n';
    return 1;
  }
  return 2;
}
