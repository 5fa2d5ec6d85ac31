#include "isorank/io.hpp"

#include <cstring>
#include <istream>
#include <ostream>

namespace isorank::io {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidArgument("matrix: expected an array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  const auto d = n == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.front().size());
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) throw InvalidArgument("matrix: ragged rows");
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Json permutation_to_json(const Permutation& p) { return Json(p.positions()); }

Json instance_to_json(const sampling::SignalInstance& inst) {
  return Json{{"schema", kSchema},
              {"kind", "instance"},
              {"n", inst.n()},
              {"d", inst.d()},
              {"lambda", inst.lambda},
              {"pi_star", permutation_to_json(inst.pi_star)},
              {"M", matrix_to_json(inst.M)}};
}

sampling::SignalInstance instance_from_json(const Json& j) {
  try {
    sampling::SignalInstance inst;
    inst.M = matrix_from_json(j.at("M"));
    inst.lambda = j.at("lambda").get<double>();
    const auto pos = j.at("pi_star").get<std::vector<int>>();
    if (!is_permutation(pos)) throw InvalidArgument("instance: pi_star is not a permutation");
    inst.pi_star = Permutation(pos);
    if (inst.pi_star.size() != inst.n()) throw InvalidArgument("instance: pi_star size does not match M");
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("instance: ") + e.what());
  }
}

namespace {

constexpr char kMagic[4] = {'I', 'S', 'R', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidArgument("binary instance: truncated input");
  return v;
}

}  // namespace

void write_instance_binary(std::ostream& os, const sampling::SignalInstance& inst) {
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, static_cast<std::int32_t>(inst.n()));
  put(os, static_cast<std::int32_t>(inst.d()));
  put(os, inst.lambda);
  for (int p : inst.pi_star.positions()) put(os, static_cast<std::int32_t>(p));
  for (int i = 0; i < inst.n(); ++i)
    for (int k = 0; k < inst.d(); ++k) put(os, inst.M(i, k));
}

sampling::SignalInstance read_instance_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw InvalidArgument("binary instance: bad magic");
  if (get<std::uint32_t>(is) != kVersion) throw InvalidArgument("binary instance: unsupported version");
  const auto n = get<std::int32_t>(is);
  const auto d = get<std::int32_t>(is);
  if (n < 0 || d < 0) throw InvalidArgument("binary instance: negative size");
  sampling::SignalInstance inst;
  inst.lambda = get<double>(is);
  std::vector<int> pos(static_cast<std::size_t>(n));
  for (int& p : pos) p = get<std::int32_t>(is);
  if (!is_permutation(pos)) throw InvalidArgument("binary instance: pi_star is not a permutation");
  inst.pi_star = Permutation(pos);
  inst.M.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) inst.M(i, k) = get<double>(is);
  return inst;
}

Json stream_to_json(const sampling::ObservationStream& s) {
  Json recs = Json::array();
  for (const auto& r : s.records) recs.push_back(Json::array({r.row, r.col, r.value}));
  return Json{{"schema", kSchema}, {"kind", "stream"}, {"n", s.n}, {"d", s.d}, {"lambda", s.lambda},
              {"records", std::move(recs)}};
}

sampling::ObservationStream stream_from_json(const Json& j) {
  try {
    sampling::ObservationStream s;
    s.n = j.at("n").get<int>();
    s.d = j.at("d").get<int>();
    s.lambda = j.at("lambda").get<double>();
    for (const auto& r : j.at("records")) {
      sampling::Observation o{r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<double>()};
      if (o.row < 0 || o.row >= s.n || o.col < 0 || o.col >= s.d) throw InvalidArgument("stream: record out of range");
      s.records.push_back(o);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("stream: ") + e.what());
  }
}

void write_graph_jsonl(std::ostream& os, const graph::WeightedGraph& W, double gamma) {
  const graph::Digraph g = graph::threshold_graph(W, gamma);
  const bool acyclic = graph::is_acyclic(g);
  std::vector<int> level;
  if (acyclic) level = graph::mirsky_levels(g);
  os << Json{{"kind", "header"}, {"n", W.n()}, {"gamma", gamma}, {"edges", g.edge_count()}, {"acyclic", acyclic}}.dump()
     << '\n';
  for (int v = 0; v < g.n(); ++v) {
    Json line{{"kind", "vertex"}, {"vertex", v}, {"out", g.out(v)}};
    if (acyclic) line["level"] = level[static_cast<std::size_t>(v)];
    os << line.dump() << '\n';
  }
  for (int i = 0; i < W.n(); ++i)
    for (int j = 0; j < W.n(); ++j)
      if (W(i, j) != 0.0) os << Json{{"kind", "weight"}, {"i", i}, {"j", j}, {"w", W(i, j)}}.dump() << '\n';
}

Json trace_to_json(const slr::PassTrace& t) {
  return Json{{"t", t.step},
              {"gamma", t.gamma},
              {"i", t.expert},
              {"h", t.h},
              {"P", t.neighborhood},
              {"Q", t.questions.size()},
              {"avg_changed", t.average_changed},
              {"avg_max", t.average_max},
              {"eigenvalue", t.eigenvalue},
              {"w_support", t.weight_support.size()},
              {"spec_changed", t.spectral_changed},
              {"spec_max", t.spectral_max},
              {"stopped_cyclic", t.stopped_cyclic}};
}

Json grid_to_json(const isr::GridConfig& g) {
  return Json{{"kind", isr::to_string(g.kind)},
              {"n", g.n},
              {"d", g.d},
              {"delta", g.delta},
              {"phi_L1", g.phi_L1},
              {"unit", g.unit},
              {"rule", g.rule == isr::WitnessRule::Spaced ? "spaced" : "literal"},
              {"grid", g.grid},
              {"witness", g.witness},
              {"gamma_bar", g.gamma_bar}};
}

Json isr_config_to_json(const isr::ISRConfig& c) {
  return Json{{"preset", c.preset},
              {"T", c.T},
              {"grid", grid_to_json(c.grid)},
              {"heights", c.heights.empty() ? Json("dyadic-descending") : Json(c.heights)},
              {"count_virtual_in_bands", c.count_virtual_in_bands},
              {"extension", isr::to_string(c.extension)},
              {"tie_score", isr::to_string(c.tie_score)},
              {"dense_eigen_max", c.spectral.dense_max}};
}

Json run_manifest(const isr::ISRConfig& config, std::uint64_t seed, const isr::ISRResult& result, const Json& losses) {
  Json m{{"schema", kSchema},
         {"kind", "isr-run"},
         {"config", isr_config_to_json(config)},
         {"seed", seed},
         {"gamma_hat", std::isfinite(result.gamma_hat) ? Json(result.gamma_hat) : Json("inf")},
         {"passes", result.passes},
         {"skipped_cyclic", result.skipped_cyclic},
         {"stopped_cyclic", result.stopped_cyclic},
         {"spectral_failures", result.spectral_failures},
         {"timed_out", result.timed_out},
         {"pi_hat", permutation_to_json(result.pi_hat)}};
  Json traj = Json::array();
  for (double g : result.gamma_trajectory) traj.push_back(std::isfinite(g) ? Json(g) : Json("inf"));
  m["gamma_trajectory"] = std::move(traj);
  if (!losses.empty()) m["losses"] = losses;
  return m;
}

Json fit_to_json(const reconstruct::IsotonicFit& fit) {
  return Json{{"schema", kSchema}, {"kind", "fit"}, {"objective", fit.objective}, {"converged", fit.converged},
              {"iterations", fit.iterations}, {"M", matrix_to_json(fit.M_hat)}};
}

Json sweep_to_json(const bench::SweepReport& report, bool deterministic) {
  const auto& c = report.config;
  Json points = Json::array();
  for (const auto& p : c.points) points.push_back(Json{{"n", p.n}, {"d", p.d}, {"lambda", p.lambda}});
  Json records = Json::array();
  for (const auto& r : report.records) {
    Json rec{{"n", r.point.n}, {"d", r.point.d}, {"lambda", r.point.lambda}, {"estimator", r.estimator},
             {"replicate", r.replicate}, {"loss_perm", r.loss_perm}, {"loss_reco", r.loss_reco},
             {"seconds", deterministic ? 0.0 : r.seconds}, {"seed", r.seed}, {"timed_out", r.timed_out}};
    if (!r.error.empty()) rec["error"] = r.error;
    records.push_back(std::move(rec));
  }
  Json summary = Json::array();
  for (const auto& s : report.summary)
    summary.push_back(Json{{"n", s.point.n}, {"d", s.point.d}, {"lambda", s.point.lambda}, {"estimator", s.estimator},
                           {"runs", s.runs}, {"median_loss_perm", s.median_perm},
                           {"median_loss_reco", s.median_reco}});
  Json out{{"schema", kSchema},
           {"kind", "sweep"},
           {"config",
            {{"family", c.family},
             {"points", points},
             {"replicates", c.replicates},
             {"seed", c.seed},
             {"noise", sampling::to_string(c.noise)},
             {"preset", "practical"},
             {"kappa", c.constants.kappa},
             {"T", c.T.value_or(c.constants.T)},
             {"extension", c.extension ? isr::to_string(*c.extension) : "preset"},
             {"tie_score", c.tie_score ? isr::to_string(*c.tie_score) : "preset"}}},
           {"records", records},
           {"summary", summary},
           {"warnings", report.warnings}};

  // Slope of the median loss against n, per estimator and lambda, next to the n^{7/6} reference.
  Json slopes = Json::array();
  for (const std::string est : {"isr", "rowsum"}) {
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_lambda;
    for (const auto& s : report.summary)
      if (s.estimator == est && s.median_perm > 0.0) {
        by_lambda[s.point.lambda].first.push_back(s.point.n);
        by_lambda[s.point.lambda].second.push_back(s.median_perm);
      }
    for (const auto& [lambda, xy] : by_lambda) {
      std::vector<double> xs = xy.first;
      std::sort(xs.begin(), xs.end());
      if (std::unique(xs.begin(), xs.end()) - xs.begin() < 2) continue;
      slopes.push_back(Json{{"estimator", est}, {"lambda", lambda},
                            {"slope_vs_n", bench::loglog_slope(xy.first, xy.second)}, {"reference", 7.0 / 6.0}});
    }
  }
  out["slopes"] = slopes;
  return out;
}

Json concentration_to_json(const bench::ConcentrationSummary& s) {
  return Json{{"schema", kSchema}, {"kind", "concentration"}, {"p", s.p}, {"q", s.q}, {"sigma2", s.sigma2},
              {"replicates", s.replicates}, {"expected_diagonal", s.expected_diagonal}, {"median", s.median},
              {"quantile95", s.quantile95}, {"sqrt_pq_sigma2", s.sigma2 * std::sqrt(double(s.p) * s.q)}};
}

}  // namespace isorank::io
