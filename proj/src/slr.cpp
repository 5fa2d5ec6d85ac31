#include "isorank/slr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace isorank::slr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double update_scale(double lambda0) { return 1.0 / std::sqrt(std::min(lambda0, 1.0 / lambda0)); }

void check_reference_set(std::span<const int> P, int n) {
  if (P.empty()) throw InvalidArgument("empty reference set");
  for (int p : P)
    if (p < 0 || p >= n) throw InvalidArgument("reference set vertex out of range");
}

}  // namespace

std::vector<double> height_grid(int n, int d) {
  if (n <= 0 || d <= 0) throw InvalidArgument("height_grid: n and d must be positive");
  const double lo = 1.0 / (static_cast<double>(n) * static_cast<double>(d));
  std::vector<double> out;
  for (double h = 1.0; h >= lo; h *= 0.5) out.push_back(h);
  std::reverse(out.begin(), out.end());
  return out;
}

WidthProfile::WidthProfile(const Matrix& Y, const graph::DagAnalysis& dag, std::span<const int> P, double lambda1)
    : n_(dag.n()), d_(static_cast<int>(Y.cols())) {
  if (Y.rows() != n_) throw InvalidArgument("WidthProfile: batch and graph sizes differ");
  check_reference_set(P, n_);
  const auto bd = dag.band_distances(P);

  std::vector<std::pair<int, int>> up, down;  // (distance, vertex)
  std::vector<int> breaks{bd.top, bd.bottom};
  for (int j = 0; j < n_; ++j) {
    const int a = bd.above[static_cast<std::size_t>(j)], b = bd.below[static_cast<std::size_t>(j)];
    if (a >= 1) {
      up.emplace_back(a, j);
      breaks.push_back(a);
    }
    if (b >= 1) {
      down.emplace_back(b, j);
      breaks.push_back(b);
    }
  }
  std::sort(up.begin(), up.end());
  std::sort(down.begin(), down.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  if (breaks.front() > 1) breaks.insert(breaks.begin(), 1);
  seg_start_ = breaks;

  const auto S = static_cast<Eigen::Index>(seg_start_.size());
  delta_.resize(S, d_);
  suffix_min_.resize(S, d_);
  above_real_.resize(seg_start_.size());
  below_real_.resize(seg_start_.size());
  top_in_.resize(seg_start_.size());
  bottom_in_.resize(seg_start_.size());

  Vector sum_up = Vector::Zero(d_), sum_down = Vector::Zero(d_);
  std::size_t iu = 0, id = 0;
  for (Eigen::Index m = 0; m < S; ++m) {
    const int a = seg_start_[static_cast<std::size_t>(m)];
    for (; iu < up.size() && up[iu].first <= a; ++iu) sum_up += Y.row(up[iu].second).transpose();
    for (; id < down.size() && down[id].first <= a; ++id) sum_down += Y.row(down[id].second).transpose();
    const auto mu = static_cast<std::size_t>(m);
    above_real_[mu] = iu;
    below_real_[mu] = id;
    top_in_[mu] = bd.top <= a;
    bottom_in_[mu] = bd.bottom <= a;
    const double cu = static_cast<double>(iu + (top_in_[mu] ? 1 : 0));
    const double cd = static_cast<double>(id + (bottom_in_[mu] ? 1 : 0));
    if (cu == 0.0 || cd == 0.0) {
      delta_.row(m).setConstant(kNaN);
      continue;
    }
    // The bottom pseudo-row is zero, so it only enters through the count.
    Vector above = sum_up;
    if (top_in_[mu]) above.array() += lambda1;
    delta_.row(m) = (above / cu - sum_down / cd).transpose();
  }
  for (Eigen::Index m = S - 1; m >= 0; --m)
    for (int k = 0; k < d_; ++k) {
      const double v = std::isnan(delta_(m, k)) ? -std::numeric_limits<double>::infinity() : delta_(m, k);
      suffix_min_(m, k) = m + 1 < S ? std::min(v, suffix_min_(m + 1, k)) : v;
    }
}

int WidthProfile::segment_of(int a) const {
  if (a < 1) throw InvalidArgument("WidthProfile: level must be >= 1");
  const auto it = std::upper_bound(seg_start_.begin(), seg_start_.end(), a);
  return static_cast<int>(it - seg_start_.begin()) - 1;
}

std::optional<double> WidthProfile::width(int k, int a) const {
  if (k < 0 || k >= d_) throw InvalidArgument("WidthProfile: question out of range");
  const double v = delta_(segment_of(a), k);
  if (std::isnan(v)) return std::nullopt;
  return v;
}

std::pair<std::size_t, std::size_t> WidthProfile::band_sizes(int a, bool count_virtual) const {
  const auto m = static_cast<std::size_t>(segment_of(a));
  return {above_real_[m] + (count_virtual && top_in_[m] ? 1 : 0),
          below_real_[m] + (count_virtual && bottom_in_[m] ? 1 : 0)};
}

int WidthProfile::select_level(int k, double h, double lambda0) const {
  if (k < 0 || k >= d_) throw InvalidArgument("select_level: question out of range");
  if (!(h > 0.0) || !(lambda0 > 0.0)) throw InvalidArgument("select_level: h and lambda0 must be positive");
  const double thr = h * std::min(lambda0, 1.0);
  const auto S = static_cast<int>(seg_start_.size());
  if (!(suffix_min_(0, k) < thr)) return 1;
  // suffix_min_ is nondecreasing in the segment index.
  int lo = 0, hi = S - 1;
  while (lo < hi) {
    const int mid = lo + (hi - lo + 1) / 2;
    if (suffix_min_(mid, k) < thr)
      lo = mid;
    else
      hi = mid - 1;
  }
  const int last_a = lo + 1 < S ? seg_start_[static_cast<std::size_t>(lo + 1)] - 1 : max_level();
  return last_a + 1;
}

QuestionSelection WidthProfile::select_questions(double h, double lambda0, bool count_virtual) const {
  QuestionSelection out;
  out.h = h;
  out.a_hat.resize(static_cast<std::size_t>(d_));
  const double cap = 1.0 / (lambda0 * h * h);
  for (int k = 0; k < d_; ++k) {
    const int a = select_level(k, h, lambda0);
    out.a_hat[static_cast<std::size_t>(k)] = a;
    const auto [up, down] = band_sizes(a, count_virtual);
    if (static_cast<double>(std::min(up, down)) <= cap) out.questions.push_back(k);
  }
  return out;
}

std::optional<double> width_statistic(const Matrix& Y, const graph::Digraph& G, std::span<const int> P, int k,
                                      int a, double lambda0) {
  const graph::DagAnalysis dag(G);
  return WidthProfile(Y, dag, P, sampling::LambdaEffective{lambda0, -std::expm1(-lambda0)}.lambda1).width(k, a);
}

int select_level(const Matrix& Y, const graph::Digraph& G, std::span<const int> P, int k, double h, double lambda0) {
  const graph::DagAnalysis dag(G);
  return WidthProfile(Y, dag, P, -std::expm1(-lambda0)).select_level(k, h, lambda0);
}

QuestionSelection select_questions(const Matrix& Y, const graph::Digraph& G, std::span<const int> P, double h,
                                   double lambda0, bool count_virtual) {
  const graph::DagAnalysis dag(G);
  return WidthProfile(Y, dag, P, -std::expm1(-lambda0)).select_questions(h, lambda0, count_virtual);
}

bool UpdateVector::is_zero() const {
  return std::all_of(weights.begin(), weights.end(), [](double x) { return x == 0.0; });
}

double UpdateVector::norm2() const {
  double s = 0.0;
  for (double x : weights) s += x * x;
  return std::sqrt(s);
}

double UpdateVector::norm_inf() const {
  double m = 0.0;
  for (double x : weights) m = std::max(m, std::abs(x));
  return m;
}

bool satisfies_sparsity(const UpdateVector& w, double lambda0) {
  const double n2 = w.norm2();
  return lambda0 * n2 * n2 >= w.norm_inf() * w.norm_inf();
}

std::vector<graph::WeightUpdate> updating_weights(const Matrix& Y, std::span<const int> P, const UpdateVector& w,
                                                  int i, double lambda0, kernels::Exec exec) {
  if (w.questions.size() != w.weights.size()) throw InvalidArgument("updating_weights: weight size mismatch");
  if (!(lambda0 > 0.0)) throw InvalidArgument("updating_weights: lambda0 must be positive");
  check_reference_set(P, static_cast<int>(Y.rows()));
  if (std::find(P.begin(), P.end(), i) == P.end()) throw InvalidArgument("updating_weights: i not in P");
  const double norm = w.norm2();
  if (norm == 0.0) throw InvalidArgument("updating_weights: zero weight vector");
  const Vector s = kernels::weighted_row_sums(Y, P, w.questions, w.weights, exec);
  double si = 0.0;
  for (std::size_t r = 0; r < P.size(); ++r)
    if (P[r] == i) si = s(static_cast<Eigen::Index>(r));
  const double scale = update_scale(lambda0) / norm;
  std::vector<graph::WeightUpdate> out;
  out.reserve(P.size() - 1);
  for (std::size_t r = 0; r < P.size(); ++r)
    if (P[r] != i) out.push_back({P[r], scale * (si - s(static_cast<Eigen::Index>(r)))});
  return out;
}

SpectralResult spectral_direction(const Matrix& A2, const Matrix& A3, const SpectralOptions& opt,
                                  kernels::Exec exec) {
  SpectralResult out;
  if (A2.rows() == 0 || A2.cols() == 0) return out;
  const Matrix S = kernels::corrected_gram(A2, A3, exec);
  kernels::EigenPair top;
  if (S.rows() <= opt.dense_max) {
    top = kernels::top_eigenpair_dense(S);
  } else {
    auto power = opt.power;
    power.exec = exec;
    top = kernels::top_eigenpair_power(S, power);
  }
  out.eigenvalue = top.value;
  if (!top.converged) {
    out.status = SpectralResult::Status::NotConverged;
    return out;
  }
  if (!(top.value > 0.0)) {
    out.status = SpectralResult::Status::NonPositive;
    return out;
  }
  out.status = SpectralResult::Status::Ok;
  out.direction = top.vector.normalized();
  return out;
}

Vector truncate_direction(const Vector& v, double lambda0) {
  const double cap = std::sqrt(lambda0);
  return v.unaryExpr([cap](double x) { return std::abs(x) <= cap ? x : 0.0; });
}

Vector image_weights(const Vector& v_minus, const Matrix& A4, double gamma, double lambda0) {
  if (v_minus.size() != A4.rows()) throw InvalidArgument("image_weights: size mismatch");
  const double thr = gamma * std::sqrt(std::min(lambda0, 1.0 / lambda0));
  const Vector z = (v_minus.transpose() * A4).transpose().cwiseAbs();
  return z.unaryExpr([thr](double x) { return x >= thr ? x : 0.0; });
}

namespace {

// Holds G(W, gamma) and the neighborhood of i, refreshed after edge changes.
class PassState {
 public:
  PassState(const graph::WeightedGraph& W, double gamma, int i, GraphCache* cache)
      : W_(W), gamma_(gamma), i_(i), cache_(cache ? cache : &local_) {
    if (!(cache_->gamma == gamma) || (!cache_->dag && !cache_->cyclic)) rebuild();
    if (!cache_->cyclic) P_ = cache_->dag->neighborhood(i_);
  }

  bool cyclic() const { return cache_->cyclic; }
  const graph::DagAnalysis& dag() const { return *cache_->dag; }
  const IndexList& P() const { return P_; }

  // False when the refreshed graph has a cycle.
  bool refresh() {
    rebuild();
    if (cache_->cyclic) return false;
    P_ = cache_->dag->neighborhood(i_);
    return true;
  }

 private:
  void rebuild() {
    cache_->gamma = gamma_;
    graph::Digraph g = graph::threshold_graph(W_, gamma_);
    if (graph::is_acyclic(g)) {
      cache_->dag.emplace(std::move(g));
      cache_->cyclic = false;
    } else {
      cache_->dag.reset();
      cache_->cyclic = true;
    }
  }

  const graph::WeightedGraph& W_;
  double gamma_;
  int i_;
  GraphCache local_;
  GraphCache* cache_;
  IndexList P_;
};

}  // namespace

PassSummary slr_pass(std::span<const sampling::Batch> window, graph::WeightedGraph& W, double gamma, int i,
                     const SlrConfig& config, GraphCache* cache) {
  if (window.size() != 5) throw InvalidArgument("slr_pass: window must hold five batches");
  const int n = W.n();
  if (i < 0 || i >= n) throw InvalidArgument("slr_pass: reference expert out of range");
  for (const auto& b : window)
    if (b.Y.rows() != n) throw InvalidArgument("slr_pass: batch and graph sizes differ");
  const double lambda0 = config.lambda0;
  if (!(lambda0 > 0.0)) throw InvalidArgument("slr_pass: lambda0 must be positive");

  PassSummary summary;
  PassState state(W, gamma, i, cache);
  if (state.cyclic()) {
    summary.skipped_cyclic = true;
    return summary;
  }
  if (state.P().size() < 2) return summary;

  const Matrix& Y1 = window[0].Y;
  std::optional<WidthProfile> profile;
  struct SpectralMemo {
    IndexList P;
    std::vector<int> Q;
    SpectralResult::Status status = SpectralResult::Status::Degenerate;
    double eigenvalue = 0.0;
    UpdateVector w;
    std::optional<std::vector<graph::WeightUpdate>> updates;
  };
  std::optional<SpectralMemo> memo;
  struct AverageMemo {
    IndexList P;
    std::vector<int> Q;
    std::vector<graph::WeightUpdate> updates;
  };
  std::optional<AverageMemo> average_memo;

  // Applies U and refreshes the graph when an edge changed; false once cyclic.
  auto apply = [&](const std::vector<graph::WeightUpdate>& U, int& changed, double& max_abs) {
    const auto res = W.apply_update(i, U, gamma);
    changed = res.changed;
    max_abs = res.max_abs;
    summary.updates += res.changed;
    if (!res.threshold_crossed) return true;
    profile.reset();
    if (!state.refresh()) {
      summary.stopped_cyclic = true;
      return false;
    }
    return true;
  };

  for (double h : config.heights) {
    if (state.P().size() < 2) break;
    if (!profile) profile.emplace(Y1, state.dag(), state.P(), config.lambda1);
    PassTrace tr;
    tr.step = config.step;
    tr.gamma = gamma;
    tr.expert = i;
    tr.h = h;
    tr.neighborhood = state.P().size();

    const QuestionSelection sel = profile->select_questions(h, lambda0, config.count_virtual_in_bands);
    tr.questions = sel.questions;
    bool alive = true;
    if (!sel.questions.empty()) {
      UpdateVector ones{sel.questions, std::vector<double>(sel.questions.size(), 1.0)};
      if (satisfies_sparsity(ones, lambda0)) {
        if (!average_memo || average_memo->P != state.P() || average_memo->Q != sel.questions)
          average_memo = AverageMemo{state.P(), sel.questions,
                                     updating_weights(Y1, state.P(), ones, i, lambda0, config.exec)};
        alive = apply(average_memo->updates, tr.average_changed, tr.average_max);
      }
      if (alive && state.P().size() >= 2) {
        const IndexList& P = state.P();
        // The spectral weights depend on W only through P, so heights that
        // repeat (P, Q) reuse them.
        if (!memo || memo->P != P || memo->Q != sel.questions) {
          memo.emplace();
          memo->P = P;
          memo->Q = sel.questions;
          const Matrix A2 = kernels::restricted_centered(window[1].Y, P, sel.questions, config.exec);
          const Matrix A3 = kernels::restricted_centered(window[2].Y, P, sel.questions, config.exec);
          const SpectralResult spec = spectral_direction(A2, A3, config.spectral, config.exec);
          memo->status = spec.status;
          memo->eigenvalue = spec.eigenvalue;
          if (spec.status == SpectralResult::Status::Ok) {
            const Matrix A4 = kernels::restricted_centered(window[3].Y, P, sel.questions, config.exec);
            const Vector wplus = image_weights(truncate_direction(spec.direction, lambda0), A4, gamma, lambda0);
            for (Eigen::Index l = 0; l < wplus.size(); ++l)
              if (wplus(l) > 0.0) {
                memo->w.questions.push_back(sel.questions[static_cast<std::size_t>(l)]);
                memo->w.weights.push_back(wplus(l));
              }
          }
        }
        tr.eigenvalue = memo->eigenvalue;
        if (memo->status == SpectralResult::Status::NotConverged) ++summary.spectral_failures;
        if (memo->status == SpectralResult::Status::Ok) {
          const UpdateVector& w = memo->w;
          tr.weight_support = w.questions;
          if (!w.questions.empty() && satisfies_sparsity(w, lambda0)) {
            if (!memo->updates) memo->updates = updating_weights(window[4].Y, P, w, i, lambda0, config.exec);
            alive = apply(*memo->updates, tr.spectral_changed, tr.spectral_max);
          }
        }
      }
    }
    tr.stopped_cyclic = !alive;
    if (config.trace) config.trace(tr);
    if (!alive) break;
  }
  return summary;
}

}  // namespace isorank::slr
