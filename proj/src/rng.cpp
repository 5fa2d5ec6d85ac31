#include "isorank/rng.hpp"

#include <numeric>

#include "isorank/types.hpp"

namespace isorank {

Rng Rng::derive(std::uint64_t tag) const {
  Rng child(0);
  child.key_ = mix(key_ ^ mix(tag + 0x3c6ef372fe94f82bULL));
  return child;
}

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  // Lemire's rejection keeps the result exactly uniform.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = (*this)();
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
  }
}

Permutation::Permutation(std::vector<int> position) : position_(std::move(position)) {
  if (!is_permutation(position_)) throw InvalidArgument("Permutation: not a permutation");
}

Permutation Permutation::identity(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  return Permutation(std::move(p));
}

Permutation Permutation::from_order(const std::vector<int>& order) {
  if (!is_permutation(order)) throw InvalidArgument("Permutation::from_order: not a permutation");
  std::vector<int> p(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) p[static_cast<std::size_t>(order[r])] = static_cast<int>(r);
  Permutation out;
  out.position_ = std::move(p);
  return out;
}

std::vector<int> Permutation::order() const {
  std::vector<int> o(position_.size());
  for (std::size_t i = 0; i < position_.size(); ++i) o[static_cast<std::size_t>(position_[i])] = static_cast<int>(i);
  return o;
}

Permutation Permutation::inverse() const {
  Permutation out;
  out.position_ = order();
  return out;
}

Permutation operator*(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) throw InvalidArgument("Permutation composition: size mismatch");
  std::vector<int> p(b.position_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = a(b.position_[i]);
  Permutation out;
  out.position_ = std::move(p);
  return out;
}

Matrix reorder_rows(const Matrix& m, const Permutation& pi) {
  if (pi.size() != m.rows()) throw InvalidArgument("reorder_rows: permutation size mismatch");
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < pi.size(); ++i) out.row(pi(i)) = m.row(i);
  return out;
}

bool is_permutation(const std::vector<int>& values) {
  std::vector<char> seen(values.size(), 0);
  for (int v : values) {
    if (v < 0 || static_cast<std::size_t>(v) >= values.size() || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

}  // namespace isorank
