#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace isorank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexList = std::vector<int>;

// Raised when an argument violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised for conditions that the algorithm's construction rules out.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A permutation of [0, n). position[i] is the rank given to row i; rank 0 is
// the lowest row and rank n-1 the highest.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> position);

  static Permutation identity(int n);
  // Builds the permutation whose inverse is `order` (order[r] = row at rank r).
  static Permutation from_order(const std::vector<int>& order);

  int size() const { return static_cast<int>(position_.size()); }
  int operator()(int i) const { return position_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& positions() const { return position_; }
  // order()[r] is the row placed at rank r.
  std::vector<int> order() const;
  Permutation inverse() const;
  // (a * b)(i) = a(b(i)).
  friend Permutation operator*(const Permutation& a, const Permutation& b);
  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> position_;
};

// Rows of `m` re-ordered so that row r of the result is row pi^{-1}(r) of `m`.
Matrix reorder_rows(const Matrix& m, const Permutation& pi);

bool is_permutation(const std::vector<int>& values);

}  // namespace isorank
