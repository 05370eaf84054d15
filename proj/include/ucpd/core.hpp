#pragma once

// Shared vocabulary: error types, the point container, and seeded random streams.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace ucpd {

/// Malformed or inconsistent data (dimension mismatch, empty samples, ragged CSV rows).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter outside its documented domain.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation not allowed in the object's current state (e.g. stepping a stopped monitor).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Internal precondition that callers are required to uphold.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Kernel evaluations against a constant cannot separate distributions.
class DegenerateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Row-major store of d-dimensional points with contiguous storage.
class Sample {
 public:
  Sample() = default;
  explicit Sample(std::size_t dim) : dim_(dim) {}

  Sample(std::size_t dim, std::vector<double> flat) : dim_(dim), data_(std::move(flat)) {
    if (dim_ == 0 || data_.size() % dim_ != 0) {
      throw InputError("flat buffer size is not a multiple of the dimension");
    }
  }

  static Sample from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Sample{};
    Sample s(rows.front().size());
    for (const auto& r : rows) s.push_back(r);
    return s;
  }

  /// Scalar series as 1-d points.
  static Sample from_scalars(std::span<const double> xs) {
    return Sample(1, std::vector<double>(xs.begin(), xs.end()));
  }

  void push_back(std::span<const double> x) {
    if (dim_ == 0) dim_ = x.size();
    if (x.size() != dim_ || dim_ == 0) {
      throw InputError("point dimension " + std::to_string(x.size()) + " does not match sample dimension " +
                       std::to_string(dim_));
    }
    data_.insert(data_.end(), x.begin(), x.end());
  }

  void reserve(std::size_t n) { data_.reserve(n * dim_); }

  [[nodiscard]] std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  [[nodiscard]] std::span<double> operator[](std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  [[nodiscard]] std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] bool empty() const { return size() == 0; }
  [[nodiscard]] const std::vector<double>& flat() const { return data_; }

  /// Points [first, first + count).
  [[nodiscard]] Sample slice(std::size_t first, std::size_t count) const {
    if (first + count > size()) throw InputError("slice out of range");
    return Sample(dim_, std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                                            data_.begin() + static_cast<std::ptrdiff_t>((first + count) * dim_)));
  }

  /// Concatenation, used when repartitioning training and monitoring blocks.
  [[nodiscard]] Sample concat(const Sample& other) const {
    if (empty()) return other;
    if (other.empty()) return *this;
    if (other.dim_ != dim_) throw InputError("cannot concatenate samples of different dimension");
    Sample out = *this;
    out.data_.insert(out.data_.end(), other.data_.begin(), other.data_.end());
    return out;
  }

  friend bool operator==(const Sample&, const Sample&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// Random streams. Every replication gets its own engine seeded from (master seed, key, index),
// so results do not depend on evaluation order or worker count.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Sub-seed for replication `index` of the stream named `key`.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view key, std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ fnv1a(key)) + splitmix64(index + 0x632be59bd9b4e019ULL));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::string_view key, std::uint64_t index = 0) {
  return Engine(derive_seed(seed, key, index));
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index must write only its own output slot.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Empirical quantile on a sorted copy: the ceil(q * n)-th order statistic (1-based).
inline double order_statistic_quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw InputError("quantile of an empty sample");
  std::sort(xs.begin(), xs.end());
  auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size()) - 1e-12));
  idx = std::clamp<std::size_t>(idx, 1, xs.size());
  return xs[idx - 1];
}

inline double median_of(std::vector<double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  return order_statistic_quantile(std::move(xs), 0.5);
}

}  // namespace ucpd
