#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace locspec {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr char version[] = "0.3.0";

// Rejected configuration (bad parameters, malformed files).
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numerical tolerance was not met.
struct tolerance_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t d) : k_(d, 0) {}
  MultiIndex(std::initializer_list<int> k) : k_(k) { check(); }
  explicit MultiIndex(std::vector<int> k) : k_(std::move(k)) { check(); }

  static MultiIndex unit(std::size_t d, std::size_t j) {
    MultiIndex e(d);
    e.k_.at(j) = 1;
    return e;
  }

  std::size_t dim() const { return k_.size(); }
  int operator[](std::size_t j) const { return k_[j]; }
  int& operator[](std::size_t j) { return k_[j]; }
  const std::vector<int>& entries() const { return k_; }

  // |k|
  int length() const {
    int s = 0;
    for (int v : k_) s += v;
    return s;
  }

  // k! as a double; exact up to 170!
  double factorial() const {
    double f = 1.0;
    for (int v : k_) f *= std::tgamma(v + 1.0);
    return f;
  }

  MultiIndex plus(std::size_t j) const {
    MultiIndex r = *this;
    ++r.k_.at(j);
    return r;
  }
  MultiIndex minus(std::size_t j) const {
    if (k_.at(j) == 0) throw std::domain_error("MultiIndex::minus: entry already 0");
    MultiIndex r = *this;
    --r.k_[j];
    return r;
  }

  std::string str() const {
    std::string s = "(";
    for (std::size_t j = 0; j < k_.size(); ++j) {
      if (j) s += ',';
      s += std::to_string(k_[j]);
    }
    return s + ")";
  }

  auto operator<=>(const MultiIndex&) const = default;

 private:
  void check() const {
    for (int v : k_)
      if (v < 0) throw std::domain_error("MultiIndex entries must be non-negative");
  }
  std::vector<int> k_;
};

// All multi-indices in the box [0, n)^d, lexicographic (last axis fastest).
inline std::vector<MultiIndex> box_indices(std::size_t d, int n) {
  std::vector<MultiIndex> out;
  if (d == 0 || n <= 0) return out;
  MultiIndex k(d);
  while (true) {
    out.push_back(k);
    std::size_t j = d;
    while (j > 0) {
      --j;
      if (++k[j] < n) break;
      k[j] = 0;
      if (j == 0) return out;
    }
  }
}

// All multi-indices with |k| <= total, sorted by length then lexicographically.
inline std::vector<MultiIndex> total_degree_indices(std::size_t d, int total) {
  std::vector<MultiIndex> out;
  for (const auto& k : box_indices(d, total + 1))
    if (k.length() <= total) out.push_back(k);
  std::stable_sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    return a.length() < b.length();
  });
  return out;
}

// Worker count: LOCSPEC_THREADS if set, else hardware concurrency.
inline unsigned thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LOCSPEC_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return hw;
}

// Runs body(chunk) for chunk in [0, chunks). The chunk layout is fixed by the
// caller, so reductions done per chunk and summed in chunk order are
// independent of the number of threads.
inline void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body) {
  unsigned nt = std::min<std::size_t>(thread_count(), chunks);
  if (nt <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(nt);
  for (unsigned t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = t; c < chunks; c += nt) body(c);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace locspec
