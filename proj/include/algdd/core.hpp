// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_CORE_HPP
#define ALGDD_CORE_HPP

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace algdd {

using index_t = std::int32_t;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <class K>
struct real_of {
  using type = K;
};
template <class T>
struct real_of<std::complex<T>> {
  using type = T;
};
template <class K>
using real_of_t = typename real_of<K>::type;

template <class K>
concept scalar = std::is_same_v<K, double> || std::is_same_v<K, std::complex<double>>;

inline double conj_of(double v) { return v; }
inline std::complex<double> conj_of(const std::complex<double>& v) { return std::conj(v); }

inline double real_part(double v) { return v; }
inline double real_part(const std::complex<double>& v) { return v.real(); }

/// Builds an exception message from stream-formattable pieces.
template <class... Args>
std::string format_msg(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

/// Deterministic uniform sampler.  Draws are derived from the raw 64-bit
/// outputs of mt19937_64 so that sequences are identical across platforms and
/// standard libraries (std::uniform_real_distribution makes no such promise).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }

  /// Uniform on [-1, 1).
  double symmetric() { return 2.0 * uniform() - 1.0; }

  /// Uniform integer in [0, n).  The modulo bias is irrelevant here; only
  /// determinism matters.
  index_t pick(index_t n) { return static_cast<index_t>(gen_() % static_cast<std::uint64_t>(n)); }

  template <class K>
  K sample() {
    if constexpr (is_complex_v<K>) {
      double re = symmetric();
      double im = symmetric();
      return K(re, im);
    } else {
      return symmetric();
    }
  }

 private:
  std::mt19937_64 gen_;
};

/// Runs fn(i) for i in [0, count) on up to hardware_concurrency() threads.
/// Iterations must write to disjoint state.  The first exception thrown by a
/// worker is rethrown on the calling thread.
template <class F>
void parallel_for(index_t count, F&& fn) {
  if (count <= 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  unsigned workers = hw == 0 ? 1u : hw;
  if (workers > static_cast<unsigned>(count)) workers = static_cast<unsigned>(count);
  if (workers <= 1) {
    for (index_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<index_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        index_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

template <class K>
double norm2(const std::vector<K>& v) {
  double s = 0;
  for (const K& x : v) s += std::norm(x);
  return std::sqrt(s);
}

template <class K>
K dot(const std::vector<K>& a, const std::vector<K>& b) {
  K s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += conj_of(a[i]) * b[i];
  return s;
}

}  // namespace algdd

#endif  // ALGDD_CORE_HPP
