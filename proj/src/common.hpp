#ifndef SCATUQ_COMMON_HPP_
#define SCATUQ_COMMON_HPP_

#include <complex>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace scatuq {

using Complex = std::complex<double>;
using Eigen::Matrix3d;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Error categories surfaced through the C API as status codes.
enum class ErrorCode {
  invalid_argument = 1,
  io = 2,
  config = 3,
  numerics = 4,
  sample_rejected = 5,
  unsupported = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

/// FNV-1a over raw bytes; used for cache keys and content checksums.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t seed = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::vector<double>& v,
                           std::uint64_t seed = 14695981039346656037ull) {
  return v.empty() ? seed : fnv1a(v.data(), v.size() * sizeof(double), seed);
}

inline std::string hex64(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

/// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; the
/// caller is responsible for writing to disjoint locations. Results must not
/// depend on the number of threads.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t nt = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      std::size_t lo = n * t / nt, hi = n * (t + 1) / nt;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace scatuq

#endif  // SCATUQ_COMMON_HPP_
