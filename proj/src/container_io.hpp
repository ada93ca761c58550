#ifndef SCATUQ_CONTAINER_IO_HPP_
#define SCATUQ_CONTAINER_IO_HPP_

#include <string>
#include <vector>

#include "json.hpp"

#include "interface.hpp"
#include "random_field.hpp"

namespace scatuq {
namespace io {

// Versioned binary container, little-endian:
//   bytes 0..7   magic "SCATUQB1"
//   u32          kind
//   u64          header length in bytes
//   ...          JSON header (UTF-8)
//   u64          payload length in doubles
//   ...          payload (IEEE-754 doubles; complex data interleaves re, im)
//   u64          FNV-1a checksum of the payload bytes
// Readers reject wrong magic, unknown kind, and checksum mismatches.
struct Container {
  int kind = 0;
  nlohmann::json header;
  std::vector<double> payload;
};

inline constexpr int kKindKL = 1;
inline constexpr int kKindCauchy = 2;
inline constexpr int kKindDensity = 3;
inline constexpr int kKindSecondMoment = 4;

/// Atomic write (temp file + rename).
void write_container(const std::string& path, const Container& c);
Container read_container(const std::string& path);

// domain-object adapters
void save_kl(const std::string& path, const rf::KLExpansion& kl);
/// The surface must be the one the expansion was built on (hash-checked).
rf::KLExpansion load_kl(const std::string& path,
                        const geo::MultipatchSurface& surface);

void save_cauchy(const std::string& path, const iface::CauchyData& data,
                 const nlohmann::json& header);
iface::CauchyData load_cauchy(const std::string& path,
                              nlohmann::json* header = nullptr);

void save_density(const std::string& path, const bem::DensitySolution& sol,
                  const nlohmann::json& extra_header);
bem::DensitySolution load_density(const std::string& path,
                                  nlohmann::json* header = nullptr);

void save_second_moment(const std::string& path,
                        const iface::SecondMomentData& data,
                        const nlohmann::json& header);
iface::SecondMomentData load_second_moment(const std::string& path,
                                           nlohmann::json* header = nullptr);

std::vector<double> pack_complex(const VectorXcd& v);
VectorXcd unpack_complex(const double* data, std::size_t n_complex);

}  // namespace io
}  // namespace scatuq

#endif  // SCATUQ_CONTAINER_IO_HPP_
