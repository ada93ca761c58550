#include "container_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace scatuq {
namespace io {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'A', 'T', 'U', 'Q', 'B', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void write_container(const std::string& path, const Container& c) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    require(out.good(), ErrorCode::io, "cannot open " + tmp);
    out.write(kMagic, 8);
    write_u32(out, static_cast<std::uint32_t>(c.kind));
    std::string header = c.header.dump();
    write_u64(out, header.size());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    write_u64(out, c.payload.size());
    out.write(reinterpret_cast<const char*>(c.payload.data()),
              static_cast<std::streamsize>(c.payload.size() * sizeof(double)));
    write_u64(out, fnv1a(c.payload));
    require(out.good(), ErrorCode::io, "write failed: " + tmp);
  }
  require(std::rename(tmp.c_str(), path.c_str()) == 0, ErrorCode::io,
          "rename failed: " + path);
}

Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  require(in.good() && std::memcmp(magic, kMagic, 8) == 0, ErrorCode::io,
          "bad container magic: " + path);
  Container c;
  c.kind = static_cast<int>(read_u32(in));
  std::uint64_t hlen = read_u64(in);
  require(hlen < (1ull << 30), ErrorCode::io, "oversized header: " + path);
  std::string header(hlen, '\0');
  in.read(header.data(), static_cast<std::streamsize>(hlen));
  c.header = nlohmann::json::parse(header);
  std::uint64_t plen = read_u64(in);
  c.payload.resize(plen);
  in.read(reinterpret_cast<char*>(c.payload.data()),
          static_cast<std::streamsize>(plen * sizeof(double)));
  std::uint64_t checksum = read_u64(in);
  require(in.good(), ErrorCode::io, "truncated container: " + path);
  require(checksum == fnv1a(c.payload), ErrorCode::io,
          "container checksum mismatch (corrupt cache?): " + path);
  return c;
}

std::vector<double> pack_complex(const VectorXcd& v) {
  std::vector<double> out(2 * v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[2 * i] = v(i).real();
    out[2 * i + 1] = v(i).imag();
  }
  return out;
}

VectorXcd unpack_complex(const double* data, std::size_t n_complex) {
  VectorXcd v(n_complex);
  for (std::size_t i = 0; i < n_complex; ++i)
    v(i) = Complex(data[2 * i], data[2 * i + 1]);
  return v;
}

void save_kl(const std::string& path, const rf::KLExpansion& kl) {
  Container c;
  c.kind = kKindKL;
  c.header["degree"] = kl.space.degree_u();
  c.header["level"] = kl.space.level();
  c.header["rank"] = kl.rank();
  c.header["dim"] = kl.space.dim();
  c.header["surface_hash"] = hex64(kl.surface->content_hash());
  c.payload.insert(c.payload.end(), kl.eigenvalues.begin(),
                   kl.eigenvalues.end());
  c.payload.insert(c.payload.end(), kl.modes.data(),
                   kl.modes.data() + kl.modes.size());
  c.payload.insert(c.payload.end(), kl.mean.data(),
                   kl.mean.data() + kl.mean.size());
  write_container(path, c);
}

rf::KLExpansion load_kl(const std::string& path,
                        const geo::MultipatchSurface& surface) {
  Container c = read_container(path);
  require(c.kind == kKindKL, ErrorCode::io, "not a KL container: " + path);
  require(c.header.at("surface_hash").get<std::string>() ==
              hex64(surface.content_hash()),
          ErrorCode::io,
          "KL container was built for a different surface: " + path);
  rf::KLExpansion kl;
  kl.surface = &surface;
  kl.space = geo::SplineSpace::continuous(surface, c.header.at("degree"),
                                          c.header.at("level"));
  int rank = c.header.at("rank");
  int dim = c.header.at("dim");
  require(dim == kl.space.dim(), ErrorCode::io, "KL dimension mismatch");
  std::size_t expect = rank + static_cast<std::size_t>(3) * dim * rank +
                       3 * static_cast<std::size_t>(dim);
  require(c.payload.size() == expect, ErrorCode::io, "KL payload mismatch");
  kl.eigenvalues.assign(c.payload.begin(), c.payload.begin() + rank);
  kl.modes = Eigen::Map<const MatrixXd>(c.payload.data() + rank, 3 * dim, rank);
  kl.mean = Eigen::Map<const VectorXd>(
      c.payload.data() + rank + static_cast<std::size_t>(3) * dim * rank,
      3 * dim);
  return kl;
}

void save_cauchy(const std::string& path, const iface::CauchyData& data,
                 const nlohmann::json& header) {
  Container c;
  c.kind = kKindCauchy;
  c.header = header;
  c.header["nodes"] = data.trace.size();
  c.payload = pack_complex(data.trace);
  std::vector<double> dn = pack_complex(data.dtrace);
  c.payload.insert(c.payload.end(), dn.begin(), dn.end());
  write_container(path, c);
}

iface::CauchyData load_cauchy(const std::string& path,
                              nlohmann::json* header) {
  Container c = read_container(path);
  require(c.kind == kKindCauchy, ErrorCode::io,
          "not a Cauchy container: " + path);
  std::size_t n = c.header.at("nodes").get<std::size_t>();
  require(c.payload.size() == 4 * n, ErrorCode::io, "Cauchy payload mismatch");
  iface::CauchyData data;
  data.trace = unpack_complex(c.payload.data(), n);
  data.dtrace = unpack_complex(c.payload.data() + 2 * n, n);
  if (header) *header = c.header;
  return data;
}

void save_density(const std::string& path, const bem::DensitySolution& sol,
                  const nlohmann::json& extra_header) {
  Container c;
  c.kind = kKindDensity;
  c.header = extra_header;
  c.header["level"] = sol.level;
  c.header["residual"] = sol.residual;
  c.header["dofs"] = sol.coefficients.size();
  c.header["parameter"] = sol.parameter;
  c.payload = pack_complex(sol.coefficients);
  write_container(path, c);
}

bem::DensitySolution load_density(const std::string& path,
                                  nlohmann::json* header) {
  Container c = read_container(path);
  require(c.kind == kKindDensity, ErrorCode::io,
          "not a density container: " + path);
  bem::DensitySolution sol;
  sol.level = c.header.at("level");
  sol.residual = c.header.at("residual");
  sol.parameter = c.header.at("parameter").get<std::vector<double>>();
  std::size_t n = c.header.at("dofs").get<std::size_t>();
  require(c.payload.size() == 2 * n, ErrorCode::io, "density payload mismatch");
  sol.coefficients = unpack_complex(c.payload.data(), n);
  if (header) *header = c.header;
  return sol;
}

void save_second_moment(const std::string& path,
                        const iface::SecondMomentData& data,
                        const nlohmann::json& header) {
  Container c;
  c.kind = kKindSecondMoment;
  c.header = header;
  int n = data.size();
  c.header["nodes"] = n;
  c.payload.reserve(8ull * n * n);
  for (const MatrixXcd* m :
       {&data.cor_dn, &data.cor_dn_u, &data.cor_u_dn, &data.cor_u}) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        c.payload.push_back((*m)(i, j).real());
        c.payload.push_back((*m)(i, j).imag());
      }
    }
  }
  write_container(path, c);
}

iface::SecondMomentData load_second_moment(const std::string& path,
                                           nlohmann::json* header) {
  Container c = read_container(path);
  require(c.kind == kKindSecondMoment, ErrorCode::io,
          "not a second-moment container: " + path);
  int n = c.header.at("nodes");
  require(c.payload.size() == 8ull * n * n, ErrorCode::io,
          "second-moment payload mismatch");
  iface::SecondMomentData data(n);
  const double* p = c.payload.data();
  for (MatrixXcd* m :
       {&data.cor_dn, &data.cor_dn_u, &data.cor_u_dn, &data.cor_u}) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        (*m)(i, j) = Complex(p[0], p[1]);
        p += 2;
      }
    }
  }
  if (header) *header = c.header;
  return data;
}

}  // namespace io
}  // namespace scatuq
