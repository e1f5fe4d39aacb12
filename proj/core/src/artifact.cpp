#include "romfbk/artifact.hpp"

#include "romfbk/error.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace romfbk {

std::string_view to_string(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::dataset:
      return "dataset";
    case ArtifactKind::pod_basis:
      return "pod_basis";
    case ArtifactKind::model:
      return "model";
    case ArtifactKind::report:
      return "report";
  }
  return "unknown";
}

void Artifact::add(std::string name, const Eigen::Ref<const Eigen::MatrixXd>& m) {
  arrays.push_back({std::move(name), {m.rows(), m.cols()}, m});
}

void Artifact::add_vector(std::string name, const Eigen::Ref<const Eigen::VectorXd>& v) {
  arrays.push_back({std::move(name), {v.size()}, Eigen::MatrixXd(v)});
}

bool Artifact::has(std::string_view name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return true;
  }
  return false;
}

const NamedArray& Artifact::get(std::string_view name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw FormatError("artifact: missing array '" + std::string(name) + "'");
}

Eigen::MatrixXd Artifact::matrix(std::string_view name) const { return get(name).values; }

Eigen::VectorXd Artifact::vector(std::string_view name) const {
  const NamedArray& a = get(name);
  if (a.shape.size() != 1) throw FormatError("artifact: array '" + a.name + "' is not a vector");
  return a.values.col(0);
}

namespace {

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(std::string_view in, std::size_t at) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

std::pair<Eigen::Index, Eigen::Index> dims_of(const std::vector<std::int64_t>& shape) {
  if (shape.size() == 1) return {shape[0], 1};
  if (shape.size() == 2) return {shape[0], shape[1]};
  throw FormatError("artifact: arrays must have rank 1 or 2");
}

nlohmann::json header_of(const Artifact& a) {
  nlohmann::json h;
  h["format_version"] = kArtifactVersion;
  h["kind"] = std::string(to_string(a.kind));
  h["meta"] = a.meta;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& x : a.arrays) arr.push_back({{"name", x.name}, {"shape", x.shape}});
  h["arrays"] = arr;
  return h;
}

// Fills a.arrays (empty values) and a.meta from a parsed header; returns
// the total number of doubles declared.
std::size_t apply_header(Artifact& a, const nlohmann::json& h) {
  try {
    if (h.at("format_version").get<int>() != kArtifactVersion) {
      throw FormatError("artifact: unsupported format version " + h.at("format_version").dump());
    }
    a.meta = h.at("meta");
    std::size_t total = 0;
    for (const auto& x : h.at("arrays")) {
      NamedArray na;
      na.name = x.at("name").get<std::string>();
      na.shape = x.at("shape").get<std::vector<std::int64_t>>();
      auto [r, c] = dims_of(na.shape);
      if (r < 0 || c < 0) throw FormatError("artifact: negative array extent");
      na.values.resize(r, c);
      total += static_cast<std::size_t>(r * c);
      a.arrays.push_back(std::move(na));
    }
    return total;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("artifact: malformed header: ") + e.what());
  }
}

}  // namespace

std::string encode_artifact(const Artifact& a) {
  const std::string header = header_of(a).dump();
  std::string out(kArtifactMagic);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.kind));
  put_le<std::uint64_t>(out, header.size());
  out += header;
  for (const auto& x : a.arrays) {
    auto [r, c] = dims_of(x.shape);
    if (x.values.rows() != r || x.values.cols() != c) throw FormatError("artifact: array '" + x.name + "' shape mismatch");
    for (Eigen::Index i = 0; i < x.values.size(); ++i) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x.values.data()[i]));
  }
  return out;
}

Artifact decode_artifact(std::string_view in) {
  constexpr std::size_t fixed = 8 + 4 + 8;
  if (in.size() < fixed) throw FormatError("artifact: file too short");
  if (in.substr(0, 8) != kArtifactMagic) throw FormatError("artifact: bad magic");
  Artifact a;
  const auto kind = get_le<std::uint32_t>(in, 8);
  if (kind < 1 || kind > 4) throw FormatError("artifact: unknown kind " + std::to_string(kind));
  a.kind = static_cast<ArtifactKind>(kind);
  const auto hlen = get_le<std::uint64_t>(in, 12);
  if (hlen > in.size() - fixed) throw FormatError("artifact: header length exceeds file size");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(in.substr(fixed, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("artifact: header is not valid JSON: ") + e.what());
  }
  if (h.value("kind", std::string()) != to_string(a.kind)) throw FormatError("artifact: header kind disagrees with tag");
  const std::size_t n = apply_header(a, h);
  const std::size_t payload = in.size() - fixed - hlen;
  if (payload != n * 8) {
    throw FormatError("artifact: shape mismatch: header declares " + std::to_string(n) + " floats, payload holds " +
                      std::to_string(payload / 8) + (payload % 8 ? " and a partial value" : ""));
  }
  std::size_t at = fixed + hlen;
  for (auto& x : a.arrays) {
    for (Eigen::Index i = 0; i < x.values.size(); ++i, at += 8) {
      x.values.data()[i] = std::bit_cast<double>(get_le<std::uint64_t>(in, at));
    }
  }
  return a;
}

void write_artifact(const std::filesystem::path& path, const Artifact& a) {
  const std::string bytes = encode_artifact(a);
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) {
      f.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

Artifact read_artifact(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_artifact(bytes);
}

Artifact read_artifact(const std::filesystem::path& path, ArtifactKind expected) {
  Artifact a = read_artifact(path);
  if (a.kind != expected) {
    throw FormatError("'" + path.string() + "' holds a " + std::string(to_string(a.kind)) + ", expected a " +
                      std::string(to_string(expected)));
  }
  return a;
}

std::string artifact_to_csv(const Artifact& a) {
  std::string out = "# " + header_of(a).dump() + "\narray,row,col,value\n";
  char buf[64];
  for (const auto& x : a.arrays) {
    for (Eigen::Index c = 0; c < x.values.cols(); ++c) {
      for (Eigen::Index r = 0; r < x.values.rows(); ++r) {
        const int n = std::snprintf(buf, sizeof buf, "%.17g", x.values(r, c));
        out += x.name;
        out += ',' + std::to_string(r) + ',' + std::to_string(c) + ',';
        out.append(buf, static_cast<std::size_t>(n));
        out += '\n';
      }
    }
  }
  return out;
}

Artifact artifact_from_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw FormatError("csv: missing header line");
  Artifact a;
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line.substr(2));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("csv: bad header: ") + e.what());
  }
  const std::string kind = h.value("kind", std::string());
  bool known = false;
  for (auto k : {ArtifactKind::dataset, ArtifactKind::pod_basis, ArtifactKind::model, ArtifactKind::report}) {
    if (to_string(k) == kind) {
      a.kind = k;
      known = true;
    }
  }
  if (!known) throw FormatError("csv: unknown kind '" + kind + "'");
  apply_header(a, h);
  std::getline(in, line);  // column names
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c3 = line.rfind(',');
    const auto c2 = line.rfind(',', c3 - 1);
    const auto c1 = line.rfind(',', c2 - 1);
    if (c1 == std::string::npos || c2 == std::string::npos || c3 == std::string::npos) {
      throw FormatError("csv: malformed row '" + line + "'");
    }
    const std::string name = line.substr(0, c1);
    const long r = std::stol(line.substr(c1 + 1, c2 - c1 - 1));
    const long c = std::stol(line.substr(c2 + 1, c3 - c2 - 1));
    const double v = std::strtod(line.c_str() + c3 + 1, nullptr);
    bool found = false;
    for (auto& x : a.arrays) {
      if (x.name == name) {
        if (r < 0 || c < 0 || r >= x.values.rows() || c >= x.values.cols()) throw FormatError("csv: index out of range");
        x.values(r, c) = v;
        found = true;
        break;
      }
    }
    if (!found) throw FormatError("csv: row for undeclared array '" + name + "'");
  }
  return a;
}

}  // namespace romfbk
