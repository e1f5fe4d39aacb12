#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace romfbk {

/// On-disk layout, all integers little-endian:
///   8 bytes   magic "ROMFBK01"
///   u32       kind
///   u64       header length L
///   L bytes   UTF-8 JSON {"format_version", "kind", "meta", "arrays": [{"name", "shape"}]}
///   payload   f64 values of every array in declaration order, column-major
enum class ArtifactKind : std::uint32_t { dataset = 1, pod_basis = 2, model = 3, report = 4 };

inline constexpr std::string_view kArtifactMagic = "ROMFBK01";
inline constexpr int kArtifactVersion = 1;

std::string_view to_string(ArtifactKind kind);

struct NamedArray {
  std::string name;
  /// [n] for vectors, [rows, cols] for matrices.
  std::vector<std::int64_t> shape;
  Eigen::MatrixXd values;
};

struct Artifact {
  ArtifactKind kind = ArtifactKind::dataset;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedArray> arrays;

  void add(std::string name, const Eigen::Ref<const Eigen::MatrixXd>& m);
  void add_vector(std::string name, const Eigen::Ref<const Eigen::VectorXd>& v);
  bool has(std::string_view name) const;
  const NamedArray& get(std::string_view name) const;
  Eigen::MatrixXd matrix(std::string_view name) const;
  Eigen::VectorXd vector(std::string_view name) const;
};

std::string encode_artifact(const Artifact& a);
/// Throws FormatError on bad magic, unknown version, malformed header or a
/// payload whose length differs from the declared shapes.
Artifact decode_artifact(std::string_view bytes);

/// Writes via a temporary file in the same directory and renames it, so a
/// failed write never leaves a partial file behind.
void write_artifact(const std::filesystem::path& path, const Artifact& a);
Artifact read_artifact(const std::filesystem::path& path);
Artifact read_artifact(const std::filesystem::path& path, ArtifactKind expected);

/// Human-readable dump: "# <header json>" then "array,row,col,value" rows
/// with 17 significant digits.
std::string artifact_to_csv(const Artifact& a);
/// Parses the rows written by artifact_to_csv back into arrays (shapes from
/// the header line).
Artifact artifact_from_csv(std::string_view csv);

}  // namespace romfbk
