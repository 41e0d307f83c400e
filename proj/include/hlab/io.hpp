#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlab/field.hpp"

namespace hlab {

using json = nlohmann::ordered_json;

// TOML subset: [dotted.tables], key = value with strings, numbers, booleans,
// inf/nan and single-line arrays of scalars; '#' comments.
json parse_toml(const std::string& text, const std::string& origin = "<string>");
json load_toml(const std::filesystem::path& path);
// Parses one TOML scalar or array literal.
json parse_toml_value(const std::string& text);

// Sets a dotted path; the key must already exist in cfg.
void apply_override(json& cfg, const std::string& assignment);
// Overlays user onto defaults; unknown keys and type changes raise InvalidConfig.
json merge_config(const json& defaults, const json& user, const std::string& prefix = "");

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& j);
// Columns of equal length under the given header.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

// Raw little-endian complex128 (row-major, realization x point) plus a JSON sidecar.
void write_field(const std::filesystem::path& base, const EnsembleField& u);
EnsembleField read_field(const std::filesystem::path& base);
// Raw little-endian float64 (row-major, time x point) plus a JSON sidecar.
void write_potential(const std::filesystem::path& base, const SpaceTimePotential& V);
SpaceTimePotential read_potential(const std::filesystem::path& base);

// Output directory that records every written artifact for the manifest.
class RunDirectory {
 public:
  RunDirectory(std::filesystem::path root, std::string command);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(const std::string& name) const { return root_ / name; }
  void add(const std::string& name);
  void json_file(const std::string& name, const json& j);
  void csv_file(const std::string& name, const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& columns);
  void field_file(const std::string& name, const EnsembleField& u);
  void potential_file(const std::string& name, const SpaceTimePotential& V);
  // Writes manifest.json with the resolved config, inputs hash and artifact hashes.
  void finish(const json& config, const std::string& input_hash, const json& extra = json::object()) const;

 private:
  std::filesystem::path root_;
  std::string command_;
  std::vector<std::string> files_;
};

constexpr const char* kCodeVersion = "hlab 1.0.0";

}  // namespace hlab
