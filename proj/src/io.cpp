#include "hlab/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace hlab {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& msg) { raise(ErrorKind::Config, "InvalidConfig", msg); }

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

std::vector<std::string> split_dotted(const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) {
    part = trim(part);
    if (part.size() >= 2 && part.front() == '"' && part.back() == '"') part = part.substr(1, part.size() - 2);
    if (part.empty()) config_error("empty key segment in '" + key + "'");
    parts.push_back(part);
  }
  return parts;
}

json parse_scalar(const std::string& raw) {
  const std::string t = trim(raw);
  if (t.empty()) config_error("missing value");
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"') config_error("unterminated string " + t);
    std::string out;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
      if (t[i] == '\\' && i + 2 < t.size()) {
        const char c = t[++i];
        out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
      } else {
        out += t[i];
      }
    }
    return out;
  }
  if (t == "true") return true;
  if (t == "false") return false;
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::string num;
  for (char c : t)
    if (c != '_') num += c;
  const bool is_int = num.find_first_of(".eE") == std::string::npos;
  std::size_t used = 0;
  try {
    if (is_int) {
      const long long v = std::stoll(num, &used);
      if (used == num.size()) return v;
    } else {
      const double v = std::stod(num, &used);
      if (used == num.size()) return v;
    }
  } catch (const std::exception&) {
  }
  config_error("cannot parse value '" + t + "'");
}

json& descend(json& root, const std::vector<std::string>& path, std::size_t count) {
  json* node = &root;
  for (std::size_t i = 0; i < count; ++i) {
    json& next = (*node)[path[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) config_error("key '" + path[i] + "' is not a table");
    node = &next;
  }
  return *node;
}

}  // namespace

json parse_toml_value(const std::string& text) {
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') config_error("unterminated array " + t);
    json arr = json::array();
    const std::string body = t.substr(1, t.size() - 2);
    std::string cur;
    bool in_str = false;
    for (char c : body) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        if (!trim(cur).empty()) arr.push_back(parse_scalar(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty()) arr.push_back(parse_scalar(cur));
    return arr;
  }
  return parse_scalar(t);
}

json parse_toml(const std::string& text, const std::string& origin) {
  json root = json::object();
  std::vector<std::string> table;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(strip_comment(line));
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']' || t.size() < 3) config_error("malformed table header");
        table = split_dotted(t.substr(1, t.size() - 2));
        descend(root, table, table.size());
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) config_error("expected key = value");
      auto key = split_dotted(t.substr(0, eq));
      std::vector<std::string> full = table;
      full.insert(full.end(), key.begin(), key.end());
      json& parent = descend(root, full, full.size() - 1);
      if (parent.contains(full.back())) config_error("duplicate key '" + full.back() + "'");
      parent[full.back()] = parse_toml_value(t.substr(eq + 1));
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Config) throw;
    config_error(origin + ":" + std::to_string(lineno) + ": " + e.what());
  }
  return root;
}

json load_toml(const fs::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Config, "ConfigNotFound", "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str(), path.string());
}

namespace {

bool compatible(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  if (a.is_array() && b.is_array()) return true;
  return a.type() == b.type();
}

}  // namespace

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) config_error("override '" + assignment + "' is not KEY=VALUE");
  const auto path = split_dotted(assignment.substr(0, eq));
  json* node = &cfg;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->is_object() || !node->contains(path[i])) config_error("unknown override key '" + assignment.substr(0, eq) + "'");
    node = &(*node)[path[i]];
  }
  if (!node->is_object() || !node->contains(path.back()))
    config_error("unknown override key '" + assignment.substr(0, eq) + "'");
  std::string raw = trim(assignment.substr(eq + 1));
  json value;
  try {
    value = parse_toml_value(raw);
  } catch (const Error&) {
    value = raw;
  }
  json& slot = (*node)[path.back()];
  if (slot.is_string() && !value.is_string()) value = raw;
  if (!compatible(slot, value)) config_error("override '" + assignment + "' has the wrong type");
  slot = value;
}

json merge_config(const json& defaults, const json& user, const std::string& prefix) {
  json out = defaults;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!defaults.contains(it.key())) config_error("unknown key '" + key + "'");
    const json& def = defaults[it.key()];
    if (def.is_object()) {
      if (!it.value().is_object()) config_error("key '" + key + "' must be a table");
      out[it.key()] = merge_config(def, it.value(), key);
    } else {
      if (!compatible(def, it.value())) config_error("key '" + key + "' has the wrong type");
      out[it.key()] = it.value();
    }
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    raise(ErrorKind::Numerical, "HashFailure", "SHA-256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Config, "FileNotFound", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Config, "WriteFailure", "cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& col : columns)
    if (col.size() != rows) raise(ErrorKind::Validation, "ShapeMismatch", "CSV columns differ in length");
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c][r];
    os << "\n";
  }
  write_text(path, os.str());
}

namespace {

static_assert(std::endian::native == std::endian::little, "raw arrays are written in native little-endian order");

json grid_json(const Grid& g) { return {{"dim", g.dim()}, {"n", g.n()}, {"L", g.length()}}; }

Grid grid_from_json(const json& j) { return Grid(j.at("dim").get<int>(), j.at("n").get<int>(), j.at("L").get<double>()); }

void write_raw(const fs::path& path, const char* data, std::size_t bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Config, "WriteFailure", "cannot write " + path.string());
  out.write(data, static_cast<std::streamsize>(bytes));
}

void read_raw(const fs::path& path, char* data, std::size_t bytes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Config, "FileNotFound", "cannot open " + path.string());
  in.read(data, static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) raise(ErrorKind::Validation, "ShapeMismatch", "truncated " + path.string());
}

json read_sidecar(const fs::path& base) {
  std::ifstream in(base.string() + ".json");
  if (!in) raise(ErrorKind::Config, "FileNotFound", "missing sidecar for " + base.string());
  return json::parse(in);
}

}  // namespace

void write_field(const fs::path& base, const EnsembleField& u) {
  json side = {{"kind", "ensemble_field"}, {"grid", grid_json(u.grid)}, {"t", u.t},
               {"N", u.realizations()}, {"dtype", "complex128"}, {"endianness", "little"},
               {"layout", "row-major [realization][point]"}};
  if (u.provenance) {
    side["seed"] = u.provenance->seed;
    side["rng_contract"] = WienerSample::kContractVersion;
  }
  write_raw(base.string() + ".bin", reinterpret_cast<const char*>(u.values.data()),
            sizeof(cplx) * static_cast<std::size_t>(u.values.size()));
  write_json(base.string() + ".json", side);
}

EnsembleField read_field(const fs::path& base) {
  const json side = read_sidecar(base);
  if (side.value("dtype", "") != "complex128") raise(ErrorKind::Validation, "ShapeMismatch", "unsupported dtype");
  EnsembleField u;
  u.grid = grid_from_json(side.at("grid"));
  u.t = side.at("t").get<double>();
  u.values.resize(side.at("N").get<Index>(), u.grid.size());
  if (side.contains("seed")) u.provenance = WienerProvenance{side["seed"].get<std::uint64_t>(), u.values.rows()};
  read_raw(base.string() + ".bin", reinterpret_cast<char*>(u.values.data()),
           sizeof(cplx) * static_cast<std::size_t>(u.values.size()));
  return u;
}

void write_potential(const fs::path& base, const SpaceTimePotential& V) {
  json side = {{"kind", "potential"}, {"grid", grid_json(V.grid)}, {"times", V.times},
               {"dtype", "float64"}, {"endianness", "little"}, {"layout", "row-major [time][point]"}};
  write_raw(base.string() + ".bin", reinterpret_cast<const char*>(V.values.data()),
            sizeof(double) * static_cast<std::size_t>(V.values.size()));
  write_json(base.string() + ".json", side);
}

SpaceTimePotential read_potential(const fs::path& base) {
  const json side = read_sidecar(base);
  SpaceTimePotential V;
  V.grid = grid_from_json(side.at("grid"));
  V.times = side.at("times").get<std::vector<double>>();
  V.values.resize(static_cast<Index>(V.times.size()), V.grid.size());
  read_raw(base.string() + ".bin", reinterpret_cast<char*>(V.values.data()),
           sizeof(double) * static_cast<std::size_t>(V.values.size()));
  return V;
}

RunDirectory::RunDirectory(fs::path root, std::string command) : root_(std::move(root)), command_(std::move(command)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) raise(ErrorKind::Config, "WriteFailure", "cannot create output directory " + root_.string());
}

void RunDirectory::add(const std::string& name) {
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
}

void RunDirectory::json_file(const std::string& name, const json& j) {
  write_json(path(name), j);
  add(name);
}

void RunDirectory::csv_file(const std::string& name, const std::vector<std::string>& header,
                            const std::vector<std::vector<double>>& columns) {
  write_csv(path(name), header, columns);
  add(name);
}

void RunDirectory::field_file(const std::string& name, const EnsembleField& u) {
  write_field(path(name), u);
  add(name + ".bin");
  add(name + ".json");
}

void RunDirectory::potential_file(const std::string& name, const SpaceTimePotential& V) {
  write_potential(path(name), V);
  add(name + ".bin");
  add(name + ".json");
}

void RunDirectory::finish(const json& config, const std::string& input_hash, const json& extra) const {
  json artifacts = json::array();
  for (const auto& f : files_) artifacts.push_back({{"file", f}, {"sha256", sha256_file(path(f))}});
  json manifest = {{"command", command_}, {"code_version", kCodeVersion},
                   {"rng_contract", WienerSample::kContractVersion}, {"input_hash", input_hash},
                   {"config", config}, {"artifacts", artifacts}};
  for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
  write_json(path("manifest.json"), manifest);
}

}  // namespace hlab
