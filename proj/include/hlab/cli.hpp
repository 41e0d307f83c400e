#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hlab/io.hpp"
#include "hlab/profiles.hpp"
#include "hlab/solver.hpp"

namespace hlab {

// Fully populated configuration with every accepted key.
json default_config();

// Resolved config: defaults, then the file, then --seed/--out/--override.
struct RunConfig {
  json values;
  std::string input_hash;

  const json& at(const std::string& dotted) const;
  double num(const std::string& dotted) const;
  Index integer(const std::string& dotted) const;
  std::string str(const std::string& dotted) const;
  bool flag(const std::string& dotted) const;
  std::vector<double> list(const std::string& dotted) const;
};

RunConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides,
                         const std::string* seed, const std::string* out);

MomentumDistribution make_profile(const RunConfig& cfg);
PairPotential make_potential(const RunConfig& cfg);
Grid make_grid(const RunConfig& cfg);
// Modulated perturbation eps a(x) f(xi) Wiener-coupled to the background; zero when amplitude is 0.
EnsembleField make_perturbation(const RunConfig& cfg, const Background& bg, const MomentumDistribution& f);

const std::vector<std::string>& subcommands();

// Returns the process exit code: 0 ok, 2 hypothesis/validation, 3 numerical, 4 config.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace hlab
