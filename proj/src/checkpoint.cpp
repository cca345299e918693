#include "leoho/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>

namespace leoho::drl {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error("checkpoint " + path.string() + ": " + what);
}

std::size_t expect_count(std::istream& in, const std::string& key,
                         const std::filesystem::path& path) {
  std::string token;
  std::size_t value = 0;
  if (!(in >> token) || token != key || !(in >> value)) fail(path, "expected '" + key + "'");
  return value;
}

}  // namespace

void save_checkpoint(const PolicyParameters& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint " + path.string() + ": cannot open for writing");
  const auto& shape = params.shape();
  out << "leoho-checkpoint " << kCheckpointVersion << '\n';
  out << "obs_dim " << shape.obs_dim << '\n';
  out << "ues " << shape.num_ues << '\n';
  out << "planes " << shape.num_planes << '\n';
  out << "hidden " << shape.hidden.size();
  for (std::size_t w : shape.hidden) out << ' ' << w;
  out << '\n';
  out << "params " << params.flat().size() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < params.flat().size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%a", params.flat()(i));
    out << buf << '\n';
  }
  if (!out) throw std::runtime_error("checkpoint " + path.string() + ": write failed");
}

PolicyParameters load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "leoho-checkpoint") fail(path, "not a checkpoint");
  if (version != kCheckpointVersion)
    fail(path, "format version " + std::to_string(version) + " is not supported");

  NetworkShape shape;
  shape.obs_dim = expect_count(in, "obs_dim", path);
  shape.num_ues = expect_count(in, "ues", path);
  shape.num_planes = expect_count(in, "planes", path);
  const std::size_t layers = expect_count(in, "hidden", path);
  shape.hidden.resize(layers);
  for (auto& w : shape.hidden)
    if (!(in >> w)) fail(path, "truncated hidden widths");
  const std::size_t count = expect_count(in, "params", path);
  if (count != shape.param_count()) fail(path, "parameter count does not match the shape");

  PolicyParameters params(shape);
  std::string token;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> token)) fail(path, "truncated parameter list");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') fail(path, "malformed value '" + token + "'");
    params.flat()(static_cast<Eigen::Index>(i)) = v;
  }
  return params;
}

void check_compatible(const PolicyParameters& params, const env::ScenarioConfig& scenario) {
  const auto& shape = params.shape();
  if (shape.num_ues != scenario.num_ues)
    throw std::runtime_error("checkpoint: trained for J=" + std::to_string(shape.num_ues) +
                             ", scenario has J=" + std::to_string(scenario.num_ues));
  if (shape.num_planes != scenario.num_planes)
    throw std::runtime_error("checkpoint: trained for K=" + std::to_string(shape.num_planes) +
                             ", scenario has K=" + std::to_string(scenario.num_planes));
  if (shape.obs_dim != scenario.observation_size())
    throw std::runtime_error("checkpoint: observation length " + std::to_string(shape.obs_dim) +
                             " does not match the scenario feature mask");
}

}  // namespace leoho::drl
