#include "odebc/worldgen.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "odebc/errors.hpp"
#include "odebc/parallel.hpp"
#include "odebc/rng.hpp"
#include "odebc/tensor_io.hpp"

namespace odebc {

namespace {

/// Component index by inverse CDF on the cumulative weights.
std::size_t pick_component(const GmmWorld& world, double u) {
  const auto comps = world.components();
  double acc = 0.0;
  for (std::size_t j = 0; j < comps.size(); ++j) {
    acc += comps[j].weight;
    if (u < acc) return j;
  }
  return comps.size() - 1;
}

Tensor draw_prior(const GmmWorld& world, rng::Generator& gen) {
  const auto& c = world.components()[pick_component(world, gen.uniform())];
  Tensor z(world.hr_shape());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = c.mean[i] + c.stddev * gen.normal();
  return z;
}

std::string manifest_path(std::size_t i, char kind) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c_%06zu.t", kind, i);
  return buf;
}

}  // namespace

Tensor sample_prior(const GmmWorld& world, std::uint64_t seed, std::uint64_t index) {
  rng::Generator gen(seed, rng::Stream::kPairs, index);
  return draw_prior(world, gen);
}

std::vector<ReferencePair> sample_pairs(const GmmWorld& world, std::size_t n, std::uint64_t seed) {
  require(n >= 1, "sample_pairs: n must be >= 1");
  std::vector<ReferencePair> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    rng::Generator gen(seed, rng::Stream::kPairs, i);
    Tensor z = draw_prior(world, gen);
    Tensor y = world.degrade(z);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += world.tau() * gen.normal();
    out[i] = {std::move(z), std::move(y)};
  }
  return out;
}

std::pair<std::vector<ReferencePair>, std::vector<ReferencePair>> split(
    const std::vector<ReferencePair>& pairs, double ratio, std::uint64_t seed) {
  require(ratio >= 0.0 && ratio <= 1.0, "split ratio must be in [0, 1]");
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  rng::Generator gen(seed, rng::Stream::kSplit, 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[gen.below(i)]);
  const auto n_ref = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(pairs.size())));
  std::pair<std::vector<ReferencePair>, std::vector<ReferencePair>> out;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_ref ? out.first : out.second).push_back(pairs[order[i]]);
  return out;
}

void write_pairs(const std::filesystem::path& dir, const std::vector<ReferencePair>& pairs,
                 std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::ostringstream manifest;
  manifest << "index,z_path,y_path,seed\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto zp = manifest_path(i, 'z'), yp = manifest_path(i, 'y');
    write_tensor(dir / zp, pairs[i].z);
    write_tensor(dir / yp, pairs[i].y);
    manifest << i << ',' << zp << ',' << yp << ',' << seed << '\n';
  }
  write_text(dir / "manifest.csv", manifest.str());
}

std::vector<ReferencePair> read_pairs(const std::filesystem::path& dir) {
  std::istringstream in(read_text(dir / "manifest.csv"));
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,z_path,y_path", 0) != 0)
    throw IoError(dir.string() + "/manifest.csv: missing header");
  std::vector<ReferencePair> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string idx, zp, yp;
    if (!std::getline(row, idx, ',') || !std::getline(row, zp, ',') || !std::getline(row, yp, ','))
      throw IoError(dir.string() + "/manifest.csv:" + std::to_string(lineno) + ": malformed row");
    out.push_back({read_tensor(dir / zp), read_tensor(dir / yp)});
  }
  if (out.empty()) throw IoError(dir.string() + "/manifest.csv lists no pairs");
  return out;
}

}  // namespace odebc
