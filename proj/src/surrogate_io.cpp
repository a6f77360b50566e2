#include "collective/surrogate_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "collective/error.hpp"

namespace collective {

namespace fs = std::filesystem;

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error(ErrorCode::IoError, "truncated field file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p, bool binary = false) {
  std::ifstream in(p, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  return in;
}

using Meta = std::map<std::string, std::string>;

void write_common(const fs::path& dir, const Meta& meta, const CollectiveIndexSet& G,
                  const std::map<LevelIndex, SpatialField>& details) {
  std::error_code ec;
  fs::create_directories(dir / "fields", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + (dir / "fields").string() + ": " + ec.message());
  {
    auto out = open_out(dir / "meta.txt");
    for (const auto& [k, v] : meta) out << k << " = " << v << '\n';
  }
  {
    auto out = open_out(dir / "index.txt");
    G.write_text(out);
  }
  auto list = open_out(dir / "details.txt");
  std::size_t id = 0;
  for (const auto& [key, field] : details) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.bin", id++);
    list << key.first << '\t' << key.second.to_string() << '\t' << name << '\n';
    auto out = open_out(dir / "fields" / name, true);
    write_field(out, field);
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + std::string(name));
  }
}

Meta read_meta(const fs::path& dir, const std::string& kind) {
  auto in = open_in(dir / "meta.txt");
  Meta meta;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    meta[line.substr(0, eq)] = line.substr(eq + 3);
  }
  if (meta["kind"] != kind) {
    throw Error(ErrorCode::IoError, dir.string() + " holds a '" + meta["kind"] + "' surrogate, expected " + kind);
  }
  return meta;
}

double meta_double(const Meta& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw Error(ErrorCode::IoError, "meta.txt lacks " + key);
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorCode::IoError, "bad value for " + key + ": " + it->second);
  }
}

std::int64_t meta_int(const Meta& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw Error(ErrorCode::IoError, "meta.txt lacks " + key);
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw Error(ErrorCode::IoError, "bad value for " + key + ": " + it->second);
  }
}

std::pair<std::uint32_t, MultiIndex> parse_level_line(const std::string& line, std::string* rest) {
  std::istringstream ls(line);
  std::string k, s;
  if (!std::getline(ls, k, '\t') || !std::getline(ls, s, '\t')) throw Error(ErrorCode::IoError, "malformed line: " + line);
  if (rest && !std::getline(ls, *rest)) throw Error(ErrorCode::IoError, "malformed line: " + line);
  try {
    return {static_cast<std::uint32_t>(std::stoul(k)), MultiIndex::parse(s)};
  } catch (const Error&) {
    throw Error(ErrorCode::IoError, "malformed line: " + line);
  } catch (const std::exception&) {
    throw Error(ErrorCode::IoError, "malformed line: " + line);
  }
}

void read_common(const fs::path& dir, CollectiveIndexSet& G, std::map<LevelIndex, SpatialField>& details) {
  {
    auto in = open_in(dir / "index.txt");
    G = CollectiveIndexSet::read_text(in);
  }
  auto list = open_in(dir / "details.txt");
  std::string line;
  while (std::getline(list, line)) {
    if (line.empty()) continue;
    std::string file;
    auto [k, s] = parse_level_line(line, &file);
    auto in = open_in(dir / "fields" / file, true);
    SpatialField v = read_field(in);
    if (v.level != k) throw Error(ErrorCode::IoError, file + " has level " + std::to_string(v.level));
    details.emplace(LevelIndex{k, s}, std::move(v));
  }
}

}  // namespace

void write_field(std::ostream& out, const SpatialField& v) {
  put_le<std::int32_t>(out, static_cast<std::int32_t>(v.level));
  for (double x : v.values) put_le<double>(out, x);
}

SpatialField read_field(std::istream& in) {
  const auto level = get_le<std::int32_t>(in);
  if (level < 0 || level > static_cast<std::int32_t>(kMaxLevel)) {
    throw Error(ErrorCode::IoError, "field level " + std::to_string(level) + " out of range");
  }
  std::vector<double> values(interior_nodes(static_cast<std::uint32_t>(level)));
  for (double& x : values) x = get_le<double>(in);
  return SpatialField(static_cast<std::uint32_t>(level), std::move(values));
}

void write_surrogate(const fs::path& dir, const TaylorSurrogate& S) {
  write_common(dir, {{"kind", "taylor"}, {"mass", num(S.mass)}, {"budget", std::to_string(S.budget)}}, S.G, S.details);
}

void write_surrogate(const fs::path& dir, const CollocSurrogate& S) {
  write_common(dir,
               {{"kind", "colloc"},
                {"mass", num(S.mass)},
                {"budget", std::to_string(S.budget)},
                {"cost", std::to_string(S.cost)},
                {"cost_bound", num(S.cost_bound)},
                {"closure_added", std::to_string(S.closure_added)},
                {"leja_points", std::to_string(S.xi.size())}},
               S.G, S.details);
  auto out = open_out(dir / "sections.txt");
  for (std::size_t k = 0; k < S.sections.size(); ++k) {
    for (const auto& s : S.sections[k]) out << k << '\t' << s.to_string() << '\n';
  }
}

void write_surrogate(const fs::path& dir, const LegendreSurrogate& S) {
  write_common(dir,
               {{"kind", "legendre"},
                {"mass", num(S.mass)},
                {"budget", std::to_string(S.budget)},
                {"norm", S.norm == LegendreNorm::Sup ? "sup" : "orthonormal"},
                {"cg_iterations", std::to_string(S.cg_iterations)},
                {"cg_residual", num(S.cg_residual)}},
               S.G, S.details);
}

TaylorSurrogate read_taylor(const fs::path& dir) {
  auto meta = read_meta(dir, "taylor");
  TaylorSurrogate S;
  S.mass = meta_double(meta, "mass");
  S.budget = meta_int(meta, "budget");
  read_common(dir, S.G, S.details);
  return S;
}

CollocSurrogate read_colloc(const fs::path& dir) {
  auto meta = read_meta(dir, "colloc");
  CollocSurrogate S;
  S.mass = meta_double(meta, "mass");
  S.budget = meta_int(meta, "budget");
  S.cost = static_cast<std::uint64_t>(meta_int(meta, "cost"));
  S.cost_bound = meta_double(meta, "cost_bound");
  S.closure_added = static_cast<std::size_t>(meta_int(meta, "closure_added"));
  const auto npts = meta_int(meta, "leja_points");
  if (npts > 0) S.xi = leja_points(static_cast<std::size_t>(npts));
  read_common(dir, S.G, S.details);
  auto in = open_in(dir / "sections.txt");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto [k, s] = parse_level_line(line, nullptr);
    if (S.sections.size() <= k) S.sections.resize(k + 1);
    S.sections[k].insert(s);
  }
  return S;
}

LegendreSurrogate read_legendre(const fs::path& dir) {
  auto meta = read_meta(dir, "legendre");
  LegendreSurrogate S;
  S.mass = meta_double(meta, "mass");
  S.budget = meta_int(meta, "budget");
  S.norm = meta["norm"] == "sup" ? LegendreNorm::Sup : LegendreNorm::Orthonormal;
  S.cg_iterations = static_cast<std::size_t>(meta_int(meta, "cg_iterations"));
  S.cg_residual = meta_double(meta, "cg_residual");
  read_common(dir, S.G, S.details);
  return S;
}

}  // namespace collective
