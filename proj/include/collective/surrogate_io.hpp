#pragma once

#include <filesystem>
#include <iosfwd>

#include "collective/colloc.hpp"
#include "collective/fem1d.hpp"
#include "collective/legendre.hpp"
#include "collective/taylor.hpp"

namespace collective {

/// Directory layout shared by every surrogate:
///   meta.txt      "key = value" lines: kind, mass, budget and kind-specific scalars
///   index.txt     the index set G (CollectiveIndexSet::write_text)
///   details.txt   one line per stored detail: "k<TAB>multiindex<TAB>file"
///   fields/*.bin  int32 level, then 2^level - 1 float64 values, all little-endian
/// Collocation adds sections.txt with "k<TAB>multiindex" for every s in Lambda_k.
void write_surrogate(const std::filesystem::path& dir, const TaylorSurrogate& S);
void write_surrogate(const std::filesystem::path& dir, const CollocSurrogate& S);
void write_surrogate(const std::filesystem::path& dir, const LegendreSurrogate& S);

TaylorSurrogate read_taylor(const std::filesystem::path& dir);
CollocSurrogate read_colloc(const std::filesystem::path& dir);
LegendreSurrogate read_legendre(const std::filesystem::path& dir);

void write_field(std::ostream& out, const SpatialField& v);
SpatialField read_field(std::istream& in);

}  // namespace collective
