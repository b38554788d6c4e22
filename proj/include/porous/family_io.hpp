#pragma once

#include <iosfwd>
#include <string>

#include "porous/construction.hpp"

namespace porous {

/// JSON-lines: a header object, then one object per hole in (k, l, selection) order.
void write_family(std::ostream& out, const HoleFamily& family);
std::string serialize_family(const HoleFamily& family);

/// Throws ParseError carrying the 1-based line number of the offending record.
HoleFamily read_family(std::istream& in);
HoleFamily deserialize_family(const std::string& text);

HoleFamily load_family(const std::string& path);
void save_family(const std::string& path, const HoleFamily& family);

}  // namespace porous
