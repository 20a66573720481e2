#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shapelab/field.hpp"

namespace shapelab {

/// Writes to "<path>.tmp" and renames over `path`. Errors are surfaced as
/// shapelab::Error with the OS message.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

using NamedField = std::pair<std::string, Field>;

/// Binary grid file: one JSON header line (dims, origin, spacing, field names)
/// followed by the fields as little-endian float64, each row-major, in order.
/// All fields must share one grid.
void save_grid_fields(const std::string& path, const std::vector<NamedField>& fields);
std::vector<NamedField> load_grid_fields(const std::string& path);

}  // namespace shapelab
