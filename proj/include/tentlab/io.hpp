#pragma once

#include <string>

#include "tentlab/tentspaces.hpp"

namespace tentlab {

/// Field file format: JSON with the grid, time mesh, component count, and
/// values as [re, im] pairs indexed [component][node][cell].
std::string serialize_field(const SpaceTimeField& f);
SpaceTimeField deserialize_field(const std::string& text);

void save_field(const std::string& path, const SpaceTimeField& f);
SpaceTimeField load_field(const std::string& path);

}  // namespace tentlab
