#pragma once

#include <map>
#include <string>

namespace rkpair {

// Tableau files from data/, keyed by file stem.
const std::map<std::string, std::string>& embedded_tableaux();

}  // namespace rkpair
