#pragma once

#include <string>
#include <vector>

#include "csa/json_io.hpp"

namespace csa::tasks {

using io::json;

/// A task scenario together with the scripted operator that fixes it.
struct TaskFiles {
  std::string name;
  json scenario;
  json user;
};

/// Rivet insertion on a cylindrical cowling; holes 2 and 3 are registered 3 mm off.
TaskFiles insertion();
/// Three polishing passes over a curved panel with one stubborn defect.
TaskFiles polishing();
/// Ten zigzag layup passes over an extruded airfoil; pass 6 is misaligned.
TaskFiles layup();

std::vector<TaskFiles> all();

}  // namespace csa::tasks
