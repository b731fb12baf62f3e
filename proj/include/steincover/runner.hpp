#pragma once

#include <vector>

#include "steincover/plan.hpp"

namespace steincover::runner {

// Executes plans in order, writing one CSV (and optionally one SVG) per
// plan. Output bytes are identical for every worker count. Returns 0 when
// every plan completed and all outputs were written, 1 otherwise; a failing
// plan's outputs are removed and later plans still run.
int run_plans(const std::vector<plan::SimulationPlan>& plans, int workers = 0);

}  // namespace steincover::runner
