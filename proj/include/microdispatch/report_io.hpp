#pragma once

#include "microdispatch/evaluate.hpp"

#include <string>

namespace microdispatch::evaluate {

std::string report_json(const EvaluationReport& rep);
EvaluationReport parse_report_json(const std::string& text);

// scenario_id,prob,f1,f2,ens,losses_kwh,penalty
std::string per_scenario_csv(const EvaluationReport& rep);
// hour,<unit>_kw...,grid_kw,loss_kw,v_min,v_max
std::string per_hour_csv(const EvaluationReport& rep);

std::string schedule_json(const grid::NetworkCase& c, const DispatchSchedule& s);
DispatchSchedule parse_schedule_json(const grid::NetworkCase& c, const std::string& text);

}  // namespace microdispatch::evaluate
