#include "microdispatch/report_io.hpp"

#include "microdispatch/errors.hpp"
#include "microdispatch/io_util.hpp"

#include <json.hpp>

#include <sstream>

namespace microdispatch::evaluate {

using nlohmann::json;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(F1Breakdown, fuel_cost, fuel_units, om_cost, emission_kg,
                                   emission_cost, loss_kwh, loss_cost, grid_cost, grid_import_kwh,
                                   grid_export_kwh, total)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ReliabilityResult, c_aens, ens_kwh, demand_kwh, eir)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PenaltyBreakdown, unit_limit, soc, terminal_soc, ramp, tie, voltage,
                                   divergence, total)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ScenarioResult, id, probability, f1, reliability, f2, penalties,
                                   converged)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(HourResult, hour, unit_kw, grid_kw, loss_kw, v_min, v_max)

std::string report_json(const EvaluationReport& rep) {
    json doc;
    doc["units"] = rep.unit_names;
    doc["weights"] = {{"h1", rep.weights.h1}, {"h2", rep.weights.h2}, {"hc", rep.weights.hc}};
    doc["z"] = rep.z;
    doc["f1"] = rep.f1;
    doc["f2"] = rep.f2;
    doc["penalty"] = rep.penalty;
    doc["aens"] = rep.aens;
    doc["eir"] = rep.eir;
    doc["feasible"] = rep.feasible;
    doc["expected"] = rep.expected;
    doc["scenarios"] = rep.scenarios;
    doc["hours"] = rep.hours;
    return doc.dump(2) + "\n";
}

EvaluationReport parse_report_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        EvaluationReport rep;
        rep.unit_names = doc.at("units").get<std::vector<std::string>>();
        const auto& w = doc.at("weights");
        rep.weights = {w.at("h1").get<double>(), w.at("h2").get<double>(), w.at("hc").get<double>()};
        rep.z = doc.at("z").get<double>();
        rep.f1 = doc.at("f1").get<double>();
        rep.f2 = doc.at("f2").get<double>();
        rep.penalty = doc.at("penalty").get<double>();
        rep.aens = doc.at("aens").get<double>();
        rep.eir = doc.at("eir").get<double>();
        rep.feasible = doc.at("feasible").get<bool>();
        rep.expected = doc.at("expected").get<ScenarioResult>();
        rep.scenarios = doc.at("scenarios").get<std::vector<ScenarioResult>>();
        rep.hours = doc.at("hours").get<std::vector<HourResult>>();
        return rep;
    } catch (const json::exception& e) {
        throw ParseError(std::string("report JSON: ") + e.what());
    }
}

std::string per_scenario_csv(const EvaluationReport& rep) {
    using io::format_double;
    std::ostringstream out;
    out << "scenario_id,prob,f1,f2,ens,losses_kwh,penalty\n";
    for (const auto& s : rep.scenarios) {
        out << s.id << ',' << format_double(s.probability) << ',' << format_double(s.f1.total) << ','
            << format_double(s.f2) << ',' << format_double(s.reliability.ens_kwh) << ','
            << format_double(s.f1.loss_kwh) << ',' << format_double(s.penalties.total) << '\n';
    }
    return out.str();
}

std::string per_hour_csv(const EvaluationReport& rep) {
    using io::format_double;
    std::ostringstream out;
    out << "hour";
    for (const auto& name : rep.unit_names) {
        out << ',' << io::csv_field(name + "_kw");
    }
    out << ",grid_kw,loss_kw,v_min,v_max\n";
    for (const auto& h : rep.hours) {
        out << h.hour;
        for (double v : h.unit_kw) {
            out << ',' << format_double(v);
        }
        out << ',' << format_double(h.grid_kw) << ',' << format_double(h.loss_kw) << ','
            << format_double(h.v_min) << ',' << format_double(h.v_max) << '\n';
    }
    return out.str();
}

std::string schedule_json(const grid::NetworkCase& c, const DispatchSchedule& s) {
    const ScheduleLayout l = ScheduleLayout::of(c);
    json doc;
    doc["steps"] = l.steps;
    doc["dt_hours"] = c.horizon.dt_hours;
    doc["chp"] = json::array();
    for (std::size_t k = 0; k < l.chp_units.size(); ++k) {
        doc["chp"].push_back({{"name", c.ders[static_cast<std::size_t>(l.chp_units[k])].name},
                              {"kw", s.chp_kw[k]}});
    }
    doc["ess"] = json::array();
    for (std::size_t k = 0; k < l.ess_units.size(); ++k) {
        doc["ess"].push_back({{"name", c.ders[static_cast<std::size_t>(l.ess_units[k])].name},
                              {"kw", s.ess_kw[k]},
                              {"soc_kwh", soc_trajectory(c, s, static_cast<int>(k))}});
    }
    return doc.dump(2) + "\n";
}

DispatchSchedule parse_schedule_json(const grid::NetworkCase& c, const std::string& text) {
    DispatchSchedule s;
    try {
        const json doc = json::parse(text);
        for (const auto& row : doc.at("chp")) {
            s.chp_kw.push_back(row.at("kw").get<std::vector<double>>());
        }
        for (const auto& row : doc.at("ess")) {
            s.ess_kw.push_back(row.at("kw").get<std::vector<double>>());
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("schedule JSON: ") + e.what());
    }
    check_schedule(c, s);
    return s;
}

}  // namespace microdispatch::evaluate
