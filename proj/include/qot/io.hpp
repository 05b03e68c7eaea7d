// Copyright 2026 The qot developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// File formats. Qubits and family functions are 1-based on disk (qubit
// order 1..n left to right) and 0-based in the C++ API; setting IDs are
// 0-based everywhere.

#pragma once

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "qot/backend.hpp"
#include "qot/budget.hpp"
#include "qot/errors.hpp"
#include "qot/estimate.hpp"
#include "qot/hash_family.hpp"
#include "qot/schedule.hpp"

namespace qot {

using Json = nlohmann::json;

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw missing_data("cannot open file for reading: " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw invalid_argument("cannot open file for writing: " + path);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Family files:
// { "n": int, "k": int, "construction": string, "functions": [[color,...]] }
// ---------------------------------------------------------------------------

inline Json family_to_json(const PerfectHashFamily& family) {
  Json functions = Json::array();
  for (const HashFunction& f : family.functions) {
    Json colors = Json::array();
    for (std::uint8_t c : f.colors) colors.push_back(static_cast<int>(c));
    functions.push_back(std::move(colors));
  }
  return Json{{"n", family.n},
              {"k", family.k},
              {"construction", family.construction.to_string()},
              {"functions", std::move(functions)}};
}

inline PerfectHashFamily family_from_json(const Json& j) {
  PerfectHashFamily family;
  family.n = j.at("n").get<int>();
  family.k = j.at("k").get<int>();
  family.construction = Construction::parse(j.at("construction").get<std::string>());
  for (const Json& colors : j.at("functions")) {
    HashFunction f;
    for (const Json& c : colors)
      f.colors.push_back(static_cast<std::uint8_t>(c.get<int>()));
    family.functions.push_back(std::move(f));
  }
  validate_family(family);
  return family;
}

inline void save_family(const PerfectHashFamily& family, const std::string& path) {
  detail::open_output(path) << family_to_json(family).dump(2) << "\n";
}

inline PerfectHashFamily load_family(const std::string& path) {
  auto in = detail::open_input(path);
  Json j;
  try {
    in >> j;
    return family_from_json(j);
  } catch (const Json::exception& e) {
    throw invalid_argument("malformed family file " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Plan files:
// { "n": int, "k": int, "shots": int,
//   "settings": [ { "id": int, "bases": "xyz...", "provenance": {...} } ] }
// Provenance is {"type":"uniform","basis":"x"} or
// {"type":"derived","function": i (1-based), "map": ["x","y",...]} with the
// map indexed by color.
// ---------------------------------------------------------------------------

inline Json plan_to_json(const MeasurementPlan& plan) {
  Json settings = Json::array();
  for (int id = 0; id < plan.size(); ++id) {
    const PlanSetting& ps = plan.settings[static_cast<std::size_t>(id)];
    Json prov;
    if (ps.provenance.kind == Provenance::Kind::uniform) {
      prov = Json{{"type", "uniform"},
                  {"basis", std::string(1, to_char(ps.provenance.uniform_basis))}};
    } else {
      Json map = Json::array();
      for (Basis b : ps.provenance.color_to_basis)
        map.push_back(std::string(1, to_char(b)));
      prov = Json{{"type", "derived"},
                  {"function", ps.provenance.function_index + 1},
                  {"map", std::move(map)}};
    }
    settings.push_back(Json{{"id", id},
                            {"bases", ps.setting.bases},
                            {"provenance", std::move(prov)}});
  }
  return Json{{"n", plan.n},
              {"k", plan.k},
              {"shots", plan.shots},
              {"settings", std::move(settings)}};
}

inline MeasurementPlan plan_from_json(const Json& j) {
  MeasurementPlan plan;
  plan.n = j.at("n").get<int>();
  plan.k = j.at("k").get<int>();
  plan.shots = j.at("shots").get<std::uint64_t>();
  for (const Json& s : j.at("settings")) {
    PlanSetting ps;
    ps.setting.bases = s.at("bases").get<std::string>();
    if (static_cast<int>(ps.setting.bases.size()) != plan.n)
      throw invalid_argument("plan setting has wrong basis-string length");
    for (char c : ps.setting.bases) basis_from_char(c);
    const Json& prov = s.at("provenance");
    const std::string type = prov.at("type").get<std::string>();
    if (type == "uniform") {
      ps.provenance.kind = Provenance::Kind::uniform;
      ps.provenance.uniform_basis =
          basis_from_char(prov.at("basis").get<std::string>().at(0));
    } else if (type == "derived") {
      ps.provenance.kind = Provenance::Kind::derived;
      ps.provenance.function_index = prov.at("function").get<int>() - 1;
      for (const Json& b : prov.at("map"))
        ps.provenance.color_to_basis.push_back(
            basis_from_char(b.get<std::string>().at(0)));
    } else {
      throw invalid_argument("unknown provenance type: " + type);
    }
    const int expected_id = static_cast<int>(plan.settings.size());
    if (s.at("id").get<int>() != expected_id)
      throw invalid_argument("plan setting ids must be consecutive from 0");
    plan.settings.push_back(std::move(ps));
  }
  if (plan.settings.empty()) throw invalid_argument("plan has no settings");
  return plan;
}

inline void save_plan(const MeasurementPlan& plan, const std::string& path) {
  detail::open_output(path) << plan_to_json(plan).dump(2) << "\n";
}

inline MeasurementPlan load_plan(const std::string& path) {
  auto in = detail::open_input(path);
  Json j;
  try {
    in >> j;
    return plan_from_json(j);
  } catch (const Json::exception& e) {
    throw invalid_argument("malformed plan file " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Counts files: JSON lines, one record per (setting, outcome):
// {"setting": int, "outcome": "0110...", "count": int}
// This is also the ingestion format for external (lab) data.
// ---------------------------------------------------------------------------

inline void save_counts(const CountsTable& counts, const std::string& path) {
  auto out = detail::open_output(path);
  for (const auto& [setting_id, tallies] : counts.data())
    for (const auto& [outcome, count] : tallies)
      out << Json{{"setting", setting_id}, {"outcome", outcome}, {"count", count}}
                 .dump()
          << "\n";
}

inline CountsTable load_counts(const std::string& path, int n) {
  auto in = detail::open_input(path);
  CountsTable counts(n);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      counts.add(j.at("setting").get<int>(),
                 j.at("outcome").get<std::string>(),
                 j.at("count").get<std::uint64_t>());
    } catch (const Json::exception& e) {
      throw invalid_argument("malformed counts record at " + path + ":" +
                             std::to_string(line_no) + ": " + e.what());
    }
  }
  return counts;
}

// ---------------------------------------------------------------------------
// RDM records: JSON lines, one record per subset:
// {"qubits":[r,s,...], "pauli_coeffs":{"XX":...}, "matrix_re":[[...]],
//  "matrix_im":[[...]], "concurrence": float|null, "eof": float|null,
//  "projected": bool}
// ---------------------------------------------------------------------------

inline Json rdm_to_json(const ReducedDensityMatrix& rdm) {
  Json qubits = Json::array();
  for (int q : rdm.qubits) qubits.push_back(q + 1);
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index r = 0; r < rdm.matrix.rows(); ++r) {
    Json re_row = Json::array();
    Json im_row = Json::array();
    for (Eigen::Index c = 0; c < rdm.matrix.cols(); ++c) {
      re_row.push_back(rdm.matrix(r, c).real());
      im_row.push_back(rdm.matrix(r, c).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  Json j{{"qubits", std::move(qubits)},
         {"pauli_coeffs", rdm.pauli_coeffs},
         {"matrix_re", std::move(re)},
         {"matrix_im", std::move(im)},
         {"projected", rdm.projected}};
  j["concurrence"] = rdm.concurrence ? Json(*rdm.concurrence) : Json(nullptr);
  j["eof"] = rdm.eof ? Json(*rdm.eof) : Json(nullptr);
  return j;
}

inline ReducedDensityMatrix rdm_from_json(const Json& j) {
  ReducedDensityMatrix rdm;
  for (const Json& q : j.at("qubits")) rdm.qubits.push_back(q.get<int>() - 1);
  for (const auto& [label, coeff] : j.at("pauli_coeffs").items())
    rdm.pauli_coeffs[label] = coeff.get<double>();
  const Json& re = j.at("matrix_re");
  const Json& im = j.at("matrix_im");
  const Eigen::Index dim = static_cast<Eigen::Index>(re.size());
  rdm.matrix.resize(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      rdm.matrix(r, c) = Complex(re.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>(),
                                 im.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>());
  rdm.projected = j.at("projected").get<bool>();
  if (!j.at("concurrence").is_null())
    rdm.concurrence = j.at("concurrence").get<double>();
  if (!j.at("eof").is_null()) rdm.eof = j.at("eof").get<double>();
  return rdm;
}

inline void save_rdms(const std::vector<ReducedDensityMatrix>& rdms,
                      const std::string& path) {
  auto out = detail::open_output(path);
  for (const ReducedDensityMatrix& rdm : rdms) out << rdm_to_json(rdm).dump() << "\n";
}

inline std::vector<ReducedDensityMatrix> load_rdms(const std::string& path) {
  auto in = detail::open_input(path);
  std::vector<ReducedDensityMatrix> rdms;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rdms.push_back(rdm_from_json(Json::parse(line)));
  }
  return rdms;
}

// ---------------------------------------------------------------------------
// Budget records
// ---------------------------------------------------------------------------

inline Json budget_to_json(const ShotBudget& budget) {
  return Json{{"epsilon", budget.epsilon},
              {"delta", budget.delta},
              {"shots_per_setting", budget.shots},
              {"n", budget.n},
              {"k", budget.k},
              {"strategy", to_string(budget.strategy)},
              {"settings", budget.settings},
              {"rounds", budget.rounds},
              {"rounds_qot", budget.rounds_qot},
              {"rounds_naive", budget.rounds_naive},
              {"pairs", binomial(budget.n, 2).str()},
              {"cycle_seconds", budget.cycle_seconds},
              {"wallclock_seconds", budget.wallclock_seconds},
              {"wallclock_days", budget.wallclock_days()}};
}

}  // namespace qot
