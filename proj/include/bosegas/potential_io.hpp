#pragma once

#include <fstream>
#include <string>

#include "bosegas/potential.hpp"
#include "json.hpp"

namespace bosegas {

// Potential specification files:
//   {"kind": "square_well"|"smooth_bump"|"tabulated",
//    "R": float, "V0": float?, "samples": [[r, V(r)], ...]?}
inline RadialPotential potential_from_json(const nlohmann::json &j) {
  require(j.contains("kind"), "potential file: missing \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "square_well") {
    require(j.contains("R") && j.contains("V0"), "square_well: needs R and V0");
    return RadialPotential::square_well(j.at("V0").get<double>(),
                                        j.at("R").get<double>());
  }
  if (kind == "smooth_bump") {
    require(j.contains("R") && j.contains("V0"), "smooth_bump: needs R and V0");
    return RadialPotential::smooth_bump(j.at("V0").get<double>(),
                                        j.at("R").get<double>());
  }
  if (kind == "tabulated") {
    require(j.contains("samples"), "tabulated: needs samples");
    std::vector<std::pair<double, double>> samples;
    for (const auto &row : j.at("samples"))
      samples.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    return RadialPotential::tabulated(std::move(samples));
  }
  throw precondition_error("potential file: unknown kind \"" + kind + "\"");
}

inline nlohmann::json potential_to_json(const RadialPotential &pot) {
  nlohmann::json j;
  j["kind"] = to_string(pot.kind());
  j["R"] = pot.range();
  if (pot.kind() != PotentialKind::tabulated)
    j["V0"] = pot.v0();
  else {
    auto rows = nlohmann::json::array();
    for (const auto &[r, v] : pot.samples())
      rows.push_back({r, v});
    j["samples"] = rows;
  }
  return j;
}

inline RadialPotential load_potential(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw precondition_error("cannot open potential file: " + path);
  nlohmann::json j;
  in >> j;
  return potential_from_json(j);
}

} // namespace bosegas
