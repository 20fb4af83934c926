#ifndef AIF_MODEL_JSON_HPP
#define AIF_MODEL_JSON_HPP

// JSON model schema:
//   {"name": "...", "description": "...",
//    "species": ["X1", ...],
//    "reactions": [{"reactants": {"X1": 1}, "products": {},
//                   "rate": {"kind": "mass_action", "value": 2.0}}, ...]}
// Functional laws: {"kind": "on_off", "Kp": .., "mu": .., "theta": .., "target": "X2"}
//                  {"kind": "hill", "Kp": .., "target": "X2"}

#include <string>

#include <json.hpp>

#include "aif/crn.hpp"
#include "aif/errors.hpp"

namespace aif {

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(path + ": missing key '" + key + "'");
  return j.at(key);
}

inline double require_number(const nlohmann::json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_number()) throw ConfigError(path + "/" + key + ": expected a number");
  return v.get<double>();
}

inline std::string require_string(const nlohmann::json& j, const std::string& key, const std::string& path) {
  const auto& v = require(j, key, path);
  if (!v.is_string()) throw ConfigError(path + "/" + key + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<Count> parse_stoichiometry(const nlohmann::json& j, const std::vector<std::string>& species,
                                              const std::string& path) {
  std::vector<Count> out(species.size(), 0);
  if (j.is_null()) return out;
  if (!j.is_object()) throw ConfigError(path + ": expected an object of species -> count");
  for (const auto& [name, value] : j.items()) {
    auto it = std::find(species.begin(), species.end(), name);
    if (it == species.end()) throw ConfigError(path + "/" + name + ": unknown species");
    if (!value.is_number_integer() || value.get<long long>() < 0) {
      throw ConfigError(path + "/" + name + ": stoichiometry must be a nonnegative integer");
    }
    out[static_cast<std::size_t>(it - species.begin())] = value.get<Count>();
  }
  return out;
}

inline std::size_t species_index(const std::vector<std::string>& species, const std::string& name,
                                 const std::string& path) {
  auto it = std::find(species.begin(), species.end(), name);
  if (it == species.end()) throw ConfigError(path + ": unknown species '" + name + "'");
  return static_cast<std::size_t>(it - species.begin());
}

inline nlohmann::json stoichiometry_json(const std::vector<Count>& v, const std::vector<std::string>& species) {
  auto out = nlohmann::json::object();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0) out[species[i]] = v[i];
  }
  return out;
}

}  // namespace detail

inline RateLaw rate_law_from_json(const nlohmann::json& j, const std::vector<std::string>& species,
                                  const std::string& path) {
  const auto kind = detail::require_string(j, "kind", path);
  if (kind == "mass_action") return MassAction{detail::require_number(j, "value", path)};
  if (kind == "on_off") {
    return OnOffProportional{detail::require_number(j, "Kp", path), detail::require_number(j, "mu", path),
                             detail::require_number(j, "theta", path),
                             detail::species_index(species, detail::require_string(j, "target", path), path + "/target")};
  }
  if (kind == "hill") {
    return Hill{detail::require_number(j, "Kp", path),
                detail::species_index(species, detail::require_string(j, "target", path), path + "/target")};
  }
  throw ConfigError(path + "/kind: unknown rate law '" + kind + "' (expected mass_action, on_off or hill)");
}

inline nlohmann::json rate_law_to_json(const RateLaw& law, const std::vector<std::string>& species) {
  return std::visit(
      [&](const auto& l) -> nlohmann::json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, MassAction>) {
          return {{"kind", "mass_action"}, {"value", l.rate}};
        } else if constexpr (std::is_same_v<T, OnOffProportional>) {
          return {{"kind", "on_off"}, {"Kp", l.gain}, {"mu", l.mu}, {"theta", l.theta}, {"target", species[l.target]}};
        } else {
          return {{"kind", "hill"}, {"Kp", l.gain}, {"target", species[l.target]}};
        }
      },
      law);
}

/// Parses a network; errors are ConfigError with a JSON-pointer-like path.
inline Network network_from_json(const nlohmann::json& j, const std::string& path = "") {
  if (!j.is_object()) throw ConfigError(path + ": model must be a JSON object");
  const auto& sp = detail::require(j, "species", path);
  if (!sp.is_array()) throw ConfigError(path + "/species: expected an array of names");
  std::vector<std::string> species;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    if (!sp[i].is_string()) throw ConfigError(path + "/species/" + std::to_string(i) + ": expected a string");
    species.push_back(sp[i].get<std::string>());
  }
  const auto& rx = detail::require(j, "reactions", path);
  if (!rx.is_array()) throw ConfigError(path + "/reactions: expected an array");
  std::vector<Reaction> reactions;
  for (std::size_t k = 0; k < rx.size(); ++k) {
    const std::string rp = path + "/reactions/" + std::to_string(k);
    const auto& r = rx[k];
    if (!r.is_object()) throw ConfigError(rp + ": expected an object");
    reactions.push_back(Reaction{detail::parse_stoichiometry(r.value("reactants", nlohmann::json()), species, rp + "/reactants"),
                                 detail::parse_stoichiometry(r.value("products", nlohmann::json()), species, rp + "/products"),
                                 rate_law_from_json(detail::require(r, "rate", rp), species, rp + "/rate")});
  }
  try {
    return Network(std::move(species), std::move(reactions), j.value("name", std::string()),
                   j.value("description", std::string()));
  } catch (const StructuralError& e) {
    throw ConfigError((path.empty() ? std::string("model") : path) + ": " + e.what());
  }
}

inline nlohmann::json network_to_json(const Network& network) {
  nlohmann::json out;
  out["name"] = network.name();
  out["description"] = network.description();
  out["species"] = network.species_names();
  auto rx = nlohmann::json::array();
  for (const auto& r : network.reactions()) {
    rx.push_back({{"reactants", detail::stoichiometry_json(r.reactants, network.species_names())},
                  {"products", detail::stoichiometry_json(r.products, network.species_names())},
                  {"rate", rate_law_to_json(r.law, network.species_names())}});
  }
  out["reactions"] = std::move(rx);
  return out;
}

}  // namespace aif

#endif  // AIF_MODEL_JSON_HPP
