#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tdshift/testfns.hpp"

inline tdshift::Dialogue make_dialogue(const std::string& id, const std::vector<std::string>& questions,
                                       const std::string& context = "ctx") {
  tdshift::Dialogue d;
  d.id = id;
  d.context_id = context;
  for (const auto& q : questions) d.turns.push_back({tdshift::tokenize(q), "yes"});
  return d;
}

inline tdshift::Noise no_reference(const std::string& id = "u") { return {id, nullptr}; }

inline tdshift::Noise reference_of(const tdshift::Dialogue& d, const std::string& id = "u") {
  return {id, std::make_shared<const tdshift::Dialogue>(d)};
}
