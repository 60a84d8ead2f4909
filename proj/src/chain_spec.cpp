#include "compact_markov/chain_spec.hpp"

#include <array>
#include <cmath>

#include "compact_markov/errors.hpp"

namespace compact_markov {

namespace {

using nlohmann::json;

constexpr std::array kFamilies{"finite", "paper_bd", "birth_death", "funnel", "swap", "lazy"};

double number_field(const json& doc, const char* field) {
  if (!doc.contains(field)) throw ValidationError(field, "missing required field");
  const auto& v = doc.at(field);
  if (!v.is_number()) throw ValidationError(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(field, "must be finite");
  return x;
}

std::vector<double> number_array(const json& v, const std::string& field) {
  if (!v.is_array()) throw ValidationError(field, "must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ValidationError(field + "[" + std::to_string(i) + "]", "must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<double> number_array_field(const json& doc, const char* field) {
  if (!doc.contains(field)) throw ValidationError(field, "missing required field");
  return number_array(doc.at(field), field);
}

}  // namespace

ChainSpec parse_chain_spec(const json& doc) {
  if (!doc.is_object()) throw ValidationError("<root>", "chain spec must be a JSON object");
  if (!doc.contains("type")) throw ValidationError("type", "missing required field");
  if (!doc.at("type").is_string()) throw ValidationError("type", "must be a string");
  ChainSpec spec;
  spec.type = doc.at("type").get<std::string>();
  bool known = false;
  for (const char* f : kFamilies) known = known || spec.type == f;
  if (!known) throw ValidationError("type", "unknown chain family '" + spec.type + "'");

  if (spec.type == "finite") {
    if (!doc.contains("rows")) throw ValidationError("rows", "missing required field");
    const auto& rows = doc.at("rows");
    if (!rows.is_array() || rows.empty()) throw ValidationError("rows", "must be a non-empty array of arrays");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      spec.rows.push_back(number_array(rows[i], "rows[" + std::to_string(i) + "]"));
    }
  } else if (spec.type == "paper_bd" || spec.type == "lazy") {
    spec.p = number_field(doc, "p");
  } else if (spec.type == "funnel") {
    spec.eps = number_field(doc, "eps");
    const double m = number_field(doc, "M");
    if (m < 1.0 || m != std::floor(m)) throw ValidationError("M", "must be a positive integer");
    spec.top = static_cast<std::size_t>(m);
  } else if (spec.type == "birth_death") {
    spec.up = number_array_field(doc, "up");
    spec.down = number_array_field(doc, "down");
  }
  return spec;
}

json to_json(const ChainSpec& spec) {
  json doc{{"type", spec.type}};
  if (spec.type == "finite") doc["rows"] = spec.rows;
  if (spec.p) doc["p"] = *spec.p;
  if (spec.eps) doc["eps"] = *spec.eps;
  if (spec.top) doc["M"] = *spec.top;
  if (spec.type == "birth_death") {
    doc["up"] = spec.up;
    doc["down"] = spec.down;
  }
  return doc;
}

Kernel make_chain(const ChainSpec& spec) {
  if (spec.type == "finite") return finite_chain(spec.rows);
  if (spec.type == "paper_bd") return paper_bd(spec.p.value_or(NAN));
  if (spec.type == "birth_death") return birth_death(spec.up, spec.down);
  if (spec.type == "funnel") {
    if (!spec.top) throw ValidationError("M", "missing required field");
    return funnel(spec.eps.value_or(NAN), *spec.top);
  }
  if (spec.type == "swap") return swap_chain();
  if (spec.type == "lazy") return lazy_chain(spec.p.value_or(NAN));
  throw ValidationError("type", "unknown chain family '" + spec.type + "'");
}

Kernel make_chain(const json& doc) { return make_chain(parse_chain_spec(doc)); }

}  // namespace compact_markov
