#include "spectrolab/catalog.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "spectrolab/error.hpp"

namespace spectrolab {

using nlohmann::json;

namespace {

double number(const json& params, const char* key) {
  if (!params.contains(key) || !params.at(key).is_number()) {
    throw Error(ErrorKind::invalid_domain, std::string("missing numeric parameter '") + key + "'");
  }
  return params.at(key).get<double>();
}

std::vector<Vec2> vertex_list(const json& params) {
  if (!params.contains("vertices") || !params.at("vertices").is_array()) {
    throw Error(ErrorKind::invalid_domain, "polygon needs a 'vertices' array");
  }
  std::vector<Vec2> out;
  for (const auto& v : params.at("vertices")) {
    if (!v.is_array() || v.size() != 2) throw Error(ErrorKind::invalid_domain, "vertex must be [x, y]");
    out.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  }
  return out;
}

}  // namespace

DomainSpec domain_from_json(const json& record) {
  if (!record.is_object() || !record.contains("kind")) {
    throw Error(ErrorKind::invalid_domain, "domain record needs a 'kind'");
  }
  const std::string kind = record.at("kind").get<std::string>();
  const json params = record.value("params", json::object());
  const std::string label = record.value("label", std::string{});
  DomainSpec spec;
  switch (domain_kind_from_string(kind)) {
    case DomainKind::rectangle:
      spec = DomainSpec::rectangle(number(params, "width"), number(params, "height"), label);
      break;
    case DomainKind::disc:
      spec = DomainSpec::disc(number(params, "radius"), label);
      break;
    case DomainKind::convex_polygon:
      spec = DomainSpec::convex_polygon(vertex_list(params), label);
      break;
    case DomainKind::polygon:
      spec = DomainSpec::polygon(vertex_list(params), label);
      break;
    case DomainKind::product: {
      if (!params.contains("base")) throw Error(ErrorKind::invalid_domain, "product needs a 'base' record");
      spec = DomainSpec::product(number(params, "interval"), domain_from_json(params.at("base")), label);
      break;
    }
  }
  if (record.contains("hardy_override") && !record.at("hardy_override").is_null()) {
    spec.hardy_override = record.at("hardy_override").get<double>();
  }
  validate(spec);
  return spec;
}

json domain_to_json(const DomainSpec& spec) {
  json params = json::object();
  switch (spec.kind) {
    case DomainKind::rectangle:
      params["width"] = spec.width;
      params["height"] = spec.height;
      break;
    case DomainKind::disc:
      params["radius"] = spec.radius;
      break;
    case DomainKind::convex_polygon:
    case DomainKind::polygon: {
      json verts = json::array();
      for (const auto& v : spec.vertices) verts.push_back({v.x, v.y});
      params["vertices"] = verts;
      break;
    }
    case DomainKind::product:
      params["interval"] = spec.interval;
      params["base"] = domain_to_json(*spec.base);
      break;
  }
  json out = {{"kind", to_string(spec.kind)}, {"params", params}, {"label", spec.label}};
  if (spec.hardy_override) out["hardy_override"] = *spec.hardy_override;
  return out;
}

const DomainSpec& Catalog::find(const std::string& label) const {
  for (const auto& d : domains) {
    if (d.label == label) return d;
  }
  throw Error(ErrorKind::invalid_argument, "no domain labelled '" + label + "' in the catalog");
}

std::vector<DomainSpec> Catalog::select(const std::vector<std::string>& labels) const {
  if (labels.empty()) return domains;
  for (const auto& l : labels) (void)find(l);
  std::vector<DomainSpec> out;
  for (const auto& d : domains) {
    for (const auto& l : labels) {
      if (d.label == l) {
        out.push_back(d);
        break;
      }
    }
  }
  return out;
}

Catalog parse_catalog(const json& doc) {
  const json* records = &doc;
  if (doc.is_object() && doc.contains("domains")) records = &doc.at("domains");
  if (!records->is_array()) throw Error(ErrorKind::invalid_argument, "catalog must be a JSON array of domains");
  Catalog cat;
  std::set<std::string> seen;
  for (const auto& rec : *records) {
    DomainSpec spec = domain_from_json(rec);
    if (spec.label.empty()) throw Error(ErrorKind::invalid_domain, "catalog domains need a label");
    if (!seen.insert(spec.label).second) {
      throw Error(ErrorKind::invalid_domain, "duplicate label '" + spec.label + "'");
    }
    cat.domains.push_back(std::move(spec));
  }
  return cat;
}

Catalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open catalog " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::invalid_argument, "catalog " + path + " is not valid JSON: " + e.what());
  }
  return parse_catalog(doc);
}

json catalog_to_json(const Catalog& catalog) {
  json out = json::array();
  for (const auto& d : catalog.domains) out.push_back(domain_to_json(d));
  return out;
}

Catalog default_catalog() {
  Catalog cat;
  cat.domains.push_back(DomainSpec::rectangle(1.0, 1.0, "square"));
  cat.domains.push_back(DomainSpec::rectangle(2.0, 1.0, "rect-2x1"));
  cat.domains.push_back(DomainSpec::rectangle(10.0, 0.1, "rect-10x0.1"));
  cat.domains.push_back(DomainSpec::disc(1.0, "disc"));
  cat.domains.push_back(DomainSpec::polygon(
      {{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.5}, {0.5, 0.5}, {0.5, 1.0}, {0.0, 1.0}}, "L-shape"));
  std::vector<Vec2> pentagon;
  for (int i = 0; i < 5; ++i) {
    const double a = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * i / 5.0;
    pentagon.push_back({std::cos(a), std::sin(a)});
  }
  cat.domains.push_back(DomainSpec::convex_polygon(pentagon, "pentagon"));
  return cat;
}

}  // namespace spectrolab
