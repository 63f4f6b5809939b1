#pragma once

// Domain catalogs: a JSON array of {"kind", "params", "hardy_override"?, "label"}.

#include <string>
#include <vector>

#include <json.hpp>

#include "spectrolab/geometry.hpp"

namespace spectrolab {

DomainSpec domain_from_json(const nlohmann::json& record);
nlohmann::json domain_to_json(const DomainSpec& spec);

struct Catalog {
  std::vector<DomainSpec> domains;

  /// Throws invalid_argument for an unknown label.
  const DomainSpec& find(const std::string& label) const;
  /// Domains whose label is in `labels`, catalog order; all when empty.
  std::vector<DomainSpec> select(const std::vector<std::string>& labels) const;
};

/// Validates every record; labels must be unique and nonempty.
Catalog parse_catalog(const nlohmann::json& doc);
Catalog load_catalog(const std::string& path);
nlohmann::json catalog_to_json(const Catalog& catalog);

/// square, rect-2x1, rect-10x0.1, disc, L-shape, pentagon.
Catalog default_catalog();

}  // namespace spectrolab
