// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "rxngen/trees/dataset.hpp"

namespace rxngen::trees {

using nlohmann::json;

namespace {

const char* kind_name(NodeKind k) { return k == NodeKind::kTemplate ? "template" : "molecule"; }

json edges_json(const std::vector<Edge>& edges) {
  json out = json::array();
  for (const auto& [p, c] : edges) out.push_back({p, c});
  return out;
}

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw DatasetError("dataset schema error at " + where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing field '") + key + "'");
  return *it;
}

int int_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) schema_error(where + "." + key, "expected an integer");
  return v.get<int>();
}

std::vector<std::string> string_list(const json& v, const std::string& where) {
  if (!v.is_array()) schema_error(where, "expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) schema_error(where + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

// Reads nodes keyed by explicit "id"; ids must be a permutation of 0..n-1.
template <class F>
void read_nodes(const json& nodes, const std::string& where, F&& on_node) {
  if (!nodes.is_array() || nodes.empty()) schema_error(where, "expected a non-empty array");
  std::vector<bool> seen(nodes.size(), false);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const int id = int_field(nodes[i], "id", w);
    if (id < 0 || static_cast<std::size_t>(id) >= nodes.size() || seen[id]) {
      schema_error(w + ".id", "node ids must be dense and unique");
    }
    seen[id] = true;
    on_node(id, nodes[i], w);
  }
}

std::vector<Edge> read_edges(const json& edges, const std::string& where) {
  if (!edges.is_array()) schema_error(where, "expected an array");
  std::vector<Edge> out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      schema_error(where + "[" + std::to_string(i) + "]", "expected [parent, child]");
    }
    out.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return out;
}

}  // namespace

std::string dataset_to_json(const Dataset& dataset) {
  const auto& vocab = dataset.vocab;
  json templates = json::array();
  for (const auto& t : vocab.templates().entries()) {
    templates.push_back({{"id", t.id}, {"arity", t.arity}, {"token", std::string(1, t.token)}});
  }
  json trees = json::array();
  for (const auto& pair : dataset.trees) {
    json jnodes = json::array();
    for (std::size_t i = 0; i < pair.junction.size(); ++i) {
      jnodes.push_back({{"id", i}, {"label", pair.junction.labels[i]}});
    }
    json rnodes = json::array();
    for (std::size_t i = 0; i < pair.reaction.size(); ++i) {
      const auto& n = pair.reaction.nodes[i];
      rnodes.push_back({{"id", i}, {"kind", kind_name(n.kind)}, {"label", n.label}});
    }
    trees.push_back({
        {"junction", {{"nodes", jnodes}, {"edges", edges_json(pair.junction.edges)}, {"root", pair.junction.root}}},
        {"reaction", {{"nodes", rnodes}, {"edges", edges_json(pair.reaction.edges)}, {"root", pair.reaction.root}}},
        {"product", pair.product ? json(*pair.product) : json(nullptr)},
    });
  }
  json doc = {
      {"format_version", kDatasetFormatVersion},
      {"vocabularies",
       {{"substructures", vocab.substructures()},
        {"starting_molecules", vocab.starting_molecules()},
        {"templates", templates}}},
      {"trees", trees},
  };
  return doc.dump(1) + "\n";
}

Dataset dataset_from_json(const std::string& text, bool require_products) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw DatasetError("dataset parse error at line " + std::to_string(line) + ": " + e.what());
  }
  if (int_field(doc, "format_version", "$") != kDatasetFormatVersion) {
    schema_error("$.format_version", "unsupported version");
  }
  const json& jv = field(doc, "vocabularies", "$");
  auto substructures = string_list(field(jv, "substructures", "$.vocabularies"), "$.vocabularies.substructures");
  auto starting = string_list(field(jv, "starting_molecules", "$.vocabularies"), "$.vocabularies.starting_molecules");
  const json& jt = field(jv, "templates", "$.vocabularies");
  if (!jt.is_array()) schema_error("$.vocabularies.templates", "expected an array");
  std::vector<Template> templates;
  for (std::size_t i = 0; i < jt.size(); ++i) {
    const std::string w = "$.vocabularies.templates[" + std::to_string(i) + "]";
    const json& tok = field(jt[i], "token", w);
    if (!tok.is_string() || tok.get<std::string>().size() != 1) schema_error(w + ".token", "expected one letter");
    templates.push_back({int_field(jt[i], "id", w), int_field(jt[i], "arity", w), tok.get<std::string>()[0]});
  }

  Dataset ds;
  try {
    ds.vocab = Vocabularies(std::move(substructures), std::move(starting), TemplateRegistry(std::move(templates)));
  } catch (const std::invalid_argument& e) {
    schema_error("$.vocabularies", e.what());
  }

  const json& jtrees = field(doc, "trees", "$");
  if (!jtrees.is_array()) schema_error("$.trees", "expected an array");
  for (std::size_t t = 0; t < jtrees.size(); ++t) {
    const std::string w = "$.trees[" + std::to_string(t) + "]";
    TreePair pair;

    const json& jj = field(jtrees[t], "junction", w);
    const json& jjn = field(jj, "nodes", w + ".junction");
    pair.junction.labels.assign(jjn.is_array() ? jjn.size() : 0, 0);
    read_nodes(jjn, w + ".junction.nodes",
               [&](int id, const json& n, const std::string& nw) { pair.junction.labels[id] = int_field(n, "label", nw); });
    pair.junction.edges = read_edges(field(jj, "edges", w + ".junction"), w + ".junction.edges");
    pair.junction.root = int_field(jj, "root", w + ".junction");
    try {
      validate_junction(pair.junction, ds.vocab.substructures().size());
    } catch (const StructureError& e) {
      schema_error(w + ".junction", e.what());
    }

    const json& jr = field(jtrees[t], "reaction", w);
    const json& jrn = field(jr, "nodes", w + ".reaction");
    pair.reaction.nodes.assign(jrn.is_array() ? jrn.size() : 0, {});
    read_nodes(jrn, w + ".reaction.nodes", [&](int id, const json& n, const std::string& nw) {
      const json& kind = field(n, "kind", nw);
      if (kind == "molecule") {
        pair.reaction.nodes[id].kind = NodeKind::kMolecule;
      } else if (kind == "template") {
        pair.reaction.nodes[id].kind = NodeKind::kTemplate;
      } else {
        schema_error(nw + ".kind", "expected \"molecule\" or \"template\"");
      }
      pair.reaction.nodes[id].label = int_field(n, "label", nw);
    });
    pair.reaction.edges = read_edges(field(jr, "edges", w + ".reaction"), w + ".reaction.edges");
    pair.reaction.root = int_field(jr, "root", w + ".reaction");
    if (auto v = structure_violation(pair.reaction, ds.vocab.templates(), ds.vocab.starting_molecules().size())) {
      schema_error(w + ".reaction", *v);
    }

    const json& jp = field(jtrees[t], "product", w);
    if (jp.is_string()) {
      pair.product = jp.get<std::string>();
    } else if (!jp.is_null() || require_products) {
      schema_error(w + ".product", "expected a product string");
    }
    ds.trees.push_back(std::move(pair));
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  const std::string text = dataset_to_json(dataset);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DatasetError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw DatasetError("write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path, bool require_products) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DatasetError("cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return dataset_from_json(text, require_products);
}

}  // namespace rxngen::trees
