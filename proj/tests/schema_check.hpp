#pragma once

// Minimal JSON Schema checker covering the vocabulary the shipped schemas
// use: type (string or list), enum, properties, required,
// additionalProperties (boolean), items (single schema), and $ref to a
// sibling schema file.

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace testutil {

using nlohmann::json;

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

inline bool type_matches(const json& doc, const std::string& t) {
  if (t == "object") return doc.is_object();
  if (t == "array") return doc.is_array();
  if (t == "string") return doc.is_string();
  if (t == "boolean") return doc.is_boolean();
  if (t == "null") return doc.is_null();
  if (t == "integer") return doc.is_number_integer() || doc.is_number_unsigned();
  if (t == "number") return doc.is_number();
  throw std::runtime_error("schema uses unsupported type " + t);
}

inline void collect_schema_errors(const json& doc, const json& schema,
                                  const std::string& schema_dir, const std::string& path,
                                  std::vector<std::string>& errors) {
  if (schema.contains("$ref")) {
    const json target = load_json_file(schema_dir + "/" + schema["$ref"].get<std::string>());
    collect_schema_errors(doc, target, schema_dir, path, errors);
    return;
  }
  if (schema.contains("enum")) {
    bool hit = false;
    for (const auto& v : schema["enum"]) hit = hit || v == doc;
    if (!hit) errors.push_back(path + ": value not in enum");
  }
  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(doc, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || type_matches(doc, alt.get<std::string>());
    }
    if (!ok) {
      errors.push_back(path + ": wrong type");
      return;
    }
  }
  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!doc.contains(key.get<std::string>()))
          errors.push_back(path + ": missing required property " + key.get<std::string>());
    const json props = schema.value("properties", json::object());
    for (const auto& [key, sub] : props.items())
      if (doc.contains(key))
        collect_schema_errors(doc.at(key), sub, schema_dir, path + "." + key, errors);
    if (schema.value("additionalProperties", json(true)) == json(false))
      for (const auto& [key, val] : doc.items())
        if (!props.contains(key)) errors.push_back(path + ": unexpected property " + key);
  }
  if (doc.is_array() && schema.contains("items")) {
    std::size_t i = 0;
    for (const auto& el : doc) {
      collect_schema_errors(el, schema["items"], schema_dir,
                            path + "[" + std::to_string(i) + "]", errors);
      ++i;
    }
  }
}

// Violations of `schema_file` by `doc`; empty means valid.
inline std::vector<std::string> schema_errors(const json& doc, const std::string& schema_dir,
                                              const std::string& schema_file) {
  const json schema = load_json_file(schema_dir + "/" + schema_file);
  std::vector<std::string> errors;
  collect_schema_errors(doc, schema, schema_dir, "$", errors);
  return errors;
}

}  // namespace testutil
