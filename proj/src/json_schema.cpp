#include "json_schema.hpp"

#include <cmath>
#include <map>
#include <regex>

namespace sciatlas {
namespace {

using nlohmann::json;

class Validator {
 public:
  Validator(const json& root, std::size_t max_errors) : root_(root), max_(max_errors) {}

  void check(const json& schema, const json& v, const std::string& where) {
    if (errors.size() >= max_) return;
    if (schema.is_boolean()) {
      if (!schema.get<bool>()) fail(where, "not allowed");
      return;
    }
    if (auto it = schema.find("$ref"); it != schema.end()) {
      check(resolve(it->get<std::string>()), v, where);
    }
    if (auto it = schema.find("type"); it != schema.end()) {
      bool ok = false;
      if (it->is_array()) {
        for (const auto& t : *it) ok = ok || has_type(v, t.get<std::string>());
      } else {
        ok = has_type(v, it->get<std::string>());
      }
      if (!ok) {
        fail(where, "expected type " + it->dump());
        return;
      }
    }
    if (auto it = schema.find("enum"); it != schema.end()) {
      bool found = false;
      for (const auto& e : *it) found = found || e == v;
      if (!found) fail(where, "value " + v.dump() + " not in " + it->dump());
    }
    if (auto it = schema.find("pattern"); it != schema.end() && v.is_string()) {
      if (!std::regex_search(v.get<std::string>(), regex(it->get<std::string>()))) {
        fail(where, "value " + v.dump() + " does not match " + it->get<std::string>());
      }
    }
    if (auto it = schema.find("minimum"); it != schema.end() && v.is_number()) {
      if (v.get<double>() < it->get<double>()) fail(where, "value below minimum " + it->dump());
    }
    if (auto it = schema.find("maxItems"); it != schema.end() && v.is_array()) {
      if (v.size() > it->get<std::size_t>()) fail(where, "more than " + it->dump() + " items");
    }
    if (auto it = schema.find("items"); it != schema.end() && v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) check(*it, v[i], where + "/" + std::to_string(i));
    }
    if (v.is_object()) object(schema, v, where);
    if (auto it = schema.find("oneOf"); it != schema.end()) {
      std::size_t matches = 0;
      for (const auto& s : *it) matches += sub_valid(s, v);
      if (matches != 1) fail(where, "matches " + std::to_string(matches) + " of oneOf alternatives");
    }
    if (auto it = schema.find("anyOf"); it != schema.end()) {
      bool any = false;
      for (const auto& s : *it) any = any || sub_valid(s, v);
      if (!any) fail(where, "matches no anyOf alternative");
    }
  }

  std::vector<std::string> errors;

 private:
  void object(const json& schema, const json& v, const std::string& where) {
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& k : *it) {
        if (!v.contains(k.get<std::string>())) fail(where, "missing key " + k.dump());
      }
    }
    const auto props = schema.find("properties");
    for (const auto& [k, val] : v.items()) {
      const std::string child = where + "/" + k;
      if (props != schema.end() && props->contains(k)) {
        check((*props)[k], val, child);
      } else if (auto ap = schema.find("additionalProperties"); ap != schema.end()) {
        if (ap->is_boolean() && !ap->get<bool>()) {
          fail(where, "unexpected key \"" + k + "\"");
        } else if (ap->is_object()) {
          check(*ap, val, child);
        }
      }
    }
  }

  bool sub_valid(const json& schema, const json& v) {
    Validator sub(root_, 1);
    sub.regexes_ = std::move(regexes_);
    sub.check(schema, v, "");
    regexes_ = std::move(sub.regexes_);
    return sub.errors.empty();
  }

  static bool has_type(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "number") return v.is_number();
    if (t == "integer") {
      if (v.is_number_integer()) return true;
      if (!v.is_number_float()) return false;
      const double d = v.get<double>();
      return std::isfinite(d) && d == std::floor(d);
    }
    return false;
  }

  const json& resolve(const std::string& ref) {
    if (ref.empty() || ref[0] != '#') throw std::runtime_error("unsupported $ref " + ref);
    return root_.at(json::json_pointer(ref.substr(1)));
  }

  const std::regex& regex(const std::string& p) {
    auto it = regexes_.find(p);
    if (it == regexes_.end()) it = regexes_.emplace(p, std::regex(p, std::regex::ECMAScript)).first;
    return it->second;
  }

  void fail(const std::string& where, const std::string& what) {
    if (errors.size() < max_) errors.push_back((where.empty() ? "/" : where) + ": " + what);
  }

  const json& root_;
  std::size_t max_;
  std::map<std::string, std::regex> regexes_;
};

}  // namespace

std::vector<std::string> schema_errors(const nlohmann::json& schema, const nlohmann::json& instance,
                                       std::size_t max_errors) {
  Validator v(schema, max_errors);
  v.check(schema, instance, "");
  return std::move(v.errors);
}

}  // namespace sciatlas
