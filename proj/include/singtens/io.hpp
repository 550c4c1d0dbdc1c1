#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>  // vendored nlohmann/json single header

#include "singtens/relations.hpp"
#include "singtens/span.hpp"

namespace singtens {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent input. The message names the source and either
/// the line and column (syntax errors) or the offending field.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string where(std::string_view source, std::string_view field) {
  return std::string(source) + ": field '" + std::string(field) + "'";
}

/// One-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline const Json& require(const Json& j, const char* key, std::string_view source) {
  if (!j.is_object()) throw IoError(std::string(source) + ": expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw IoError(where(source, key) + " is missing");
  return *it;
}

inline std::vector<double> number_array(const Json& j, std::string_view source, std::string_view field) {
  if (!j.is_array()) throw IoError(where(source, field) + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw IoError(where(source, field) + " entry " + std::to_string(i) + " is not a number");
    }
    out.push_back(j[i].get<double>());
  }
  return out;
}

inline Format format_from_json(const Json& j, std::string_view source) {
  if (!j.is_array()) throw IoError(where(source, "format") + " must be an array of integers");
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_unsigned()) {
      throw IoError(where(source, "format") + " entry " + std::to_string(i) + " is not a positive integer");
    }
    dims.push_back(j[i].get<std::size_t>());
  }
  try {
    return Format(std::move(dims));
  } catch (const std::invalid_argument& e) {
    throw IoError(where(source, "format") + ": " + e.what());
  }
}

inline Json format_to_json(const Format& f) { return Json(f.dim_vector()); }

inline Json cvector_to_json(std::span<const cplx> v) {
  Json re = Json::array(), im = Json::array();
  for (const auto& z : v) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  return Json{{"re", std::move(re)}, {"im", std::move(im)}};
}

inline CVector cvector_from_json(const Json& j, std::string_view source, const std::string& field) {
  const auto re = number_array(require(j, "re", source), source, field + ".re");
  const auto im = number_array(require(j, "im", source), source, field + ".im");
  if (re.size() != im.size()) {
    throw IoError(where(source, field) + ": 're' has " + std::to_string(re.size()) + " entries but 'im' has " +
                  std::to_string(im.size()));
  }
  CVector v(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) v[i] = {re[i], im[i]};
  return v;
}

/// Non-finite values become null, which JSON can represent.
inline Json real_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace detail

/// Parses JSON text; syntax errors report the line and column.
inline Json parse_json_text(std::string_view text, std::string_view source = "<input>") {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string msg = e.what();
    // keep only the explanation that follows nlohmann's own position prefix
    if (const auto pos = msg.find(": "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw IoError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                  ": JSON syntax error: " + msg);
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path);
}

inline void write_json(const Json& j, std::ostream& out) { out << j.dump(2) << '\n'; }

inline void write_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path + ": cannot open file for writing");
  write_json(j, out);
  if (!out) throw IoError(path + ": write failed");
}

// ---- tensors -------------------------------------------------------------

/// {"format": [n_1, ..., n_k], "re": [...], "im": [...]}, last index fastest.
inline Json tensor_to_json(const CTensor& T) {
  Json j = detail::cvector_to_json(T.entries());
  return Json{{"format", detail::format_to_json(T.format())}, {"re", j["re"]}, {"im", j["im"]}};
}

inline CTensor tensor_from_json(const Json& j, std::string_view source = "<tensor>") {
  const Format f = detail::format_from_json(detail::require(j, "format", source), source);
  CVector v = detail::cvector_from_json(j, source, "tensor");
  if (v.size() != f.total_size()) {
    throw IoError(std::string(source) + ": format (" + f.to_string() + ") needs " + std::to_string(f.total_size()) +
                  " entries but " + std::to_string(v.size()) + " were given");
  }
  return CTensor(f, std::move(v));
}

inline CTensor read_tensor_file(const std::string& path) { return tensor_from_json(read_json_file(path), path); }

// ---- solutions -----------------------------------------------------------

inline Json solutions_to_json(const SolutionSet& s) {
  Json tuples = Json::array();
  for (const auto& t : s.tuples) {
    Json x = Json::array();
    for (const auto& xi : t.x) x.push_back(detail::cvector_to_json(xi));
    tuples.push_back(Json{{"x", std::move(x)}, {"lambda", detail::cvector_to_json(t.lambda)}, {"residual", t.residual}});
  }
  Json failures = Json::object();
  for (const auto& [k, v] : s.stats.failures) failures[k] = v;
  return Json{{"format", detail::format_to_json(s.format)},
              {"seed", s.seed},
              {"ed", s.ed},
              {"complete", s.complete},
              {"tuples_found", s.size()},
              {"loops_run", s.loops_run},
              {"paths_tracked", s.stats.paths_tracked},
              {"path_failures", std::move(failures)},
              {"warnings", s.warnings},
              {"tuples", std::move(tuples)}};
}

inline SolutionSet solutions_from_json(const Json& j, std::string_view source = "<solutions>") {
  using detail::require;
  SolutionSet s;
  s.format = detail::format_from_json(require(j, "format", source), source);
  try {
    s.seed = require(j, "seed", source).get<std::uint64_t>();
    s.ed = require(j, "ed", source).get<std::int64_t>();
    s.complete = require(j, "complete", source).get<bool>();
    if (j.contains("loops_run")) s.loops_run = j["loops_run"].get<int>();
    if (j.contains("paths_tracked")) s.stats.paths_tracked = j["paths_tracked"].get<std::size_t>();
    if (j.contains("path_failures"))
      for (const auto& [k, v] : j["path_failures"].items()) s.stats.failures[k] = v.get<std::size_t>();
    if (j.contains("warnings")) s.warnings = j["warnings"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::type_error& e) {
    throw IoError(std::string(source) + ": wrong field type: " + e.what());
  }
  const Json& tuples = require(j, "tuples", source);
  if (!tuples.is_array()) throw IoError(detail::where(source, "tuples") + " must be an array");
  const std::size_t k = s.format.order();
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const std::string field = "tuples[" + std::to_string(t) + "]";
    const Json& xs = require(tuples[t], "x", source);
    if (!xs.is_array() || xs.size() != k) {
      throw IoError(detail::where(source, field + ".x") + " must hold " + std::to_string(k) + " vectors");
    }
    SingularTuple tup;
    for (std::size_t i = 0; i < k; ++i) {
      CVector xi = detail::cvector_from_json(xs[i], source, field + ".x[" + std::to_string(i) + "]");
      if (xi.size() != s.format.dim(i)) {
        throw IoError(detail::where(source, field + ".x[" + std::to_string(i) + "]") + " has length " +
                      std::to_string(xi.size()) + ", expected " + std::to_string(s.format.dim(i)));
      }
      tup.x.push_back(std::move(xi));
    }
    tup.lambda = detail::cvector_from_json(require(tuples[t], "lambda", source), source, field + ".lambda");
    if (tup.lambda.size() != k) {
      throw IoError(detail::where(source, field + ".lambda") + " must have " + std::to_string(k) + " entries");
    }
    const Json& res = require(tuples[t], "residual", source);
    if (!res.is_number()) throw IoError(detail::where(source, field + ".residual") + " is not a number");
    tup.residual = res.get<double>();
    tup.rank_one = rank_one(tup.x);
    s.tuples.push_back(std::move(tup));
  }
  return s;
}

inline SolutionSet read_solutions_file(const std::string& path) {
  return solutions_from_json(read_json_file(path), path);
}

// ---- reports -------------------------------------------------------------

inline Json span_report_to_json(const SpanReport& r) {
  Json j{{"format", detail::format_to_json(r.format)},
         {"ed", r.ed},
         {"tuples_found", r.tuples_found},
         {"complete", r.complete},
         {"span_matrix_rank", r.span_matrix_rank},
         {"span_dim_projective", r.span_dim_projective},
         {"critical_dim_projective", r.critical_dim_projective},
         {"critical_dim_formula", r.critical_dim_formula},
         {"extra_relations", r.extra_relations},
         {"gap_ratio", detail::real_or_null(r.gap_ratio)},
         {"rank_ambiguous", r.rank_ambiguous},
         {"containment_residual", r.containment_residual},
         {"membership_residual", r.membership_residual},
         {"singular_values", r.singular_values}};
  if (r.expected) {
    j["expected_span_dim"] = r.expected->dim;
    j["expected_basis"] = to_string(r.expected->basis);
  } else {
    j["expected_span_dim"] = nullptr;
    j["expected_basis"] = nullptr;
  }
  return j;
}

/// One-based multi-indices of the prefixes of an index-set choice.
inline Json index_set_to_json(const Format& f, const IndexSetChoice& c) {
  Json out = Json::array();
  for (auto p : c.prefixes) {
    const auto J = f.multi_index(p * f.last_dim());
    Json idx = Json::array();
    for (std::size_t l = 0; l + 1 < J.size(); ++l) idx.push_back(J[l] + 1);
    out.push_back(std::move(idx));
  }
  return out;
}

inline Json symmetry_to_json(const PrefixSymmetry& s) {
  auto one_based = [](const std::vector<std::size_t>& v) {
    Json a = Json::array();
    for (auto x : v) a.push_back(x + 1);
    return a;
  };
  Json perms = Json::array();
  for (const auto& p : s.coord_perm) perms.push_back(one_based(p));
  return Json{{"label", s.label()}, {"factor_order", one_based(s.factor_order)}, {"coordinate_maps", perms}};
}

struct RelationSummary {
  Format format;
  std::uint64_t seed = 0;
  RelationSearch search;
  std::int64_t extra_rank = 0;
  double tensor_residual = 0.0;  // worst |form(T)| / (|form| |T|)
  std::optional<std::size_t> stable_count;  // validated on every confirming seed
};

inline Json relations_to_json(const RelationSummary& s, bool with_coefficients = true) {
  Json rels = Json::array();
  for (const auto& r : s.search.validated) {
    Json e{{"label", r.form.label},
           {"index_set", index_set_to_json(s.format, r.choice)},
           {"symmetry", symmetry_to_json(r.symmetry)},
           {"containment", r.containment}};
    if (with_coefficients) e["coefficients"] = tensor_to_json(r.form.coefficients);
    rels.push_back(std::move(e));
  }
  Json j{{"format", detail::format_to_json(s.format)},
         {"seed", s.seed},
         {"index_sets", s.search.index_sets},
         {"symmetries_per_set", s.search.symmetries},
         {"candidates", s.search.candidates},
         {"degenerate", s.search.degenerate},
         {"validated", s.search.validated.size()},
         {"min_rejected_residual", detail::real_or_null(s.search.min_rejected_residual)},
         {"extra_rank", s.extra_rank},
         {"tensor_residual", s.tensor_residual}};
  j["stable_across_seeds"] = s.stable_count ? Json(*s.stable_count) : Json(nullptr);
  j["relations"] = std::move(rels);
  return j;
}

}  // namespace singtens
