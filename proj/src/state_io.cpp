#include "qsd/state_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qsd/errors.hpp"

namespace qsd {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_real_rows(std::ostringstream& os, const Matrix& m, bool imag) {
  os << '[';
  for (Index i = 0; i < m.rows(); ++i) {
    if (i) os << ", ";
    os << '[';
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ", ";
      os << format_double(imag ? m(i, j).imag() : m(i, j).real());
    }
    os << ']';
  }
  os << ']';
}

void write_operator(std::ostringstream& os, const HermitianOperator& op) {
  os << "{\"re\": ";
  write_real_rows(os, op.matrix(), false);
  os << ", \"im\": ";
  write_real_rows(os, op.matrix(), true);
  os << '}';
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "." + key, "missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  return v.get<double>();
}

Index read_dim(const json& doc) {
  const json& d = field(doc, "dim", "$");
  if (!d.is_number_integer() || d.get<long long>() < 1) throw SchemaError("$.dim", "expected a positive integer");
  return static_cast<Index>(d.get<long long>());
}

Matrix read_part(const json& part, Index dim, const std::string& path) {
  if (!part.is_array()) throw SchemaError(path, "expected an array of rows");
  if (static_cast<Index>(part.size()) != dim) {
    throw SchemaError(path, "has " + std::to_string(part.size()) + " rows, expected dim = " + std::to_string(dim));
  }
  Matrix m(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    const json& row = part[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw SchemaError(row_path, "expected an array");
    if (static_cast<Index>(row.size()) != dim) {
      throw SchemaError(row_path, "has " + std::to_string(row.size()) + " entries, expected dim = " + std::to_string(dim));
    }
    for (Index j = 0; j < dim; ++j) {
      m(i, j) = Complex(number(row[static_cast<std::size_t>(j)], row_path + "[" + std::to_string(j) + "]"), 0.0);
    }
  }
  return m;
}

HermitianOperator read_operator(const json& obj, Index dim, const std::string& path) {
  Matrix re = read_part(field(obj, "re", path), dim, path + ".re");
  Matrix im = read_part(field(obj, "im", path), dim, path + ".im");
  Matrix m = re + Complex(0.0, 1.0) * im;
  try {
    return HermitianOperator::from_matrix(m);
  } catch (const InputError& e) {
    throw SchemaError(path, e.what());
  }
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string to_json(const StateSet& set) {
  std::ostringstream os;
  os << "{\n  \"dim\": " << set.dim() << ",\n  \"states\": [\n";
  for (std::size_t m = 0; m < set.size(); ++m) {
    os << "    {\"prior\": " << format_double(set.prior(m)) << ", \"density\": ";
    write_operator(os, set.density(m));
    os << '}' << (m + 1 < set.size() ? "," : "") << '\n';
  }
  os << "  ]\n}\n";
  return os.str();
}

std::string to_json(const Povm& povm) {
  std::ostringstream os;
  os << "{\n  \"dim\": " << povm.dim() << ",\n  \"elements\": [\n";
  for (std::size_t k = 0; k < povm.size(); ++k) {
    const bool inc = povm.has_inconclusive() && k + 1 == povm.size();
    os << "    {\"inconclusive\": " << (inc ? "true" : "false") << ", \"operator\": ";
    write_operator(os, povm[k]);
    os << '}' << (k + 1 < povm.size() ? "," : "") << '\n';
  }
  os << "  ]\n}\n";
  return os.str();
}

StateSet state_set_from_json(std::string_view text) {
  const json doc = parse(text);
  const Index dim = read_dim(doc);
  const json& states = field(doc, "states", "$");
  if (!states.is_array()) throw SchemaError("$.states", "expected an array");
  if (states.empty()) throw SchemaError("$.states", "must contain at least one state");
  std::vector<WeightedState> out;
  for (std::size_t m = 0; m < states.size(); ++m) {
    const std::string path = "$.states[" + std::to_string(m) + "]";
    const json& s = states[m];
    const double prior = number(field(s, "prior", path), path + ".prior");
    out.push_back({prior, read_operator(field(s, "density", path), dim, path + ".density")});
  }
  return StateSet(std::move(out));
}

Povm povm_from_json(std::string_view text) {
  const json doc = parse(text);
  const Index dim = read_dim(doc);
  const json& elements = field(doc, "elements", "$");
  if (!elements.is_array() || elements.empty()) throw SchemaError("$.elements", "expected a non-empty array");
  std::vector<HermitianOperator> ops;
  bool has_inconclusive = false;
  for (std::size_t k = 0; k < elements.size(); ++k) {
    const std::string path = "$.elements[" + std::to_string(k) + "]";
    const json& e = elements[k];
    const json& flag = field(e, "inconclusive", path);
    if (!flag.is_boolean()) throw SchemaError(path + ".inconclusive", "expected true or false");
    if (flag.get<bool>()) {
      if (k + 1 != elements.size()) throw SchemaError(path + ".inconclusive", "only the last element may be inconclusive");
      has_inconclusive = true;
    }
    ops.push_back(read_operator(field(e, "operator", path), dim, path + ".operator"));
  }
  return Povm(std::move(ops), has_inconclusive);
}

StateSet read_state_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return state_set_from_json(buf.str());
}

void write_state_set(const std::filesystem::path& path, const StateSet& set) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << to_json(set);
}

}  // namespace qsd
