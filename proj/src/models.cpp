#include "spatinv/models.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spatinv/errors.hpp"

namespace spatinv {

using nlohmann::json;

SystemPair build_robot() {
  CMatrix A0(1, 1), A1(1, 1);
  A0(0, 0) = -1.0;
  A1(0, 0) = 1.0;
  return make_system(A0, A1, "robot");
}

SystemPair build_platoon(double a0, double a1, double a2) {
  CMatrix A0 = CMatrix::Zero(3, 3), A1 = CMatrix::Zero(3, 3);
  A0(0, 1) = 1.0;
  A0(1, 2) = 1.0;
  A0(2, 0) = -a0;
  A0(2, 1) = -a1;
  A0(2, 2) = -a2;
  A1(0, 1) = -1.0;
  std::ostringstream label;
  label << "platoon(" << a0 << "," << a1 << "," << a2 << ")";
  return make_system(A0, A1, label.str());
}

SystemPair build_platoon_from_zeros(double z1, double z2, double z3,
                                    bool literal_negative_sign) {
  const double sign = literal_negative_sign ? -1.0 : 1.0;
  const double a0 = sign * z1 * z2 * z3;
  const double a1 = z1 * z2 + z2 * z3 + z3 * z1;
  const double a2 = z1 + z2 + z3;
  SystemPair sys = build_platoon(a0, a1, a2);
  std::ostringstream label;
  label << "platoon_from_zeros(" << z1 << "," << z2 << "," << z3 << ")";
  if (literal_negative_sign) label << "[negated-constant]";
  sys.label = label.str();
  return sys;
}

SystemPair build_platoon_pair(double a, double b, double c) {
  SystemPair sys = build_platoon((a * a + b * b) * c, a * a + b * b + 2.0 * a * c,
                                 2.0 * a + c);
  std::ostringstream label;
  label << "platoon_pair(" << a << "," << b << "," << c << ")";
  sys.label = label.str();
  return sys;
}

SystemPair build_cascade(const std::vector<double>& zetas) {
  const int m = static_cast<int>(zetas.size());
  if (m < 1) throw BadModel("cascade: at least one rate required");
  CMatrix A0 = CMatrix::Zero(m, m), A1 = CMatrix::Zero(m, m);
  double prod = 1.0;
  for (int i = 0; i < m; ++i) {
    A0(i, i) = -zetas[i];
    if (i > 0) A0(i, i - 1) = 1.0;
    prod *= zetas[i];
  }
  if (prod == 0.0) throw BadModel("cascade: rates must be nonzero");
  A1(0, m - 1) = prod;
  std::ostringstream label;
  label << "cascade(";
  for (int i = 0; i < m; ++i) label << (i ? "," : "") << zetas[i];
  label << ")";
  return make_system(A0, A1, label.str());
}

SystemPair build_model(const std::string& name, const std::vector<double>& params) {
  auto arity = [&](size_t want) {
    if (params.size() != want)
      throw BadModel("model '" + name + "' expects " + std::to_string(want) +
                     " parameter(s), got " + std::to_string(params.size()));
  };
  if (name == "robot") {
    arity(0);
    return build_robot();
  }
  if (name == "platoon") {
    arity(3);
    return build_platoon(params[0], params[1], params[2]);
  }
  if (name == "platoon_from_zeros") {
    arity(3);
    return build_platoon_from_zeros(params[0], params[1], params[2]);
  }
  if (name == "platoon_pair") {
    arity(3);
    return build_platoon_pair(params[0], params[1], params[2]);
  }
  if (name == "cascade") {
    if (params.empty()) throw BadModel("cascade: at least one rate required");
    return build_cascade(params);
  }
  throw BadModel("unknown model '" + name + "'");
}

namespace {

json matrix_to_json(const CMatrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      row.push_back(json::array({M(i, j).real(), M(i, j).imag()}));
    rows.push_back(row);
  }
  return rows;
}

CMatrix matrix_from_json(const json& rows, int m, const char* which) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != m)
    throw BadModel(std::string(which) + ": expected " + std::to_string(m) + " rows");
  CMatrix M(m, m);
  for (int i = 0; i < m; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != m)
      throw BadModel(std::string(which) + ": row " + std::to_string(i) + " has wrong length");
    for (int j = 0; j < m; ++j) {
      const json& e = row[j];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw BadModel(std::string(which) + ": entries must be [re, im] pairs");
      M(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return M;
}

}  // namespace

void save_system(const SystemPair& sys, const std::string& path) {
  json doc;
  doc["schema"] = 1;
  doc["label"] = sys.label;
  doc["m"] = sys.m;
  doc["A0"] = matrix_to_json(sys.A0);
  doc["A1"] = matrix_to_json(sys.A1);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("write to '" + path + "' failed");
}

SystemPair load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw BadModel("malformed JSON in '" + path + "': " + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema") || !doc["schema"].is_number_integer())
    throw BadModel("'" + path + "': missing integer 'schema' field");
  if (doc["schema"].get<int>() != 1)
    throw BadModel("'" + path + "': unsupported schema version");
  for (const char* key : {"label", "m", "A0", "A1"})
    if (!doc.contains(key)) throw BadModel("'" + path + "': missing '" + std::string(key) + "'");
  if (!doc["m"].is_number_integer()) throw BadModel("'" + path + "': 'm' must be an integer");
  const int m = doc["m"].get<int>();
  if (m < 1 || m > 64) throw BadModel("'" + path + "': m out of range [1, 64]");
  const CMatrix A0 = matrix_from_json(doc["A0"], m, "A0");
  const CMatrix A1 = matrix_from_json(doc["A1"], m, "A1");
  SystemPair sys = make_system(A0, A1, doc["label"].get<std::string>());
  return sys;
}

}  // namespace spatinv
