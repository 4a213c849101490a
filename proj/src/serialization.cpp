#include "pitomo/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace pitomo {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw SchemaError("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw SchemaError(what + " must be a number");
  return j.get<double>();
}

Vector3 vector3(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw SchemaError(what + " must be an array of three numbers");
  return {number(j[0], what), number(j[1], what), number(j[2], what)};
}

Json vector_json(const Vector3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json real_vector_json(const RealVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

RealVector real_vector(const Json& j, const std::string& what) {
  if (!j.is_array()) throw SchemaError(what + " must be an array");
  RealVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

int qubit_count(const Json& j, int max_qubits) {
  const Json& n = field(j, "n_qubits");
  if (!n.is_number_integer()) throw SchemaError("n_qubits must be an integer");
  const int value = n.get<int>();
  if (value < 1 || value > max_qubits) {
    throw SchemaError("n_qubits must lie in [1, " + std::to_string(max_qubits) + "]");
  }
  return value;
}

}  // namespace

Json ensemble_to_json(const SpinEnsemble& e) {
  Json blocks = Json::array();
  for (int s = 0; s < e.layout.num_sectors(); ++s) {
    blocks.push_back({{"two_j", e.layout.two_j(s)}, {"matrix", matrix_json(e.blocks[s])}});
  }
  return {{"n_qubits", e.n_qubits()}, {"blocks", std::move(blocks)}};
}

SpinEnsemble ensemble_from_json(const Json& j, bool validate, int max_qubits) {
  const int n = qubit_count(j, max_qubits);
  const SpinSectorLayout layout(n, max_qubits);
  SpinEnsemble e(layout);
  std::vector<bool> seen(layout.num_sectors(), false);
  const Json& blocks = field(j, "blocks");
  if (!blocks.is_array()) throw SchemaError("blocks must be an array");
  for (const auto& b : blocks) {
    const Json& tj = field(b, "two_j");
    if (!tj.is_number_integer()) throw SchemaError("two_j must be an integer");
    const int two_j = tj.get<int>();
    if (!layout.has_two_j(two_j)) throw SchemaError("two_j " + std::to_string(two_j) + " is not a sector");
    const int s = layout.sector_of(two_j);
    if (seen[s]) throw SchemaError("duplicate block for two_j " + std::to_string(two_j));
    seen[s] = true;
    const Json& m = field(b, "matrix");
    const int dim = layout.block_dim(s);
    if (!m.is_array() || static_cast<int>(m.size()) != dim) {
      throw SchemaError("block two_j=" + std::to_string(two_j) + " must have " + std::to_string(dim) + " rows");
    }
    for (int r = 0; r < dim; ++r) {
      if (!m[r].is_array() || static_cast<int>(m[r].size()) != dim) {
        throw SchemaError("block two_j=" + std::to_string(two_j) + " has a malformed row");
      }
      for (int c = 0; c < dim; ++c) {
        const Json& z = m[r][c];
        if (!z.is_array() || z.size() != 2) throw SchemaError("matrix entries must be [re, im] pairs");
        e.blocks[s](r, c) = Complex(number(z[0], "matrix entry"), number(z[1], "matrix entry"));
      }
    }
  }
  if (validate) {
    try {
      e.validate();
    } catch (const std::domain_error& err) {
      throw SchemaError(std::string("ensemble is not a valid state: ") + err.what());
    }
  }
  return e;
}

Json settings_to_json(const std::vector<Setting>& settings) {
  Json out = Json::array();
  for (const auto& s : settings) out.push_back(vector_json(s.axis));
  return out;
}

std::vector<Setting> settings_from_json(const Json& j, std::vector<std::string>* warnings) {
  if (!j.is_array()) throw SchemaError("settings must be an array of 3-vectors");
  std::vector<Setting> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector3 v = vector3(j[i], "setting " + std::to_string(i));
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw SchemaError("setting " + std::to_string(i) + " has zero length");
    if (std::abs(norm - 1.0) > 1e-6 && warnings != nullptr) {
      std::ostringstream msg;
      msg << "setting " << i << " has norm " << norm << "; normalized";
      warnings->push_back(msg.str());
    }
    out.push_back(Setting::normalized(v));
  }
  return out;
}

Json dataset_to_json(const Dataset& d) {
  Json records = Json::array();
  for (const auto& r : d.records) {
    Json counts = Json::array();
    for (Eigen::Index k = 0; k < r.counts.size(); ++k) {
      if (d.exact) {
        counts.push_back(r.counts(k));
      } else {
        counts.push_back(static_cast<std::int64_t>(std::llround(r.counts(k))));
      }
    }
    records.push_back({{"setting", vector_json(r.setting.axis)},
                       {"counts", std::move(counts)},
                       {"repetitions", r.repetitions}});
  }
  return {{"n_qubits", d.n_qubits}, {"records", std::move(records)}, {"exact", d.exact}};
}

Dataset dataset_from_json(const Json& j, int max_qubits) {
  Dataset d;
  d.n_qubits = qubit_count(j, max_qubits);
  if (j.contains("exact")) {
    if (!j["exact"].is_boolean()) throw SchemaError("exact must be a boolean");
    d.exact = j["exact"].get<bool>();
  }
  const Json& records = field(j, "records");
  if (!records.is_array()) throw SchemaError("records must be an array");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Json& r = records[i];
    const std::string where = "record " + std::to_string(i);
    const Vector3 axis = vector3(field(r, "setting"), where + " setting");
    if (!(axis.norm() > 0.0)) throw SchemaError(where + " setting has zero length");
    const Json& reps = field(r, "repetitions");
    if (!reps.is_number_integer()) throw SchemaError(where + " repetitions must be an integer");
    d.records.push_back({Setting::normalized(axis), real_vector(field(r, "counts"), where + " counts"),
                         reps.get<std::int64_t>()});
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& err) {
    throw SchemaError(err.what());
  }
  return d;
}

Json result_to_json(const ReconstructionResult& r, const FitSpec& spec) {
  Json trace = Json::array();
  for (const auto& st : r.trace) {
    trace.push_back({{"t", st.t},
                     {"iterations", st.iterations},
                     {"fit_value", st.fit_value},
                     {"objective_value", st.objective_value},
                     {"grad_norm", st.grad_norm},
                     {"converged", st.converged}});
  }
  Json out = {{"principle", to_string(spec.principle)},
              {"estimate", ensemble_to_json(r.estimate)},
              {"fit_value", r.fit_value},
              {"gap_bound", r.gap_bound},
              {"final_t", r.final_t},
              {"total_iterations", r.total_iterations},
              {"converged", r.converged},
              {"trace", std::move(trace)}};
  if (spec.principle == FitPrinciple::HedgedMaxLik) out["beta"] = spec.beta;
  return out;
}

Json witness_to_json(const PretestWitness& w) {
  Json z = Json::array();
  for (const auto& v : w.z) z.push_back(real_vector_json(v));
  return {{"n_qubits", w.n_qubits},
          {"settings", settings_to_json(w.settings)},
          {"z", std::move(z)},
          {"c_z_squared", w.c_z_squared()}};
}

PretestWitness witness_from_json(const Json& j) {
  PretestWitness w;
  w.n_qubits = qubit_count(j, kHardMaxQubits);
  w.settings = settings_from_json(field(j, "settings"));
  const Json& z = field(j, "z");
  if (!z.is_array()) throw SchemaError("z must be an array");
  for (std::size_t a = 0; a < z.size(); ++a) w.z.push_back(real_vector(z[a], "z"));
  try {
    w.validate();
  } catch (const std::invalid_argument& err) {
    throw SchemaError(err.what());
  }
  return w;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& err) {
    throw SchemaError("'" + path + "' is not valid JSON: " + err.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace pitomo
