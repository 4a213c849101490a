#pragma once

// JSON forms of the library's artifacts. Doubles are written in shortest
// round-trip form, so reading back reproduces them exactly.

#include <string>
#include <vector>

#include <json.hpp>

#include "pitomo/dataset.hpp"
#include "pitomo/pretest.hpp"
#include "pitomo/reconstruct.hpp"

namespace pitomo {

using Json = nlohmann::json;

/// Raised for malformed or inconsistent documents.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json ensemble_to_json(const SpinEnsemble& e);
/// Validates the result as a state unless `validate` is false.
SpinEnsemble ensemble_from_json(const Json& j, bool validate = true, int max_qubits = configured_max_qubits());

Json settings_to_json(const std::vector<Setting>& settings);
/// Vectors are normalized; a note is appended to `warnings` for each one whose
/// norm was off by more than 1e-6.
std::vector<Setting> settings_from_json(const Json& j, std::vector<std::string>* warnings = nullptr);

Json dataset_to_json(const Dataset& d);
Dataset dataset_from_json(const Json& j, int max_qubits = configured_max_qubits());

Json result_to_json(const ReconstructionResult& r, const FitSpec& spec);

Json witness_to_json(const PretestWitness& w);
PretestWitness witness_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace pitomo
