#pragma once

// JSON model files. Doubles are written in shortest round-trip form, so a
// reloaded model predicts identically.

#include <string>
#include <variant>

#include "json.hpp"

#include "clda/classify.hpp"
#include "clda/coda.hpp"

namespace clda::model_io {

using Json = nlohmann::json;

Json to_json(const classify::ClassifierModel& m);
Json to_json(const coda::CodaModel& m);

classify::ClassifierModel clda_from_json(const Json& j);
coda::CodaModel coda_from_json(const Json& j);

using AnyModel = std::variant<classify::ClassifierModel, coda::CodaModel>;

// Dispatches on the "method" field. Throws InputError on schema problems.
AnyModel load(const std::string& path);
void save(const std::string& path, const AnyModel& model);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& field);
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j, const std::string& field);

}  // namespace clda::model_io
