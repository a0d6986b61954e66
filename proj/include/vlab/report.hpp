#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "vlab/conditions.hpp"
#include "vlab/experiments.hpp"
#include "vlab/modular.hpp"

namespace vlab {

using Json = nlohmann::ordered_json;

// Non-finite doubles become the strings "inf", "-inf", "nan".
Json number_json(double v);

Json to_json(const ModularValue& m);
Json to_json(const Evidence& e);
Json to_json(const ConditionReport& r);
Json to_json(const Window& w);
Json to_json(const Witness& w);
Json to_json(const InequalityReport& r);
Json to_json(const OmegaCertificate& c);
Json to_json(const LogHolderDiagnostic& d);
Json to_json(const FourierCheckReport& r);
Json to_json(const ExampleReport& r);

// Two-space indented JSON with a trailing newline.
std::string dump(const Json& j);

// Comma-separated rows, numbers with 12 significant digits.
std::string format_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows);
std::string format_number(double v);

}  // namespace vlab
