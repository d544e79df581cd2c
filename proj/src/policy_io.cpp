#include "boxpolicy/policy_io.hpp"

#include <fstream>
#include <sstream>

#include "boxpolicy/errors.hpp"
#include "json.hpp"

namespace boxpolicy {

namespace {

using Json = nlohmann::ordered_json;

Json box_json(const Hyperbox& box) {
  Json j;
  j["lower"] = box.lower();
  j["upper"] = box.upper();
  return j;
}

Hyperbox read_box(const Json& j, std::size_t d) {
  auto lower = j.at("lower").get<std::vector<double>>();
  auto upper = j.at("upper").get<std::vector<double>>();
  if (lower.size() != d || upper.size() != d) throw DataError("policy box dimension does not match d");
  try {
    return Hyperbox(std::move(lower), std::move(upper));
  } catch (const PreconditionError& e) {
    throw DataError(std::string("invalid policy box: ") + e.what());
  }
}

}  // namespace

Policy PolicyDocument::policy() const { return Policy{boxes, flipped, d}; }

PolicyDocument parse_policy_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("policy is not valid JSON: ") + e.what());
  }
  PolicyDocument doc;
  try {
    doc.format_version = j.at("format_version").get<int>();
    if (doc.format_version != kPolicyFormatVersion) {
      throw DataError("unsupported policy format_version " + std::to_string(doc.format_version));
    }
    doc.d = j.at("d").get<std::size_t>();
    doc.method = j.at("method").get<std::string>();
    doc.m_max = j.at("m_max").get<std::size_t>();
    doc.omega = j.at("omega").get<double>();
    doc.flipped = j.at("flipped").get<bool>();
    doc.objective = j.at("objective").get<double>();
    for (const auto& b : j.at("boxes")) doc.boxes.push_back(read_box(b, doc.d));
    if (j.contains("feature_names")) {
      doc.feature_names = j["feature_names"].get<std::vector<std::string>>();
      if (doc.feature_names->size() != doc.d) throw DataError("feature_names length does not match d");
    }
    if (j.contains("nuisance")) doc.nuisance = j["nuisance"].get<std::string>();
    if (j.contains("scale_psi")) doc.scale_psi = j["scale_psi"].get<bool>();
    if (j.contains("observed")) doc.observed = read_box(j["observed"], doc.d);
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed policy document: ") + e.what());
  }
  return doc;
}

PolicyDocument load_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open policy file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_policy_json(buf.str());
}

std::string to_json(const PolicyDocument& doc) {
  Json j;
  j["format_version"] = doc.format_version;
  j["d"] = doc.d;
  j["method"] = doc.method;
  j["m_max"] = doc.m_max;
  j["omega"] = doc.omega;
  j["flipped"] = doc.flipped;
  j["objective"] = doc.objective;
  j["boxes"] = Json::array();
  for (const auto& b : doc.boxes) j["boxes"].push_back(box_json(b));
  if (doc.feature_names) j["feature_names"] = *doc.feature_names;
  if (doc.nuisance) j["nuisance"] = *doc.nuisance;
  if (doc.scale_psi) j["scale_psi"] = *doc.scale_psi;
  if (doc.observed) j["observed"] = box_json(*doc.observed);
  return j.dump(2) + "\n";
}

void save_policy(const PolicyDocument& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write policy file " + path);
  out << to_json(doc);
}

}  // namespace boxpolicy
