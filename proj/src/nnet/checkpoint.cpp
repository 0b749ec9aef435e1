#include <string>

#include "seqdisc/error.hpp"
#include "seqdisc/nnet/train.hpp"

namespace seqdisc::nn {

nlohmann::json params_to_json(const ParamStore& params, bool include_optimizer_state) {
  nlohmann::json list = nlohmann::json::array();
  for (const Param& p : params) {
    nlohmann::json e;
    e["name"] = p.name;
    e["shape"] = p.value.shape();
    e["values"] = std::vector<double>(p.value.values().begin(), p.value.values().end());
    if (include_optimizer_state && p.m.size() == p.value.size()) {
      e["adam_m"] = std::vector<double>(p.m.values().begin(), p.m.values().end());
      e["adam_v"] = std::vector<double>(p.v.values().begin(), p.v.values().end());
    }
    list.push_back(std::move(e));
  }
  nlohmann::json doc;
  doc["params"] = std::move(list);
  if (include_optimizer_state) doc["adam_steps"] = params.adam_steps();
  return doc;
}

void params_from_json(ParamStore& params, const nlohmann::json& doc) {
  try {
    const auto& list = doc.at("params");
    if (list.size() != params.size()) {
      throw StructuralError("checkpoint has " + std::to_string(list.size()) + " parameters, model has " +
                            std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      Param& p = params[i];
      const auto& e = list[i];
      if (e.at("name").get<std::string>() != p.name) {
        throw StructuralError("checkpoint parameter '" + e.at("name").get<std::string>() + "' where '" + p.name +
                              "' expected");
      }
      auto shape = e.at("shape").get<std::vector<std::size_t>>();
      if (shape != p.value.shape()) throw StructuralError("shape mismatch for parameter '" + p.name + "'");
      p.value = Tensor(shape, e.at("values").get<std::vector<double>>());
      if (e.contains("adam_m")) {
        p.m = Tensor(shape, e.at("adam_m").get<std::vector<double>>());
        p.v = Tensor(shape, e.at("adam_v").get<std::vector<double>>());
      } else {
        p.m = Tensor();
        p.v = Tensor();
      }
      p.grad = Tensor(shape, 0.0);
    }
    params.set_adam_steps(doc.value("adam_steps", std::uint64_t{0}));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace seqdisc::nn
