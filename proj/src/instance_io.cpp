#include "fairmatch/instance_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fairmatch {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string edge_key(const Instance& inst, const Edge& e) {
  return inst.workers()[e.worker] + "|" + inst.task_types()[e.task];
}

}  // namespace

Instance parse_instance_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw std::invalid_argument(std::string("instance is not valid JSON: ") + err.what());
  }
  for (const char* field : {"workers", "task_types", "lambda", "mu"}) {
    if (!doc.contains(field)) throw std::invalid_argument(std::string("instance lacks field '") + field + "'");
  }

  try {
    auto workers = doc["workers"].get<std::vector<std::string>>();
    auto types = doc["task_types"].get<std::vector<std::string>>();

    std::vector<double> lambda(types.size(), 0.0);
    for (std::size_t j = 0; j < types.size(); ++j) {
      if (!doc["lambda"].contains(types[j])) {
        throw std::invalid_argument("no arrival rate for task type '" + types[j] + "'");
      }
      lambda[j] = doc["lambda"][types[j]].get<double>();
    }
    for (const auto& [key, value] : doc["lambda"].items()) {
      if (std::find(types.begin(), types.end(), key) == types.end()) {
        throw std::invalid_argument("arrival rate given for unknown task type '" + key + "'");
      }
    }

    std::vector<Edge> edges;
    for (const auto& [key, value] : doc["mu"].items()) {
      const auto bar = key.find('|');
      if (bar == std::string::npos) throw std::invalid_argument("edge key '" + key + "' lacks '|'");
      const std::string w = key.substr(0, bar);
      const std::string t = key.substr(bar + 1);
      auto wi = std::find(workers.begin(), workers.end(), w);
      auto tj = std::find(types.begin(), types.end(), t);
      if (wi == workers.end()) throw std::invalid_argument("edge '" + key + "' names unknown worker");
      if (tj == types.end()) throw std::invalid_argument("edge '" + key + "' names unknown task type");
      edges.push_back({static_cast<WorkerIndex>(wi - workers.begin()),
                       static_cast<TaskIndex>(tj - types.begin()), value.get<double>()});
    }
    return Instance(std::move(workers), std::move(types), std::move(lambda), std::move(edges));
  } catch (const nlohmann::json::exception& err) {
    throw std::invalid_argument(std::string("malformed instance: ") + err.what());
  }
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open instance file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance_json(buf.str());
}

std::string instance_to_json(const Instance& inst) {
  ordered_json doc;
  doc["workers"] = inst.workers();
  doc["task_types"] = inst.task_types();
  doc["lambda"] = ordered_json::object();
  for (TaskIndex j = 0; j < inst.num_task_types(); ++j) doc["lambda"][inst.task_types()[j]] = inst.lambda()[j];
  doc["mu"] = ordered_json::object();
  for (const Edge& e : inst.edges()) doc["mu"][edge_key(inst, e)] = e.mu;
  return doc.dump(2);
}

std::string policy_to_json(const Instance& inst, const PolicyMatrix& x) {
  ordered_json doc = ordered_json::object();
  for (EdgeIndex e = 0; e < inst.num_edges(); ++e) doc[edge_key(inst, inst.edge(e))] = x[e];
  return doc.dump();
}

}  // namespace fairmatch
