#pragma once

// JSON documents: topology (switches, links, Fog Nodes, catalog), demand
// lists, assignments and reports.
//
// Topology layout:
//   { "switches": [ { "id": 0, "fault_prob": [0.01, ...],
//                     "fog": { "capacity": 2000, "vnfs": [true, ...],
//                              "power_w": 400, "idle_fraction": 0.5 } | null } ],
//     "links": [ { "from": 0, "to": 1, "capacity_mbps": 1000, "delay_ms": 100,
//                  "undirected": true } ],
//     "mu": 1.0, "mt": 0.1,
//     "vnf_catalog": { "proc_per_unit": [...], "proc_time_ms": [...] } }

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fogsfc/feasibility.hpp"
#include "fogsfc/flowgen.hpp"
#include "fogsfc/net_model.hpp"
#include "fogsfc/solve_common.hpp"

namespace fogsfc {

using json = nlohmann::json;

// Malformed document. `where` is "line L, column C" for syntax errors or a
// field path such as "links[2].delay_ms" for content errors.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key, "missing field");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path, "expected a number");
  return v.get<double>();
}

inline std::size_t index(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ParseError(path, "expected a non-negative integer");
  return v.get<std::size_t>();
}

inline const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, "expected an array");
  return v;
}

inline std::vector<double> numbers(const json& v, const std::string& path) {
  std::vector<double> out;
  for (std::size_t k = 0; k < array(v, path).size(); ++k)
    out.push_back(number(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class Fn>
auto wrap_model_error(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ModelError& e) {
    throw ParseError(path, e.what());
  }
}

}  // namespace detail

inline json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError(detail::line_col(text, byte), "invalid JSON");
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct TopologyDoc {
  NetworkModel model;
  VnfCatalog catalog;
};

inline json topology_to_json(const NetworkModel& model, const VnfCatalog& catalog) {
  json doc;
  json switches = json::array();
  for (SwitchId i = 0; i < model.switch_count(); ++i) {
    json s{{"id", i}, {"fault_prob", model.fault_series(i)}};
    if (const auto& f = model.fog(i)) {
      s["fog"] = {{"capacity", f->capacity},
                  {"vnfs", f->supported_vnfs},
                  {"power_w", f->power_on_watts},
                  {"idle_fraction", f->idle_fraction}};
    } else {
      s["fog"] = nullptr;
    }
    switches.push_back(std::move(s));
  }
  json links = json::array();
  for (SwitchId i = 0; i < model.switch_count(); ++i)
    for (SwitchId j = 0; j < model.switch_count(); ++j)
      if (model.has_link(i, j))
        links.push_back({{"from", i}, {"to", j}, {"capacity_mbps", model.capacity(i, j)}, {"delay_ms", model.delay(i, j)}});
  doc["switches"] = std::move(switches);
  doc["links"] = std::move(links);
  doc["mu"] = model.mu();
  doc["mt"] = model.mt();
  doc["vnf_catalog"] = {{"proc_per_unit", catalog.proc_per_unit}, {"proc_time_ms", catalog.proc_time_ms}};
  return doc;
}

inline TopologyDoc topology_from_json(const json& doc) {
  using namespace detail;
  TopologyDoc out;
  const json& sw = array(field(doc, "switches", "$"), "$.switches");
  const std::size_t n = sw.size();
  if (n == 0) throw ParseError("$.switches", "no switches");
  out.model = NetworkModel(n);

  if (doc.contains("vnf_catalog")) {
    const json& c = doc["vnf_catalog"];
    out.catalog.proc_per_unit = numbers(field(c, "proc_per_unit", "$.vnf_catalog"), "$.vnf_catalog.proc_per_unit");
    out.catalog.proc_time_ms = numbers(field(c, "proc_time_ms", "$.vnf_catalog"), "$.vnf_catalog.proc_time_ms");
    wrap_model_error("$.vnf_catalog", [&] {
      out.catalog.validate();
      return 0;
    });
  }

  std::vector<char> seen(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::string path = "$.switches[" + std::to_string(k) + "]";
    const std::size_t id = index(field(sw[k], "id", path), path + ".id");
    if (id >= n) throw ParseError(path + ".id", "id out of range (must be < " + std::to_string(n) + ")");
    if (seen[id]) throw ParseError(path + ".id", "duplicate switch id " + std::to_string(id));
    seen[id] = 1;
    if (sw[k].contains("fault_prob")) {
      const json& fp = sw[k]["fault_prob"];
      std::vector<double> series = fp.is_array() ? numbers(fp, path + ".fault_prob")
                                                 : std::vector<double>{number(fp, path + ".fault_prob")};
      wrap_model_error(path + ".fault_prob", [&] {
        out.model.set_fault_series(id, series);
        return 0;
      });
    }
    if (sw[k].contains("fog") && !sw[k]["fog"].is_null()) {
      const json& f = sw[k]["fog"];
      const std::string fpath = path + ".fog";
      FogNode node;
      node.capacity = number(field(f, "capacity", fpath), fpath + ".capacity");
      const json& v = array(field(f, "vnfs", fpath), fpath + ".vnfs");
      for (std::size_t x = 0; x < v.size(); ++x) {
        if (!v[x].is_boolean()) throw ParseError(fpath + ".vnfs[" + std::to_string(x) + "]", "expected a boolean");
        node.supported_vnfs.push_back(v[x].get<bool>());
      }
      node.power_on_watts = number(field(f, "power_w", fpath), fpath + ".power_w");
      node.idle_fraction = f.contains("idle_fraction") ? number(f["idle_fraction"], fpath + ".idle_fraction") : 0.0;
      wrap_model_error(fpath, [&] {
        out.model.set_fog(id, node);
        return 0;
      });
    }
  }

  const json& links = array(field(doc, "links", "$"), "$.links");
  std::set<std::pair<SwitchId, SwitchId>> declared;
  for (std::size_t k = 0; k < links.size(); ++k) {
    const std::string path = "$.links[" + std::to_string(k) + "]";
    const std::size_t from = index(field(links[k], "from", path), path + ".from");
    const std::size_t to = index(field(links[k], "to", path), path + ".to");
    if (from >= n) throw ParseError(path + ".from", "unknown switch " + std::to_string(from));
    if (to >= n) throw ParseError(path + ".to", "unknown switch " + std::to_string(to));
    const json& cap = field(links[k], "capacity_mbps", path);
    const json& del = field(links[k], "delay_ms", path);
    if (cap.is_null() || del.is_null())
      throw ParseError(path, "a declared link needs a finite capacity and delay");
    const double c = number(cap, path + ".capacity_mbps");
    const double d = number(del, path + ".delay_ms");
    const bool undirected = links[k].contains("undirected") && links[k]["undirected"].get<bool>();
    std::vector<std::pair<SwitchId, SwitchId>> arcs{{from, to}};
    if (undirected) arcs.emplace_back(to, from);
    for (auto [a, b] : arcs) {
      if (!declared.insert({a, b}).second)
        throw ParseError(path, "duplicate link " + std::to_string(a) + "->" + std::to_string(b));
      wrap_model_error(path, [&] {
        out.model.set_link(a, b, c, d);
        return 0;
      });
    }
  }

  if (doc.contains("mu"))
    wrap_model_error("$.mu", [&] {
      out.model.set_mu(number(doc["mu"], "$.mu"));
      return 0;
    });
  if (doc.contains("mt"))
    wrap_model_error("$.mt", [&] {
      out.model.set_mt(number(doc["mt"], "$.mt"));
      return 0;
    });

  std::size_t vnfs = out.catalog.size();
  for (SwitchId i = 0; i < n; ++i)
    if (const auto& f = out.model.fog(i)) vnfs = std::max(vnfs, f->supported_vnfs.size());
  if (!doc.contains("vnf_catalog")) out.catalog = VnfCatalog::uniform(vnfs);
  if (vnfs > out.catalog.size())
    throw ParseError("$.vnf_catalog", "a Fog Node lists more VNF types than the catalog holds");
  return out;
}

inline TopologyDoc parse_topology(const std::string& text) { return topology_from_json(parse_json_text(text)); }

inline json flow_to_json(const FlowSpec& f) {
  return {{"id", f.id},
          {"source", f.source},
          {"dest", f.dest},
          {"rates", f.rates},
          {"requested", f.requested},
          {"max_delay_ms", detail::finite_or_null(f.max_delay_ms)}};
}

inline json flows_to_json(const std::vector<FlowSpec>& flows) {
  json out = json::array();
  for (const auto& f : flows) out.push_back(flow_to_json(f));
  return out;
}

inline FlowSpec flow_from_json(const json& j, const std::string& path) {
  using namespace detail;
  FlowSpec f;
  f.id = index(field(j, "id", path), path + ".id");
  f.source = index(field(j, "source", path), path + ".source");
  f.dest = index(field(j, "dest", path), path + ".dest");
  const json& rates = field(j, "rates", path);
  f.rates = rates.is_array() ? numbers(rates, path + ".rates") : std::vector<double>{number(rates, path + ".rates")};
  const json& req = array(field(j, "requested", path), path + ".requested");
  // Either one list per slot or a single flat list used for every slot.
  if (!req.empty() && !req[0].is_array()) {
    std::vector<VnfId> r;
    for (std::size_t k = 0; k < req.size(); ++k) r.push_back(index(req[k], path + ".requested[" + std::to_string(k) + "]"));
    f.requested = {r};
  } else {
    for (std::size_t t = 0; t < req.size(); ++t) {
      const std::string p = path + ".requested[" + std::to_string(t) + "]";
      std::vector<VnfId> r;
      for (std::size_t k = 0; k < array(req[t], p).size(); ++k) r.push_back(index(req[t][k], p + "[" + std::to_string(k) + "]"));
      f.requested.push_back(r);
    }
  }
  if (j.contains("max_delay_ms") && !j["max_delay_ms"].is_null())
    f.max_delay_ms = number(j["max_delay_ms"], path + ".max_delay_ms");
  return f;
}

inline std::vector<FlowSpec> flows_from_json(const json& doc, const NetworkModel* model = nullptr,
                                             const VnfCatalog* catalog = nullptr) {
  const json& arr = detail::array(doc.is_object() && doc.contains("flows") ? doc["flows"] : doc, "$");
  std::vector<FlowSpec> out;
  std::set<FlowId> ids;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string path = "$[" + std::to_string(k) + "]";
    FlowSpec f = flow_from_json(arr[k], path);
    if (!ids.insert(f.id).second) throw ParseError(path + ".id", "duplicate flow id " + std::to_string(f.id));
    if (model && catalog)
      detail::wrap_model_error(path, [&] {
        f.validate(model->switch_count(), catalog->size());
        return 0;
      });
    out.push_back(std::move(f));
  }
  return out;
}

inline json assignment_to_json(const Assignment& a) {
  json flows = json::array();
  for (const auto& [id, fa] : a.flows) {
    json links = json::array();
    for (const auto& l : fa.links) links.push_back({l.from, l.to});
    json services = json::array();
    for (const auto& s : fa.services) services.push_back({{"vnf", s.vnf}, {"node", s.node}});
    flows.push_back({{"id", id}, {"links", links}, {"services", services}});
  }
  return {{"switch_count", a.switch_count}, {"fog_on", a.fog_on}, {"flows", flows}};
}

inline Assignment assignment_from_json(const json& doc) {
  using namespace detail;
  Assignment a(index(field(doc, "switch_count", "$"), "$.switch_count"));
  const json& flows = array(field(doc, "flows", "$"), "$.flows");
  for (std::size_t k = 0; k < flows.size(); ++k) {
    const std::string path = "$.flows[" + std::to_string(k) + "]";
    FlowAssignment fa;
    const FlowId id = index(field(flows[k], "id", path), path + ".id");
    const json& links = array(field(flows[k], "links", path), path + ".links");
    for (std::size_t m = 0; m < links.size(); ++m) {
      const std::string lp = path + ".links[" + std::to_string(m) + "]";
      if (!links[m].is_array() || links[m].size() != 2) throw ParseError(lp, "expected [from, to]");
      fa.links.push_back({index(links[m][0], lp + "[0]"), index(links[m][1], lp + "[1]")});
    }
    const json& services = array(field(flows[k], "services", path), path + ".services");
    for (std::size_t m = 0; m < services.size(); ++m) {
      const std::string sp = path + ".services[" + std::to_string(m) + "]";
      fa.services.push_back({index(field(services[m], "vnf", sp), sp + ".vnf"),
                             index(field(services[m], "node", sp), sp + ".node")});
    }
    fa.normalize();
    if (!a.flows.emplace(id, std::move(fa)).second) throw ParseError(path + ".id", "duplicate flow id");
  }
  if (doc.contains("fog_on")) {
    const json& on = array(doc["fog_on"], "$.fog_on");
    if (on.size() != a.switch_count) throw ParseError("$.fog_on", "length differs from switch_count");
    for (std::size_t i = 0; i < on.size(); ++i) a.fog_on[i] = on[i].get<bool>();
  } else {
    a.set_fog_on_from_services();
  }
  return a;
}

inline json violations_to_json(const Violations& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back({{"constraint", v.constraint}, {"indices", v.indices}, {"detail", v.detail}});
  return out;
}

inline json report_to_json(const ConstraintReport& r) {
  return {{"feasible", r.feasible()},
          {"violations", violations_to_json(r.violations)},
          {"warnings", r.warnings},
          {"objective", r.objective},
          {"energy_j", r.energy_j},
          {"idle_energy_j", r.idle_energy_j},
          {"side_effect", r.side_effect}};
}

inline json metrics_to_json(const MetricsReport& m) {
  return {{"energy_j", m.energy_j},
          {"idle_energy_j", m.idle_energy_j},
          {"side_effect", m.side_effect},
          {"served_flows", m.served_flows},
          {"mean_fault", m.mean_fault},
          {"max_fault", m.max_fault},
          {"mean_path_len", m.mean_path_len},
          {"mean_link_util", m.mean_link_util},
          {"max_link_util", m.max_link_util},
          {"mean_fog_util", m.mean_fog_util},
          {"max_fog_util", m.max_fog_util}};
}

inline json solve_result_to_json(const SolveResult& r) {
  return {{"status", to_string(r.status)},
          {"dropped", r.dropped},
          {"reason", r.reason},
          {"objective", r.objective},
          {"search_nodes", r.search_nodes},
          {"assignment", assignment_to_json(r.assignment)}};
}

inline json params_to_json(const GeneratorParams& p) {
  return {{"rate_ratio", p.rate_ratio},
          {"fog_ratio", p.fog_ratio},
          {"mean_vnfs", p.mean_vnfs},
          {"vnf_ratio", p.vnf_ratio},
          {"min_vnfs", p.min_vnfs},
          {"max_vnfs", p.max_vnfs},
          {"edge_ratio", p.edge_ratio},
          {"source_ratio", p.source_ratio},
          {"dest_ratio", p.dest_ratio},
          {"omega", p.omega},
          {"max_flows_per_source",
           p.max_flows_per_source == kUnboundedFlows ? json(nullptr) : json(p.max_flows_per_source)},
          {"vnf_types", p.vnf_types},
          {"seed", p.seed},
          {"slots", p.slots},
          {"mean_fault_prob", p.mean_fault_prob},
          {"link_capacity_mbps", p.link_capacity_mbps},
          {"capacity_factor", p.capacity_factor},
          {"watts_per_unit", p.watts_per_unit},
          {"idle_fraction", p.idle_fraction},
          {"delay_allowance_hops", p.delay_allowance_hops}};
}

// Overlays the fields present in `j` onto `p`; unknown keys are rejected.
inline void apply_params_json(GeneratorParams& p, const json& j, const std::string& path = "$") {
  using namespace detail;
  if (!j.is_object()) throw ParseError(path, "expected an object");
  for (const auto& [key, v] : j.items()) {
    const std::string at = path + "." + key;
    if (key == "rate_ratio") p.rate_ratio = number(v, at);
    else if (key == "fog_ratio") p.fog_ratio = number(v, at);
    else if (key == "mean_vnfs") p.mean_vnfs = number(v, at);
    else if (key == "vnf_ratio") p.vnf_ratio = number(v, at);
    else if (key == "min_vnfs") p.min_vnfs = index(v, at);
    else if (key == "max_vnfs") p.max_vnfs = index(v, at);
    else if (key == "edge_ratio") p.edge_ratio = number(v, at);
    else if (key == "source_ratio") p.source_ratio = number(v, at);
    else if (key == "dest_ratio") p.dest_ratio = number(v, at);
    else if (key == "omega") p.omega = number(v, at);
    else if (key == "max_flows_per_source") p.max_flows_per_source = v.is_null() ? kUnboundedFlows : index(v, at);
    else if (key == "vnf_types") p.vnf_types = index(v, at);
    else if (key == "seed") p.seed = index(v, at);
    else if (key == "slots") p.slots = index(v, at);
    else if (key == "mean_fault_prob") p.mean_fault_prob = number(v, at);
    else if (key == "link_capacity_mbps") p.link_capacity_mbps = number(v, at);
    else if (key == "capacity_factor") p.capacity_factor = number(v, at);
    else if (key == "watts_per_unit") p.watts_per_unit = number(v, at);
    else if (key == "idle_fraction") p.idle_fraction = number(v, at);
    else if (key == "delay_allowance_hops") p.delay_allowance_hops = number(v, at);
    else throw ParseError(at, "unknown generator parameter");
  }
  wrap_model_error(path, [&] {
    p.validate();
    return 0;
  });
}

}  // namespace fogsfc
