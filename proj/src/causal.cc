/*
 * Copyright 2026 The CoFact Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cofact/causal.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>

#include "cofact/error.h"
#include "cofact/propensity.h"

namespace cofact {
namespace {

using nlohmann::json;

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Nodes reachable from `start` by paths of length >= 1 that never enter
// `blocked`.
std::vector<bool> Reachable(const CausalGraph& graph, std::size_t start,
                            std::optional<std::size_t> blocked) {
  std::vector<bool> seen(graph.nodes().size(), false);
  std::vector<std::size_t> stack = {start};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t c : graph.children(v)) {
      if (blocked && c == *blocked) continue;
      if (!seen[c]) {
        seen[c] = true;
        stack.push_back(c);
      }
    }
  }
  return seen;
}

struct FixtureDef {
  std::string_view name;
  std::vector<std::string> nodes;
  std::vector<EdgeSpec> edges;
};

const std::vector<FixtureDef>& Fixtures() {
  static const std::vector<FixtureDef> kFixtures = {
      {"fig1a_direct", {"T", "H"}, {{"T", "H", 1.0}}},
      {"fig1b_confounded",
       {"C", "T", "H"},
       {{"C", "T", 1.0}, {"C", "H", 1.0}, {"T", "H", 0.0}}},
      {"fig1c_collider", {"T", "H", "C"}, {{"T", "C", 1.0}, {"H", "C", 1.0}}},
  };
  return kFixtures;
}

}  // namespace

std::uint64_t CounterRng::Finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::Fnv1a(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

CounterRng::CounterRng(std::uint64_t seed, std::string_view stream)
    : key_(Finalize(seed ^ Fnv1a(stream))) {}

std::uint64_t CounterRng::Bits(std::uint64_t counter) const {
  return Finalize(key_ + (counter + 1) * kGolden);
}

double CounterRng::Uniform(std::uint64_t counter) const {
  return static_cast<double>(Bits(counter) >> 11) * 0x1.0p-53;
}

double CounterRng::Normal(std::uint64_t i) const {
  const double u1 = 1.0 - Uniform(2 * i);  // (0, 1]
  const double u2 = Uniform(2 * i + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CausalGraph::CausalGraph(std::vector<std::string> nodes,
                         const std::vector<EdgeSpec>& edges, GraphKind kind)
    : nodes_(std::move(nodes)), children_(nodes_.size()), kind_(kind) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].empty()) {
      throw Error(ErrorCode::kInvalidArgument, "graph node with empty name");
    }
    if (!index.emplace(nodes_[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate graph node '" + nodes_[i] + "'");
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const EdgeSpec& e : edges) {
    auto from = index.find(e.from);
    auto to = index.find(e.to);
    if (from == index.end() || to == index.end()) {
      throw Error(ErrorCode::kNotFound, "edge " + e.from + " -> " + e.to +
                                            " references an unknown node");
    }
    if (from->second == to->second) {
      throw Error(ErrorCode::kInvalidArgument, "self-loop on '" + e.from + "'");
    }
    if (!seen.emplace(from->second, to->second).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate edge " + e.from + " -> " + e.to);
    }
    edges_.push_back({from->second, to->second, e.weight});
    children_[from->second].push_back(to->second);
  }
  if (kind_ == GraphKind::kDag) {
    const AcyclicityResult check = CheckAcyclic(*this);
    if (!check.acyclic) {
      std::string path;
      for (const auto& n : check.cycle) path += n + " -> ";
      throw Error(ErrorCode::kInvalidArgument,
                  "graph declared as dag contains a cycle: " + path +
                      check.cycle.front());
    }
  }
}

std::optional<std::size_t> CausalGraph::FindNode(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CausalGraph::node(std::string_view name) const {
  auto i = FindNode(name);
  if (!i) {
    throw Error(ErrorCode::kNotFound,
                "unknown graph node '" + std::string(name) + "'");
  }
  return *i;
}

AcyclicityResult CheckAcyclic(const CausalGraph& graph) {
  const std::size_t n = graph.nodes().size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> parents(n);
  for (const Edge& e : graph.edges()) {
    ++indegree[e.to];
    parents[e.to].push_back(e.from);
  }
  // Smallest available index first keeps the order deterministic.
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.insert(v);
  }
  std::vector<bool> removed(n, false);
  AcyclicityResult result;
  while (!ready.empty()) {
    const std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    removed[v] = true;
    result.order.push_back(graph.nodes()[v]);
    for (std::size_t c : graph.children(v)) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  if (result.order.size() == n) return result;

  // Every remaining node has a remaining parent, so walking parents must
  // revisit a node.
  result.acyclic = false;
  result.order.clear();
  std::size_t v = 0;
  while (removed[v]) ++v;
  std::vector<std::size_t> walk;
  std::vector<std::ptrdiff_t> position(n, -1);
  while (position[v] < 0) {
    position[v] = static_cast<std::ptrdiff_t>(walk.size());
    walk.push_back(v);
    std::size_t next = n;
    for (std::size_t p : parents[v]) {
      if (!removed[p]) next = std::min(next, p);
    }
    v = next;
  }
  // walk[k + 1] -> walk[k]; reverse the loop to get forward edges.
  for (auto k = static_cast<std::ptrdiff_t>(walk.size()) - 1; k >= position[v];
       --k) {
    result.cycle.push_back(graph.nodes()[walk[k]]);
  }
  return result;
}

std::string_view NodeRoleName(NodeRole role) {
  switch (role) {
    case NodeRole::kConfounder:
      return "confounder";
    case NodeRole::kCollider:
      return "collider";
    case NodeRole::kMediator:
      return "mediator";
    case NodeRole::kOther:
      return "other";
  }
  return "";
}

NodeRole NodeRoleReport::RoleOf(std::string_view node) const {
  for (const auto& entry : nodes) {
    if (entry.node == node) return entry.role;
  }
  if (node == treatment || node == outcome) return NodeRole::kOther;
  throw Error(ErrorCode::kNotFound, "unknown node '" + std::string(node) + "'");
}

NodeRoleReport ClassifyRoles(const CausalGraph& graph, std::string_view treatment,
                             std::string_view outcome) {
  const std::size_t t = graph.node(treatment);
  const std::size_t h = graph.node(outcome);
  if (t == h) {
    throw Error(ErrorCode::kInvalidArgument,
                "treatment and outcome must be different nodes");
  }
  const auto from_t = Reachable(graph, t, std::nullopt);
  const auto from_h = Reachable(graph, h, std::nullopt);

  NodeRoleReport report{std::string(treatment), std::string(outcome), {}};
  for (std::size_t v = 0; v < graph.nodes().size(); ++v) {
    if (v == t || v == h) continue;
    NodeRoleEntry entry{graph.nodes()[v]};
    const auto reach_avoiding_h = Reachable(graph, v, h);
    const auto reach_avoiding_t = Reachable(graph, v, t);
    const auto reach = Reachable(graph, v, std::nullopt);
    entry.confounder = reach_avoiding_h[t] && reach_avoiding_t[h];
    entry.collider = from_t[v] && from_h[v];
    entry.mediator = from_t[v] && reach[h];
    if (entry.confounder) {
      entry.role = NodeRole::kConfounder;
    } else if (entry.mediator) {
      entry.role = NodeRole::kMediator;
    } else if (entry.collider) {
      entry.role = NodeRole::kCollider;
    }
    report.nodes.push_back(std::move(entry));
  }
  return report;
}

double ScmSpec::NoiseSd(std::string_view node) const {
  auto it = noise_sd.find(node);
  return it == noise_sd.end() ? default_noise_sd : it->second;
}

GeneratedData Generate(const ScmSpec& spec) {
  const CausalGraph& graph = spec.graph;
  const AcyclicityResult check = CheckAcyclic(graph);
  if (!check.acyclic) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot sample a cyclic graph; generation requires a dag");
  }
  for (const Edge& e : graph.edges()) {
    if (!std::isfinite(e.weight)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "edge " + graph.nodes()[e.from] + " -> " +
                      graph.nodes()[e.to] + " has a non-finite weight");
    }
  }
  const std::size_t t = graph.node(spec.treatment);
  const std::size_t h = graph.node(spec.outcome);
  if (t == h) {
    throw Error(ErrorCode::kInvalidArgument,
                "treatment and outcome must be different nodes");
  }
  if (spec.n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sample count must be >= 1");
  }
  const std::string latent_name = spec.treatment + std::string(kLatentSuffix);
  if (graph.FindNode(latent_name)) {
    throw Error(ErrorCode::kInvalidArgument,
                "node name '" + latent_name + "' is reserved");
  }
  for (const auto& [name, sd] : spec.noise_sd) {
    graph.node(name);
    if (!(sd >= 0.0) || !std::isfinite(sd)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "noise sd for '" + name + "' must be finite and >= 0");
    }
  }

  const std::size_t n_nodes = graph.nodes().size();
  std::vector<std::vector<std::pair<std::size_t, double>>> parents(n_nodes);
  for (const Edge& e : graph.edges()) parents[e.to].push_back({e.from, e.weight});

  std::vector<std::vector<double>> values(n_nodes);
  std::vector<double> latent;
  for (const std::string& name : check.order) {
    const std::size_t v = graph.node(name);
    const CounterRng noise(spec.seed, name);
    const double sd = spec.NoiseSd(name);
    std::vector<double>& out = values[v];
    out.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
      double x = 0.0;
      for (const auto& [p, w] : parents[v]) x += w * values[p][i];
      out[i] = x + sd * noise.Normal(i);
    }
    if (v == t) {
      latent = out;
      const CounterRng coin(spec.seed, name + "/binarize");
      for (std::size_t i = 0; i < spec.n; ++i) {
        out[i] = coin.Uniform(i) < Sigmoid(latent[i]) ? 1.0 : 0.0;
      }
    }
  }

  std::vector<Feature> features;
  std::vector<Column> columns;
  for (std::size_t v = 0; v < n_nodes; ++v) {
    features.push_back({graph.nodes()[v], FeatureKind::kNumeric, 0});
    columns.push_back(Column{std::move(values[v]), {}, {}});
    if (v == t) {
      features.push_back({latent_name, FeatureKind::kNumeric, 0});
      columns.push_back(Column{latent, {}, {}});
    }
  }

  GeneratedData data{Dataset(std::move(features), std::move(columns)),
                     {spec.treatment, spec.outcome, 0.0}};
  for (const Edge& e : graph.edges()) {
    if (e.from == t && e.to == h) data.truth.direct_effect = e.weight;
  }
  return data;
}

json GraphToJson(const CausalGraph& graph) {
  json edges = json::array();
  for (const Edge& e : graph.edges()) {
    edges.push_back({{"from", graph.nodes()[e.from]},
                     {"to", graph.nodes()[e.to]},
                     {"weight", e.weight}});
  }
  return json{{"nodes", graph.nodes()},
              {"edges", std::move(edges)},
              {"kind", graph.kind() == GraphKind::kDag ? "dag" : "dcg"}};
}

CausalGraph GraphFromJson(const json& doc) {
  try {
    std::vector<std::string> nodes = doc.at("nodes").get<std::vector<std::string>>();
    std::vector<EdgeSpec> edges;
    if (doc.contains("edges")) {
      for (const json& e : doc["edges"]) {
        edges.push_back({e.at("from").get<std::string>(),
                         e.at("to").get<std::string>(), e.value("weight", 1.0)});
      }
    }
    const std::string kind = doc.value("kind", std::string("dag"));
    if (kind != "dag" && kind != "dcg") {
      throw Error(ErrorCode::kInvalidArgument,
                  "graph kind must be \"dag\" or \"dcg\"");
    }
    return CausalGraph(std::move(nodes), edges,
                       kind == "dag" ? GraphKind::kDag : GraphKind::kDcg);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("graph JSON: ") + e.what());
  }
}

json ScmSpecToJson(const ScmSpec& spec) {
  json doc = GraphToJson(spec.graph);
  doc["treatment"] = spec.treatment;
  doc["outcome"] = spec.outcome;
  doc["n"] = spec.n;
  doc["seed"] = spec.seed;
  if (spec.noise_sd.empty()) {
    doc["noiseSd"] = spec.default_noise_sd;
  } else {
    json per_node = json::object();
    for (const std::string& node : spec.graph.nodes()) {
      per_node[node] = spec.NoiseSd(node);
    }
    doc["noiseSd"] = std::move(per_node);
  }
  return doc;
}

ScmSpec ScmSpecFromJson(const json& doc) {
  ScmSpec spec;
  spec.graph = GraphFromJson(doc);
  try {
    spec.treatment = doc.at("treatment").get<std::string>();
    spec.outcome = doc.at("outcome").get<std::string>();
    const auto n = doc.at("n").get<long long>();
    if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
    spec.n = static_cast<std::size_t>(n);
    spec.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("noiseSd")) {
      const json& sd = doc["noiseSd"];
      if (sd.is_object()) {
        for (const auto& [node, value] : sd.items()) {
          spec.noise_sd[node] = value.get<double>();
        }
      } else {
        spec.default_noise_sd = sd.get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("SCM spec JSON: ") + e.what());
  }
  spec.graph.node(spec.treatment);
  spec.graph.node(spec.outcome);
  if (spec.treatment == spec.outcome) {
    throw Error(ErrorCode::kInvalidArgument,
                "treatment and outcome must be different nodes");
  }
  return spec;
}

std::vector<std::string> FixtureNames() {
  std::vector<std::string> names;
  for (const FixtureDef& f : Fixtures()) names.emplace_back(f.name);
  return names;
}

ScmSpec DefaultFixture(std::string_view name) {
  for (const FixtureDef& f : Fixtures()) {
    if (f.name != name) continue;
    ScmSpec spec;
    spec.graph = CausalGraph(f.nodes, f.edges, GraphKind::kDag);
    spec.treatment = "T";
    spec.outcome = "H";
    spec.n = 2000;
    spec.seed = 42;
    spec.default_noise_sd = 1.0;
    return spec;
  }
  throw Error(ErrorCode::kNotFound, "unknown fixture '" + std::string(name) + "'");
}

}  // namespace cofact
