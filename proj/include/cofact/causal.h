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

// Causal graphs (DAG / DCG), structural roles relative to a treatment and an
// outcome, and synthetic data from linear-Gaussian structural causal models.

#ifndef COFACT_CAUSAL_H_
#define COFACT_CAUSAL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cofact/tabular.h"
#include "json.hpp"

namespace cofact {

// Counter-based generator: draw(key, i) = SplitMix64Finalize(key + (i + 1) *
// 0x9E3779B97F4A7C15), with
//   SplitMix64Finalize(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//                          z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//                          return z ^ (z >> 31);
// A stream key is SplitMix64Finalize(seed ^ FNV-1a-64(stream name)), so each
// named stream is independent of every other and adding a stream never
// perturbs existing ones.
class CounterRng {
 public:
  static std::uint64_t Finalize(std::uint64_t z);
  static std::uint64_t Fnv1a(std::string_view text);

  CounterRng(std::uint64_t seed, std::string_view stream);

  std::uint64_t Bits(std::uint64_t counter) const;
  // 53-bit uniform in [0, 1).
  double Uniform(std::uint64_t counter) const;
  // Box-Muller on counters 2i and 2i + 1.
  double Normal(std::uint64_t i) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

enum class GraphKind { kDag, kDcg };

struct EdgeSpec {
  std::string from;
  std::string to;
  double weight = 1.0;
};

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 1.0;
};

class CausalGraph {
 public:
  // Rejects empty or duplicate node names, unknown endpoints, self-loops,
  // duplicate (from, to) pairs, and cycles when kind is kDag.
  CausalGraph(std::vector<std::string> nodes, const std::vector<EdgeSpec>& edges,
              GraphKind kind);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  GraphKind kind() const { return kind_; }

  std::optional<std::size_t> FindNode(std::string_view name) const;
  std::size_t node(std::string_view name) const;  // Throws kNotFound.
  const std::vector<std::size_t>& children(std::size_t node) const {
    return children_[node];
  }

 private:
  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> children_;
  GraphKind kind_;
};

struct AcyclicityResult {
  bool acyclic = true;
  // Topological order when acyclic.
  std::vector<std::string> order;
  // Witness when cyclic: consecutive nodes are joined by edges and the last
  // node has an edge back to the first.
  std::vector<std::string> cycle;
};

// Kahn's algorithm; a cycle is recovered from the nodes it cannot remove.
AcyclicityResult CheckAcyclic(const CausalGraph& graph);

enum class NodeRole { kConfounder, kCollider, kMediator, kOther };

std::string_view NodeRoleName(NodeRole role);

struct NodeRoleEntry {
  std::string node;
  NodeRole role = NodeRole::kOther;
  bool confounder = false;
  bool collider = false;
  bool mediator = false;
};

struct NodeRoleReport {
  std::string treatment;
  std::string outcome;
  std::vector<NodeRoleEntry> nodes;  // Graph order, excluding the two anchors.

  NodeRole RoleOf(std::string_view node) const;
};

// Reachability-based roles:
//   confounder: directed paths into treatment avoiding the outcome and into
//               the outcome avoiding the treatment;
//   collider:   treatment and outcome both reach the node;
//   mediator:   treatment reaches the node and the node reaches the outcome.
// In cyclic graphs several flags can hold; `role` takes the first of
// confounder, mediator, collider.
NodeRoleReport ClassifyRoles(const CausalGraph& graph, std::string_view treatment,
                             std::string_view outcome);

struct ScmSpec {
  CausalGraph graph{{}, {}, GraphKind::kDag};
  std::map<std::string, double, std::less<>> noise_sd;  // Per-node override.
  double default_noise_sd = 1.0;
  std::string treatment;
  std::string outcome;
  std::size_t n = 0;
  std::uint64_t seed = 0;

  double NoiseSd(std::string_view node) const;
};

struct GroundTruth {
  std::string treatment;
  std::string outcome;
  double direct_effect = 0.0;  // Weight of the treatment -> outcome edge.
};

struct GeneratedData {
  Dataset dataset;
  GroundTruth truth;
};

// Suffix of the column holding the treatment's pre-binarization value.
inline constexpr std::string_view kLatentSuffix = "_latent";

// Samples nodes in topological order. Each node is the weighted sum of its
// parents plus Gaussian noise from its own stream. The treatment is then
// binarized, t = 1 with probability sigmoid(latent), and its children see the
// binary value. Columns follow graph node order; the treatment column holds
// 0/1 and is followed by "<treatment>_latent".
GeneratedData Generate(const ScmSpec& spec);

nlohmann::json GraphToJson(const CausalGraph& graph);
CausalGraph GraphFromJson(const nlohmann::json& doc);
nlohmann::json ScmSpecToJson(const ScmSpec& spec);
ScmSpec ScmSpecFromJson(const nlohmann::json& doc);

// Built-in fixtures: fig1a_direct, fig1b_confounded, fig1c_collider.
std::vector<std::string> FixtureNames();
ScmSpec DefaultFixture(std::string_view name);  // Throws kNotFound.

}  // namespace cofact

#endif  // COFACT_CAUSAL_H_
