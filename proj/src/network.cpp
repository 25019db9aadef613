#include "entlink/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <nlohmann/json.hpp>

#include "entlink/counting.hpp"
#include "entlink/errors.hpp"

namespace entlink::network {

std::string_view node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Ground: return "ground";
    case NodeKind::Drone: return "drone";
    case NodeKind::Hap: return "hap";
  }
  return "unknown";
}

NodeKind parse_node_kind(std::string_view s) {
  if (s == "ground") return NodeKind::Ground;
  if (s == "drone") return NodeKind::Drone;
  if (s == "hap") return NodeKind::Hap;
  throw ValidationError("unknown node kind '" + std::string(s) + "'");
}

void NodeSpec::validate() const {
  if (!(altitude >= 0.0)) throw ValidationError("node " + id + ": altitude must be >= 0");
  if (!(aperture > 0.0)) throw ValidationError("node " + id + ": aperture must be > 0");
}

PathPlan::PathPlan(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links, Topology topology,
                   std::size_t source_index)
    : nodes_(std::move(nodes)), links_(std::move(links)), topology_(topology), source_index_(source_index) {
  if (nodes_.size() < 2) throw ValidationError("a path needs at least two nodes");
  if (links_.size() + 1 != nodes_.size()) throw ValidationError("a path needs exactly one link per hop");
  if (source_index_ >= nodes_.size()) throw ValidationError("source index outside the path");
  if (topology_ == Topology::Cascade && source_index_ != 0)
    throw ValidationError("cascade paths start at the source");
  for (const auto& n : nodes_) n.validate();
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    if (l.from != nodes_[i].id || l.to != nodes_[i + 1].id)
      throw ValidationError("link " + std::to_string(i) + " does not join consecutive nodes");
    if (!(l.distance > 0.0)) throw ValidationError("link " + std::to_string(i) + " has nonpositive distance");
    end_to_end_db_ += l.budget.total_db();
  }
}

std::size_t PathPlan::relay_count() const noexcept {
  const std::size_t interior = nodes_.size() - 2;
  return topology_ == Topology::Distribution && interior > 0 ? interior - 1 : interior;
}

double PathPlan::max_link_db() const {
  double m = 0.0;
  for (const auto& l : links_) m = std::max(m, l.budget.total_db());
  return m;
}

double horizon_distance(double h1, double h2, double earth_radius) {
  if (!(h1 >= 0.0 && h2 >= 0.0)) throw ValidationError("altitudes must be nonnegative");
  if (!(earth_radius > 0.0)) throw ValidationError("earth radius must be positive");
  return std::sqrt(2.0 * earth_radius * h1) + std::sqrt(2.0 * earth_radius * h2);
}

Feasibility link_feasible(const LinkSpec& link, const NodeSpec& a, const NodeSpec& b, double max_db,
                          double earth_radius) {
  Feasibility f;
  if (link.distance > horizon_distance(a.altitude, b.altitude, earth_radius)) {
    f.feasible = false;
    f.reasons.emplace_back("curvature");
  }
  if (link.budget.total_db() > max_db) {
    f.feasible = false;
    f.reasons.emplace_back("loss");
  }
  return f;
}

optics::LinkBudget HopModel::budget(const NodeSpec& a, const NodeSpec& b, double distance) const {
  optics::BeamGeometry g{wavelength, a.aperture, b.aperture, waist};
  return optics::total_link_budget(g, distance, condition, jitter_rms, fiber, static_db, atmosphere);
}

namespace {

struct ChainAttempt {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  Feasibility feasibility;
};

// Equal hops from `first` to `last` with k - 1 copies of `relay` between.
ChainAttempt equal_chain(const NodeSpec& first, const NodeSpec& relay, const NodeSpec& last,
                         double start, double length, std::size_t k, double max_db,
                         const HopModel& hop, const std::string& prefix) {
  ChainAttempt out;
  const double step = length / static_cast<double>(k);
  out.nodes.push_back(first);
  out.nodes.back().position = start;
  for (std::size_t i = 1; i < k; ++i) {
    NodeSpec n = relay;
    n.id = prefix + std::to_string(i);
    n.position = start + step * static_cast<double>(i);
    out.nodes.push_back(n);
  }
  out.nodes.push_back(last);
  out.nodes.back().position = start + length;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& a = out.nodes[i];
    const auto& b = out.nodes[i + 1];
    LinkSpec l{a.id, b.id, step, hop.budget(a, b, step)};
    const auto f = link_feasible(l, a, b, max_db, hop.earth_radius);
    if (!f.feasible) {
      out.feasibility.feasible = false;
      for (const auto& r : f.reasons)
        if (std::find(out.feasibility.reasons.begin(), out.feasibility.reasons.end(), r) ==
            out.feasibility.reasons.end())
          out.feasibility.reasons.push_back(r);
    }
    out.links.push_back(std::move(l));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) s += (s.empty() ? "" : "+") + p;
  return s;
}

ChainAttempt minimal_chain(const NodeSpec& first, const NodeSpec& relay, const NodeSpec& last,
                           double start, double length, double max_db, const HopModel& hop,
                           std::size_t k_max, const std::string& prefix) {
  if (!(length > 0.0)) throw ValidationError("total distance must be positive");
  if (k_max == 0) throw ValidationError("k_max must be at least 1");
  ChainAttempt attempt;
  for (std::size_t k = 1; k <= k_max; ++k) {
    attempt = equal_chain(first, relay, last, start, length, k, max_db, hop, prefix);
    if (attempt.feasibility.feasible) return attempt;
  }
  const std::string binding = join(attempt.feasibility.reasons);
  throw InfeasibleError("no chain with at most " + std::to_string(k_max) + " hops satisfies the " +
                            binding + " constraint",
                        binding);
}

}  // namespace

PathPlan plan_relay_chain(double total_distance, const NodeSpec& node_template, double per_link_max_db,
                          const HopModel& hop, std::size_t k_max, Topology topology) {
  node_template.validate();
  if (topology != Topology::Cascade)
    throw ValidationError("plan_relay_chain builds cascades; use plan_distribution");
  NodeSpec first = node_template;
  first.id = "n0";
  NodeSpec last = node_template;
  last.id = "end";
  auto chain = minimal_chain(first, node_template, last, 0.0, total_distance, per_link_max_db, hop,
                             k_max, "n");
  chain.nodes.back().id = "n" + std::to_string(chain.nodes.size() - 1);
  chain.links.back().to = chain.nodes.back().id;
  return PathPlan(std::move(chain.nodes), std::move(chain.links), Topology::Cascade, 0);
}

PathPlan plan_distribution(double total_distance, const NodeSpec& end_template,
                           const NodeSpec& relay_template, double per_link_max_db,
                           const HopModel& hop, std::size_t k_max) {
  end_template.validate();
  relay_template.validate();
  NodeSpec alice = end_template;
  alice.id = "alice";
  NodeSpec bob = end_template;
  bob.id = "bob";
  NodeSpec source = relay_template;
  source.id = "source";
  const double half = total_distance / 2.0;
  auto left = minimal_chain(alice, relay_template, source, 0.0, half, per_link_max_db, hop, k_max, "a");
  auto right = minimal_chain(source, relay_template, bob, half, half, per_link_max_db, hop, k_max, "b");

  std::vector<NodeSpec> nodes = std::move(left.nodes);
  const std::size_t source_index = nodes.size() - 1;
  nodes.insert(nodes.end(), right.nodes.begin() + 1, right.nodes.end());
  std::vector<LinkSpec> links = std::move(left.links);
  links.insert(links.end(), right.links.begin(), right.links.end());
  return PathPlan(std::move(nodes), std::move(links), Topology::Distribution, source_index);
}

Prediction predict_end_to_end(const PathPlan& plan, const SourceParams& source, double v_src) {
  if (!(source.pair_rate >= 0.0 && source.bg_a >= 0.0 && source.bg_b >= 0.0 && source.window > 0.0))
    throw ValidationError("invalid source parameters");
  double eta_a = 1.0;
  double eta_b = 1.0;
  for (std::size_t i = 0; i < plan.links().size(); ++i) {
    const double t = plan.links()[i].budget.transmittance();
    if (i < plan.source_index()) eta_a *= t;
    else eta_b *= t;
  }
  Prediction p;
  p.coincidence_rate = source.pair_rate * eta_a * eta_b;
  // Singles behind a linear analyzer see half of a maximally entangled pair.
  const double singles_a = 0.5 * source.pair_rate * eta_a + source.bg_a;
  const double singles_b = 0.5 * source.pair_rate * eta_b + source.bg_b;
  p.accidental_rate = 4.0 * counting::accidental_rate(singles_a, singles_b, source.window);
  p.v_eff = counting::effective_visibility(v_src, p.coincidence_rate, p.accidental_rate);
  p.abs_s = 2.0 * std::numbers::sqrt2 * p.v_eff;
  return p;
}

nlohmann::json to_json(const PathPlan& plan) {
  using nlohmann::json;
  json nodes = json::array();
  for (const auto& n : plan.nodes())
    nodes.push_back({{"id", n.id},
                     {"kind", node_kind_name(n.kind)},
                     {"altitude_m", n.altitude},
                     {"aperture_m", n.aperture},
                     {"position_m", n.position}});
  json links = json::array();
  for (const auto& l : plan.links())
    links.push_back({{"from", l.from},
                     {"to", l.to},
                     {"distance_m", l.distance},
                     {"budget",
                      {{"diffraction_db", l.budget.diffraction_db()},
                       {"atmospheric_db", l.budget.atmospheric_db()},
                       {"pointing_db", l.budget.pointing_db()},
                       {"static_coupling_db", l.budget.static_coupling_db()},
                       {"total_db", l.budget.total_db()}}}});
  json out{{"topology", plan.topology() == Topology::Distribution ? "distribution" : "cascade"},
           {"source_index", plan.source_index()},
           {"relay_count", plan.relay_count()},
           {"nodes", nodes},
           {"links", links},
           {"end_to_end_db", plan.end_to_end_db()}};
  if (plan.predicted()) {
    const auto& p = *plan.predicted();
    out["predicted"] = {{"coincidence_rate", p.coincidence_rate},
                        {"accidental_rate", p.accidental_rate},
                        {"v_eff", p.v_eff},
                        {"abs_s", p.abs_s}};
  }
  return out;
}

}  // namespace entlink::network
