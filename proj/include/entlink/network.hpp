#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "entlink/optics.hpp"

namespace entlink::network {

inline constexpr double kEarthRadius = 6371e3;

enum class NodeKind { Ground, Drone, Hap };

std::string_view node_kind_name(NodeKind k);
NodeKind parse_node_kind(std::string_view s);

struct NodeSpec {
  std::string id;
  NodeKind kind = NodeKind::Drone;
  double altitude = 0.0;   // m
  double aperture = 0.0;   // m, symmetric TX/RX pupil diameter
  double position = 0.0;   // m along the chain

  void validate() const;
};

struct LinkSpec {
  std::string from;
  std::string to;
  double distance = 0.0;
  optics::LinkBudget budget;
};

/// How photons leave the source node. Distribution: the source sits at
/// `source_index` and sends one photon each way. Cascade: the source is the
/// first node; photon A is detected locally, photon B crosses every link.
enum class Topology { Distribution, Cascade };

struct Prediction {
  double coincidence_rate = 0.0;  // 1/s, true pairs
  double accidental_rate = 0.0;   // 1/s, summed over the four projector pairs
  double v_eff = 0.0;
  double abs_s = 0.0;
};

/// Ordered node chain with per-link budgets. Construction checks that links
/// join consecutive nodes and that end_to_end_db equals the link sum.
class PathPlan {
 public:
  PathPlan(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links, Topology topology,
           std::size_t source_index);

  const std::vector<NodeSpec>& nodes() const noexcept { return nodes_; }
  const std::vector<LinkSpec>& links() const noexcept { return links_; }
  Topology topology() const noexcept { return topology_; }
  std::size_t source_index() const noexcept { return source_index_; }
  double end_to_end_db() const noexcept { return end_to_end_db_; }
  std::size_t relay_count() const noexcept;
  double max_link_db() const;

  const std::optional<Prediction>& predicted() const noexcept { return predicted_; }
  void set_predicted(const Prediction& p) { predicted_ = p; }

 private:
  std::vector<NodeSpec> nodes_;
  std::vector<LinkSpec> links_;
  Topology topology_;
  std::size_t source_index_;
  double end_to_end_db_ = 0.0;
  std::optional<Prediction> predicted_;
};

double horizon_distance(double h1, double h2, double earth_radius = kEarthRadius);

struct Feasibility {
  bool feasible = true;
  std::vector<std::string> reasons;  // "curvature", "loss"
};

Feasibility link_feasible(const LinkSpec& link, const NodeSpec& a, const NodeSpec& b, double max_db,
                          double earth_radius = kEarthRadius);

/// Everything besides node geometry needed to budget one hop.
struct HopModel {
  double wavelength = optics::kSignalWavelength;
  optics::WaistMode waist = optics::WaistMode::optimal();
  optics::Condition condition = optics::Condition::HighAltitude;
  optics::AtmosphereTable atmosphere;
  double jitter_rms = 0.0;
  optics::FiberMode fiber;
  double static_db = 0.0;
  double earth_radius = kEarthRadius;

  optics::LinkBudget budget(const NodeSpec& a, const NodeSpec& b, double distance) const;
};

/// Minimal number of equal hops k <= k_max such that every hop is inside
/// the horizon and within `per_link_max_db`. Node ids are "n0".."nk".
/// Throws InfeasibleError naming the binding constraint at k_max.
PathPlan plan_relay_chain(double total_distance, const NodeSpec& node_template,
                          double per_link_max_db, const HopModel& hop, std::size_t k_max = 64,
                          Topology topology = Topology::Cascade);

/// Distribution topology: the source node sits mid-path and each half is
/// planned as a relay chain, giving Alice - ... - source - ... - Bob.
PathPlan plan_distribution(double total_distance, const NodeSpec& end_template,
                           const NodeSpec& relay_template, double per_link_max_db,
                           const HopModel& hop, std::size_t k_max = 64);

struct SourceParams {
  double pair_rate = 2.4e6;
  double bg_a = 0.0;
  double bg_b = 0.0;
  double window = 3e-9;
};

Prediction predict_end_to_end(const PathPlan& plan, const SourceParams& source, double v_src);

nlohmann::json to_json(const PathPlan& plan);

}  // namespace entlink::network
