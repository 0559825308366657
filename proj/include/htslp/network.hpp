// Static model of an unbalanced multiphase distribution network: buses with
// arbitrary phase subsets, cable branches with 3x3 phase admittance blocks,
// delta/wye-g transformer blocks, and the virtual-bus/LV-bus line a hybrid
// transformer adds. All electrical quantities are per-unit.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "htslp/types.hpp"

namespace htslp {

enum class Connection { wye, delta };
enum class BusRole { slack, load, dg, ht_virtual, ht_lv };
enum class BranchKind { cable, transformer_block, ht_tertiary };

struct Bus {
  std::string id;
  Connection connection = Connection::wye;
  std::vector<int> phases = {0, 1, 2};  // sorted subset of {0,1,2}
  BusRole role = BusRole::load;
  double v_base_volts = 230.94;  // phase-neutral base at this bus
};

// Delta/wye-g two-winding transformer, modelled by its nodal admittance
// block. y_t is the per-phase leakage admittance in per-unit.
struct TransformerBlock {
  Complex y_t;
  double rating_kva = 0.0;
};

struct LineBranch {
  std::string id;
  std::string from;  // transformer blocks: delta (MV) side
  std::string to;    // transformer blocks: wye-g (LV) side
  BranchKind kind = BranchKind::cable;
  Eigen::Matrix3cd phase_admittance = Eigen::Matrix3cd::Zero();  // cables / tertiary
  std::optional<TransformerBlock> transformer;                   // transformer blocks
};

// Deterministic (bus, phase) -> flat row mapping. Missing phases are absent
// indices, never zero-padded rows.
class PhaseIndex {
 public:
  PhaseIndex() = default;
  explicit PhaseIndex(const std::vector<Bus>& buses);

  int size() const { return static_cast<int>(entries_.size()); }
  int at(int bus, int phase) const { return lookup_[bus][phase]; }
  bool has(int bus, int phase) const { return lookup_[bus][phase] >= 0; }
  int bus_of(int idx) const { return entries_[idx].first; }
  int phase_of(int idx) const { return entries_[idx].second; }

 private:
  std::vector<std::pair<int, int>> entries_;
  std::vector<std::array<int, 3>> lookup_;
};

struct NetworkModel {
  std::vector<Bus> buses;
  std::vector<LineBranch> branches;
  double s_base_kva = 166.67;    // per-phase apparent power base
  double v_base_volts = 230.94;  // reporting base used by the linear model
  double v_min = 0.9;
  double v_max = 1.1;

  // Assembled on construction via make_network().
  PhaseIndex index;
  SpCMat bus_admittance;  // full system matrix over index
  int slack_bus = -1;

  int bus_index(const std::string& id) const;
  const Bus& bus(const std::string& id) const { return buses[bus_index(id)]; }
  int branch_index(const std::string& id) const;

  // Fixed slack phase voltages: positive-sequence unit phasors.
  Complex slack_voltage(int phase) const;
};

// Nodal admittance block of a delta/wye-g transformer, rows/cols ordered
// [delta a,b,c, wye a,b,c]. The delta-side and coupling blocks have zero
// row and column sums; the wye-g block is y_t times identity.
Eigen::Matrix<Complex, 6, 6> build_transformer_nodal_matrix(Complex y_t);

// Standard superposition of branch blocks over the bus-phase index.
// Throws TopologyError when the graph is disconnected or has no unique slack.
SpCMat assemble_bus_admittance(const std::vector<Bus>& buses,
                               const std::vector<LineBranch>& branches,
                               const PhaseIndex& index);

// Validates and assembles a NetworkModel. The result is immutable by
// convention and safe to share across threads.
NetworkModel make_network(std::vector<Bus> buses, std::vector<LineBranch> branches,
                          double s_base_kva, double v_base_volts, double v_min,
                          double v_max);

// Physical parameters of one hybrid transformer candidate. Everything is
// per-unit on the network base except the investment cost.
struct HTDevice {
  std::string id;
  Eigen::Vector3cd z_ht = Eigen::Vector3cd::Zero();  // tertiary self-impedance per phase
  double s_conv_max = 0.0;  // converter apparent-power rating per phase
  double r_min = -0.1;
  double r_max = 0.1;
  double md = 100.0;  // injection scaling constant used by the LP
  double c1 = 0.99;   // capability shrink factor
  double invest_cost = 0.0;
  // Filled by insert_ht:
  std::string virtual_bus;  // series-injection bus
  std::string lv_bus;       // secondary-injection bus
};

// Splits the transformer branch `location` into transformer block +
// tertiary line (impedance z_ht) through a new virtual bus, and records the
// device endpoints. Throws on duplicate insertion at the same location.
NetworkModel insert_ht(const NetworkModel& model, const std::string& location,
                       HTDevice& device);

}  // namespace htslp
