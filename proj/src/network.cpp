#include "htslp/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace htslp {

PhaseIndex::PhaseIndex(const std::vector<Bus>& buses) {
  lookup_.assign(buses.size(), {-1, -1, -1});
  for (std::size_t b = 0; b < buses.size(); ++b) {
    for (int ph : buses[b].phases) {
      lookup_[b][ph] = static_cast<int>(entries_.size());
      entries_.emplace_back(static_cast<int>(b), ph);
    }
  }
}

int NetworkModel::bus_index(const std::string& id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return static_cast<int>(i);
  throw InvalidParameterError("unknown bus id: " + id);
}

int NetworkModel::branch_index(const std::string& id) const {
  for (std::size_t i = 0; i < branches.size(); ++i)
    if (branches[i].id == id) return static_cast<int>(i);
  throw InvalidParameterError("unknown branch id: " + id);
}

Complex NetworkModel::slack_voltage(int phase) const {
  // a-b-c positive sequence: 0, -120, +120 degrees.
  const double theta = -2.0 * kPi / 3.0 * phase;
  return Complex(std::cos(theta), std::sin(theta));
}

Eigen::Matrix<Complex, 6, 6> build_transformer_nodal_matrix(Complex y_t) {
  if (!std::isfinite(y_t.real()) || !std::isfinite(y_t.imag()) || y_t == Complex(0, 0))
    throw InvalidParameterError("transformer leakage admittance must be finite and nonzero");

  Eigen::Matrix3cd y_i = Eigen::Matrix3cd::Zero();
  y_i.diagonal().setConstant(y_t);

  Eigen::Matrix3cd y_ii;
  y_ii << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  y_ii *= y_t / 3.0;

  Eigen::Matrix3cd y_iii;
  y_iii << -1, 1, 0, 0, -1, 1, 1, 0, -1;
  y_iii *= y_t / std::sqrt(3.0);

  // Reciprocity requires the transposed coupling block on the lower left;
  // with the same block in both corners a cascaded pair of these
  // transformers loses a factor sqrt(3) of no-load voltage per stage.
  Eigen::Matrix<Complex, 6, 6> node;
  node.block<3, 3>(0, 0) = y_ii;
  node.block<3, 3>(0, 3) = y_iii;
  node.block<3, 3>(3, 0) = y_iii.transpose();
  node.block<3, 3>(3, 3) = y_i;
  return node;
}

namespace {

// Union-find over bus indices for the connectivity check.
struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

int find_bus(const std::vector<Bus>& buses, const std::string& id) {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return static_cast<int>(i);
  throw TopologyError("branch references unknown bus: " + id);
}

}  // namespace

SpCMat assemble_bus_admittance(const std::vector<Bus>& buses,
                               const std::vector<LineBranch>& branches,
                               const PhaseIndex& index) {
  std::vector<Eigen::Triplet<Complex>> trips;
  DisjointSet ds(buses.size());

  for (const auto& br : branches) {
    const int bf = find_bus(buses, br.from);
    const int bt = find_bus(buses, br.to);
    if (br.kind == BranchKind::transformer_block) {
      if (!br.transformer)
        throw InvalidParameterError("transformer branch without block data: " + br.id);
      const auto node = build_transformer_nodal_matrix(br.transformer->y_t);
      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) {
          if (!index.has(bf, p) || !index.has(bf, q) || !index.has(bt, p) ||
              !index.has(bt, q))
            throw TopologyError("transformer block needs all three phases: " + br.id);
          trips.emplace_back(index.at(bf, p), index.at(bf, q), node(p, q));
          trips.emplace_back(index.at(bf, p), index.at(bt, q), node(p, q + 3));
          trips.emplace_back(index.at(bt, p), index.at(bf, q), node(p + 3, q));
          trips.emplace_back(index.at(bt, p), index.at(bt, q), node(p + 3, q + 3));
        }
      }
      ds.unite(bf, bt);
    } else {
      const Eigen::Matrix3cd& y = br.phase_admittance;
      bool any = false;
      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) {
          if (y(p, q) == Complex(0, 0)) continue;
          if (!index.has(bf, p) || !index.has(bt, q) || !index.has(bf, q) ||
              !index.has(bt, p))
            throw TopologyError("branch admittance on missing phase: " + br.id);
          any = true;
          trips.emplace_back(index.at(bf, p), index.at(bf, q), y(p, q));
          trips.emplace_back(index.at(bt, p), index.at(bt, q), y(p, q));
          trips.emplace_back(index.at(bf, p), index.at(bt, q), -y(p, q));
          trips.emplace_back(index.at(bt, p), index.at(bf, q), -y(p, q));
        }
      }
      if (any) ds.unite(bf, bt);
    }
  }

  int slack_count = 0;
  int root = -1;
  for (std::size_t b = 0; b < buses.size(); ++b)
    if (buses[b].role == BusRole::slack) {
      ++slack_count;
      root = static_cast<int>(b);
    }
  if (slack_count != 1) throw TopologyError("network must have exactly one slack bus");
  for (std::size_t b = 0; b < buses.size(); ++b)
    if (ds.find(static_cast<int>(b)) != ds.find(root))
      throw TopologyError("network is disconnected at bus " + buses[b].id);

  SpCMat y_bus(index.size(), index.size());
  y_bus.setFromTriplets(trips.begin(), trips.end());
  return y_bus;
}

NetworkModel make_network(std::vector<Bus> buses, std::vector<LineBranch> branches,
                          double s_base_kva, double v_base_volts, double v_min,
                          double v_max) {
  if (!(v_min < 1.0 && 1.0 < v_max))
    throw InvalidParameterError("voltage limits must bracket 1.0 pu");
  std::set<std::string> ids;
  for (const auto& b : buses) {
    if (b.phases.empty()) throw InvalidParameterError("bus without phases: " + b.id);
    if (!ids.insert(b.id).second) throw InvalidParameterError("duplicate bus id: " + b.id);
  }

  NetworkModel m;
  m.buses = std::move(buses);
  m.branches = std::move(branches);
  m.s_base_kva = s_base_kva;
  m.v_base_volts = v_base_volts;
  m.v_min = v_min;
  m.v_max = v_max;
  m.index = PhaseIndex(m.buses);
  m.bus_admittance = assemble_bus_admittance(m.buses, m.branches, m.index);
  for (std::size_t b = 0; b < m.buses.size(); ++b)
    if (m.buses[b].role == BusRole::slack) m.slack_bus = static_cast<int>(b);
  return m;
}

NetworkModel insert_ht(const NetworkModel& model, const std::string& location,
                       HTDevice& device) {
  const int bi = model.branch_index(location);
  const LineBranch& tf = model.branches[bi];
  if (tf.kind != BranchKind::transformer_block)
    throw InvalidParameterError("HT location must be a transformer branch: " + location);

  const std::string virtual_id = device.id + "_V";
  for (const auto& b : model.buses)
    if (b.id == virtual_id)
      throw InvalidParameterError("HT already inserted at " + location);

  std::vector<Bus> buses = model.buses;
  const Bus& lv = model.bus(tf.to);
  Bus vbus;
  vbus.id = virtual_id;
  vbus.connection = Connection::wye;
  vbus.phases = lv.phases;
  vbus.role = BusRole::ht_virtual;
  vbus.v_base_volts = lv.v_base_volts;
  buses.push_back(vbus);

  std::vector<LineBranch> branches = model.branches;
  branches[bi].to = virtual_id;

  LineBranch tertiary;
  tertiary.id = device.id + "_tert";
  tertiary.from = virtual_id;
  tertiary.to = tf.to;
  tertiary.kind = BranchKind::ht_tertiary;
  for (int p : lv.phases) {
    if (device.z_ht(p) == Complex(0, 0))
      throw InvalidParameterError("HT tertiary impedance must be nonzero");
    tertiary.phase_admittance(p, p) = 1.0 / device.z_ht(p);
  }
  branches.push_back(tertiary);

  // Mark the secondary bus role unless it already hosts something stronger.
  for (auto& b : buses)
    if (b.id == tf.to && b.role == BusRole::load) b.role = BusRole::ht_lv;

  device.virtual_bus = virtual_id;
  device.lv_bus = tf.to;

  return make_network(std::move(buses), std::move(branches), model.s_base_kva,
                      model.v_base_volts, model.v_min, model.v_max);
}

}  // namespace htslp
