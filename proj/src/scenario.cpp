#include "htslp/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace htslp {

using nlohmann::json;

namespace {

// Strict field access with a path carried into SchemaError.
const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'", where);
  return *it;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return it->get<T>();
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }

  ScenarioConfig c;
  try {
    c.schema_version = need(j, "schema_version", "$").get<int>();
    if (c.schema_version != 1) throw SchemaError("unsupported schema_version", "$");
    c.name = get_or<std::string>(j, "name", "scenario");

    const json& base = need(j, "base", "$");
    c.s_base_kva = need(base, "s_base_kva", "base").get<double>();
    c.v_base_volts = need(base, "v_base_volts", "base").get<double>();
    c.v_min = need(base, "v_min", "base").get<double>();
    c.v_max = need(base, "v_max", "base").get<double>();

    for (const auto& bj : need(j, "buses", "$")) {
      ScenarioBus b;
      b.id = need(bj, "id", "buses").get<std::string>();
      b.phases = get_or<std::vector<int>>(bj, "phases", {0, 1, 2});
      b.connection = get_or<std::string>(bj, "connection", "wye");
      b.role = get_or<std::string>(bj, "role", "load");
      b.v_base_volts = get_or<double>(bj, "v_base_volts", c.v_base_volts);
      c.buses.push_back(std::move(b));
    }
    for (const auto& cj : get_or<json>(j, "cables", json::array())) {
      ScenarioCable cb;
      cb.id = need(cj, "id", "cables").get<std::string>();
      cb.from = need(cj, "from", cb.id).get<std::string>();
      cb.to = need(cj, "to", cb.id).get<std::string>();
      cb.r_ohm = need(cj, "r_ohm", cb.id).get<std::array<double, 3>>();
      cb.x_ohm = need(cj, "x_ohm", cb.id).get<std::array<double, 3>>();
      cb.mutual_r_ohm = get_or<double>(cj, "mutual_r_ohm", 0.0);
      cb.mutual_x_ohm = get_or<double>(cj, "mutual_x_ohm", 0.0);
      cb.note = get_or<std::string>(cj, "_note", "");
      c.cables.push_back(std::move(cb));
    }
    for (const auto& tj : get_or<json>(j, "transformers", json::array())) {
      ScenarioTransformer t;
      t.id = need(tj, "id", "transformers").get<std::string>();
      t.from = need(tj, "from", t.id).get<std::string>();
      t.to = need(tj, "to", t.id).get<std::string>();
      t.r_ohm = need(tj, "r_ohm", t.id).get<double>();
      t.x_ohm = need(tj, "x_ohm", t.id).get<double>();
      t.rating_kva = need(tj, "rating_kva", t.id).get<double>();
      t.note = get_or<std::string>(tj, "_note", "");
      c.transformers.push_back(std::move(t));
    }
    for (const auto& lj : get_or<json>(j, "loads", json::array())) {
      ScenarioLoad l;
      l.bus = need(lj, "bus", "loads").get<std::string>();
      l.s_kva = need(lj, "s_kva", l.bus).get<double>();
      l.power_factor = need(lj, "power_factor", l.bus).get<double>();
      l.connection = get_or<std::string>(lj, "connection", "wye");
      c.loads.push_back(std::move(l));
    }
    for (const auto& dj : get_or<json>(j, "dgs", json::array())) {
      ScenarioDG d;
      d.id = need(dj, "id", "dgs").get<std::string>();
      d.bus = need(dj, "bus", d.id).get<std::string>();
      d.p_max_kw = need(dj, "p_max_kw", d.id).get<double>();
      d.power_factor = get_or<double>(dj, "power_factor", 1.0);
      c.dgs.push_back(std::move(d));
    }
    for (const auto& hj : get_or<json>(j, "ht_candidates", json::array())) {
      ScenarioHT h;
      h.id = need(hj, "id", "ht_candidates").get<std::string>();
      h.transformer = need(hj, "transformer", h.id).get<std::string>();
      h.r_ht_ohm = need(hj, "r_ht_ohm", h.id).get<double>();
      h.x_ht_ohm = need(hj, "x_ht_ohm", h.id).get<double>();
      h.s_conv_kva = need(hj, "s_conv_kva", h.id).get<double>();
      h.r_min = get_or<double>(hj, "r_min", -0.1);
      h.r_max = get_or<double>(hj, "r_max", 0.1);
      h.cost_full = need(hj, "cost_full", h.id).get<double>();
      h.cost_offset = need(hj, "cost_offset", h.id).get<double>();
      c.hts.push_back(std::move(h));
    }
    for (const auto& wj : get_or<json>(j, "weights_table", json::array())) {
      WeightRow w;
      w.price = need(wj, "price", "weights_table").get<double>();
      w.cost_mode = need(wj, "cost_mode", "weights_table").get<std::string>();
      w.w1 = need(wj, "w1", "weights_table").get<double>();
      w.w2 = need(wj, "w2", "weights_table").get<double>();
      w.w3 = need(wj, "w3", "weights_table").get<double>();
      c.weights.push_back(std::move(w));
    }

    const json& ej = need(j, "economics", "$");
    c.economics.export_price_per_kwh = need(ej, "export_price_per_kwh", "economics").get<double>();
    c.economics.discount_rate = need(ej, "discount_rate", "economics").get<double>();
    c.economics.ht_lifespan_years = need(ej, "ht_lifespan_years", "economics").get<int>();
    c.economics.cost_mode = get_or<std::string>(ej, "cost_mode", "full");
    if (ej.contains("c_ref") && !ej["c_ref"].is_null())
      c.economics.c_ref = ej["c_ref"].get<double>();

    const json& sj = need(j, "slp", "$");
    c.slp.c1 = need(sj, "c1", "slp").get<double>();
    c.slp.c2 = need(sj, "c2", "slp").get<double>();
    c.slp.md_ht = need(sj, "md_ht", "slp").get<double>();
    c.slp.stp_v = need(sj, "stp_v", "slp").get<double>();
    c.slp.stp_gamma_rad = need(sj, "stp_gamma_rad", "slp").get<double>();
    c.slp.stp_dg_frac = need(sj, "stp_dg_frac", "slp").get<double>();
    c.slp.stp_dg_min_frac = need(sj, "stp_dg_min_frac", "slp").get<double>();
    c.slp.vpq_tol_pct = need(sj, "vpq_tol_pct", "slp").get<double>();
    c.slp.obj_tol_pct = need(sj, "obj_tol_pct", "slp").get<double>();
    c.slp.k_max = need(sj, "k_max", "slp").get<int>();
    c.slp.rounding_decimals = need(sj, "rounding_decimals", "slp").get<int>();
    c.slp.dg_limit_mode = get_or<std::string>(sj, "dg_limit_mode", "per_phase");
    c.slp.literal_penalty_signs = get_or<bool>(sj, "literal_penalty_signs", false);

    const json& yj = need(j, "year", "$");
    c.year.periods_per_day = need(yj, "periods_per_day", "year").get<int>();
    c.year.period_hours = need(yj, "period_hours", "year").get<double>();
    for (const auto& dj : need(yj, "day_types", "year")) {
      DayType d;
      d.name = need(dj, "name", "day_types").get<std::string>();
      d.weight_days = need(dj, "weight_days", d.name).get<double>();
      d.modifiers = need(dj, "modifiers", d.name).get<std::vector<double>>();
      if (static_cast<int>(d.modifiers.size()) != c.year.periods_per_day)
        throw SchemaError("modifier count != periods_per_day", d.name);
      for (double m : d.modifiers)
        if (!(m > 0.0 && m <= 1.0)) throw SchemaError("modifier outside (0, 1]", d.name);
      c.year.day_types.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("scenario field error: ") + e.what());
  }
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["base"] = {{"s_base_kva", c.s_base_kva},
               {"v_base_volts", c.v_base_volts},
               {"v_min", c.v_min},
               {"v_max", c.v_max}};
  j["buses"] = json::array();
  for (const auto& b : c.buses)
    j["buses"].push_back({{"id", b.id},
                          {"phases", b.phases},
                          {"connection", b.connection},
                          {"role", b.role},
                          {"v_base_volts", b.v_base_volts}});
  j["cables"] = json::array();
  for (const auto& cb : c.cables) {
    json e = {{"id", cb.id},   {"from", cb.from},
              {"to", cb.to},   {"r_ohm", cb.r_ohm},
              {"x_ohm", cb.x_ohm}, {"mutual_r_ohm", cb.mutual_r_ohm},
              {"mutual_x_ohm", cb.mutual_x_ohm}};
    if (!cb.note.empty()) e["_note"] = cb.note;
    j["cables"].push_back(std::move(e));
  }
  j["transformers"] = json::array();
  for (const auto& t : c.transformers) {
    json e = {{"id", t.id},   {"from", t.from},       {"to", t.to},
              {"r_ohm", t.r_ohm}, {"x_ohm", t.x_ohm}, {"rating_kva", t.rating_kva}};
    if (!t.note.empty()) e["_note"] = t.note;
    j["transformers"].push_back(std::move(e));
  }
  j["loads"] = json::array();
  for (const auto& l : c.loads)
    j["loads"].push_back({{"bus", l.bus},
                          {"s_kva", l.s_kva},
                          {"power_factor", l.power_factor},
                          {"connection", l.connection}});
  j["dgs"] = json::array();
  for (const auto& d : c.dgs)
    j["dgs"].push_back({{"id", d.id},
                        {"bus", d.bus},
                        {"p_max_kw", d.p_max_kw},
                        {"power_factor", d.power_factor}});
  j["ht_candidates"] = json::array();
  for (const auto& h : c.hts)
    j["ht_candidates"].push_back({{"id", h.id},
                                  {"transformer", h.transformer},
                                  {"r_ht_ohm", h.r_ht_ohm},
                                  {"x_ht_ohm", h.x_ht_ohm},
                                  {"s_conv_kva", h.s_conv_kva},
                                  {"r_min", h.r_min},
                                  {"r_max", h.r_max},
                                  {"cost_full", h.cost_full},
                                  {"cost_offset", h.cost_offset}});
  j["weights_table"] = json::array();
  for (const auto& w : c.weights)
    j["weights_table"].push_back({{"price", w.price},
                                  {"cost_mode", w.cost_mode},
                                  {"w1", w.w1},
                                  {"w2", w.w2},
                                  {"w3", w.w3}});
  j["economics"] = {{"export_price_per_kwh", c.economics.export_price_per_kwh},
                    {"discount_rate", c.economics.discount_rate},
                    {"ht_lifespan_years", c.economics.ht_lifespan_years},
                    {"cost_mode", c.economics.cost_mode}};
  if (c.economics.c_ref)
    j["economics"]["c_ref"] = *c.economics.c_ref;
  else
    j["economics"]["c_ref"] = nullptr;
  j["slp"] = {{"c1", c.slp.c1},
              {"c2", c.slp.c2},
              {"md_ht", c.slp.md_ht},
              {"stp_v", c.slp.stp_v},
              {"stp_gamma_rad", c.slp.stp_gamma_rad},
              {"stp_dg_frac", c.slp.stp_dg_frac},
              {"stp_dg_min_frac", c.slp.stp_dg_min_frac},
              {"vpq_tol_pct", c.slp.vpq_tol_pct},
              {"obj_tol_pct", c.slp.obj_tol_pct},
              {"k_max", c.slp.k_max},
              {"rounding_decimals", c.slp.rounding_decimals},
              {"dg_limit_mode", c.slp.dg_limit_mode},
              {"literal_penalty_signs", c.slp.literal_penalty_signs}};
  j["year"] = {{"periods_per_day", c.year.periods_per_day},
               {"period_hours", c.year.period_hours},
               {"day_types", json::array()}};
  for (const auto& d : c.year.day_types)
    j["year"]["day_types"].push_back(
        {{"name", d.name}, {"weight_days", d.weight_days}, {"modifiers", d.modifiers}});
  return j.dump(1);
}

std::unique_ptr<LoweredScenario> lower_scenario(const ScenarioConfig& config,
                                                const ScenarioOverrides& overrides) {
  auto out = std::make_unique<LoweredScenario>();
  out->config = config;
  ScenarioConfig& c = out->config;

  if (overrides.price) c.economics.export_price_per_kwh = *overrides.price;
  if (overrides.discount) c.economics.discount_rate = *overrides.discount;
  if (overrides.cost_mode) c.economics.cost_mode = *overrides.cost_mode;
  if (c.economics.cost_mode != "full" && c.economics.cost_mode != "offset")
    throw SchemaError("cost_mode must be 'full' or 'offset'");
  if (overrides.periods) {
    // N identical synthetic periods tiling the first day type hour by hour;
    // period_hours rescaled so the year still spans 8760 hours.
    if (c.year.day_types.empty()) throw SchemaError("year model has no day types");
    const int n = *overrides.periods;
    if (n < 1) throw SchemaError("periods override must be positive");
    DayType tiled;
    tiled.name = "tiled_" + c.year.day_types.front().name;
    tiled.weight_days = 365.0;
    for (int i = 0; i < n; ++i)
      tiled.modifiers.push_back(
          c.year.day_types.front().modifiers[i % c.year.periods_per_day]);
    c.year.day_types = {std::move(tiled)};
    c.year.periods_per_day = n;
    c.year.period_hours = 24.0 / n;
  }

  // Network in per-unit.
  std::vector<Bus> buses;
  for (const auto& sb : c.buses) {
    Bus b;
    b.id = sb.id;
    b.phases = sb.phases;
    b.connection = sb.connection == "delta" ? Connection::delta : Connection::wye;
    if (sb.role == "slack")
      b.role = BusRole::slack;
    else if (sb.role == "dg")
      b.role = BusRole::dg;
    else
      b.role = BusRole::load;
    b.v_base_volts = sb.v_base_volts;
    buses.push_back(std::move(b));
  }
  const auto bus_of = [&](const std::string& id) -> const Bus& {
    for (const auto& b : buses)
      if (b.id == id) return b;
    throw SchemaError("unknown bus referenced: " + id);
  };
  const auto z_base = [&](const Bus& b) {
    return b.v_base_volts * b.v_base_volts / (c.s_base_kva * 1000.0);
  };

  std::vector<LineBranch> branches;
  for (const auto& cb : c.cables) {
    const Bus& from = bus_of(cb.from);
    const Bus& to = bus_of(cb.to);
    if (std::abs(z_base(from) - z_base(to)) > 1e-9 * z_base(from))
      throw SchemaError("cable spans different voltage bases: " + cb.id);
    LineBranch br;
    br.id = cb.id;
    br.from = cb.from;
    br.to = cb.to;
    br.kind = BranchKind::cable;
    // Shared phases only; impedance block inverted to admittance.
    std::vector<int> shared;
    for (int p : from.phases)
      if (std::find(to.phases.begin(), to.phases.end(), p) != to.phases.end())
        shared.push_back(p);
    const int np = static_cast<int>(shared.size());
    CMat z = CMat::Zero(np, np);
    for (int a = 0; a < np; ++a) {
      z(a, a) = Complex(cb.r_ohm[shared[a]], cb.x_ohm[shared[a]]) / z_base(from);
      for (int b2 = 0; b2 < np; ++b2)
        if (a != b2)
          z(a, b2) = Complex(cb.mutual_r_ohm, cb.mutual_x_ohm) / z_base(from);
    }
    const CMat y = z.inverse();
    for (int a = 0; a < np; ++a)
      for (int b2 = 0; b2 < np; ++b2) br.phase_admittance(shared[a], shared[b2]) = y(a, b2);
    branches.push_back(std::move(br));
  }
  for (const auto& t : c.transformers) {
    const Bus& to = bus_of(t.to);
    LineBranch br;
    br.id = t.id;
    br.from = t.from;
    br.to = t.to;
    br.kind = BranchKind::transformer_block;
    const Complex z(t.r_ohm / z_base(to), t.x_ohm / z_base(to));
    br.transformer = TransformerBlock{1.0 / z, t.rating_kva};
    branches.push_back(std::move(br));
  }

  NetworkModel model = make_network(std::move(buses), std::move(branches), c.s_base_kva,
                                    c.v_base_volts, c.v_min, c.v_max);

  // Candidate devices, inserted in file order.
  std::vector<HTDevice> devices;
  for (const auto& h : c.hts) {
    HTDevice dev;
    dev.id = h.id;
    const auto& tf = model.branches[model.branch_index(h.transformer)];
    const double zb = z_base(model.bus(tf.to));
    dev.z_ht.setConstant(Complex(h.r_ht_ohm / zb, h.x_ht_ohm / zb));
    dev.s_conv_max = h.s_conv_kva / 3.0 / c.s_base_kva;
    dev.r_min = h.r_min;
    dev.r_max = h.r_max;
    dev.md = c.slp.md_ht;
    dev.c1 = c.slp.c1;
    dev.invest_cost = c.economics.cost_mode == "offset" ? h.cost_offset : h.cost_full;
    model = insert_ht(model, h.transformer, dev);
    devices.push_back(std::move(dev));
  }
  out->model = std::move(model);

  ScenarioRun& run = out->run;
  run.model = &out->model;
  run.devices = devices;
  run.literal_penalty_signs = c.slp.literal_penalty_signs;

  const bool per_phase_cap = c.slp.dg_limit_mode == "per_phase";
  if (!per_phase_cap && c.slp.dg_limit_mode != "three_phase_total")
    throw SchemaError("dg_limit_mode must be per_phase or three_phase_total");
  for (const auto& d : c.dgs) {
    DGSpec spec;
    spec.id = d.id;
    spec.bus = out->model.bus_index(d.bus);
    spec.p_max = d.p_max_kw / c.s_base_kva / (per_phase_cap ? 1.0 : 3.0);
    spec.power_factor = d.power_factor;
    spec.is_delta = out->model.buses[spec.bus].connection == Connection::delta;
    if (out->model.buses[spec.bus].phases.size() != 3)
      throw SchemaError("DG bus must have three phases: " + d.bus);
    run.dgs.push_back(std::move(spec));
  }

  // Weight row: exact (price, cost_mode) match, else nearest price in mode.
  run.weights.c2 = c.slp.c2;
  {
    const WeightRow* pick = nullptr;
    double best = kInf;
    for (const auto& w : c.weights) {
      if (w.cost_mode != c.economics.cost_mode) continue;
      const double d = std::abs(w.price - c.economics.export_price_per_kwh);
      if (d < best) {
        best = d;
        pick = &w;
      }
    }
    if (!pick && !c.weights.empty())
      throw SchemaError("no weight row for cost mode " + c.economics.cost_mode);
    if (pick) {
      run.weights.w1 = pick->w1;
      run.weights.w2 = pick->w2;
      run.weights.w3 = pick->w3;
    }
  }

  run.trust.stp_v = c.slp.stp_v;
  run.trust.stp_gamma = c.slp.stp_gamma_rad;
  run.trust.stp_dg = Vec::Zero(static_cast<int>(run.dgs.size()));
  run.trust.stp_dg_min = Vec::Zero(static_cast<int>(run.dgs.size()));
  for (std::size_t d = 0; d < run.dgs.size(); ++d) {
    run.trust.stp_dg[d] = c.slp.stp_dg_frac * run.dgs[d].p_max;
    run.trust.stp_dg_min[d] = c.slp.stp_dg_min_frac * run.dgs[d].p_max;
  }

  run.econ.c_e = c.economics.export_price_per_kwh;
  run.econ.coc = c.economics.discount_rate;
  run.econ.ht_years = c.economics.ht_lifespan_years;
  run.econ.c_ref = c.economics.c_ref.value_or(0.0);
  for (const auto& dev : run.devices) run.econ.invest_costs.push_back(dev.invest_cost);

  run.year = YearModel{c.year.day_types, c.year.periods_per_day, c.year.period_hours};

  // Per-period uncontrollable loads.
  const int n = out->model.index.size();
  for (int t = 0; t < run.year.total_periods(); ++t) {
    InjectionSet inj = InjectionSet::zeros(n);
    const double mod = run.year.modifier(t);
    for (const auto& l : c.loads) {
      const int bus = out->model.bus_index(l.bus);
      const auto& phases = out->model.buses[bus].phases;
      const double s_phase = l.s_kva * mod / static_cast<double>(phases.size()) / c.s_base_kva;
      const double q_ratio = std::sqrt(std::max(0.0, 1.0 - l.power_factor * l.power_factor)) /
                             l.power_factor;
      const Complex s(s_phase, s_phase * q_ratio);
      for (int p : phases) {
        if (l.connection == "delta")
          inj.x_delta[out->model.index.at(bus, p)] += s;
        else
          inj.x_wye[out->model.index.at(bus, p)] += s;
      }
    }
    run.period_loads.push_back(std::move(inj));
  }

  SlpOptions& so = out->slp_options;
  so.k_max = c.slp.k_max;
  so.obj_tol_pct = c.slp.obj_tol_pct;
  so.vpq_tol_pct = c.slp.vpq_tol_pct;
  so.rounding_decimals = c.slp.rounding_decimals;
  so.literal_penalty_signs = c.slp.literal_penalty_signs;

  return out;
}

}  // namespace htslp
