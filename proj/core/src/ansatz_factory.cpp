#include "renyivmc/ansatz_factory.hpp"

#include <stdexcept>

#include "renyivmc/epdo.hpp"
#include "renyivmc/mpdo.hpp"
#include "renyivmc/rbm.hpp"
#include "renyivmc/sbdo.hpp"

namespace rvmc {

namespace {

using nlohmann::json;

template <typename T>
T require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw std::invalid_argument("ansatz spec missing key: " + key);
  return j.at(key).get<T>();
}

}  // namespace

std::unique_ptr<DensityAnsatz> make_ansatz(const json& spec) {
  const auto kind = require<std::string>(spec, "kind");
  const int sites = require<int>(spec, "sites");
  if (kind == "mpdo") {
    return std::make_unique<MpdoAnsatz>(sites, require<int>(spec, "bond_dim"),
                                        require<int>(spec, "kraus_dim"));
  }
  if (kind == "epdo") {
    return std::make_unique<EpdoAnsatz>(
        sites, require<std::vector<std::vector<int>>>(spec, "plaquettes"),
        require<int>(spec, "kraus_dim"));
  }
  if (kind == "sbdo") {
    return std::make_unique<SbdoAnsatz>(sites,
                                        require<std::vector<std::vector<int>>>(spec, "strings"),
                                        require<int>(spec, "bond_dim"),
                                        require<int>(spec, "kraus_dim"));
  }
  if (kind == "rbm") {
    return std::make_unique<RbmAnsatz>(sites, require<double>(spec, "hidden_density"),
                                       require<double>(spec, "ancilla_density"));
  }
  throw std::invalid_argument("unknown ansatz kind: " + kind);
}

json ansatz_to_json(const DensityAnsatz& ansatz) {
  json j;
  j["kind"] = ansatz.kind();
  j["sites"] = ansatz.num_sites();
  if (const auto* m = dynamic_cast<const MpdoAnsatz*>(&ansatz)) {
    j["bond_dim"] = m->bond_dim();
    j["kraus_dim"] = m->kraus_dim();
  } else if (const auto* e = dynamic_cast<const EpdoAnsatz*>(&ansatz)) {
    j["plaquettes"] = e->plaquettes();
    j["kraus_dim"] = e->kraus_dim();
  } else if (const auto* s = dynamic_cast<const SbdoAnsatz*>(&ansatz)) {
    j["strings"] = s->strings();
    j["bond_dim"] = s->bond_dim();
    j["kraus_dim"] = s->kraus_dim();
  } else if (const auto* r = dynamic_cast<const RbmAnsatz*>(&ansatz)) {
    j["hidden_density"] = r->hidden_density();
    j["ancilla_density"] = r->ancilla_density();
  } else {
    throw std::invalid_argument("cannot serialize ansatz kind: " + ansatz.kind());
  }
  return j;
}

}  // namespace rvmc
