#pragma once

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvb/forest.hpp"
#include "nvb/initializers.hpp"

namespace nvb {

/// Schema violation; the message starts with the JSON pointer of the offending value.
class MeshIOError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class S>
struct MeshFile {
  Mesh<S> mesh{1};
  std::optional<PointMarking<S>> marking;
  std::optional<VertexPartition> partition;
};

namespace io {

using json = nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw MeshIOError(path + ": " + what);
}

inline json dyadic_to_json(const Dyadic& d) { return json::array({d.numerator().get_str(), std::to_string(d.exponent())}); }

inline Dyadic dyadic_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string())
    fail(path, "expected a [\"numerator\",\"exponent\"] pair of strings");
  mpz_class num;
  if (num.set_str(j[0].get<std::string>(), 10) != 0) fail(path + "/0", "not an integer");
  const std::string es = j[1].get<std::string>();
  if (es.empty() || es.find_first_not_of("0123456789") != std::string::npos) fail(path + "/1", "not a non-negative integer");
  const std::uint64_t exp = std::stoull(es);
  try {
    return Dyadic::from_canonical(num, exp);
  } catch (const std::invalid_argument&) {
    fail(path, "non-canonical dyadic (numerator must be odd, or zero with exponent 0)");
  }
}

inline Rational rational_from_json(const json& j, const std::string& path) {
  if (j.is_array()) return to_rational(dyadic_from_json(j, path));
  if (!j.is_string()) fail(path, "expected a rational string");
  Rational q;
  if (q.set_str(j.get<std::string>(), 10) != 0 || q.get_den() == 0) fail(path, "not a rational number");
  const std::string before = j.get<std::string>();
  q.canonicalize();
  if (q.get_str() != before) fail(path, "non-canonical rational (expected " + q.get_str() + ")");
  return q;
}

template <class S>
S scalar_from_json(const json& j, const std::string& path, bool rational_file);

template <>
inline Dyadic scalar_from_json<Dyadic>(const json& j, const std::string& path, bool rational_file) {
  if (!rational_file) return dyadic_from_json(j, path);
  const Rational q = rational_from_json(j, path);
  const mpz_class den = q.get_den();
  if (mpz_popcount(den.get_mpz_t()) != 1) fail(path, "coordinate is not dyadic");
  return Dyadic(q.get_num(), mpz_scan1(den.get_mpz_t(), 0));
}

template <>
inline Rational scalar_from_json<Rational>(const json& j, const std::string& path, bool rational_file) {
  return rational_file ? rational_from_json(j, path) : to_rational(dyadic_from_json(j, path));
}

inline json scalar_to_json(const Dyadic& d) { return dyadic_to_json(d); }
inline json scalar_to_json(const Rational& q) { return q.get_str(); }

template <class S>
Point<S> point_from_json(const json& j, const std::string& path, int dim, bool rational_file) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) fail(path, "expected " + std::to_string(dim) + " coordinates");
  Point<S> p(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a)
    p[static_cast<std::size_t>(a)] = scalar_from_json<S>(j[static_cast<std::size_t>(a)], path + "/" + std::to_string(a), rational_file);
  return p;
}

template <class S>
json point_to_json(const Point<S>& p) {
  json a = json::array();
  for (const auto& c : p.x) a.push_back(scalar_to_json(c));
  return a;
}

inline int int_field(const json& j, const char* key, const std::string& path, int lo, int dflt, bool required) {
  if (!j.contains(key)) {
    if (required) fail(path, std::string("missing \"") + key + "\"");
    return dflt;
  }
  const json& v = j[key];
  if (!v.is_number_integer()) fail(path + "/" + key, "expected an integer");
  const long x = v.get<long>();
  if (x < lo || x > 1000000) fail(path + "/" + key, "out of range");
  return static_cast<int>(x);
}

inline std::vector<int> id_list(const json& j, const std::string& path, int vertex_count) {
  if (!j.is_array()) fail(path, "expected an array of vertex ids");
  std::vector<int> r;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) fail(path + "/" + std::to_string(i), "expected a vertex id");
    const long v = j[i].get<long>();
    if (v < 0 || v >= vertex_count) fail(path + "/" + std::to_string(i), "vertex id out of range");
    r.push_back(static_cast<int>(v));
  }
  return r;
}

}  // namespace io

template <class S>
MeshFile<S> mesh_from_json(const nlohmann::json& j) {
  using io::fail;
  if (!j.is_object()) fail("", "expected an object");
  const int dim = io::int_field(j, "dim", "", 1, 0, true);
  bool rational_file = false;
  if (j.contains("scalar")) {
    if (j["scalar"] == "rational") rational_file = true;
    else if (j["scalar"] != "dyadic") fail("/scalar", "expected \"dyadic\" or \"rational\"");
  }
  MeshFile<S> out;
  out.mesh = Mesh<S>(dim);
  Mesh<S>& m = out.mesh;
  if (!j.contains("vertices") || !j["vertices"].is_array()) fail("/vertices", "expected an array");
  const auto& vs = j["vertices"];
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const std::string path = "/vertices/" + std::to_string(i);
    const Point<S> p = io::point_from_json<S>(vs[i], path, dim, rational_file);
    if (m.pool().find(p)) fail(path, "duplicate vertex");
    m.add_vertex(p);
  }
  if (!j.contains("cells") || !j["cells"].is_array()) fail("/cells", "expected an array");
  const auto& cs = j["cells"];
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string path = "/cells/" + std::to_string(i);
    const auto& c = cs[i];
    if (!c.is_object()) fail(path, "expected an object");
    TArray t;
    if (c.contains("vertices") && !c.contains("horizontal")) {
      t.v = io::id_list(c["vertices"], path + "/vertices", m.vertex_count());
      t.type = dim;
    } else {
      if (!c.contains("horizontal")) fail(path, "missing \"horizontal\"");
      const auto h = io::id_list(c["horizontal"], path + "/horizontal", m.vertex_count());
      const auto v = c.contains("vertical") ? io::id_list(c["vertical"], path + "/vertical", m.vertex_count()) : std::vector<int>{};
      if (h.empty()) fail(path + "/horizontal", "empty horizontal part");
      t.v = h;
      t.v.insert(t.v.end(), v.begin(), v.end());
      t.type = static_cast<int>(h.size()) - 1;
    }
    if (static_cast<int>(t.v.size()) != dim + 1) fail(path, "expected " + std::to_string(dim + 1) + " vertices");
    std::vector<int> sorted = t.v;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail(path, "repeated vertex");
    t.hyper = io::int_field(c, "hyperlevel", path, 0, 0, false);
    t.level = io::int_field(c, "level", path, 0, 0, false);
    std::vector<Point<S>> pts;
    for (int id : t.v) pts.push_back(m.vertex(id));
    if (simplex_volume(pts) == 0)
      fail(path, "degenerate cell");
    m.add_root(std::move(t));
  }
  if (j.contains("forest")) {
    const auto& f = j["forest"];
    if (!f.is_array()) fail("/forest", "expected an array of node keys");
    std::set<NodeKey> keys;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::string path = "/forest/" + std::to_string(i);
      if (!f[i].is_string()) fail(path, "expected \"root:path\"");
      const std::string s = f[i].get<std::string>();
      const auto colon = s.find(':');
      if (colon == std::string::npos || colon == 0 || s.find_first_not_of("0123456789") != colon ||
          s.find_first_not_of("01", colon + 1) != std::string::npos)
        fail(path, "expected \"root:path\" with a binary path");
      const int root = std::stoi(s.substr(0, colon));
      if (root >= m.root_count()) fail(path, "root out of range");
      keys.insert(NodeKey{root, s.substr(colon + 1)});
    }
    try {
      m = from_keys(m, keys);
    } catch (const std::exception& e) {
      fail("/forest", e.what());
    }
  }
  if (j.contains("marking") && !j["marking"].is_null()) {
    const auto& mk = j["marking"];
    if (!mk.is_object()) fail("/marking", "expected an object keyed by type");
    PointMarking<S> pm;
    for (const auto& [key, pts] : mk.items()) {
      const std::string path = "/marking/" + key;
      if (key.empty() || key.find_first_not_of("0123456789") != std::string::npos) fail(path, "key must be a type");
      if (!pts.is_array()) fail(path, "expected an array of points");
      auto& list = pm.points_by_type[std::stoi(key)];
      for (std::size_t i = 0; i < pts.size(); ++i)
        list.push_back(io::point_from_json<S>(pts[i], path + "/" + std::to_string(i), dim, rational_file));
    }
    out.marking = std::move(pm);
  }
  if (j.contains("partition") && !j["partition"].is_null()) {
    const auto& p = j["partition"];
    if (!p.is_object()) fail("/partition", "expected an object");
    VertexPartition vp;
    if (p.contains("v0")) vp.v0 = io::id_list(p["v0"], "/partition/v0", m.vertex_count());
    if (p.contains("v1")) vp.v1 = io::id_list(p["v1"], "/partition/v1", m.vertex_count());
    for (const char* key : {"rank0", "rank1"}) {
      if (!p.contains(key)) continue;
      auto& dst = std::string(key) == "rank0" ? vp.rank0 : vp.rank1;
      const auto& arr = p[key];
      if (!arr.is_array() || static_cast<int>(arr.size()) != m.vertex_count())
        fail(std::string("/partition/") + key, "expected one rank per vertex");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number_integer()) fail(std::string("/partition/") + key + "/" + std::to_string(i), "expected an integer");
        dst.push_back(arr[i].get<int>());
      }
    }
    out.partition = std::move(vp);
  }
  return out;
}

/// Mesh JSON. With `flatten`, the leaves are written as cells (with their
/// levels); otherwise the roots are written and the forest is kept as the
/// list of bisected node keys.
template <class S>
nlohmann::json mesh_to_json(const Mesh<S>& m, bool flatten = false, const std::type_identity_t<PointMarking<S>>* marking = nullptr,
                            const VertexPartition* partition = nullptr) {
  nlohmann::json j;
  j["dim"] = m.dim();
  if constexpr (std::is_same_v<S, Rational>) j["scalar"] = "rational";
  std::vector<int> ids;
  if (flatten) ids = m.leaves();
  else
    for (int r = 0; r < m.root_count(); ++r) ids.push_back(r);
  if (flatten) std::sort(ids.begin(), ids.end());
  // Only vertices used by the written cells, renumbered in order of first use.
  std::vector<int> remap(static_cast<std::size_t>(m.vertex_count()), -1);
  std::vector<int> order;
  if (flatten) {
    for (int id : ids)
      for (int v : m.cell(id).v)
        if (remap[static_cast<std::size_t>(v)] < 0) {
          remap[static_cast<std::size_t>(v)] = static_cast<int>(order.size());
          order.push_back(v);
        }
  } else {
    for (int v = 0; v < m.vertex_count(); ++v) {
      remap[static_cast<std::size_t>(v)] = v;
      order.push_back(v);
    }
  }
  j["vertices"] = nlohmann::json::array();
  for (int v : order) j["vertices"].push_back(io::point_to_json(m.vertex(v)));
  j["cells"] = nlohmann::json::array();
  for (int id : ids) {
    const TArray& t = m.cell(id);
    nlohmann::json c;
    c["horizontal"] = nlohmann::json::array();
    c["vertical"] = nlohmann::json::array();
    for (int v : t.horizontal()) c["horizontal"].push_back(remap[static_cast<std::size_t>(v)]);
    for (int v : t.vertical()) c["vertical"].push_back(remap[static_cast<std::size_t>(v)]);
    c["hyperlevel"] = t.hyper;
    if (t.level != 0) c["level"] = t.level;
    j["cells"].push_back(c);
  }
  if (!flatten && m.node_count() > m.root_count()) {
    j["forest"] = nlohmann::json::array();
    for (const auto& k : bisected_keys(m)) j["forest"].push_back(k.str());
  }
  if (marking) {
    nlohmann::json mk = nlohmann::json::object();
    for (const auto& [type, pts] : marking->points_by_type) {
      auto& arr = mk[std::to_string(type)] = nlohmann::json::array();
      for (const auto& p : pts) arr.push_back(io::point_to_json(p));
    }
    j["marking"] = mk;
  }
  if (partition) {
    nlohmann::json p;
    p["v0"] = partition->v0;
    p["v1"] = partition->v1;
    if (!partition->rank0.empty()) p["rank0"] = partition->rank0;
    if (!partition->rank1.empty()) p["rank1"] = partition->rank1;
    j["partition"] = p;
  }
  return j;
}

/// Whether the file declares rational coordinates.
inline bool file_is_rational(const nlohmann::json& j) { return j.is_object() && j.value("scalar", "") == "rational"; }

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshIOError(path + ": cannot open");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw MeshIOError(path + ": " + e.what());
  }
}

template <class S>
MeshFile<S> read_mesh(const std::string& path) {
  return mesh_from_json<S>(read_json_file(path));
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw MeshIOError(path + ": cannot write");
  out << j.dump(1) << "\n";
}

}  // namespace nvb
