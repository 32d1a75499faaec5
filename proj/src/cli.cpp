#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "nvb/nvb.hpp"

namespace nvb::cli {
namespace {

using json = nlohmann::json;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kVerify = 2;
constexpr int kRefine = 3;

struct Args {
  std::string mesh, other, out, strategy, mode = "sic", check, cell, marking = "barycentre";
  std::uint64_t seed = 1;
  long rounds = 1;
  int depth = -1;
  long lo = -16, hi = 16;
  bool flatten = false, under = false;
};

class Emitter {
 public:
  Emitter(std::ostream& out, std::string path) : out_(out), path_(std::move(path)) {}
  void text(const std::string& s) {
    if (path_.empty()) {
      out_ << s;
      return;
    }
    std::ofstream f(path_);
    if (!f) throw MeshIOError(path_ + ": cannot write");
    f << s;
  }
  void mesh(const json& j) { text(j.dump(1) + "\n"); }

 private:
  std::ostream& out_;
  std::string path_;
};

/// Calls f with the mesh file read in its declared scalar type.
template <class F>
int with_mesh(const std::string& path, F&& f) {
  const json j = read_json_file(path);
  if (file_is_rational(j)) return f(mesh_from_json<Rational>(j));
  return f(mesh_from_json<Dyadic>(j));
}

json report_json(const std::string& name, const Report& r) {
  json j;
  j["check"] = name;
  j["ok"] = r.ok();
  j["violations"] = r.violations;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

NodeKey parse_key(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos || colon == 0) throw std::invalid_argument("cell key must look like root:path");
  NodeKey k{std::stoi(s.substr(0, colon)), s.substr(colon + 1)};
  if (k.path.find_first_not_of("01") != std::string::npos) throw std::invalid_argument("cell path must be binary");
  return k;
}

template <class S>
int cmd_check(const Args& a, const MeshFile<S>& f, Emitter& em) {
  const Mesh<S>& m = f.mesh;
  Report r;
  json extra;
  if (a.check == "sic") r = check_sic(m, a.depth);
  else if (a.check == "retaco") r = check_retaco(m);
  else if (a.check == "retahyco") r = check_retahyco(m);
  else if (a.check == "pc") r = check_pc(m);
  else if (a.check == "isocochange") r = check_isocochange(m);
  else if (a.check == "conforming") {
    const ConformityReport c = check_conforming(m);
    r = c;
    extra = json::array();
    for (const auto& h : c.hanging) {
      json hv;
      hv["vertex"] = h.vertex;
      hv["coordinates"] = io::point_to_json(m.vertex(h.vertex));
      hv["cell"] = m.key(h.leaf).str();
      extra.push_back(hv);
    }
  } else {
    throw std::invalid_argument("unknown check: " + a.check);
  }
  json j = report_json(a.check, r);
  if (!extra.is_null()) j["hanging"] = extra;
  em.text(j.dump(1) + "\n");
  return r.ok() ? kOk : kVerify;
}

template <class S>
int cmd_refine(const Args& a, MeshFile<S> f, Emitter& em) {
  Mesh<S>& m = f.mesh;
  if (!a.cell.empty()) {
    const int id = m.find(parse_key(a.cell));
    if (id < 0 || !m.is_leaf(id)) throw std::invalid_argument("cell " + a.cell + " is not a leaf");
    refine(m, id);
  } else {
    std::mt19937_64 rng(a.seed);
    for (long k = 0; k < a.rounds; ++k) {
      std::uniform_int_distribution<std::size_t> d(0, m.leaves().size() - 1);
      refine(m, m.leaves()[d(rng)]);
    }
  }
  em.mesh(mesh_to_json(m, a.flatten));
  return kOk;
}

template <class S>
int cmd_constants(const Args& a, const MeshFile<S>& f, Emitter& em) {
  const bool iso = a.mode == "iso";
  if (!iso && a.mode != "sic") throw std::invalid_argument("mode must be sic or iso");
  const Constants c = compute_constants(f.mesh, iso ? ConstMode::Iso : ConstMode::Sic, a.depth);
  std::ostringstream os;
  const Real& cc = iso ? c.c_iso : c.c_sic;
  os << "mode=" << a.mode << "\n";
  os << "n=" << c.n << "\n";
  os << "d=" << c.d.get_str() << "\n";
  os << "D=" << c.D_str() << "\n";
  os << "D^2=" << (iso ? c.D.q.get_str() : "2^(2*" + std::to_string(c.D.l) + "/" + std::to_string(c.n) + ")*" + c.D.q.get_str()) << "\n";
  os << "C=" << cc.str() << "\n";
  os << "C<=" << (iso ? c.c_iso_up : c.c_sic_up).ceil_times(1).get_str() << "\n";
  if (iso) {
    os << "h0=" << c.h0 << "\n";
    os << "first_summand=" << c.first_summand_exact.get_str() << "\n";
    os << "first_summand_table=" << c.first_summand_table.get_str() << "\n";
    os << "first_summand_coarse=" << c.first_summand_theorem.get_str() << "\n";
  }
  os << "certificate: settled=" << (c.cert.settled ? "yes" : "no") << " depth=" << c.cert.settled_at
     << " classes=" << c.cert.classes << " nodes=" << c.cert.nodes << "\n";
  em.text(os.str());
  return kOk;
}

template <class S>
int cmd_bdv(const Args& a, MeshFile<S> f, Emitter& em, std::ostream& err) {
  const BoundMode mode = parse_bound_mode(a.mode);
  const Marking kind = parse_marking(a.strategy.empty() ? "random-leaf" : a.strategy);
  const Constants c = compute_constants(f.mesh, mode == BoundMode::Sic ? ConstMode::Sic : ConstMode::Iso);
  const Trace t = run_sequence(f.mesh, kind, a.rounds, a.seed);
  em.text(trace_csv(t, &c, mode));
  const BdvReport r = verify_bdv(t, c, mode);
  if (!r.ok()) {
    err << "bound violated first in round " << r.first_violation << "\n";
    return kVerify;
  }
  return kOk;
}

template <class S>
int cmd_overlay(const Args& a, const MeshFile<S>& p, Emitter& em) {
  if (a.other.empty()) throw std::invalid_argument("overlay needs --other");
  const MeshFile<S> q = mesh_from_json<S>(read_json_file(a.other));
  const Mesh<S> r = a.under ? underlay(p.mesh, q.mesh) : overlay(p.mesh, q.mesh);
  em.mesh(mesh_to_json(r, a.flatten));
  return kOk;
}

int cmd_pile(const Args& a, Emitter& em, std::ostream& err) {
  const pile::Strategy s = pile::parse_strategy(a.strategy.empty() ? "random" : a.strategy);
  const pile::Trace t = pile::play(s, a.rounds, a.seed, a.lo, a.hi);
  em.text(t.csv());
  if (const long v = t.first_violation()) {
    err << "pile bound violated in round " << v << "\n";
    return kVerify;
  }
  return kOk;
}

int dispatch(CLI::App& app, const Args& a, std::ostream& out, std::ostream& err) {
  Emitter em(out, a.out);
  auto need_mesh = [&] {
    if (a.mesh.empty()) throw std::invalid_argument("--mesh is required");
  };
  auto sub = [&](const char* name) { return app.got_subcommand(name); };

  if (sub("pile-game")) return cmd_pile(a, em, err);
  need_mesh();
  if (sub("init-division")) {
    const json j = read_json_file(a.mesh);
    const MeshFile<Rational> f = mesh_from_json<Rational>(j);
    const UntaggedMesh<Rational> u = untagged(f.mesh);
    PointMarking<Rational> mk;
    if (a.marking == "file") {
      if (!f.marking) throw std::invalid_argument("the mesh file has no marking");
      mk = *f.marking;
    } else if (a.marking == "greedy") {
      mk = greedy_marking(u);
    } else if (a.marking == "barycentre") {
      mk = barycentre_marking(u);
    } else {
      throw std::invalid_argument("marking must be barycentre, greedy or file");
    }
    em.mesh(mesh_to_json(initial_division(u, mk), false, &mk));
    return kOk;
  }
  if (sub("agk-init")) {
    return with_mesh(a.mesh, [&](auto f) {
      const auto u = untagged(f.mesh);
      VertexPartition p;
      if (f.partition) p = *f.partition;
      else {
        std::mt19937_64 rng(a.seed);
        p = random_partition(f.mesh.vertex_count(), rng);
      }
      em.mesh(mesh_to_json(agk_init(u, p), false, nullptr, &p));
      return kOk;
    });
  }
  if (sub("check")) return with_mesh(a.mesh, [&](auto f) { return cmd_check(a, f, em); });
  if (sub("refine")) return with_mesh(a.mesh, [&](auto f) { return cmd_refine(a, std::move(f), em); });
  if (sub("uniform"))
    return with_mesh(a.mesh, [&](auto f) {
      for (long k = 0; k < a.rounds; ++k) uniform_refine(f.mesh);
      em.mesh(mesh_to_json(f.mesh, a.flatten));
      return kOk;
    });
  if (sub("hyper-uniform"))
    return with_mesh(a.mesh, [&](auto f) {
      if (a.depth < 0) throw std::invalid_argument("--depth is required");
      hyperlevel_uniform_refine(f.mesh, a.depth);
      em.mesh(mesh_to_json(f.mesh, a.flatten));
      return kOk;
    });
  if (sub("quasi-uniform"))
    return with_mesh(a.mesh, [&](auto f) {
      quasi_uniform_refine(f.mesh);
      em.mesh(mesh_to_json(f.mesh, a.flatten));
      return kOk;
    });
  if (sub("constants")) return with_mesh(a.mesh, [&](auto f) { return cmd_constants(a, f, em); });
  if (sub("bdv-run")) return with_mesh(a.mesh, [&](auto f) { return cmd_bdv(a, std::move(f), em, err); });
  if (sub("overlay")) return with_mesh(a.mesh, [&](auto f) { return cmd_overlay(a, f, em); });
  throw std::invalid_argument("no subcommand");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tagged-simplex bisection: refinement, initialisation, verification and closure experiments"};
  app.require_subcommand(1);
  Args a;

  auto mesh_opt = [&](CLI::App* s, bool required = true) {
    auto* o = s->add_option("--mesh", a.mesh, "input mesh JSON");
    if (required) o->required();
    s->add_option("--out", a.out, "output file (default: stdout)");
  };
  auto writes_mesh = [&](CLI::App* s) { s->add_flag("--flatten", a.flatten, "write the leaves as cells instead of roots plus forest"); };

  auto* init = app.add_subcommand("init-division", "divide an untagged mesh by marked points");
  mesh_opt(init);
  init->add_option("--marking", a.marking, "barycentre, greedy or file");

  auto* agk = app.add_subcommand("agk-init", "tag an untagged mesh from a vertex partition");
  mesh_opt(agk);
  agk->add_option("--seed", a.seed, "seed for a random partition when the file has none");

  auto* check = app.add_subcommand("check", "verify an initial condition or conformity");
  check->add_option("kind", a.check, "sic|retaco|retahyco|pc|isocochange|conforming")
      ->required()
      ->check(CLI::IsMember({"sic", "retaco", "retahyco", "pc", "isocochange", "conforming"}));
  mesh_opt(check);
  check->add_option("--depth", a.depth, "refinement depth for sic");

  auto* ref = app.add_subcommand("refine", "refine one cell (or random cells) with closure");
  mesh_opt(ref);
  writes_mesh(ref);
  ref->add_option("--cell", a.cell, "node key root:path of the leaf to refine");
  ref->add_option("-N,--rounds", a.rounds, "number of random refinements when --cell is absent");
  ref->add_option("--seed", a.seed, "seed");

  auto* uni = app.add_subcommand("uniform", "bisect every leaf once");
  mesh_opt(uni);
  writes_mesh(uni);
  uni->add_option("-N,--rounds", a.rounds, "repetitions");

  auto* hyp = app.add_subcommand("hyper-uniform", "refine until every refinement edge has hyperlevel above --depth");
  mesh_opt(hyp);
  writes_mesh(hyp);
  hyp->add_option("--depth", a.depth, "hyperlevel j");

  auto* quasi = app.add_subcommand("quasi-uniform", "levels n..2n-1 relative to the input");
  mesh_opt(quasi);
  writes_mesh(quasi);

  auto* cons = app.add_subcommand("constants", "d, D and the closure constant of a mesh");
  mesh_opt(cons);
  cons->add_option("--mode", a.mode, "sic or iso");
  cons->add_option("--depth", a.depth, "settle depth of the class enumeration");

  auto* bdv = app.add_subcommand("bdv-run", "refinement sequence with per-round checks and bound verification");
  mesh_opt(bdv);
  bdv->add_option("-N,--rounds", a.rounds, "rounds");
  bdv->add_option("--seed", a.seed, "seed");
  bdv->add_option("--strategy", a.strategy, "random-leaf, max-level-leaf, staircase-adversary or quasitower-adversary");
  bdv->add_option("--mode", a.mode, "sic or iso");

  auto* pile = app.add_subcommand("pile-game", "play the pile game and print the CSV trace");
  pile->add_option("--out", a.out, "output file (default: stdout)");
  pile->add_option("-N,--rounds", a.rounds, "rounds");
  pile->add_option("--seed", a.seed, "seed");
  pile->add_option("--strategy", a.strategy, "random, tower or quasitower");
  pile->add_option("--lo", a.lo, "first basement brick");
  pile->add_option("--hi", a.hi, "one past the last basement brick");

  auto* ov = app.add_subcommand("overlay", "overlay (or with --under, underlay) of two refinements");
  mesh_opt(ov);
  writes_mesh(ov);
  ov->add_option("--other", a.other, "second mesh JSON")->required();
  ov->add_flag("--under", a.under, "finest common coarsening instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kInvalid;
  }
  try {
    return dispatch(app, a, out, err);
  } catch (const RefineError& e) {
    err << "refinement failure: " << e.what() << "\n";
    return kRefine;
  } catch (const RoundCheckError& e) {
    err << "verification failure: " << e.what() << "\n";
    return kVerify;
  } catch (const std::exception& e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalid;
  }
}

}  // namespace nvb::cli
