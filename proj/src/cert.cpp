#include "selmer/cert.hpp"

#include <sstream>

namespace selmer {

namespace {

std::string rat_str(const Rat& q) { return q.get_str(); }

Rat rat_parse(const std::string& s) {
  Rat q(s);
  q.canonicalize();
  return q;
}

Json zmat_to_json(const ZMat& A) {
  Json rows = Json::array();
  for (const auto& r : A) {
    Json row = Json::array();
    for (const Int& x : r) row.push_back(x.get_str());
    rows.push_back(row);
  }
  return rows;
}

Json place_label(const Place& v) { return v.label(); }

Place place_parse(const std::string& s) {
  if (s == "inf") return Place::infinity();
  return Place::finite(Int(s));
}

Json chain_to_json(const std::vector<ChainStep>& chain) {
  Json out = Json::array();
  for (const auto& st : chain)
    out.push_back({{"place", place_label(st.place)},
                   {"dim_before", st.dim_before},
                   {"dim_after", st.dim_after}});
  return out;
}

Json basis_to_json(const std::vector<SquareClassVector>& basis) {
  Json out = Json::array();
  for (const auto& b : basis) {
    Json e;
    e["alpha"] = fe_to_json(b.alpha);
    e["s_exponents"] = b.s_exponents;
    e["norm_class"] = rat_str(b.norm_class);
    out.push_back(e);
  }
  return out;
}

Json ints_to_json(const std::vector<Int>& v) {
  Json out = Json::array();
  for (const Int& x : v) out.push_back(x.get_str());
  return out;
}

Json property_to_json(const PropertyECertificate& c) {
  Json j;
  j["D"] = c.D.get_str();
  j["S"] = ints_to_json(c.S);
  Json stages = Json::array();
  for (const auto& st : c.stages)
    stages.push_back(
        {{"p", st.p.get_str()}, {"item", st.item}, {"reason", st.reason}});
  j["stages"] = stages;
  Json items = Json::array();
  for (const auto& it : c.items)
    items.push_back({{"item", it.item},
                     {"pass", it.pass},
                     {"vacuous", it.vacuous},
                     {"note", it.note}});
  j["items"] = items;
  j["all_pass"] = c.all_pass;
  return j;
}

Json step_to_json(const DescentStepCertificate& st) {
  Json j;
  j["D_before"] = st.D_before.get_str();
  j["D_after"] = st.D_after.get_str();
  j["dim_before"] = st.dim_before;
  j["dim_after"] = st.dim_after;
  j["h1_before"] = st.h1_before;
  j["h1_after"] = st.h1_after;
  j["images_equal"] = st.images_equal;
  const DescentData& dd = st.data;
  Json d;
  d["x"] = fe_to_json(dd.x);
  d["y"] = fe_to_json(dd.y);
  d["q1"] = dd.q1.get_str();
  d["q2"] = dd.q2.get_str();
  d["qstar"] = dd.qstar.get_str();
  d["case"] = std::string(1, dd.case_tag);
  d["xP"] = dd.xP;
  d["yP"] = dd.yP;
  d["starP"] = dd.starP;
  d["d"] = dd.d;
  d["e"] = dd.e;
  d["s"] = dd.s;
  d["t"] = dd.t;
  Json order = Json::array();
  for (const auto& v : dd.order) order.push_back(place_label(v));
  d["order"] = order;
  j["data"] = d;
  const SymbolPrime& sp = st.sp;
  Json s;
  s["p"] = sp.p.get_str();
  Json al = Json::array();
  for (const FE& x : sp.alpha) al.push_back(fe_to_json(x));
  s["alpha"] = al;
  s["T_q1"] = sp.T;
  s["T_q2"] = sp.Tt;
  s["T_qstar"] = sp.Ts;
  s["x_at_p"] = sp.x_at_p;
  s["y_at_p"] = sp.y_at_p;
  Json rec = Json::array();
  for (const auto& r : sp.reciprocity)
    rec.push_back({{"identity", r.name},
                   {"lhs", r.lhs},
                   {"rhs", r.rhs},
                   {"pass", r.pass}});
  s["reciprocity"] = rec;
  j["symbol_prime"] = s;
  j["r"] = st.r.get_str();
  j["rejected"] = ints_to_json(st.rejected);
  j["ledger"] = chain_to_json(st.ledger);
  return j;
}

// recursive structural diff; paths of differing leaves go into out
void json_diff(const std::string& path, const Json& a, const Json& b,
               std::vector<std::string>& out) {
  if (out.size() >= 20) return;
  if (a.is_number() && b.is_number()) {
    // parsed and generated integers may differ in signedness only
    if (a != b) out.push_back(path + ": " + a.dump() + " vs " + b.dump());
    return;
  }
  if (a.type() != b.type()) {
    out.push_back(path + ": type differs");
    return;
  }
  if (a.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) {
        out.push_back(path + "/" + it.key() + ": missing in replay");
        continue;
      }
      json_diff(path + "/" + it.key(), it.value(), b.at(it.key()), out);
    }
    for (auto it = b.begin(); it != b.end(); ++it)
      if (!a.contains(it.key()))
        out.push_back(path + "/" + it.key() + ": missing in certificate");
    return;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) {
      out.push_back(path + ": length " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
      return;
    }
    for (size_t i = 0; i < a.size(); ++i)
      json_diff(path + "[" + std::to_string(i) + "]", a[i], b[i], out);
    return;
  }
  if (a != b)
    out.push_back(path + ": " + a.dump() + " vs " + b.dump());
}

}  // namespace

Json fe_to_json(const FE& x) {
  return Json::array({rat_str(x.c[0]), rat_str(x.c[1]), rat_str(x.c[2])});
}

FE fe_from_json(const Json& j) {
  FE x;
  for (int i = 0; i < 3; ++i) x.c[i] = rat_parse(j.at(i).get<std::string>());
  return x;
}

Json prime_ideal_to_json(const PrimeIdeal& P) {
  Json j;
  j["p"] = P.p.get_str();
  j["e"] = P.e;
  j["f"] = P.f_deg;
  j["hnf"] = zmat_to_json(P.hnf);
  return j;
}

Json selmer_certificate(const SelmerResult& R, const std::vector<Place>& order) {
  Json j;
  j["cert_v"] = kCertVersion;
  j["kind"] = "compute";
  j["a"] = R.curve.a.get_str();
  j["b"] = R.curve.b.get_str();
  j["D"] = R.curve.D.get_str();
  j["s_finite"] = ints_to_json(R.curve.s_finite);
  Json ord = Json::array();
  for (const auto& v : order) ord.push_back(place_label(v));
  j["order"] = ord;
  j["chain"] = chain_to_json(R.chain);
  j["basis"] = basis_to_json(R.basis);
  j["dim"] = R.dim;
  return j;
}

Json twist_search_certificate(const Int& a, const Int& b, const Int& D0,
                              const Int& prime_budget,
                              const TwistSearchResult& res) {
  Json j;
  j["cert_v"] = kCertVersion;
  j["kind"] = "twist-search";
  j["a"] = a.get_str();
  j["b"] = b.get_str();
  j["D0"] = D0.get_str();
  j["prime_budget"] = prime_budget.get_str();
  j["property"] = property_to_json(res.prop);
  Json steps = Json::array();
  for (const auto& st : res.steps) steps.push_back(step_to_json(st));
  j["steps"] = steps;
  j["D"] = res.D.get_str();
  j["dim"] = res.dim;
  j["n_steps"] = res.n_steps;
  return j;
}

std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::ostringstream os;
  os << "D,dim,n_steps,runtime_ms\r\n";
  for (const auto& r : rows)
    os << r.D.get_str() << "," << r.dim << "," << r.n_steps << ","
       << r.runtime_ms << "\r\n";
  return os.str();
}

Json scan_json(const Int& a, const Int& b, const Int& X,
               const std::vector<ScanRow>& rows) {
  Json j;
  j["cert_v"] = kCertVersion;
  j["kind"] = "scan";
  j["a"] = a.get_str();
  j["b"] = b.get_str();
  j["X"] = X.get_str();
  Json rws = Json::array();
  std::map<int, int> hist;
  int small = 0;
  for (const auto& r : rows) {
    // runtime is reported in the CSV only; the JSON stays deterministic
    rws.push_back(
        {{"D", r.D.get_str()}, {"dim", r.dim}, {"n_steps", r.n_steps}});
    ++hist[r.dim];
    small += r.dim <= 1;
  }
  j["rows"] = rws;
  Json h = Json::object();
  for (const auto& [dim, n] : hist) h[std::to_string(dim)] = n;
  j["histogram"] = h;
  j["count_dim_le_1"] = small;
  j["count_total"] = (int)rows.size();
  return j;
}

VerifyReport verify_certificate(const Json& cert) {
  VerifyReport rep;
  if (!cert.contains("cert_v") || cert.at("cert_v").get<int>() != kCertVersion)
    throw std::domain_error("verify: missing or unsupported cert_v");
  rep.kind = cert.at("kind").get<std::string>();
  Int a(cert.at("a").get<std::string>()), b(cert.at("b").get<std::string>());
  Json replay;
  if (rep.kind == "compute") {
    DescentEngine eng(build_field(a, b));
    CurveSpec C = eng.make_curve(Int(cert.at("D").get<std::string>()));
    std::vector<Place> order;
    for (const auto& s : cert.at("order"))
      order.push_back(place_parse(s.get<std::string>()));
    replay = selmer_certificate(eng.compute_sel2(C, order), order);
  } else if (rep.kind == "twist-search") {
    TwistEngine tw(build_field(a, b));
    tw.prime_budget = Int(cert.at("prime_budget").get<std::string>());
    Int D0(cert.at("D0").get<std::string>());
    replay = twist_search_certificate(a, b, D0, tw.prime_budget,
                                      tw.find_small_selmer_twist(D0));
  } else if (rep.kind == "scan") {
    TwistEngine tw(build_field(a, b));
    Int X(cert.at("X").get<std::string>());
    replay = scan_json(a, b, X, tw.distribution_scan(X));
  } else {
    throw std::domain_error("verify: unknown certificate kind " + rep.kind);
  }
  json_diff("", cert, replay, rep.mismatches);
  rep.pass = rep.mismatches.empty();
  return rep;
}

}  // namespace selmer
