#include "rtl/certificate.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "rtl/version.hpp"

namespace rtl {

using nlohmann::json;

Certificate build_certificate(const Decider& decider, const std::string& formula_text) {
  auto root_id = decider.relativized_id();
  if (!root_id) throw std::logic_error("build_certificate: no relativized witness");
  const ClosureTable& t = decider.ctx().table ? *decider.ctx().table
                                              : throw std::logic_error("no table");

  // collect needed ids, children before parents (ids were tagged in
  // topological order, so sorting by id insertion works)
  std::vector<int> needed;
  std::vector<char> seen;
  auto mark = [&](int id, auto&& self) -> void {
    if (id < static_cast<int>(seen.size()) && seen[id]) return;
    if (id >= static_cast<int>(seen.size())) seen.resize(id + 1, 0);
    seen[id] = 1;
    const auto& w = decider.raw_witness(id);
    for (int c : w.children) self(c, self);
    for (const auto& lam : w.lambdas)
      for (int c : lam) self(c, self);
    needed.push_back(id);
  };
  mark(*root_id, mark);
  std::sort(needed.begin(), needed.end(), [&](int x, int y) {
    return decider.rank_of_id(x) != decider.rank_of_id(y)
               ? decider.rank_of_id(x) < decider.rank_of_id(y)
               : x < y;
  });

  std::map<int, int> node_of;
  for (std::size_t i = 0; i < needed.size(); i++) node_of[needed[i]] = static_cast<int>(i);

  Certificate cert;
  cert.formula = formula_text;
  cert.tool = kToolName + std::string(" ") + kToolVersion;
  cert.depth_bound = 0;
  cert.root = node_of.at(*root_id);
  for (int id : needed) {
    Mosaic m = decider.mosaic_of(id);
    const auto& w = decider.raw_witness(id);
    CertNode node;
    node.start = t.set_texts(m.start);
    node.cover = t.set_texts(m.cover);
    node.end = t.set_texts(m.end);
    node.tag = tag_name(decider.rank_of_id(id));
    switch (w.kind) {
      case TacticWitness::Kind::Composition: node.rule = "composition"; break;
      case TacticWitness::Kind::Lead: node.rule = "lead"; break;
      case TacticWitness::Kind::Trail: node.rule = "trail"; break;
      case TacticWitness::Kind::Shuffle: node.rule = "shuffle"; break;
    }
    for (int c : w.children) node.children.push_back(node_of.at(c));
    for (Assignment v : w.ps) node.ps.push_back(t.set_texts(t.truths(v)));
    for (const auto& lam : w.lambdas) {
      std::vector<int> ids;
      for (int c : lam) ids.push_back(node_of.at(c));
      node.lambdas.push_back(std::move(ids));
    }
    cert.nodes.push_back(std::move(node));
  }
  cert.depth_bound = (decider.rank_of_id(*root_id) + 2) / 3;
  // record the search depth actually permitted, not just the witness depth
  cert.depth_bound = std::max(cert.depth_bound,
                              static_cast<int>(2 * decider.ctx().n));
  return cert;
}

std::string certificate_to_json(const Certificate& cert, int indent) {
  json nodes = json::array();
  for (const CertNode& n : cert.nodes) {
    json jn;
    jn["mosaic"] = {{"start", n.start}, {"cover", n.cover}, {"end", n.end}};
    jn["tag"] = n.tag;
    jn["rule"] = n.rule;
    if (n.rule == "composition")
      jn["parts"] = n.children;
    else if (n.rule == "lead" || n.rule == "trail")
      jn["sigma"] = n.children;
    else if (n.rule == "shuffle") {
      jn["ps"] = n.ps;
      jn["lambdas"] = n.lambdas;
    }
    nodes.push_back(std::move(jn));
  }
  json j;
  j["format"] = "rtl-cert-1";
  j["formula"] = cert.formula;
  j["tool"] = cert.tool;
  j["depth_bound"] = cert.depth_bound;
  j["root"] = cert.root;
  j["nodes"] = std::move(nodes);
  return indent >= 0 ? j.dump(indent) : j.dump();
}

std::optional<Certificate> certificate_from_json(const std::string& text,
                                                 std::string* error) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    if (error) *error = "invalid JSON";
    return std::nullopt;
  }
  // `check` accepts both a bare certificate and a verdict wrapper
  if (j.contains("certificate")) j = j["certificate"];
  auto fail = [&](const std::string& msg) {
    if (error) *error = msg;
    return std::nullopt;
  };
  try {
    Certificate cert;
    if (j.value("format", "") != "rtl-cert-1") return fail("unknown certificate format");
    cert.formula = j.at("formula").get<std::string>();
    cert.tool = j.value("tool", "");
    cert.depth_bound = j.at("depth_bound").get<int>();
    cert.root = j.at("root").get<int>();
    for (const json& jn : j.at("nodes")) {
      CertNode n;
      n.start = jn.at("mosaic").at("start").get<std::vector<std::string>>();
      n.cover = jn.at("mosaic").at("cover").get<std::vector<std::string>>();
      n.end = jn.at("mosaic").at("end").get<std::vector<std::string>>();
      n.tag = jn.at("tag").get<std::string>();
      n.rule = jn.at("rule").get<std::string>();
      if (n.rule == "composition")
        n.children = jn.at("parts").get<std::vector<int>>();
      else if (n.rule == "lead" || n.rule == "trail")
        n.children = jn.at("sigma").get<std::vector<int>>();
      else if (n.rule == "shuffle") {
        n.ps = jn.at("ps").get<std::vector<std::vector<std::string>>>();
        n.lambdas = jn.at("lambdas").get<std::vector<std::vector<int>>>();
      } else {
        return fail("unknown rule '" + n.rule + "'");
      }
      cert.nodes.push_back(std::move(n));
    }
    return cert;
  } catch (const json::exception& e) {
    return fail(e.what());
  }
}

namespace {

CheckResult reject(std::string path, std::string reason) {
  return CheckResult{false, std::move(path), std::move(reason)};
}

}  // namespace

CheckResult check_certificate(const Certificate& cert, FormulaPtr formula) {
  // the embedded formula is the instance; the caller's formula must agree
  FormulaPtr embedded;
  try {
    embedded = parse(cert.formula);
  } catch (const ParseError& e) {
    return reject("formula", std::string("unparsable: ") + e.what());
  }
  if (embedded != formula) return reject("formula", "certificate is for a different formula");

  DecisionContext ctx = DecisionContext::build(desugar(embedded));
  const ClosureTable& t = *ctx.table;

  int n_nodes = static_cast<int>(cert.nodes.size());
  if (cert.root < 0 || cert.root >= n_nodes) return reject("root", "out of range");

  std::vector<Mosaic> mosaics(n_nodes);
  std::vector<int> ranks(n_nodes);
  for (int i = 0; i < n_nodes; i++) {
    const CertNode& n = cert.nodes[i];
    std::string path = "nodes[" + std::to_string(i) + "]";
    auto a = t.set_from_texts(n.start);
    auto b = t.set_from_texts(n.cover);
    auto c = t.set_from_texts(n.end);
    if (!a || !b || !c) return reject(path + ".mosaic", "formula outside the closure");
    MosaicResult mr = make_mosaic(*a, *b, *c, t);
    if (std::holds_alternative<Rejection>(mr))
      return reject(path + ".mosaic", std::get<Rejection>(mr).to_string());
    mosaics[i] = std::get<Mosaic>(mr);
    auto rk = tag_rank(n.tag);
    if (!rk) return reject(path + ".tag", "unknown tag '" + n.tag + "'");
    ranks[i] = *rk;
    if (*rk > 3 * cert.depth_bound)
      return reject(path + ".tag", "tag exceeds the recorded depth bound");

    for (int cclhild : n.children)
      if (cclhild < 0 || cclhild >= i)
        return reject(path, "child index not strictly earlier");
    for (const auto& lam : n.lambdas)
      for (int ch : lam)
        if (ch < 0 || ch >= i) return reject(path, "lambda index not strictly earlier");

    if (n.rule == "composition") {
      if (n.children.empty()) return reject(path + ".parts", "empty");
      std::vector<Mosaic> seq;
      for (int ch : n.children) {
        if (ranks[ch] > ranks[i])
          return reject(path + ".parts", "part tagged later than the node");
        seq.push_back(mosaics[ch]);
      }
      auto res = compose_seq(seq);
      if (!res.mosaic)
        return reject(path + ".parts",
                      "not composable at position " + std::to_string(res.fail_pos));
      if (!(*res.mosaic == mosaics[i]))
        return reject(path + ".parts", "composition differs from the node mosaic");
    } else if (n.rule == "lead" || n.rule == "trail") {
      if (ranks[i] % 3 == 0)
        return reject(path + ".tag", "lead/trail nodes carry half-step tags");
      if (n.children.empty()) return reject(path + ".sigma", "empty");
      std::vector<Mosaic> seq;
      if (n.rule == "lead") seq.push_back(mosaics[i]);
      for (int ch : n.children) {
        if (ranks[ch] >= ranks[i])
          return reject(path + ".sigma", "piece not tagged strictly earlier");
        seq.push_back(mosaics[ch]);
      }
      if (n.rule == "trail") seq.push_back(mosaics[i]);
      if (!is_full_decomposition(mosaics[i], seq, t))
        return reject(path + ".sigma", "not a full decomposition");
    } else if (n.rule == "shuffle") {
      if (ranks[i] % 3 != 0)
        return reject(path + ".tag", "shuffle nodes carry whole-level tags");
      ShuffleSpec spec;
      for (const auto& pt : n.ps) {
        auto ps = t.set_from_texts(pt);
        if (!ps) return reject(path + ".ps", "formula outside the closure");
        if (!is_mpc_set(*ps, t)) return reject(path + ".ps", "point type is not an MPC");
        spec.ps.push_back(Mpc{*ps});
      }
      if (spec.ps.empty()) return reject(path + ".ps", "a shuffle needs a point type");
      for (const auto& lam : n.lambdas) {
        if (lam.empty()) return reject(path + ".lambdas", "empty sequence");
        std::vector<Mosaic> seq;
        for (int ch : lam) {
          if (ranks[ch] >= ranks[i])
            return reject(path + ".lambdas", "piece not tagged strictly earlier");
          seq.push_back(mosaics[ch]);
        }
        spec.lambdas.push_back(std::move(seq));
      }
      if (!check_shuffle_conditions(mosaics[i], spec, t))
        return reject(path, "shuffle conditions fail");
    } else {
      return reject(path + ".rule", "unknown rule '" + n.rule + "'");
    }
  }

  if (!is_relativized(mosaics[cert.root], ctx))
    return reject("root", "root mosaic is not relativized");
  return CheckResult{true, {}, {}};
}

CheckResult check_certificate(const Certificate& cert) {
  FormulaPtr f;
  try {
    f = parse(cert.formula);
  } catch (const ParseError& e) {
    return reject("formula", std::string("unparsable: ") + e.what());
  }
  return check_certificate(cert, f);
}

// ---------------------------------------------------------------------------
// decide entry points
// ---------------------------------------------------------------------------

Verdict decide_sat(FormulaPtr f, DeciderOptions opt) {
  FormulaPtr core = desugar(f);
  DecisionContext ctx = DecisionContext::build(core);
  Decider decider(ctx, opt);
  decider.rms_membership(/*stop_on_relativized=*/true);
  Verdict v;
  v.stats = decider.stats();
  if (decider.relativized_id()) {
    v.status = Status::Sat;
    v.certificate =
        std::make_shared<Certificate>(build_certificate(decider, print(f)));
  } else {
    v.status = Status::Unsat;
  }
  return v;
}

Verdict decide_valid(FormulaPtr f, DeciderOptions opt) {
  FormulaPtr neg = FormulaArena::instance().not_(f);
  Verdict inner = decide_sat(neg, opt);
  Verdict v;
  v.stats = inner.stats;
  if (inner.status == Status::Sat) {
    v.status = Status::Invalid;
    v.certificate = inner.certificate;
  } else {
    v.status = Status::Valid;
  }
  return v;
}

}  // namespace rtl
