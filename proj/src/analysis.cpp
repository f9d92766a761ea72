#include "synth/analysis.hpp"

#include <algorithm>

namespace synth::ir {

namespace {

// Reverse postorder over the successor graph.
std::vector<uint32_t> rpo_order(const Function& f) {
  std::vector<uint32_t> order;
  std::vector<uint8_t> state(f.blocks.size(), 0);
  std::vector<std::pair<uint32_t, int>> stack;
  stack.push_back({0, 0});
  state[0] = 1;
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    const Instr& t = f.blocks[b].term;
    uint32_t succs[2] = {kNoOperand, kNoOperand};
    int nsucc = 0;
    if (t.op == Op::Br) {
      succs[nsucc++] = t.x;
    } else if (t.op == Op::CondBr) {
      succs[nsucc++] = t.x;
      if (t.y != t.x) succs[nsucc++] = t.y;
    }
    if (next < nsucc) {
      uint32_t s = succs[next++];
      if (state[s] == 0) {
        state[s] = 1;
        stack.push_back({s, 0});
      }
    } else {
      order.push_back(b);
      stack.pop_back();
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

DomTree dominance_tree(const Function& f) {
  const size_t n = f.blocks.size();
  DomTree dt;
  dt.idom.assign(n, kNoOperand);
  dt.children.assign(n, {});

  std::vector<uint32_t> rpo = rpo_order(f);
  std::vector<uint32_t> rpo_pos(n, kNoOperand);
  for (uint32_t i = 0; i < rpo.size(); ++i) rpo_pos[rpo[i]] = i;

  auto intersect = [&](uint32_t a, uint32_t b) {
    while (a != b) {
      while (rpo_pos[a] > rpo_pos[b]) a = dt.idom[a];
      while (rpo_pos[b] > rpo_pos[a]) b = dt.idom[b];
    }
    return a;
  };

  dt.idom[0] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (uint32_t b : rpo) {
      if (b == 0) continue;
      uint32_t new_idom = kNoOperand;
      for (uint32_t p : f.blocks[b].preds) {
        if (rpo_pos[p] == kNoOperand || dt.idom[p] == kNoOperand) continue;
        new_idom = (new_idom == kNoOperand) ? p : intersect(new_idom, p);
      }
      if (new_idom != kNoOperand && dt.idom[b] != new_idom) {
        dt.idom[b] = new_idom;
        changed = true;
      }
    }
  }

  for (uint32_t b = 1; b < n; ++b)
    if (dt.idom[b] != kNoOperand) dt.children[dt.idom[b]].push_back(b);

  dt.preorder.clear();
  std::vector<uint32_t> stack{0};
  while (!stack.empty()) {
    uint32_t b = stack.back();
    stack.pop_back();
    dt.preorder.push_back(b);
    const auto& kids = dt.children[b];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return dt;
}

bool dominates(const DomTree& dt, uint32_t a, uint32_t b) {
  while (true) {
    if (a == b) return true;
    if (b == 0) return false;
    uint32_t up = dt.idom[b];
    if (up == b || up == kNoOperand) return false;
    b = up;
  }
}

std::vector<uint32_t> live_values_at(const Function& f, const DomTree& dt, uint32_t block,
                                     uint32_t seg_limit) {
  std::vector<uint32_t> out;
  std::vector<bool> is_ph(f.num_values(), false);
  for (const auto& ph : f.placeholders) is_ph[ph.vid] = true;

  for (uint32_t i = 0; i < f.sig.params.size(); ++i) out.push_back(i);

  auto add_defs = [&](uint32_t b, uint32_t body_segs) {
    for (const auto& phi : f.blocks[b].phis)
      if (phi.result != kNoOperand && !is_ph[phi.result]) out.push_back(phi.result);
    const auto& body = f.blocks[b].body;
    for (uint32_t s = 0; s < body_segs && s < body.size(); ++s) {
      if (body[s].is_hole) continue;
      for (const auto& ins : body[s].code)
        if (ins.result != kNoOperand && !is_ph[ins.result]) out.push_back(ins.result);
    }
  };

  uint32_t b = block;
  add_defs(b, seg_limit);
  while (b != 0) {
    uint32_t up = dt.idom[b];
    if (up == b || up == kNoOperand) break;
    b = up;
    add_defs(b, static_cast<uint32_t>(f.blocks[b].body.size()));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace synth::ir
