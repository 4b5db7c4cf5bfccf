#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <sstream>

#include "omega/cantor/extend.hpp"

namespace omega::cantor {

struct CorrespondencePair {
    ClopenSet left, right;
};

// Finite-depth homeomorphism: left pieces partition X, right pieces partition X'.
struct CorrespondenceAtDepth {
    int depth = 0;
    PresentationPtr X, Xp;
    std::vector<CorrespondencePair> pairs;
    double mesh = 1.0;
};

// ---- binary schemes of paired clopens ----

class SchemeNode;
using NodePtr = std::shared_ptr<const SchemeNode>;

// A node of a paired binary scheme; children partition the node on both sides.
// Children are computed once on first request.
class SchemeNode {
public:
    SchemeNode(ClopenSet l, ClopenSet r) : left_(std::move(l)), right_(std::move(r)) {}
    virtual ~SchemeNode() = default;
    const ClopenSet& left() const { return left_; }
    const ClopenSet& right() const { return right_; }
    const std::array<NodePtr, 2>& children() const {
        std::call_once(once_, [this] { kids_ = make_children(); });
        return kids_;
    }
    double diameter() const { return std::max(cantor::diameter(left_), cantor::diameter(right_)); }

protected:
    virtual std::array<NodePtr, 2> make_children() const = 0;

private:
    ClopenSet left_, right_;
    mutable std::once_flag once_;
    mutable std::array<NodePtr, 2> kids_;
};

// Pairs the canonical splits of both sides (the lexicographic piece maps).
class CanonicalNode : public SchemeNode {
public:
    using SchemeNode::SchemeNode;

protected:
    std::array<NodePtr, 2> make_children() const override {
        auto [a0, a1] = split_canonical(left());
        auto [b0, b1] = split_canonical(right());
        return {std::make_shared<CanonicalNode>(a0, b0), std::make_shared<CanonicalNode>(a1, b1)};
    }
};

struct ExtensionContext {
    SubPresentation S, Sp;
    ExtendOptions opt;
};
using ContextPtr = std::shared_ptr<const ExtensionContext>;

// Scheme on D extending a scheme on C ⊆ D. D-node(w) holds (D_w, D'_w); its children
// are K_w ⊔ D_w0 and D-node(w1); the former splits into the K_w scheme and D-node(w0).
class DNode : public SchemeNode {
public:
    DNode(ClopenSet d, ClopenSet dp, NodePtr base, int level, ContextPtr ctx)
        : SchemeNode(std::move(d), std::move(dp)), base_(std::move(base)), level_(level), ctx_(std::move(ctx)) {}
    const NodePtr& base() const { return base_; }

protected:
    std::array<NodePtr, 2> make_children() const override;

private:
    NodePtr base_;
    int level_;
    ContextPtr ctx_;
};

class KDNode : public SchemeNode {
public:
    KDNode(ClopenSet l, ClopenSet r, ClopenSet k, ClopenSet kp, NodePtr d0)
        : SchemeNode(std::move(l), std::move(r)), k_(std::move(k)), kp_(std::move(kp)), d0_(std::move(d0)) {}

protected:
    std::array<NodePtr, 2> make_children() const override {
        return {std::make_shared<CanonicalNode>(k_, kp_), d0_};
    }

private:
    ClopenSet k_, kp_;
    NodePtr d0_;
};

inline std::array<NodePtr, 2> DNode::make_children() const {
    const auto& bk = base_->children();
    auto [d0, d1] = extend_clopen_within(ctx_->S, left(), bk[0]->left(), bk[1]->left(), level_ + 1, ctx_->opt);
    auto [e0, e1] = extend_clopen_within(ctx_->Sp, right(), bk[0]->right(), bk[1]->right(), level_ + 1, ctx_->opt);
    auto k = subtract(left(), unite(d0, d1));
    auto kp = subtract(right(), unite(e0, e1));
    if (k.empty() || kp.empty()) fail(ErrorKind::Construction, "empty complementary piece in nested system");
    auto n0 = std::make_shared<DNode>(d0, e0, bk[0], level_ + 1, ctx_);
    auto n1 = std::make_shared<DNode>(d1, e1, bk[1], level_ + 1, ctx_);
    return {std::make_shared<KDNode>(unite(k, d0), unite(kp, e0), k, kp, n0), n1};
}

// Leaves of the scheme where both sides have diameter <= 2^-k, in left-first order.
inline CorrespondenceAtDepth frontier(const NodePtr& root, int k) {
    CorrespondenceAtDepth out;
    out.depth = k;
    out.X = root->left().P;
    out.Xp = root->right().P;
    out.mesh = 0;
    double target = std::ldexp(1.0, -k);
    std::vector<const SchemeNode*> stack{root.get()};
    while (!stack.empty()) {
        const SchemeNode* n = stack.back();
        stack.pop_back();
        if (n->diameter() <= target) {
            out.pairs.push_back({n->left(), n->right()});
            out.mesh = std::max(out.mesh, n->diameter());
            continue;
        }
        const auto& ch = n->children();
        stack.push_back(ch[1].get());
        stack.push_back(ch[0].get());
    }
    return out;
}

// ---- checks ----

// Number of depth-L paths inside X (exact for moderate L).
inline std::uint64_t count_at_depth(const ClopenSet& X, int L) {
    const auto& P = *X.P;
    std::vector<std::vector<std::uint64_t>> memo(P.size(), std::vector<std::uint64_t>(L + 1, UINT64_MAX));
    std::function<std::uint64_t(int, int)> paths = [&](int s, int r) -> std::uint64_t {
        if (r <= 0) return 1;
        auto& m = memo[s][r];
        if (m != UINT64_MAX) return m;
        std::uint64_t tot = 0;
        for (auto [l, t] : P.out[s]) tot += paths(t, r - 1);
        return m = tot;
    };
    std::uint64_t tot = 0;
    for (const auto& w : X.words) tot += paths(P.walk(w), L - static_cast<int>(w.size()));
    return tot;
}

struct CorrespondenceReport {
    bool left_partition = false, right_partition = false, bijection = false, mesh_ok = false;
    bool ok() const { return left_partition && right_partition && bijection && mesh_ok; }
};

inline bool is_partition(const std::vector<const ClopenSet*>& pieces, const PresentationPtr& P) {
    if (pieces.empty()) return false;
    int L = 0;
    for (auto* p : pieces) {
        if (p->empty()) return false;
        L = std::max(L, static_cast<int>(p->max_length()));
    }
    std::uint64_t sum = 0;
    std::vector<Word> all;
    for (auto* p : pieces) {
        sum += count_at_depth(*p, L);
        all.insert(all.end(), p->words.begin(), p->words.end());
    }
    return make_clopen(P, std::move(all)) == whole(P) && sum == count_at_depth(whole(P), L);
}

inline CorrespondenceReport check_correspondence(const CorrespondenceAtDepth& c) {
    CorrespondenceReport r;
    std::vector<const ClopenSet*> L, R;
    for (const auto& p : c.pairs) {
        L.push_back(&p.left);
        R.push_back(&p.right);
    }
    r.left_partition = is_partition(L, c.X);
    r.right_partition = is_partition(R, c.Xp);
    // Pieces are non-empty and partitions; one pair per piece makes the pairing bijective.
    r.bijection = r.left_partition && r.right_partition;
    double target = std::ldexp(1.0, -c.depth);
    r.mesh_ok = true;
    for (const auto& p : c.pairs)
        if (diameter(p.left) > target || diameter(p.right) > target) r.mesh_ok = false;
    return r;
}

// For each finer pair, the index of the coarser pair containing it on both sides
// (-1 on failure). Coarser left pieces are assumed to partition, so the candidate
// found through the first left word is the only one possible.
inline std::vector<int> refinement_map(const CorrespondenceAtDepth& finer, const CorrespondenceAtDepth& coarser) {
    std::map<Word, int> owner;
    for (size_t j = 0; j < coarser.pairs.size(); ++j)
        for (const auto& w : coarser.pairs[j].left.words) owner.emplace(w, static_cast<int>(j));
    std::vector<int> idx;
    for (const auto& f : finer.pairs) {
        int hit = -1;
        if (!f.left.empty()) {
            const Word& w = f.left.words.front();
            for (size_t len = 0; len <= w.size() && hit < 0; ++len) {
                auto it = owner.find(Word(w.begin(), w.begin() + len));
                if (it != owner.end()) hit = it->second;
            }
        }
        if (hit >= 0 && !(subset_of(f.left, coarser.pairs[hit].left) && subset_of(f.right, coarser.pairs[hit].right)))
            hit = -1;
        idx.push_back(hit);
    }
    return idx;
}

inline bool refines(const CorrespondenceAtDepth& finer, const CorrespondenceAtDepth& coarser) {
    for (int i : refinement_map(finer, coarser))
        if (i < 0) return false;
    return true;
}

// Restriction of a correspondence on D to the sub-spaces C, C'; pairs empty on both
// sides are dropped, pairs empty on one side only are reported by returning nullopt.
inline std::optional<CorrespondenceAtDepth> restrict_correspondence(const CorrespondenceAtDepth& c,
                                                                    const SubPresentation& S,
                                                                    const SubPresentation& Sp) {
    CorrespondenceAtDepth out;
    out.depth = c.depth;
    out.X = S.C;
    out.Xp = Sp.C;
    out.mesh = 0;
    for (const auto& p : c.pairs) {
        auto l = restrict_to_sub(S, p.left), r = restrict_to_sub(Sp, p.right);
        if (l.empty() && r.empty()) continue;
        if (l.empty() || r.empty()) return std::nullopt;
        out.mesh = std::max({out.mesh, diameter(l), diameter(r)});
        out.pairs.push_back({l, r});
    }
    return out;
}

// ---- operations ----

// Correspondence C -> C' pairing the level-`depth` pieces of two C-side systems.
inline CorrespondenceAtDepth system_correspondence(const NestedClopenSystem& a, const NestedClopenSystem& b) {
    if (a.depth != b.depth) fail(ErrorKind::Structural, "systems have different depths");
    CorrespondenceAtDepth c;
    c.mesh = 0;
    for (const auto& [w, Cw] : a.C) {
        if (static_cast<int>(w.size()) != a.depth) continue;
        auto it = b.C.find(w);
        if (it == b.C.end()) fail(ErrorKind::Structural, "index '" + w + "' missing from second system");
        c.pairs.push_back({Cw, it->second});
        c.mesh = std::max({c.mesh, diameter(Cw), diameter(it->second)});
    }
    c.X = a.C.at("").P;
    c.Xp = b.C.at("").P;
    int k = 0;
    while (std::ldexp(1.0, -(k + 1)) >= c.mesh && k < 62) ++k;
    c.depth = k;
    return c;
}

// Extends phi (pairing C_w <-> C'_w at the systems' depth) to D -> D'. Output pieces
// are D_w <-> D'_w at full depth and K_w <-> K'_w (canonically subdivided) above it.
inline CorrespondenceAtDepth extend_homeo(const CorrespondenceAtDepth& phi, const NestedClopenSystem& sys,
                                          const NestedClopenSystem& sysp) {
    if (sys.depth != sysp.depth) fail(ErrorKind::Structural, "index mismatch: systems at different depths");
    for (const auto& [w, Dw] : sys.D)
        if (!sysp.D.count(w)) fail(ErrorKind::Structural, "index mismatch at '" + w + "'");
    std::vector<Index> leaves;
    for (const auto& [w, Cw] : sys.C)
        if (static_cast<int>(w.size()) == sys.depth) leaves.push_back(w);
    if (phi.pairs.size() != leaves.size())
        fail(ErrorKind::Structural, "phi has " + std::to_string(phi.pairs.size()) + " pairs, systems have " +
                                        std::to_string(leaves.size()) + " leaves");
    for (const auto& w : leaves) {
        const auto &Cw = sys.C.at(w), &Cpw = sysp.C.at(w);
        bool found = false;
        for (const auto& p : phi.pairs)
            if (p.left == Cw) {
                if (!(p.right == Cpw)) fail(ErrorKind::Structural, "phi does not pair C_" + w + " with C'_" + w);
                found = true;
            }
        if (!found) fail(ErrorKind::Structural, "phi misses C_" + w);
    }
    CorrespondenceAtDepth out;
    out.X = sys.D.at("").P;
    out.Xp = sysp.D.at("").P;
    out.mesh = 0;
    for (const auto& w : leaves) out.mesh = std::max({out.mesh, diameter(sys.D.at(w)), diameter(sysp.D.at(w))});
    int k = 0;
    while (std::ldexp(1.0, -(k + 1)) >= out.mesh && k < 62) ++k;
    out.depth = k;
    // Walk the D-scheme: node w emits K_w pieces then recurses into w0, w1.
    std::function<void(const Index&)> walk = [&](const Index& w) {
        if (static_cast<int>(w.size()) == sys.depth) {
            out.pairs.push_back({sys.D.at(w), sysp.D.at(w)});
            return;
        }
        auto kf = frontier(std::make_shared<CanonicalNode>(sys.K.at(w), sysp.K.at(w)), k);
        for (auto& p : kf.pairs) {
            out.mesh = std::max(out.mesh, std::max(diameter(p.left), diameter(p.right)));
            out.pairs.push_back(std::move(p));
        }
        walk(w + "0");
        walk(w + "1");
    };
    walk("");
    return out;
}

struct Chain {
    std::vector<PresentationPtr> spaces;
};

inline Chain make_chain(const std::vector<TreePresentation>& v) {
    Chain c;
    for (const auto& T : v) c.spaces.push_back(std::make_shared<const TreePresentation>(T));
    return c;
}

struct OmegaHomeo {
    std::vector<CorrespondenceAtDepth> stages;
    std::vector<NodePtr> roots;
};

inline std::vector<NodePtr> omega_schemes(const Chain& X, const Chain& Xp, const ExtendOptions& opt = {}) {
    if (X.spaces.size() != Xp.spaces.size() || X.spaces.empty())
        fail(ErrorKind::Precondition, "chains must be non-empty and of equal length");
    for (const auto* ch : {&X, &Xp})
        for (size_t i = 0; i < ch->spaces.size(); ++i) {
            require_valid_perfect(*ch->spaces[i], "chain stage " + std::to_string(i + 1));
            if (i + 1 < ch->spaces.size()) {
                SubPresentation S(ch->spaces[i + 1], ch->spaces[i]);
                auto e = is_entwined(S);
                if (!e.entwined)
                    fail(ErrorKind::Precondition, "chain link " + std::to_string(i + 1) + " -> " +
                                                      std::to_string(i + 2) + " not entwined; witness cylinder " +
                                                      word_string(*e.witness));
            }
        }
    std::vector<NodePtr> roots;
    roots.push_back(std::make_shared<CanonicalNode>(whole(X.spaces[0]), whole(Xp.spaces[0])));
    for (size_t i = 1; i < X.spaces.size(); ++i) {
        auto ctx = std::make_shared<const ExtensionContext>(ExtensionContext{
            SubPresentation(X.spaces[i], X.spaces[i - 1]), SubPresentation(Xp.spaces[i], Xp.spaces[i - 1]), opt});
        roots.push_back(std::make_shared<DNode>(whole(X.spaces[i]), whole(Xp.spaces[i]), roots.back(), 0, ctx));
    }
    return roots;
}

// One correspondence per chain stage at mesh <= 2^-k; stage n+1 restricts to stage n.
inline std::vector<CorrespondenceAtDepth> omega_homeo(const Chain& X, const Chain& Xp, int k,
                                                      const ExtendOptions& opt = {}) {
    std::vector<CorrespondenceAtDepth> out;
    for (const auto& r : omega_schemes(X, Xp, opt)) out.push_back(frontier(r, k));
    return out;
}

// ---- export ----

inline nlohmann::json to_json(const CorrespondenceAtDepth& c) {
    nlohmann::json j;
    j["depth"] = c.depth;
    j["mesh"] = c.mesh;
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : c.pairs) j["pairs"].push_back({{"left", to_json(p.left)}, {"right", to_json(p.right)}});
    return j;
}

inline std::string pieces_label(const ClopenSet& X) {
    std::string s;
    for (size_t i = 0; i < X.words.size(); ++i) {
        if (i) s += ",";
        if (i == 3) {
            s += "+" + std::to_string(X.words.size() - 3);
            break;
        }
        s += word_string(X.words[i]);
    }
    return s;
}

// DOT diagram of a refining sequence of correspondences (coarse to fine).
inline std::string refinement_dot(const std::vector<CorrespondenceAtDepth>& seq) {
    std::ostringstream os;
    os << "digraph refinement {\n  rankdir=LR;\n  node [shape=box, fontsize=9];\n";
    for (size_t d = 0; d < seq.size(); ++d) {
        os << "  subgraph cluster_" << d << " {\n    label=\"depth " << seq[d].depth << "\";\n";
        for (size_t i = 0; i < seq[d].pairs.size(); ++i)
            os << "    n" << d << "_" << i << " [label=\"" << pieces_label(seq[d].pairs[i].left) << " | "
               << pieces_label(seq[d].pairs[i].right) << "\"];\n";
        os << "  }\n";
    }
    for (size_t d = 1; d < seq.size(); ++d) {
        auto m = refinement_map(seq[d], seq[d - 1]);
        for (size_t i = 0; i < m.size(); ++i)
            if (m[i] >= 0) os << "  n" << d - 1 << "_" << m[i] << " -> n" << d << "_" << i << ";\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace omega::cantor
