#pragma once

// Synthetic discrete Bayesian networks over feature and label nodes, with
// ground-truth Markov blankets, ancestral sampling and brute-force
// conditional-independence oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "camcf/dataset.hpp"
#include "camcf/error.hpp"
#include "camcf/info.hpp"

namespace camcf::synth {

enum class NodeKind { feature, label };

struct BnNode {
    std::string name;
    NodeKind kind = NodeKind::feature;
    Code arity = 2;
    std::vector<std::size_t> parents;
    // One row per parent configuration, mixed radix with the first parent most significant.
    std::vector<std::vector<double>> cpt;

    friend bool operator==(const BnNode&, const BnNode&) = default;
};

struct BnSpec {
    std::vector<BnNode> nodes;

    std::size_t size() const { return nodes.size(); }

    std::size_t parent_configs(std::size_t v) const
    {
        std::size_t n = 1;
        for (auto p : nodes.at(v).parents) n *= nodes.at(p).arity;
        return n;
    }

    std::size_t config_index(std::size_t v, const std::vector<Code>& state) const
    {
        std::size_t idx = 0;
        for (auto p : nodes[v].parents) idx = idx * nodes[p].arity + state[p];
        return idx;
    }

    std::vector<std::size_t> children(std::size_t v) const
    {
        std::vector<std::size_t> out;
        for (std::size_t c = 0; c < nodes.size(); ++c) {
            const auto& ps = nodes[c].parents;
            if (std::find(ps.begin(), ps.end(), v) != ps.end()) out.push_back(c);
        }
        return out;
    }

    /// Throws if the graph has a cycle.
    std::vector<std::size_t> topological_order() const
    {
        const std::size_t n = nodes.size();
        std::vector<std::size_t> indeg(n, 0), order;
        for (const auto& node : nodes) {
            for (auto p : node.parents) {
                if (p >= n) throw Error("parent index out of range");
            }
        }
        for (std::size_t v = 0; v < n; ++v) indeg[v] = nodes[v].parents.size();
        std::vector<std::size_t> ready;
        for (std::size_t v = 0; v < n; ++v) {
            if (indeg[v] == 0) ready.push_back(v);
        }
        while (!ready.empty()) {
            std::sort(ready.begin(), ready.end(), std::greater<>());
            const auto v = ready.back();
            ready.pop_back();
            order.push_back(v);
            for (auto c : children(v)) {
                if (--indeg[c] == 0) ready.push_back(c);
            }
        }
        if (order.size() != n) throw Error("network graph contains a cycle");
        return order;
    }

    /// Dataset column index of node v among nodes of its own kind.
    std::size_t column_of(std::size_t v) const
    {
        std::size_t idx = 0;
        for (std::size_t u = 0; u < v; ++u) idx += nodes[u].kind == nodes[v].kind;
        return idx;
    }

    std::vector<std::size_t> nodes_of_kind(NodeKind kind) const
    {
        std::vector<std::size_t> out;
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            if (nodes[v].kind == kind) out.push_back(v);
        }
        return out;
    }

    void validate() const
    {
        topological_order();
        for (std::size_t v = 0; v < nodes.size(); ++v) {
            const auto& node = nodes[v];
            if (node.arity == 0) throw Error("node '" + node.name + "' has arity 0");
            std::set<std::size_t> uniq(node.parents.begin(), node.parents.end());
            if (uniq.size() != node.parents.size() || uniq.count(v)) {
                throw Error("node '" + node.name + "' has repeated or self parents");
            }
            if (node.cpt.size() != parent_configs(v)) {
                throw Error("node '" + node.name + "' CPT has " + std::to_string(node.cpt.size()) + " rows, expected " +
                            std::to_string(parent_configs(v)));
            }
            for (const auto& row : node.cpt) {
                if (row.size() != node.arity) throw Error("node '" + node.name + "' CPT row has wrong width");
                double sum = 0.0;
                for (double p : row) {
                    if (!(p >= 0.0)) throw Error("node '" + node.name + "' CPT has a negative entry");
                    sum += p;
                }
                if (std::abs(sum - 1.0) > 1e-12) throw Error("node '" + node.name + "' CPT row does not sum to 1");
            }
        }
    }

    friend bool operator==(const BnSpec&, const BnSpec&) = default;
};

/// Portable generator helpers; the standard distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
    bool coin(double p) { return uniform() < p; }

    template <class T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    /// Symmetric Dirichlet(1) via normalized exponentials.
    std::vector<double> dirichlet(std::size_t k)
    {
        std::vector<double> w(k);
        double sum = 0.0;
        for (auto& x : w) {
            x = -std::log(1.0 - uniform());
            sum += x;
        }
        for (auto& x : w) x /= sum;
        return renormalized(std::move(w));
    }

    static std::vector<double> renormalized(std::vector<double> w)
    {
        // Push the rounding residue into the largest entry so rows sum to 1 tightly.
        double sum = 0.0;
        for (double x : w) sum += x;
        auto top = std::max_element(w.begin(), w.end());
        *top += 1.0 - sum;
        return w;
    }

private:
    std::mt19937_64 engine_;
};

enum class CptMode { dirichlet, strong_edge };

struct DagOptions {
    CptMode mode = CptMode::dirichlet;
    double strength = 0.9;  // strong-edge mass on the preferred value
    Code label_arity = 2;
};

namespace detail {

/// Strong-edge row: the preferred value follows the mean normalized parent
/// value, so the child depends monotonically on each parent.
inline std::vector<double> strong_row(const BnSpec& bn, std::size_t v, std::size_t config, double strength)
{
    const auto& node = bn.nodes[v];
    const Code k = node.arity;
    std::vector<double> row(k, 0.0);
    if (k == 1) return {1.0};
    if (node.parents.empty()) {
        std::fill(row.begin(), row.end(), 1.0 / k);
        return Rng::renormalized(row);
    }
    // Decode the mixed-radix configuration.
    std::vector<Code> values(node.parents.size());
    for (std::size_t i = node.parents.size(); i-- > 0;) {
        const Code a = bn.nodes[node.parents[i]].arity;
        values[i] = static_cast<Code>(config % a);
        config /= a;
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Code a = bn.nodes[node.parents[i]].arity;
        mean += a > 1 ? static_cast<double>(values[i]) / (a - 1) : 0.0;
    }
    mean /= static_cast<double>(values.size());
    const auto preferred = std::min<Code>(static_cast<Code>(std::floor(mean * k)), k - 1);
    std::fill(row.begin(), row.end(), (1.0 - strength) / (k - 1));
    row[preferred] = strength;
    return Rng::renormalized(row);
}

} // namespace detail

/// Random DAG: nodes are placed in a random order and every forward pair is
/// joined with probability `edge_prob`. Features are named f0.., labels y0...
inline BnSpec generate_dag(std::size_t n_features, std::size_t n_label_nodes, double edge_prob, Code arity,
                           std::uint64_t seed, const DagOptions& opts = {})
{
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw Error("edge probability must lie in [0, 1]");
    if (arity == 0) throw Error("arity must be >= 1");
    Rng rng(seed);
    BnSpec bn;
    for (std::size_t i = 0; i < n_features; ++i) {
        bn.nodes.push_back({"f" + std::to_string(i), NodeKind::feature, arity, {}, {}});
    }
    for (std::size_t i = 0; i < n_label_nodes; ++i) {
        bn.nodes.push_back({"y" + std::to_string(i), NodeKind::label, opts.label_arity, {}, {}});
    }
    std::vector<std::size_t> order(bn.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t b = 0; b < order.size(); ++b) {
        for (std::size_t a = 0; a < b; ++a) {
            if (rng.coin(edge_prob)) bn.nodes[order[b]].parents.push_back(order[a]);
        }
    }
    for (auto& node : bn.nodes) std::sort(node.parents.begin(), node.parents.end());
    for (std::size_t v = 0; v < bn.nodes.size(); ++v) {
        const auto rows = bn.parent_configs(v);
        auto& cpt = bn.nodes[v].cpt;
        cpt.resize(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            cpt[r] = opts.mode == CptMode::strong_edge ? detail::strong_row(bn, v, r, opts.strength)
                                                        : rng.dirichlet(bn.nodes[v].arity);
        }
    }
    return bn;
}

/// Ancestral sampling. Feature nodes become feature columns and label nodes
/// label columns, each in node order.
inline Dataset forward_sample(const BnSpec& bn, std::size_t n_samples, std::uint64_t seed)
{
    bn.validate();
    if (bn.nodes_of_kind(NodeKind::feature).empty() || bn.nodes_of_kind(NodeKind::label).empty()) {
        throw Error("network needs at least one feature node and one label node");
    }
    Rng rng(seed);
    const auto order = bn.topological_order();
    std::vector<std::vector<Code>> cols(bn.size(), std::vector<Code>(n_samples));
    std::vector<Code> state(bn.size(), 0);
    for (std::size_t i = 0; i < n_samples; ++i) {
        for (auto v : order) {
            const auto& row = bn.nodes[v].cpt[bn.config_index(v, state)];
            const double u = rng.uniform();
            double acc = 0.0;
            Code pick = static_cast<Code>(row.size() - 1);
            for (Code c = 0; c < row.size(); ++c) {
                acc += row[c];
                if (u < acc) {
                    pick = c;
                    break;
                }
            }
            state[v] = pick;
            cols[v][i] = pick;
        }
    }
    std::vector<std::vector<Code>> features, labels;
    std::vector<std::string> fnames, lnames;
    for (std::size_t v = 0; v < bn.size(); ++v) {
        if (bn.nodes[v].kind == NodeKind::feature) {
            features.push_back(std::move(cols[v]));
            fnames.push_back(bn.nodes[v].name);
        } else {
            labels.push_back(std::move(cols[v]));
            lnames.push_back(bn.nodes[v].name);
        }
    }
    return Dataset::from_codes(features, labels, std::move(fnames), std::move(lnames));
}

/// Parents, children and co-parents of children of `node`, as feature column indices.
inline std::vector<std::size_t> true_markov_blanket(const BnSpec& bn, std::size_t node)
{
    std::set<std::size_t> mb(bn.nodes.at(node).parents.begin(), bn.nodes.at(node).parents.end());
    for (auto c : bn.children(node)) {
        mb.insert(c);
        mb.insert(bn.nodes[c].parents.begin(), bn.nodes[c].parents.end());
    }
    mb.erase(node);
    std::vector<std::size_t> out;
    for (auto v : mb) {
        if (bn.nodes[v].kind == NodeKind::feature) out.push_back(bn.column_of(v));
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// d-separation of a and b given s, via the moralized ancestral graph.
inline bool d_separated(const BnSpec& bn, std::size_t a, std::size_t b, const std::vector<std::size_t>& s)
{
    const std::size_t n = bn.size();
    std::vector<char> keep(n, 0), given(n, 0);
    std::vector<std::size_t> stack{a, b};
    for (auto v : s) {
        stack.push_back(v);
        given[v] = 1;
    }
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        if (keep[v]) continue;
        keep[v] = 1;
        for (auto p : bn.nodes[v].parents) stack.push_back(p);
    }
    std::vector<std::set<std::size_t>> adj(n);
    for (std::size_t v = 0; v < n; ++v) {
        if (!keep[v]) continue;
        const auto& ps = bn.nodes[v].parents;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            adj[v].insert(ps[i]);
            adj[ps[i]].insert(v);
            for (std::size_t j = i + 1; j < ps.size(); ++j) {
                adj[ps[i]].insert(ps[j]);
                adj[ps[j]].insert(ps[i]);
            }
        }
    }
    if (given[a] || given[b]) return true;
    std::vector<char> seen(n, 0);
    stack = {a};
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        if (v == b) return false;
        if (seen[v]) continue;
        seen[v] = 1;
        for (auto u : adj[v]) {
            if (keep[u] && !given[u] && !seen[u]) stack.push_back(u);
        }
    }
    return true;
}

/// Exhaustive CI-test blanket for small problems (M <= 12): a feature is a
/// parent/child candidate when no feature subset of size <= 3 screens it off
/// (SCSMI <= delta); a non-candidate joins as a spouse when conditioning on a
/// single candidate makes it dependent.
inline std::vector<std::size_t> brute_force_mb(const Dataset& ds, const CategoryNode& target, double delta,
                                               std::size_t max_subset = 3)
{
    const std::size_t m = ds.n_features();
    if (m > 12) throw Error("brute-force blanket refuses M = " + std::to_string(m) + " (limit 12)");

    auto cmi = [&](std::size_t f, const std::vector<std::size_t>& s) {
        std::vector<ColumnView> members;
        for (auto g : s) members.push_back(ds.feature(g).view());
        return info::scsmi(ds.feature(f).view(), target, members);
    };

    std::vector<std::size_t> pc;
    for (std::size_t f = 0; f < m; ++f) {
        std::vector<std::size_t> rest;
        for (std::size_t g = 0; g < m; ++g) {
            if (g != f) rest.push_back(g);
        }
        bool dependent = true;
        std::vector<std::size_t> subset;
        // Enumerate subsets of `rest` with size <= max_subset by recursion.
        auto search = [&](auto&& self, std::size_t start) -> void {
            if (!dependent) return;
            if (cmi(f, subset) <= delta) {
                dependent = false;
                return;
            }
            if (subset.size() == max_subset) return;
            for (std::size_t i = start; i < rest.size() && dependent; ++i) {
                subset.push_back(rest[i]);
                self(self, i + 1);
                subset.pop_back();
            }
        };
        search(search, 0);
        if (dependent) pc.push_back(f);
    }

    std::vector<std::size_t> mb = pc;
    for (std::size_t z = 0; z < m; ++z) {
        if (std::find(pc.begin(), pc.end(), z) != pc.end()) continue;
        for (auto x : pc) {
            if (cmi(z, {x}) > delta) {
                mb.push_back(z);
                break;
            }
        }
    }
    std::sort(mb.begin(), mb.end());
    return mb;
}

inline constexpr int kBnFormatVersion = 1;

inline const char* kind_name(NodeKind k) { return k == NodeKind::feature ? "feature" : "label"; }

/// Versioned text form; probabilities are written with 17 significant digits.
inline void write_bn(std::ostream& os, const BnSpec& bn)
{
    os << "camcf-bn " << kBnFormatVersion << "\n";
    os << "nodes " << bn.size() << "\n";
    for (std::size_t v = 0; v < bn.size(); ++v) {
        const auto& node = bn.nodes[v];
        os << "node " << v << ' ' << node.name << ' ' << kind_name(node.kind) << ' ' << node.arity << " parents "
           << node.parents.size();
        for (auto p : node.parents) os << ' ' << p;
        os << "\n";
    }
    os << std::setprecision(17);
    for (std::size_t v = 0; v < bn.size(); ++v) {
        os << "cpt " << v << "\n";
        for (const auto& row : bn.nodes[v].cpt) {
            for (std::size_t c = 0; c < row.size(); ++c) os << (c ? " " : "") << row[c];
            os << "\n";
        }
    }
    os << "end\n";
}

inline BnSpec read_bn(std::istream& is)
{
    auto fail = [](const std::string& m) -> BnSpec { throw Error("network file: " + m); };
    std::string word;
    int version = 0;
    if (!(is >> word >> version) || word != "camcf-bn") return fail("missing 'camcf-bn' header");
    if (version != kBnFormatVersion) return fail("unsupported version " + std::to_string(version));
    std::size_t count = 0;
    if (!(is >> word >> count) || word != "nodes") return fail("missing node count");
    BnSpec bn;
    bn.nodes.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t id = 0, np = 0;
        std::string kind, ptag;
        BnNode node;
        if (!(is >> word >> id >> node.name >> kind >> node.arity >> ptag >> np) || word != "node" ||
            ptag != "parents" || id >= count) {
            return fail("malformed node line " + std::to_string(i));
        }
        if (kind == "feature") node.kind = NodeKind::feature;
        else if (kind == "label") node.kind = NodeKind::label;
        else return fail("unknown node kind '" + kind + "'");
        node.parents.resize(np);
        for (auto& p : node.parents) {
            if (!(is >> p)) return fail("malformed parent list of node " + std::to_string(id));
        }
        bn.nodes[id] = std::move(node);
    }
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t id = 0;
        if (!(is >> word >> id) || word != "cpt" || id >= count) return fail("malformed cpt header");
        for (auto p : bn.nodes[id].parents) {
            if (p >= count) return fail("parent index out of range");
        }
        auto& node = bn.nodes[id];
        node.cpt.assign(bn.parent_configs(id), std::vector<double>(node.arity));
        for (auto& row : node.cpt) {
            for (auto& x : row) {
                if (!(is >> x)) return fail("truncated cpt of node " + std::to_string(id));
            }
        }
    }
    if (!(is >> word) || word != "end") return fail("missing 'end'");
    bn.validate();
    return bn;
}

inline std::string to_text(const BnSpec& bn)
{
    std::ostringstream os;
    write_bn(os, bn);
    return os.str();
}

inline BnSpec from_text(const std::string& text)
{
    std::istringstream is(text);
    return read_bn(is);
}

} // namespace camcf::synth
