#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>

namespace spinloc {

struct EmptyTree : std::runtime_error {
    EmptyTree() : std::runtime_error("weighted index tree is empty") {}
};

struct KeyNotFound : std::runtime_error {
    explicit KeyNotFound(int key)
        : std::runtime_error("key " + std::to_string(key) + " not in tree") {}
};

// Ordered map from site index to positive weight, kept as an AVL tree where
// every node carries the total weight of its subtree.  Supports the
// prefix-threshold search used for dynamic weighted sampling.
class WeightedIndexTree {
  public:
    WeightedIndexTree() = default;

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    // Total stored weight; 0 for the empty tree.
    double sum() const { return root_ ? root_->sum : 0.0; }

    bool contains(int key) const;
    double weight(int key) const; // throws KeyNotFound

    // Sets the weight of `key`, inserting it if absent.  Requires w > 0.
    void update(int key, double w);

    // Removes `key`; throws KeyNotFound if absent.
    void erase(int key);

    // Minimum key i such that sum of weights of keys < i is >= ell.
    // If no key qualifies (ell above the last strict prefix) the maximum
    // key is returned, matching the descent fallback.  Throws EmptyTree.
    int range_search(double ell) const;

    // Key owning the cumulative-weight position u in [0, sum()): the unique
    // key k with prefix(k) <= u < prefix(k) + weight(k).  This is the
    // operation that makes u ~ U[0, sum) select k with probability
    // weight(k)/sum.  Throws EmptyTree.
    int select(double u) const;

    void clear() { root_.reset(); size_ = 0; }

    // In-order visit of (key, weight).
    void for_each(const std::function<void(int, double)>& fn) const;

    // Recomputes subtree sums, heights and ordering; throws std::logic_error
    // on violation.  Test hook.
    void validate() const;

    int height() const { return root_ ? root_->height : 0; }

  private:
    struct Node {
        int key;
        double w;
        double sum;  // total weight of this subtree
        int height;
        std::unique_ptr<Node> left, right;
        Node(int k, double weight) : key(k), w(weight), sum(weight), height(1) {}
    };
    using NodePtr = std::unique_ptr<Node>;

    static int node_height(const Node* n) { return n ? n->height : 0; }
    static double node_sum(const Node* n) { return n ? n->sum : 0.0; }
    static void pull(Node* n);
    static void rotate_left(NodePtr& n);
    static void rotate_right(NodePtr& n);
    static void rebalance(NodePtr& n);
    static void insert(NodePtr& n, int key, double w, bool& grew);
    static bool remove(NodePtr& n, int key);
    static Node* detach_min(NodePtr& n);
    static double validate_node(const Node* n, int lo, int hi);

    NodePtr root_;
    std::size_t size_ = 0;
};

// Free-function spellings used throughout the sampling code.
inline double tree_sum(const WeightedIndexTree& t) { return t.sum(); }
inline int tree_range_search(const WeightedIndexTree& t, double ell) { return t.range_search(ell); }
inline void tree_update(WeightedIndexTree& t, int key, double w) { t.update(key, w); }
inline void tree_delete(WeightedIndexTree& t, int key) { t.erase(key); }

} // namespace spinloc
