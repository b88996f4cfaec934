#include "spinloc/wtree.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace spinloc {

void WeightedIndexTree::pull(Node* n) {
    n->height = 1 + std::max(node_height(n->left.get()), node_height(n->right.get()));
    n->sum = n->w + node_sum(n->left.get()) + node_sum(n->right.get());
}

void WeightedIndexTree::rotate_left(NodePtr& n) {
    NodePtr r = std::move(n->right);
    n->right = std::move(r->left);
    pull(n.get());
    r->left = std::move(n);
    n = std::move(r);
    pull(n.get());
}

void WeightedIndexTree::rotate_right(NodePtr& n) {
    NodePtr l = std::move(n->left);
    n->left = std::move(l->right);
    pull(n.get());
    l->right = std::move(n);
    n = std::move(l);
    pull(n.get());
}

void WeightedIndexTree::rebalance(NodePtr& n) {
    pull(n.get());
    const int bal = node_height(n->left.get()) - node_height(n->right.get());
    if (bal > 1) {
        if (node_height(n->left->left.get()) < node_height(n->left->right.get()))
            rotate_left(n->left);
        rotate_right(n);
    } else if (bal < -1) {
        if (node_height(n->right->right.get()) < node_height(n->right->left.get()))
            rotate_right(n->right);
        rotate_left(n);
    }
}

void WeightedIndexTree::insert(NodePtr& n, int key, double w, bool& grew) {
    if (!n) {
        n = std::make_unique<Node>(key, w);
        grew = true;
        return;
    }
    if (key == n->key) {
        n->w = w;
        pull(n.get());
        return;
    }
    insert(key < n->key ? n->left : n->right, key, w, grew);
    rebalance(n);
}

WeightedIndexTree::Node* WeightedIndexTree::detach_min(NodePtr& n) {
    if (n->left) {
        Node* m = detach_min(n->left);
        rebalance(n);
        return m;
    }
    // Hand back the minimum by value; the node itself is spliced out.
    Node* result = n.get();
    NodePtr keep = std::move(n->right);
    result->right.reset();
    n.release(); // ownership transferred to caller via `result`
    n = std::move(keep);
    return result;
}

bool WeightedIndexTree::remove(NodePtr& n, int key) {
    if (!n) return false;
    bool removed;
    if (key < n->key) {
        removed = remove(n->left, key);
    } else if (key > n->key) {
        removed = remove(n->right, key);
    } else {
        if (!n->left) {
            n = std::move(n->right);
        } else if (!n->right) {
            n = std::move(n->left);
        } else {
            NodePtr successor{detach_min(n->right)};
            successor->left = std::move(n->left);
            successor->right = std::move(n->right);
            n = std::move(successor);
            rebalance(n);
        }
        return true;
    }
    if (removed && n) rebalance(n);
    return removed;
}

bool WeightedIndexTree::contains(int key) const {
    const Node* n = root_.get();
    while (n) {
        if (key == n->key) return true;
        n = key < n->key ? n->left.get() : n->right.get();
    }
    return false;
}

double WeightedIndexTree::weight(int key) const {
    const Node* n = root_.get();
    while (n) {
        if (key == n->key) return n->w;
        n = key < n->key ? n->left.get() : n->right.get();
    }
    throw KeyNotFound(key);
}

void WeightedIndexTree::update(int key, double w) {
    if (!(w > 0.0) || !std::isfinite(w))
        throw std::invalid_argument("tree weight must be positive and finite");
    bool grew = false;
    insert(root_, key, w, grew);
    if (grew) ++size_;
}

void WeightedIndexTree::erase(int key) {
    if (!remove(root_, key)) throw KeyNotFound(key);
    --size_;
}

namespace {
constexpr int kNoKey = std::numeric_limits<int>::min();

// Minimum key in the subtree whose strict prefix within the subtree reaches
// ell, or kNoKey when no key qualifies.
template <typename Node>
int prefix_search(const Node* v, double ell) {
    const double left_sum = v->left ? v->left->sum : 0.0;
    if (ell <= left_sum) {
        if (v->left) {
            const int r = prefix_search(v->left.get(), ell);
            if (r != kNoKey) return r;
        }
        return v->key;
    }
    if (v->right) return prefix_search(v->right.get(), ell - left_sum - v->w);
    return kNoKey;
}
} // namespace

int WeightedIndexTree::range_search(double ell) const {
    if (!root_) throw EmptyTree{};
    const int found = prefix_search(root_.get(), ell);
    if (found != kNoKey) return found;
    // ell exceeds every strict prefix: fall through to the maximum key.
    const Node* n = root_.get();
    while (n->right) n = n->right.get();
    return n->key;
}

int WeightedIndexTree::select(double u) const {
    if (!root_) throw EmptyTree{};
    const Node* n = root_.get();
    while (true) {
        const double left_sum = node_sum(n->left.get());
        if (u < left_sum && n->left) {
            n = n->left.get();
        } else if (u < left_sum + n->w || !n->right) {
            return n->key;
        } else {
            u -= left_sum + n->w;
            n = n->right.get();
        }
    }
}

void WeightedIndexTree::for_each(const std::function<void(int, double)>& fn) const {
    std::function<void(const Node*)> visit = [&](const Node* n) {
        if (!n) return;
        visit(n->left.get());
        fn(n->key, n->w);
        visit(n->right.get());
    };
    visit(root_.get());
}

double WeightedIndexTree::validate_node(const Node* n, int lo, int hi) {
    if (!n) return 0.0;
    if (n->key < lo || n->key > hi) throw std::logic_error("tree ordering violated");
    const int hl = node_height(n->left.get());
    const int hr = node_height(n->right.get());
    if (n->height != 1 + std::max(hl, hr)) throw std::logic_error("tree height stale");
    if (std::abs(hl - hr) > 1) throw std::logic_error("tree unbalanced");
    const double s = n->w + validate_node(n->left.get(), lo, n->key - 1) +
                     validate_node(n->right.get(), n->key + 1, hi);
    const double scale = std::max(std::abs(s), std::abs(n->sum));
    if (std::abs(s - n->sum) > 1e-12 * std::max(scale, 1.0))
        throw std::logic_error("tree subtree sum stale");
    return n->sum;
}

void WeightedIndexTree::validate() const {
    validate_node(root_.get(), std::numeric_limits<int>::min() + 1,
                  std::numeric_limits<int>::max() - 1);
}

} // namespace spinloc
