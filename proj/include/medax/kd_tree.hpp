#pragma once

#include "medax/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace medax {

/// Axis-aligned hierarchical partition over a fixed point set with exact
/// distance semantics: nearest-point and radius queries prune by bounding
/// box but never approximate. Brute-force equivalents are kept alongside as
/// an oracle switch.
class KdTree {
public:
    KdTree() = default;

    explicit KdTree(std::vector<Vec> points) : points_(std::move(points)) {
        if (points_.empty()) return;
        order_.resize(points_.size());
        std::iota(order_.begin(), order_.end(), 0);
        nodes_.reserve(points_.size() * 2);
        root_ = build(0, points_.size(), 0);
    }

    std::size_t size() const { return points_.size(); }
    const Vec& point(std::size_t i) const { return points_[i]; }

    /// Index and distance of a nearest point.
    std::pair<std::size_t, double> nearest(const Vec& q) const {
        std::size_t best_idx = 0;
        double best = std::numeric_limits<double>::infinity();
        search_nearest(root_, q, best_idx, best);
        return {best_idx, best};
    }

    /// Indices of all points within `radius` of q (inclusive), ascending.
    std::vector<std::size_t> within(const Vec& q, double radius) const {
        std::vector<std::size_t> out;
        search_within(root_, q, radius, out);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::pair<std::size_t, double> nearest_brute(const Vec& q) const {
        std::size_t best_idx = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const double d = (points_[i] - q).norm();
            if (d < best) {
                best = d;
                best_idx = i;
            }
        }
        return {best_idx, best};
    }

    std::vector<std::size_t> within_brute(const Vec& q, double radius) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if ((points_[i] - q).norm() <= radius) out.push_back(i);
        }
        return out;
    }

private:
    struct Node {
        int axis = -1;          // -1 marks a leaf
        double split = 0.0;
        int left = -1, right = -1;
        std::size_t begin = 0, end = 0;  // leaf range into order_
    };

    static constexpr std::size_t kLeafSize = 8;

    int build(std::size_t begin, std::size_t end, int depth) {
        Node node;
        if (end - begin <= kLeafSize) {
            node.begin = begin;
            node.end = end;
            nodes_.push_back(node);
            return static_cast<int>(nodes_.size() - 1);
        }
        const int dim = static_cast<int>(points_.front().size());
        const int axis = depth % dim;
        const std::size_t mid = (begin + end) / 2;
        std::nth_element(order_.begin() + static_cast<long>(begin),
                         order_.begin() + static_cast<long>(mid),
                         order_.begin() + static_cast<long>(end),
                         [&](std::size_t a, std::size_t b) {
                             return points_[a][axis] < points_[b][axis];
                         });
        node.axis = axis;
        node.split = points_[order_[mid]][axis];
        nodes_.push_back(node);
        const int self = static_cast<int>(nodes_.size() - 1);
        const int left = build(begin, mid, depth + 1);
        const int right = build(mid, end, depth + 1);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
    }

    void search_nearest(int idx, const Vec& q, std::size_t& best_idx, double& best) const {
        if (idx < 0) return;
        const Node& node = nodes_[static_cast<std::size_t>(idx)];
        if (node.axis < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const double d = (points_[order_[i]] - q).norm();
                if (d < best || (d == best && order_[i] < best_idx)) {
                    best = d;
                    best_idx = order_[i];
                }
            }
            return;
        }
        const double delta = q[node.axis] - node.split;
        const int near = delta < 0.0 ? node.left : node.right;
        const int far = delta < 0.0 ? node.right : node.left;
        search_nearest(near, q, best_idx, best);
        if (std::abs(delta) <= best) search_nearest(far, q, best_idx, best);
    }

    void search_within(int idx, const Vec& q, double radius,
                       std::vector<std::size_t>& out) const {
        if (idx < 0) return;
        const Node& node = nodes_[static_cast<std::size_t>(idx)];
        if (node.axis < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                if ((points_[order_[i]] - q).norm() <= radius) out.push_back(order_[i]);
            }
            return;
        }
        const double delta = q[node.axis] - node.split;
        const int near = delta < 0.0 ? node.left : node.right;
        const int far = delta < 0.0 ? node.right : node.left;
        search_within(near, q, radius, out);
        if (std::abs(delta) <= radius) search_within(far, q, radius, out);
    }

    std::vector<Vec> points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace medax
