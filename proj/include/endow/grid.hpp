#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "endow/error.hpp"

namespace endow {

/// Uniform time grid t_i = T*i/N, i = 0..N, with t_N == T exactly.
class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(double horizon, int n_steps) : horizon_(horizon), n_steps_(n_steps) {
        if (!(horizon > 0.0)) throw Error(ErrorCode::Rejected, "horizon_positive");
        if (n_steps < 1) throw Error(ErrorCode::Rejected, "n_steps_positive");
    }

    double horizon() const { return horizon_; }
    int n_steps() const { return n_steps_; }
    int n_nodes() const { return n_steps_ + 1; }
    double dt() const { return horizon_ / n_steps_; }
    double t(int i) const { return i == n_steps_ ? horizon_ : horizon_ * i / n_steps_; }

private:
    double horizon_ = 1.0;
    int n_steps_ = 1;
};

/// Dense node-major array: value(node, path) lives at node * n_paths + path,
/// so one node's cross-section is contiguous for regressions.
class NodeField {
public:
    NodeField() = default;
    NodeField(std::size_t n_nodes, std::size_t n_paths, double fill = 0.0)
        : n_nodes_(n_nodes), n_paths_(n_paths), data_(n_nodes * n_paths, fill) {}

    std::size_t n_nodes() const { return n_nodes_; }
    std::size_t n_paths() const { return n_paths_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t node, std::size_t path) { return data_[node * n_paths_ + path]; }
    double operator()(std::size_t node, std::size_t path) const { return data_[node * n_paths_ + path]; }

    std::span<double> node(std::size_t i) { return {data_.data() + i * n_paths_, n_paths_}; }
    std::span<const double> node(std::size_t i) const { return {data_.data() + i * n_paths_, n_paths_}; }

    const std::vector<double>& raw() const { return data_; }

private:
    std::size_t n_nodes_ = 0;
    std::size_t n_paths_ = 0;
    std::vector<double> data_;
};

}  // namespace endow
