#include "mt3/assignment/murty.hpp"

#include <queue>

namespace mt3::assignment {

namespace {

struct Node {
    CostMatrix constrained;
    Assignment solution;
};

struct WorseFirst {
    bool operator()(const Node& a, const Node& b) const {
        if (a.solution.cost != b.solution.cost) return a.solution.cost > b.solution.cost;
        return a.solution.row_to_col > b.solution.row_to_col;
    }
};

bool try_solve(const CostMatrix& c, Assignment& out) {
    try {
        out = hungarian(c);
        return true;
    } catch (const InfeasibleError&) {
        return false;
    }
}

}  // namespace

std::vector<Assignment> murty_kbest(const CostMatrix& c, std::size_t k) {
    std::vector<Assignment> results;
    if (k == 0) return results;

    // Work on a wide matrix so that every row carries exactly one pairing.
    const bool transpose = c.rows() > c.cols();
    const CostMatrix wide = transpose ? c.transposed() : c;

    std::priority_queue<Node, std::vector<Node>, WorseFirst> queue;
    queue.push(Node{wide, hungarian(wide)});

    while (!queue.empty() && results.size() < k) {
        Node best = queue.top();
        queue.pop();

        const auto& rows = best.solution.row_to_col;
        CostMatrix fixed = best.constrained;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto col = static_cast<std::size_t>(rows[r]);
            // Child r: pairings 0..r-1 kept, pairing r excluded.
            CostMatrix child = fixed;
            child.forbid(r, col);
            Assignment sol;
            if (try_solve(child, sol)) queue.push(Node{std::move(child), std::move(sol)});

            for (std::size_t j = 0; j < fixed.cols(); ++j)
                if (j != col) fixed.forbid(r, j);
            for (std::size_t i = 0; i < fixed.rows(); ++i)
                if (i != r) fixed.forbid(i, col);
        }

        Assignment emitted;
        if (transpose) {
            emitted.row_to_col.assign(c.rows(), -1);
            for (std::size_t j = 0; j < rows.size(); ++j)
                emitted.row_to_col[static_cast<std::size_t>(rows[j])] = static_cast<int>(j);
        } else {
            emitted.row_to_col = rows;
        }
        // Cost against the caller's matrix, not the constrained copy.
        emitted.cost = assignment_cost(c, emitted.row_to_col);
        results.push_back(std::move(emitted));
    }
    return results;
}

}  // namespace mt3::assignment
