#include "sofas/projection.hpp"

#include "sofas/error.hpp"

#include <algorithm>
#include <tuple>
#include <map>
#include <ostream>

namespace sofas {

std::int64_t AccumulatorGrid::add(Cell c, int s) {
    CellState& state = cells_[c];
    const std::int64_t before = state.sum;
    state.sum += s;
    state.count += 1;
    ++events_;
    const std::int64_t delta = 2 * before * s + 1;
    metric_ += delta;
    return delta;
}

std::int64_t AccumulatorGrid::accumulate(const Event& e) {
    if (!t_ref_) t_ref_ = e.t;
    return add(project_event(e, flow_, *t_ref_), e.s);
}

std::int64_t AccumulatorGrid::retract(const Event& e) {
    if (!t_ref_) throw ConsistencyError("retract from a grid that never accumulated");
    const Cell c = project_event(e, flow_, *t_ref_);
    auto it = cells_.find(c);
    if (it == cells_.end()) {
        throw ConsistencyError("retract from empty cell (" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")");
    }
    CellState& state = it->second;
    const std::int64_t before = state.sum;
    state.sum -= e.s;
    state.count -= 1;
    --events_;
    const std::int64_t delta = static_cast<std::int64_t>(state.sum) * state.sum - before * before;
    metric_ += delta;
    if (state.count == 0) {
        if (state.sum != 0) throw ConsistencyError("cell emptied with nonzero sum");
        cells_.erase(it);
    }
    return delta;
}

std::int32_t AccumulatorGrid::value(Cell c) const noexcept {
    auto it = cells_.find(c);
    return it == cells_.end() ? 0 : it->second.sum;
}

std::int32_t AccumulatorGrid::count(Cell c) const noexcept {
    auto it = cells_.find(c);
    return it == cells_.end() ? 0 : it->second.count;
}

void AccumulatorGrid::clear() noexcept {
    cells_.clear();
    t_ref_.reset();
    metric_ = 0;
    events_ = 0;
}

void AccumulatorGrid::dump_csv(std::ostream& out) const {
    std::vector<std::pair<Cell, std::int32_t>> rows;
    rows.reserve(cells_.size());
    for (const auto& [c, state] : cells_) rows.emplace_back(c, state.sum);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first.y, a.first.x) < std::tie(b.first.y, b.first.x);
    });
    out << "x,y,f\n";
    for (const auto& [c, f] : rows) out << c.x << ',' << c.y << ',' << f << '\n';
}

std::int64_t metric_bruteforce(std::span<const Event> events, const FlowVector& flow,
                               std::optional<std::int64_t> t_ref_us) {
    if (events.empty()) return 0;
    const std::int64_t t_ref = t_ref_us.value_or(events.front().t);
    std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> f;
    for (const Event& e : events) {
        const Cell c = project_event(e, flow, t_ref);
        f[{c.x, c.y}] += e.s;
    }
    std::int64_t m = 0;
    for (const auto& [_, value] : f) m += value * value;
    return m;
}

} // namespace sofas
