#include "rsp/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "rsp/log.hpp"

namespace rsp {

namespace {

// splitmix64: counter-based stream, one independent instance per run index
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

std::uint64_t run_stream_seed(std::uint64_t seed, std::uint64_t run) {
    // decorrelate the per-run streams from a single user seed
    SplitMix64 mix(seed ^ (0xd1342543de82ef95ULL * (run + 1)));
    return mix.next();
}

Real pairwise_sum(const std::vector<Real>& xs, size_t lo, size_t hi) {
    if (hi - lo <= 16) {
        Real s = 0;
        for (size_t i = lo; i < hi; ++i) s += xs[i];
        return s;
    }
    const size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(xs, lo, mid) + pairwise_sum(xs, mid, hi);
}

} // namespace

MdpSpec build_maze() {
    // squares labeled 1..11 externally, 0-based here; wall at grid (1,1)
    constexpr int kWidth = 4, kHeight = 3;
    const std::pair<int, int> square_pos[11] = {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {0, 1}, {2, 1},
                                                {3, 1}, {0, 2}, {1, 2}, {2, 2}, {3, 2}};
    Index cell[kWidth][kHeight];
    for (auto& col : cell)
        for (auto& c : col) c = -1;
    for (Index s = 0; s < 11; ++s) cell[square_pos[s].first][square_pos[s].second] = s;

    const Index goal = 10; // square 11
    const Index bad = 6;   // square 7, +100 on entry

    auto move = [&](Index s, int dir) -> Index { // 0=N 1=E 2=S 3=W
        static constexpr int dx[4] = {0, 1, 0, -1};
        static constexpr int dy[4] = {1, 0, -1, 0};
        const int x = square_pos[s].first + dx[dir];
        const int y = square_pos[s].second + dy[dir];
        if (x < 0 || x >= kWidth || y < 0 || y >= kHeight || cell[x][y] < 0) return s;
        return cell[x][y];
    };

    MdpSpec mdp;
    mdp.n_states = 11;
    mdp.goal = goal;
    mdp.actions.resize(11);
    for (Index s = 0; s < 11; ++s) {
        if (s == goal) continue;
        for (int dir = 0; dir < 4; ++dir) {
            MdpAction act;
            act.id = dir;
            std::map<Index, Real> outcome;
            if (dir == 0) {
                // north slips east/west with probability 0.1 each
                outcome[move(s, 0)] += 0.8;
                outcome[move(s, 1)] += 0.1;
                outcome[move(s, 3)] += 0.1;
            } else {
                outcome[move(s, dir)] = 1.0;
            }
            Real p_bad = 0;
            for (auto [l, p] : outcome) {
                act.next.emplace_back(l, p);
                if (l == bad) p_bad = p;
            }
            act.cost = 1.0 + 100.0 * p_bad; // entry penalty in expectation
            mdp.actions[static_cast<size_t>(s)].push_back(std::move(act));
        }
    }
    mdp.resolve_priors();
    return mdp;
}

StepCostFn maze_outcome_cost() {
    return [](Index, Index, Index outcome) -> Real { return outcome == 6 ? 101.0 : 1.0; };
}

SimResult simulate_policy(const MdpSpec& mdp, const std::vector<std::vector<Real>>& policy,
                          const SimConfig& cfg) {
    if (cfg.runs < 1 || cfg.max_steps < 1) throw Error("runs and max_steps must be >= 1");
    const Index source = 0;

    std::vector<Real> costs(static_cast<size_t>(cfg.runs), 0.0);
    long long truncated = 0;
    for (long long r = 0; r < cfg.runs; ++r) {
        SplitMix64 rng(run_stream_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        Index state = source;
        Real total = 0;
        long long steps = 0;
        while (state != mdp.goal) {
            if (steps++ >= cfg.max_steps) {
                ++truncated;
                break;
            }
            const auto& acts = mdp.actions[static_cast<size_t>(state)];
            const auto& row = policy[static_cast<size_t>(state)];
            // sample an action from the policy row
            Real u = rng.uniform();
            size_t a = 0;
            for (; a + 1 < row.size(); ++a) {
                if (u < row[a]) break;
                u -= row[a];
            }
            // then the next state from the environment
            Real v = rng.uniform();
            const auto& next = acts[a].next;
            size_t o = 0;
            for (; o + 1 < next.size(); ++o) {
                if (v < next[o].second) break;
                v -= next[o].second;
            }
            const Index outcome = next[o].first;
            total += cfg.step_cost ? cfg.step_cost(state, static_cast<Index>(a), outcome)
                                   : acts[a].cost;
            state = outcome;
        }
        costs[static_cast<size_t>(r)] = total;
    }

    SimResult out;
    out.runs = cfg.runs;
    out.truncated = truncated;
    out.mean_cost = pairwise_sum(costs, 0, costs.size()) / static_cast<Real>(cfg.runs);
    if (cfg.runs > 1) {
        std::vector<Real> sq(costs.size());
        for (size_t i = 0; i < costs.size(); ++i) {
            const Real d = costs[i] - out.mean_cost;
            sq[i] = d * d;
        }
        const Real var = pairwise_sum(sq, 0, sq.size()) / static_cast<Real>(cfg.runs - 1);
        out.std_error = std::sqrt(var / static_cast<Real>(cfg.runs));
    }
    std::map<long long, long long> hist;
    for (Real c : costs) ++hist[std::llround(c)];
    out.histogram.assign(hist.begin(), hist.end());
    if (truncated > 0)
        log::warn("simulate_policy: ", truncated, " of ", cfg.runs, " runs hit max_steps=",
                  cfg.max_steps);
    return out;
}

std::vector<Real> default_theta_grid() {
    std::vector<Real> grid(41);
    for (int i = 0; i < 41; ++i) grid[static_cast<size_t>(i)] = std::pow(10.0, -3.0 + 5.0 * i / 40.0);
    return grid;
}

std::vector<SweepRecord> theta_sweep(const MdpSpec& mdp, std::vector<Real> theta_grid,
                                     const SimConfig& cfg) {
    std::sort(theta_grid.begin(), theta_grid.end());
    std::vector<SweepRecord> records(theta_grid.size());

    std::atomic<size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const size_t idx = cursor.fetch_add(1);
            if (idx >= theta_grid.size()) return;
            SweepRecord& rec = records[idx];
            rec.theta = theta_grid[idx];
            try {
                MdpPolicy policy = soft_value_iteration(mdp, RspParams::fixedpoint(rec.theta));
                rec.iterations = policy.iterations;
                rec.analytic_cost = expected_first_passage_cost(mdp, policy.probs)[0];
                rec.entropy = state_policy_entropy(mdp, policy.probs);
                SimResult sim = simulate_policy(mdp, policy.probs, cfg);
                rec.sim_mean = sim.mean_cost;
                rec.sim_stderr = sim.std_error;
                rec.solved = true;
            } catch (const std::exception& e) {
                rec.solved = false;
                rec.error = e.what();
                log::warn("sweep point theta=", rec.theta, " failed: ", e.what());
            }
            log::info("sweep theta=", rec.theta, " done");
        }
    };

    unsigned n_workers = std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(theta_grid.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return records; // already in ascending theta order
}

std::string policy_report(const MdpSpec& mdp, const MdpPolicy& policy) {
    std::ostringstream os;
    os << "state |";
    Index max_actions = 0;
    for (const auto& acts : mdp.actions)
        max_actions = std::max<Index>(max_actions, static_cast<Index>(acts.size()));
    for (Index a = 0; a < max_actions; ++a) os << "  action " << a << " ";
    os << "\n";
    for (Index k = 0; k < mdp.n_states; ++k) {
        const auto& acts = mdp.actions[static_cast<size_t>(k)];
        if (acts.empty()) continue;
        const auto& row = policy.probs[static_cast<size_t>(k)];
        const size_t best =
            static_cast<size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        os << std::setw(5) << k + 1 << " |";
        for (size_t a = 0; a < row.size(); ++a) {
            os << " " << std::fixed << std::setprecision(4) << std::setw(7) << row[a]
               << (a == best ? "*" : " ") << " ";
        }
        os << "\n";
    }
    return os.str();
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
    out << "theta,analytic_cost,sim_mean,sim_stderr,entropy,iterations\n";
    out << std::setprecision(17);
    for (const auto& r : records) {
        out << r.theta << "," << r.analytic_cost << "," << r.sim_mean << "," << r.sim_stderr << ","
            << r.entropy << "," << r.iterations << "\n";
    }
}

} // namespace rsp
