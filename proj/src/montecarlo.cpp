#include "ssdopt/montecarlo.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "ssdopt/errors.hpp"

namespace ssdopt {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct Failure {
    std::int64_t replicate;
    std::uint64_t seed;
    std::string what;
};

}  // namespace

std::uint64_t derive_replicate_seed(std::uint64_t master_seed, std::uint64_t eval_index,
                                    std::uint64_t replicate_index) {
    const std::uint64_t counter = (eval_index << 32) ^ (replicate_index & 0xffffffffULL);
    return splitmix64(counter + splitmix64(master_seed));
}

McEstimate mc_estimate(const TrialSimulator& sim, const DesignPoint& point, const Hypothesis& hyp,
                       std::int64_t n_samples, std::uint64_t seed, std::uint64_t eval_index,
                       int workers) {
    if (n_samples < 1) throw PreconditionError("mc_estimate requires n_samples >= 1");
    workers = std::clamp<int>(workers, 1, static_cast<int>(std::min<std::int64_t>(n_samples, 256)));

    // Each worker owns a contiguous replicate block; the earliest failing replicate wins.
    std::vector<std::int64_t> counts(workers, 0);
    std::vector<std::optional<Failure>> failures(workers);
    auto run_block = [&](int w) {
        const std::int64_t begin = n_samples * w / workers;
        const std::int64_t end = n_samples * (w + 1) / workers;
        std::int64_t hits = 0;
        for (std::int64_t r = begin; r < end; ++r) {
            const auto rs = derive_replicate_seed(seed, eval_index, static_cast<std::uint64_t>(r));
            Rng rng(rs);
            try {
                if (sim(point, hyp, rng)) ++hits;
            } catch (const std::exception& e) {
                failures[w] = Failure{r, rs, e.what()};
                return;
            } catch (...) {
                failures[w] = Failure{r, rs, "unknown exception"};
                return;
            }
        }
        counts[w] = hits;
    };

    if (workers == 1) {
        run_block(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_block, w);
        for (auto& t : pool) t.join();
    }

    for (const auto& f : failures) {
        if (f) {
            throw SimulationError("simulator failed at replicate " + std::to_string(f->replicate) +
                                      " (replicate seed " + std::to_string(f->seed) +
                                      ", hypothesis '" + hyp.name + "'): " + f->what,
                                  f->replicate, f->seed);
        }
    }

    McEstimate est;
    est.n_samples = n_samples;
    for (auto c : counts) est.successes += c;
    est.mean = static_cast<double>(est.successes) / static_cast<double>(n_samples);
    est.variance = mc_variance(est.mean, n_samples);
    return est;
}

}  // namespace ssdopt
