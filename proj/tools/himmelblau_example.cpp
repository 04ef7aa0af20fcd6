// Finds the four minima of Himmelblau's function with the elitist variant,
// then identifies and scores them against the checked-in ground truth.
#include "kbbbc/kbbbc.hpp"

#include <cstdio>

int main() {
    using namespace kbbbc;
    const auto entry = resolve_benchmark("himmelblau");

    auto cfg = KbbbcConfig::defaults_for(entry.spec.m, entry.spec.dim());
    cfg.elitist = true;
    cfg.generations = 300;
    cfg.seed = 7;
    const auto result = run_kbbbc(entry.spec, cfg);

    RngStream rng = RngStream(cfg.seed).derive(Substream::Identification);
    const auto optima = identify_optima(result.centers.points, entry.spec.m, entry.spec.direction, rng);

    std::vector<Point> found;
    for (const auto& ind : optima.points) {
        std::printf("%-40s f = %.3e\n", format_point(ind.x).c_str(), *ind.fitness);
        found.push_back(ind.x);
    }
    const auto pairing = match_optima(found, entry.known_optima);
    std::printf("detected %zu/%zu, a_src = %.3e, %llu evaluations\n",
                detected_count(found, entry.known_optima, entry.spec.detection_radius), entry.spec.m,
                accuracy_search(found, entry.known_optima, pairing),
                static_cast<unsigned long long>(result.evaluations));
}
