#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gridreconf/case_model.hpp"

namespace gridreconf {

/// Four aggregates per island (root order), then a constant 1:
///   total load P [MW], total load Q [MVAr],
///   load moment sum_b R(root->b) * |S_load,b| [pu * MVA],
///   resistance of the island's closed branches [pu].
struct FeatureVector {
    std::vector<double> values;

    bool operator==(const FeatureVector&) const = default;
};

std::vector<std::string> feature_names(const NetworkCase& net);

/// Throws NotRadial.
FeatureVector featurize(const NetworkCase& net, const Configuration& config);

struct LinearModel {
    std::vector<std::string> features;
    std::vector<double> coefficients;  // empty: untrained, ranks nothing
    std::size_t training_count = 0;
    double r_squared = 0.0;

    bool trained() const noexcept { return !coefficients.empty(); }
    double predict(const FeatureVector& x) const;
};

struct Sample {
    FeatureVector features;
    double fo_value = 0.0;
};

inline constexpr double ridge_lambda = 1e-8;

/// Least squares with ridge damping. Fewer than dimension + 1 samples gives the
/// untrained model.
LinearModel fit(const std::vector<Sample>& samples, std::vector<std::string> names = {});

/// Permutation sorting `candidates` by ascending prediction; stable, identity when untrained.
std::vector<std::size_t> rank_order(const LinearModel& model, const std::vector<FeatureVector>& candidates);

std::vector<Configuration> rank_candidates(const LinearModel& model, const NetworkCase& net,
                                           const std::vector<Configuration>& configs);

/// {features, coefficients, training_count, r_squared}
std::string model_to_json(const LinearModel& model);
/// Throws ParseError.
LinearModel model_from_json(std::string_view text);

}  // namespace gridreconf
