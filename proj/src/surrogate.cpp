#include "gridreconf/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

#include <Eigen/Dense>
#include <json.hpp>

namespace gridreconf {

std::vector<std::string> feature_names(const NetworkCase& net) {
    std::vector<std::string> names;
    for (int root : net.roots()) {
        const std::string prefix = "feeder" + std::to_string(root) + "_";
        names.push_back(prefix + "p_load");
        names.push_back(prefix + "q_load");
        names.push_back(prefix + "load_moment");
        names.push_back(prefix + "r_sum");
    }
    names.emplace_back("constant");
    return names;
}

FeatureVector featurize(const NetworkCase& net, const Configuration& config) {
    FeatureVector out;
    out.values.reserve(net.roots().size() * 4 + 1);
    for (const auto& island : islands(net, config)) {
        double p = 0.0, q = 0.0, moment = 0.0, r_sum = 0.0;
        std::map<int, std::vector<std::pair<int, double>>> adjacent;
        for (int id : island.branches) {
            const Branch& br = net.branch(id);
            adjacent[br.from_bus].emplace_back(br.to_bus, br.r);
            adjacent[br.to_bus].emplace_back(br.from_bus, br.r);
            r_sum += br.r;
        }
        std::map<int, double> path_r{{island.root, 0.0}};
        std::deque<int> queue{island.root};
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (auto [w, r] : adjacent[u])
                if (path_r.try_emplace(w, path_r[u] + r).second) queue.push_back(w);
        }
        for (int id : island.buses) {
            const Bus& bus = net.bus(id);
            p += bus.p_load;
            q += bus.q_load;
            moment += path_r[id] * std::hypot(bus.p_load, bus.q_load);
        }
        out.values.insert(out.values.end(), {p, q, moment, r_sum});
    }
    out.values.push_back(1.0);
    return out;
}

double LinearModel::predict(const FeatureVector& x) const {
    if (!trained()) return 0.0;
    double y = 0.0;
    const std::size_t n = std::min(x.values.size(), coefficients.size());
    for (std::size_t i = 0; i < n; ++i) y += coefficients[i] * x.values[i];
    return y;
}

LinearModel fit(const std::vector<Sample>& samples, std::vector<std::string> names) {
    LinearModel model;
    model.features = std::move(names);
    model.training_count = samples.size();
    if (samples.empty()) return model;

    const std::size_t dim = samples.front().features.values.size();
    if (samples.size() < dim + 1) return model;

    const auto n = static_cast<Eigen::Index>(samples.size());
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        if (s.features.values.size() != dim) return model;
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = s.features.values[static_cast<std::size_t>(j)];
        y(i) = s.fo_value;
    }

    Eigen::MatrixXd normal = x.transpose() * x;
    normal.diagonal().array() += ridge_lambda;
    const Eigen::VectorXd beta = normal.ldlt().solve(x.transpose() * y);
    if (!beta.allFinite()) return model;

    model.coefficients.assign(beta.data(), beta.data() + beta.size());
    const Eigen::VectorXd residual = y - x * beta;
    const double ss_res = residual.squaredNorm();
    const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
    model.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return model;
}

std::vector<std::size_t> rank_order(const LinearModel& model, const std::vector<FeatureVector>& candidates) {
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (!model.trained()) return order;
    std::vector<double> predicted;
    predicted.reserve(candidates.size());
    for (const auto& c : candidates) predicted.push_back(model.predict(c));
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return predicted[a] < predicted[b]; });
    return order;
}

std::vector<Configuration> rank_candidates(const LinearModel& model, const NetworkCase& net,
                                           const std::vector<Configuration>& configs) {
    if (!model.trained()) return configs;
    std::vector<FeatureVector> features;
    features.reserve(configs.size());
    for (const auto& c : configs) features.push_back(featurize(net, c));
    std::vector<Configuration> out;
    out.reserve(configs.size());
    for (std::size_t i : rank_order(model, features)) out.push_back(configs[i]);
    return out;
}

std::string model_to_json(const LinearModel& model) {
    nlohmann::ordered_json j;
    j["features"] = model.features;
    j["coefficients"] = model.coefficients;
    j["training_count"] = model.training_count;
    j["r_squared"] = model.r_squared;
    return j.dump(2) + "\n";
}

LinearModel model_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, "model", e.what());
    }
    LinearModel model;
    try {
        model.features = j.at("features").get<std::vector<std::string>>();
        model.coefficients = j.at("coefficients").get<std::vector<double>>();
        model.training_count = j.at("training_count").get<std::size_t>();
        model.r_squared = j.at("r_squared").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, "model", e.what());
    }
    if (!model.features.empty() && model.trained() && model.features.size() != model.coefficients.size())
        throw ParseError(1, "coefficients", "coefficient count does not match feature count");
    return model;
}

}  // namespace gridreconf
