#include <cmath>

#include "gridreconf/powerflow.hpp"

namespace gridreconf {

AdmittanceMatrix build_admittance(const NetworkCase& net, const Island& island) {
    AdmittanceMatrix out;
    out.bus_ids.assign(island.buses.begin(), island.buses.end());
    for (std::size_t i = 0; i < out.bus_ids.size(); ++i)
        out.position.emplace(out.bus_ids[i], static_cast<Eigen::Index>(i));

    const auto n = static_cast<Eigen::Index>(out.bus_ids.size());
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(island.branches.size() * 4 + out.bus_ids.size());

    for (int bus_id : out.bus_ids) {
        const Bus& bus = net.bus(bus_id);
        const auto i = out.index_of(bus_id);
        triplets.emplace_back(i, i, Complex(bus.g_shunt, bus.b_shunt));
    }

    for (int branch_id : island.branches) {
        const Branch& br = net.branch(branch_id);
        if (br.r == 0.0 && br.x == 0.0) throw SingularBranch(br.id);
        const auto f = out.index_of(br.from_bus);
        const auto t = out.index_of(br.to_bus);
        const Complex y_series = 1.0 / Complex(br.r, br.x);
        const Complex y_charge(0.0, br.b_shunt / 2.0);
        const double tap = br.tap;
        triplets.emplace_back(f, f, (y_series + y_charge) / (tap * tap));
        triplets.emplace_back(t, t, y_series + y_charge);
        triplets.emplace_back(f, t, -y_series / tap);
        triplets.emplace_back(t, f, -y_series / tap);
    }

    out.y.resize(n, n);
    out.y.setFromTriplets(triplets.begin(), triplets.end());
    out.y.makeCompressed();
    return out;
}

}  // namespace gridreconf
