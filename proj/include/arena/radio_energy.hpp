#pragma once

// Radio model (transmit power, airtime, interference footprint) and the
// per-node energy ledger.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "arena/core.hpp"

namespace arena {

struct RadioConfig {
    double range = 250.0;              // m
    double bandwidth = 2e6;            // bit/s
    bool power_control = false;
    double fixed_tx_power = 1.4;       // W, used when control is off
    double rx_power = 0.967;           // W
    double circuit_power = 1.1182;     // W, distance-independent part
    double pathloss_coefficient = 7.2e-11;  // W / m^4

    void validate() const {
        if (range <= 0.0) throw std::invalid_argument("range_m: must be positive");
        if (bandwidth <= 0.0) throw std::invalid_argument("bandwidth_bps: must be positive");
        const double at_range = circuit_power + pathloss_coefficient * range * range * range * range;
        if (fixed_tx_power + 1e-3 < at_range) {
            throw std::invalid_argument("fixed tx power below controlled power at full range");
        }
    }
};

// Power needed to reach `distance` with the fourth-power path loss model.
// With control off the radio always spends the fixed full-range power.
inline double tx_power(double dist, const RadioConfig& radio) {
    if (dist < 0.0 || dist > radio.range * (1.0 + 1e-12)) {
        throw std::invalid_argument("tx_power: distance outside radio range");
    }
    if (!radio.power_control) return radio.fixed_tx_power;
    return radio.circuit_power + radio.pathloss_coefficient * dist * dist * dist * dist;
}

inline double packet_airtime(double bytes, const RadioConfig& radio) {
    if (bytes <= 0.0) throw std::invalid_argument("packet_airtime: bytes <= 0");
    return bytes * 8.0 / radio.bandwidth;
}

// Area a unicast transmission denies to other senders. Shrinks to the hop
// distance when power control trims the transmit power.
inline double interference_radius(double hop_dist, const RadioConfig& radio) {
    if (hop_dist < 0.0 || hop_dist > radio.range * (1.0 + 1e-12)) {
        throw std::invalid_argument("interference_radius: distance outside radio range");
    }
    return radio.power_control ? hop_dist : radio.range;
}

enum class EnergyCategory : int {
    data_tx = 0,
    data_rx,
    control_tx,
    control_rx,
    beacon_tx,
    beacon_rx,
    discovery_tx,
    discovery_rx,
};

inline constexpr int kEnergyCategoryCount = 8;

inline constexpr std::array<std::string_view, kEnergyCategoryCount> kEnergyCategoryNames = {
    "data_tx",      "data_rx",      "control_tx",   "control_rx",
    "beacon_tx",    "beacon_rx",    "discovery_tx", "discovery_rx",
};

// Tracks residual energy and categorised debits. A node dies the moment a
// debit drives its residual to zero; the final debit is truncated at the
// crossing so residual + total debits always equals the initial budget.
class EnergyLedger {
  public:
    struct NodeAccount {
        double initial = 0.0;
        double residual = 0.0;
        std::array<double, kEnergyCategoryCount> debits{};
        std::optional<double> death_time;
    };

    EnergyLedger() = default;
    EnergyLedger(int n_nodes, double initial_energy) {
        if (n_nodes <= 0) throw std::invalid_argument("EnergyLedger: n_nodes <= 0");
        if (initial_energy <= 0.0) throw std::invalid_argument("EnergyLedger: energy <= 0");
        nodes_.resize(static_cast<std::size_t>(n_nodes));
        for (auto& acct : nodes_) {
            acct.initial = initial_energy;
            acct.residual = initial_energy;
        }
    }

    int size() const { return static_cast<int>(nodes_.size()); }
    bool alive(NodeId n) const { return !at(n).death_time.has_value(); }
    double residual(NodeId n) const { return at(n).residual; }
    double consumed(NodeId n) const { return at(n).initial - at(n).residual; }
    const NodeAccount& account(NodeId n) const { return at(n); }
    int dead_debit_attempts() const { return dead_debit_attempts_; }

    // Returns true when this debit kills the node.
    bool debit(NodeId n, double energy, EnergyCategory cat, double now) {
        if (energy < 0.0) throw std::invalid_argument("debit: negative energy");
        NodeAccount& acct = at(n);
        if (acct.death_time) {
            ++dead_debit_attempts_;
            return false;
        }
        const double applied = std::min(energy, acct.residual);
        acct.residual -= applied;
        acct.debits[static_cast<int>(cat)] += applied;
        if (acct.residual <= 0.0 && applied > 0.0) {
            acct.residual = 0.0;
            acct.death_time = now;
            return true;
        }
        return false;
    }

    std::vector<double> death_times_sorted() const {
        std::vector<double> out;
        for (const auto& acct : nodes_) {
            if (acct.death_time) out.push_back(*acct.death_time);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

  private:
    const NodeAccount& at(NodeId n) const {
        if (n < 0 || n >= size()) throw std::out_of_range("EnergyLedger: bad node id");
        return nodes_[static_cast<std::size_t>(n)];
    }
    NodeAccount& at(NodeId n) {
        if (n < 0 || n >= size()) throw std::out_of_range("EnergyLedger: bad node id");
        return nodes_[static_cast<std::size_t>(n)];
    }

    std::vector<NodeAccount> nodes_;
    int dead_debit_attempts_ = 0;
};

}  // namespace arena
