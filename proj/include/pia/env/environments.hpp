#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pia/model/provider.hpp"

namespace pia::env {

struct Cell {
    int x = 0;
    int y = 0;

    bool operator==(const Cell&) const = default;
};

struct TaxiConfig {
    int grid_w = 5;
    int grid_h = 5;
    std::vector<Cell> pickup_locations{{0, 0}, {0, 4}, {4, 0}, {4, 4}};
    Cell gas_station{1, 2};
    int max_fuel = 10;
    int max_jobs = 2;

    /// 3x3 grid, fuel 5, one job.
    static TaxiConfig reduced();
};

struct CollisionConfig {
    int grid_w = 6;
    int grid_h = 6;
    double slickness = 0.1;
    Cell agent_start{0, 0};
    Cell obs1_start{5, 5};
    Cell obs2_start{5, 0};
};

struct SmartGridConfig {
    int max_energy = 2;            // surplus above this shuts production down
    int max_production_level = 3;  // per source
    int consumption_lo = 1;
    int consumption_hi = 4;
    int initial_renewable = 1;
    int initial_non_renewable = 1;
    int initial_consumption = 2;
};

struct StockConfig {
    int initial_capital = 10;
    int p_lo = 1;
    int p_hi = 5;
    int max_stocks = 5;
    int step = 1;
    int initial_buy_price = 3;
    int initial_sell_price = 3;
    int max_capital = 40;
};

struct FreewayConfig {
    int lanes = 4;
    int lane_width = 7;
    double spawn_probability = 0.3;

    /// 3 lanes of width 5.
    static FreewayConfig mini();
};

class TaxiEnv final : public ModelProvider {
public:
    enum Action : ActionId { North, East, South, West, PickUp, Drop };
    enum FeatureIdx : std::size_t { X, Y, XLoc, YLoc, XDest, YDest, Fuel, Pass, Jobs, Done };

    explicit TaxiEnv(TaxiConfig config = {});

    const FeatureSchema& schema() const override { return schema_; }
    FactoredState initial_state() const override;
    std::vector<ActionId> available_actions(const FactoredState& s) const override;
    Distribution transition(const FactoredState& s, ActionId a) const override;
    double reward(const FactoredState& s, ActionId a) const override;
    std::vector<std::string> labels(const FactoredState& s) const override;
    std::vector<std::string> label_names() const override;
    bool is_terminal(const FactoredState& s) const override { return s[Done] != 0; }

    const TaxiConfig& config() const noexcept { return cfg_; }

private:
    TaxiConfig cfg_;
    FeatureSchema schema_;
};

class CollisionEnv final : public ModelProvider {
public:
    enum Action : ActionId { North, East, South, West };
    enum FeatureIdx : std::size_t { X, Y, Obs1X, Obs1Y, Obs2X, Obs2Y, Done };

    explicit CollisionEnv(CollisionConfig config = {});

    const FeatureSchema& schema() const override { return schema_; }
    FactoredState initial_state() const override;
    std::vector<ActionId> available_actions(const FactoredState& s) const override;
    Distribution transition(const FactoredState& s, ActionId a) const override;
    double reward(const FactoredState& s, ActionId a) const override;
    std::vector<std::string> labels(const FactoredState& s) const override;
    std::vector<std::string> label_names() const override { return {"collision"}; }
    bool is_terminal(const FactoredState& s) const override { return s[Done] != 0; }

private:
    CollisionConfig cfg_;
    FeatureSchema schema_;
};

class SmartGridEnv final : public ModelProvider {
public:
    enum Action : ActionId { IncreaseRenewable, IncreaseNonRenewable, DecreaseRenewable, DecreaseBoth };
    enum FeatureIdx : std::size_t { Energy, Blackout, Renewable, NonRenewable, Consumption };

    explicit SmartGridEnv(SmartGridConfig config = {});

    const FeatureSchema& schema() const override { return schema_; }
    FactoredState initial_state() const override;
    std::vector<ActionId> available_actions(const FactoredState& s) const override;
    Distribution transition(const FactoredState& s, ActionId a) const override;
    double reward(const FactoredState& s, ActionId a) const override;
    std::vector<std::string> labels(const FactoredState& s) const override;
    std::vector<std::string> label_names() const override { return {"blackout"}; }
    bool is_terminal(const FactoredState& s) const override { return s[Blackout] != 0; }

private:
    FactoredState make_state(int renewable, int non_renewable, int consumption, bool blackout) const;

    SmartGridConfig cfg_;
    FeatureSchema schema_;
};

class StockMarketEnv final : public ModelProvider {
public:
    enum Action : ActionId { Buy, Hold, Sell };
    enum FeatureIdx : std::size_t { BuyPrice, SellPrice, Capital, Stocks, LastActionPrice };

    explicit StockMarketEnv(StockConfig config = {});

    const FeatureSchema& schema() const override { return schema_; }
    FactoredState initial_state() const override;
    std::vector<ActionId> available_actions(const FactoredState& s) const override;
    Distribution transition(const FactoredState& s, ActionId a) const override;
    double reward(const FactoredState& s, ActionId a) const override;
    std::vector<std::string> labels(const FactoredState& s) const override;
    std::vector<std::string> label_names() const override { return {"bankruptcy"}; }
    bool is_terminal(const FactoredState& s) const override { return s[Capital] <= 0; }

private:
    StockConfig cfg_;
    FeatureSchema schema_;
};

/// Abstract Freeway. Feature 0 is the chicken's row (1..lanes are lanes,
/// lanes+1 is the far side), feature 1 flags a hit, and the remaining
/// features are binary car pixels cell_<lane>_<col> in row-major order.
class FreewayEnv final : public ModelProvider {
public:
    enum Action : ActionId { Up, Down, Noop };
    static constexpr std::size_t kChicken = 0;
    static constexpr std::size_t kHit = 1;
    static constexpr std::size_t kFirstCell = 2;

    explicit FreewayEnv(FreewayConfig config = {});

    const FeatureSchema& schema() const override { return schema_; }
    FactoredState initial_state() const override;
    std::vector<ActionId> available_actions(const FactoredState& s) const override;
    Distribution transition(const FactoredState& s, ActionId a) const override;
    double reward(const FactoredState& s, ActionId a) const override;
    std::vector<std::string> labels(const FactoredState& s) const override;
    std::vector<std::string> label_names() const override { return {"crossed", "hit"}; }
    bool is_terminal(const FactoredState& s) const override;

    const FreewayConfig& config() const noexcept { return cfg_; }
    int middle_column() const noexcept { return cfg_.lane_width / 2; }
    /// Feature index of the pixel at (lane in 1..lanes, col).
    std::size_t cell_feature(int lane, int col) const;

private:
    FreewayConfig cfg_;
    FeatureSchema schema_;
};

/// The three-state example MDP over x in [0, 4] with actions a, b, c.
class Fig2Env final : public ModelProvider {
public:
    Fig2Env();

    const FeatureSchema& schema() const override { return schema_; }
    FactoredState initial_state() const override { return FactoredState{1}; }
    std::vector<ActionId> available_actions(const FactoredState& s) const override;
    Distribution transition(const FactoredState& s, ActionId a) const override;
    double reward(const FactoredState& s, ActionId a) const override;
    std::vector<std::string> labels(const FactoredState& s) const override;
    std::vector<std::string> label_names() const override { return {}; }

private:
    FeatureSchema schema_;
};

void from_json(const nlohmann::json& j, TaxiConfig& c);
void from_json(const nlohmann::json& j, CollisionConfig& c);
void from_json(const nlohmann::json& j, SmartGridConfig& c);
void from_json(const nlohmann::json& j, StockConfig& c);
void from_json(const nlohmann::json& j, FreewayConfig& c);
nlohmann::json to_json(const TaxiConfig& c);
nlohmann::json to_json(const CollisionConfig& c);
nlohmann::json to_json(const SmartGridConfig& c);
nlohmann::json to_json(const StockConfig& c);
nlohmann::json to_json(const FreewayConfig& c);

const std::vector<std::string>& environment_names();

/// Builds a provider by name (taxi, collision, smartgrid, stockmarket,
/// freeway, fig2). Keys missing from `config` keep their defaults; unknown
/// keys and invalid values throw ConfigError.
std::unique_ptr<ModelProvider> make_environment(const std::string& name, const nlohmann::json& config = {});

/// The effective configuration, defaults filled in.
nlohmann::json resolved_config(const std::string& name, const nlohmann::json& config = {});

}  // namespace pia::env
