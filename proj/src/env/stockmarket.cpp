#include <algorithm>

#include "pia/common/error.hpp"
#include "pia/env/environments.hpp"
#include "util.hpp"

namespace pia::env {

StockMarketEnv::StockMarketEnv(StockConfig config) : cfg_(config) {
    if (cfg_.p_lo < 1 || cfg_.p_lo > cfg_.p_hi) throw ConfigError("stock price range must satisfy 1 <= p_lo <= p_hi");
    if (cfg_.initial_capital <= 0) throw ConfigError("initial_capital must be positive");
    if (cfg_.max_capital < cfg_.initial_capital) throw ConfigError("max_capital must be at least initial_capital");
    if (cfg_.max_stocks < 1) throw ConfigError("max_stocks must be positive");
    if (cfg_.step < 0) throw ConfigError("price step must be nonnegative");
    auto in = [&](int v) { return v >= cfg_.p_lo && v <= cfg_.p_hi; };
    if (!in(cfg_.initial_buy_price) || !in(cfg_.initial_sell_price)) {
        throw ConfigError("initial prices outside the price range");
    }
    schema_ = FeatureSchema({{"buy_price", cfg_.p_lo, cfg_.p_hi},
                             {"sell_price", cfg_.p_lo, cfg_.p_hi},
                             {"capital", 0, cfg_.max_capital},
                             {"stocks", 0, cfg_.max_stocks},
                             {"last_action_price", 0, cfg_.p_hi}},
                            {"buy", "hold", "sell"});
}

FactoredState StockMarketEnv::initial_state() const {
    return FactoredState{cfg_.initial_buy_price, cfg_.initial_sell_price, cfg_.initial_capital, 0, 0};
}

std::vector<ActionId> StockMarketEnv::available_actions(const FactoredState&) const {
    return detail::all_actions(schema_);
}

Distribution StockMarketEnv::transition(const FactoredState& s, ActionId a) const {
    if (a >= schema_.num_actions()) throw IllegalAction("stock market action id out of range");
    if (is_terminal(s)) return {{s, 1.0}};
    int capital = s[Capital];
    int stocks = s[Stocks];
    int last = s[LastActionPrice];
    if (a == Buy) {
        const int n = std::min(capital / s[BuyPrice], cfg_.max_stocks - stocks);
        capital -= n * s[BuyPrice];
        stocks += n;
        last = s[BuyPrice];
    } else if (a == Sell) {
        capital += stocks * s[SellPrice];
        stocks = 0;
        last = s[SellPrice];
    }
    capital = std::clamp(capital, 0, cfg_.max_capital);

    Distribution d;
    for (int db : {-cfg_.step, cfg_.step}) {
        for (int ds : {-cfg_.step, cfg_.step}) {
            FactoredState n{detail::reflect(s[BuyPrice] + db, cfg_.p_lo, cfg_.p_hi),
                            detail::reflect(s[SellPrice] + ds, cfg_.p_lo, cfg_.p_hi), capital, stocks, last};
            d.push_back({std::move(n), 0.25});
        }
    }
    return detail::merge(std::move(d));
}

double StockMarketEnv::reward(const FactoredState& s, ActionId a) const {
    if (is_terminal(s)) return 0.0;
    switch (a) {
        case Buy: return std::max(s[Capital] / s[BuyPrice], 0);
        case Hold: return std::max(s[Capital] - cfg_.initial_capital, 0);
        default: return std::max(s[Capital] + s[Stocks] * s[SellPrice] - cfg_.initial_capital, 0);
    }
}

std::vector<std::string> StockMarketEnv::labels(const FactoredState& s) const {
    if (s[Capital] <= 0) return {"bankruptcy"};
    return {};
}

}  // namespace pia::env
