//! Shared fixtures for unit tests.

use crate::domain::{CostParams, StorageAsset, TimeGrid};
use crate::ingest::{CaseArea, MarketDay, Node, TravelTensor};

/// Area of `n` co-located nodes `N0..` with a constant travel tensor.
pub fn small_area(n: usize, grid: &TimeGrid, travel_ticks: u32) -> CaseArea {
    let nodes: Vec<Node> = (0..n)
        .map(|i| Node::new(format!("N{i}"), 35.0, -120.0 + 0.01 * i as f64).unwrap())
        .collect();
    CaseArea {
        center: nodes[0].clone(),
        radius_miles: 10.0,
        travel_intervals: TravelTensor::uniform(n, grid.intervals_per_day(), travel_ticks),
        nodes,
    }
}

/// One market day with the same price everywhere.
pub fn flat_prices(area: &CaseArea, grid: &TimeGrid, price: f64) -> MarketDay {
    prices_from(area, grid, |_, _| price)
}

/// One market day with prices given per (node, interval).
pub fn prices_from(
    area: &CaseArea,
    grid: &TimeGrid,
    mut price: impl FnMut(usize, usize) -> f64,
) -> MarketDay {
    let h = grid.intervals_per_day();
    MarketDay {
        date: "2018-01-01".to_string(),
        day_ahead: (0..area.node_count())
            .map(|n| (0..h).map(|t| price(n, t)).collect())
            .collect(),
        real_time: None,
    }
}

/// Paper-default asset: 2.7 MWh / 2.7 MW, 95% efficient, 10.8 GWh budget.
pub fn test_asset() -> StorageAsset {
    StorageAsset {
        energy_capacity_mwh: 2.7,
        power_capacity_mw: 2.7,
        efficiency: 0.95,
        self_discharge: 0.0,
        calendar_usage_mwh_per_day: 1.0,
        lifecycle_usage_limit_mwh: 10_800.0,
    }
}

/// Paper-default costs: $20/h transport, $50/MWh degradation, 7% discount.
pub fn test_costs() -> CostParams {
    CostParams {
        transport_cost_usd_per_hour: 20.0,
        degradation_cost_usd_per_mwh: 50.0,
        discount_rate: 0.07,
    }
}

/// Lossless variant used by oracle-exactness tests: unit efficiency,
/// no self-discharge, energy capacity an integer multiple of `P_MAX * dh`.
pub fn lossless_asset(energy_capacity_mwh: f64, power_capacity_mw: f64) -> StorageAsset {
    StorageAsset {
        energy_capacity_mwh,
        power_capacity_mw,
        efficiency: 1.0,
        self_discharge: 0.0,
        calendar_usage_mwh_per_day: 1.0,
        lifecycle_usage_limit_mwh: 10_800.0,
    }
}
