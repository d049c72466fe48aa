//! The daily spatiotemporal MILP: decision variables and constraints for
//! charge/discharge scheduling coupled with travel between nodes, plus
//! solution extraction and an independent feasibility/objective checker.

mod build;
mod extract;
mod validate;

pub use build::build_day_model;
pub use extract::{extract_schedule, objective_of};
pub use validate::{validate_schedule, ConstraintFamily, Violation};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{discount_factor, CostParams, DomainError, Money, StorageAsset, TimeGrid};
use crate::ingest::{CaseArea, MarketDay};
use crate::solve::mip::VarId;

/// Binary values from a solver are rounded when within this distance of 0/1.
pub const BINARY_TOLERANCE: f64 = 1e-4;
/// Tolerance for continuous constraint residuals in validation.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("price matrix is {got_nodes}x{got_intervals}, expected {expected_nodes}x{expected_intervals}")]
    PriceDimensions {
        expected_nodes: usize,
        expected_intervals: usize,
        got_nodes: usize,
        got_intervals: usize,
    },
    #[error("travel tensor is for {got_nodes} nodes x {got_intervals} intervals, expected {expected_nodes}x{expected_intervals}")]
    TensorDimensions {
        expected_nodes: usize,
        expected_intervals: usize,
        got_nodes: usize,
        got_intervals: usize,
    },
    #[error("initial energy {energy} MWh outside [0, {capacity}]")]
    InitialEnergyOutOfBounds { energy: f64, capacity: f64 },
    #[error("initial node index {node} out of range for {count} nodes")]
    InitialNodeOutOfRange { node: usize, count: usize },
    #[error("assignment has {got} values, model expects {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("{var} = {value} is not within {BINARY_TOLERANCE} of an integer")]
    NonIntegralBinary { var: String, value: f64 },
    #[error("no unique parked node at the final interval")]
    NoTerminalNode,
}

/// Everything needed to pose one day's optimization.
#[derive(Debug, Clone, Copy)]
pub struct DayInput<'a> {
    pub area: &'a CaseArea,
    pub prices: &'a MarketDay,
    pub asset: &'a StorageAsset,
    pub costs: &'a CostParams,
    pub grid: &'a TimeGrid,
    /// 1-based day index within the asset's life (drives discounting).
    pub day_index: u32,
    /// Stored energy at the start of the day, MWh.
    pub initial_energy: f64,
    /// Node index (into `area.nodes`) where the day starts.
    pub initial_node: usize,
}

impl<'a> DayInput<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        area: &'a CaseArea,
        prices: &'a MarketDay,
        asset: &'a StorageAsset,
        costs: &'a CostParams,
        grid: &'a TimeGrid,
        day_index: u32,
        initial_energy: f64,
        initial_node: usize,
    ) -> Result<Self, ModelError> {
        asset.validate()?;
        costs.validate()?;
        if day_index == 0 {
            return Err(DomainError::ZeroDayIndex.into());
        }
        let nodes = area.node_count();
        let intervals = grid.intervals_per_day();
        if prices.day_ahead.len() != nodes
            || prices.day_ahead.iter().any(|row| row.len() != intervals)
        {
            return Err(ModelError::PriceDimensions {
                expected_nodes: nodes,
                expected_intervals: intervals,
                got_nodes: prices.day_ahead.len(),
                got_intervals: prices.day_ahead.first().map_or(0, |r| r.len()),
            });
        }
        if area.travel_intervals.nodes() != nodes || area.travel_intervals.intervals() != intervals
        {
            return Err(ModelError::TensorDimensions {
                expected_nodes: nodes,
                expected_intervals: intervals,
                got_nodes: area.travel_intervals.nodes(),
                got_intervals: area.travel_intervals.intervals(),
            });
        }
        if !(0.0..=asset.energy_capacity_mwh).contains(&initial_energy) {
            return Err(ModelError::InitialEnergyOutOfBounds {
                energy: initial_energy,
                capacity: asset.energy_capacity_mwh,
            });
        }
        if initial_node >= nodes {
            return Err(ModelError::InitialNodeOutOfRange {
                node: initial_node,
                count: nodes,
            });
        }
        Ok(DayInput {
            area,
            prices,
            asset,
            costs,
            grid,
            day_index,
            initial_energy,
            initial_node,
        })
    }

    /// Degradation coefficient applied to this day's usage: the life-cycle
    /// marginal cost divided by the day's discount factor.
    pub fn degradation_coefficient(&self) -> f64 {
        let delta = discount_factor(self.day_index, self.costs.discount_rate)
            .expect("day_index validated >= 1");
        self.costs.degradation_cost_usd_per_mwh / delta
    }

    pub fn node_count(&self) -> usize {
        self.area.node_count()
    }

    pub fn intervals(&self) -> usize {
        self.grid.intervals_per_day()
    }
}

/// One day's decisions. Binary matrices use 0/1 in `u8`; power is MW and
/// energy MWh. Interval indices are 0-based; `energy_trace[0]` is the
/// start-of-day energy and `energy_trace[h + 1]` the level after interval `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySchedule {
    pub discharge: Vec<Vec<f64>>,
    pub charge: Vec<Vec<f64>>,
    pub travel: Vec<Vec<Vec<u8>>>,
    pub parked: Vec<Vec<u8>>,
    pub arrive: Vec<Vec<u8>>,
    pub depart: Vec<Vec<u8>>,
    pub aux: Vec<Vec<u8>>,
    pub energy_trace: Vec<f64>,
    pub terminal_energy: f64,
    pub terminal_node: usize,
}

impl DailySchedule {
    /// All-zero schedule parked at `initial_node` for the whole day.
    pub fn idle(input: &DayInput) -> DailySchedule {
        let n = input.node_count();
        let h = input.intervals();
        let rho = input.asset.self_discharge;
        let mut energy_trace = Vec::with_capacity(h + 1);
        let mut energy = input.initial_energy;
        energy_trace.push(energy);
        for _ in 0..h {
            energy *= 1.0 - rho;
            energy_trace.push(energy);
        }
        let mut parked = vec![vec![0u8; h]; n];
        parked[input.initial_node] = vec![1u8; h];
        DailySchedule {
            discharge: vec![vec![0.0; h]; n],
            charge: vec![vec![0.0; h]; n],
            travel: vec![vec![vec![0u8; h]; n]; n],
            parked,
            arrive: vec![vec![0u8; h]; n],
            depart: vec![vec![0u8; h]; n],
            aux: vec![vec![0u8; h]; n],
            terminal_energy: energy,
            terminal_node: input.initial_node,
            energy_trace,
        }
    }
}

/// Revenue and cost components of one day, recomputed from raw decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub revenue: Money,
    pub transport_cost: Money,
    pub degradation_cost: Money,
    pub objective: Money,
    /// MWh-throughput consumed this day (calendar plus cycling).
    pub usage_mwh: f64,
}

/// JSON report for one optimized day.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub date: String,
    pub day_index: u32,
    pub node_ids: Vec<String>,
    pub discharge_mw: Vec<Vec<f64>>,
    pub charge_mw: Vec<Vec<f64>>,
    pub travel: Vec<Vec<Vec<u8>>>,
    pub parked: Vec<Vec<u8>>,
    pub energy_mwh: Vec<f64>,
    pub terminal_energy_mwh: f64,
    pub terminal_node: String,
    pub revenue_usd: Money,
    pub transport_cost_usd: Money,
    pub degradation_cost_usd: Money,
    pub objective_usd: Money,
    pub usage_mwh: f64,
}

impl ScheduleDocument {
    pub fn new(
        input: &DayInput,
        schedule: &DailySchedule,
        breakdown: &ObjectiveBreakdown,
    ) -> ScheduleDocument {
        ScheduleDocument {
            date: input.prices.date.clone(),
            day_index: input.day_index,
            node_ids: input.area.nodes.iter().map(|n| n.node_id.clone()).collect(),
            discharge_mw: schedule.discharge.clone(),
            charge_mw: schedule.charge.clone(),
            travel: schedule.travel.clone(),
            parked: schedule.parked.clone(),
            energy_mwh: schedule.energy_trace.clone(),
            terminal_energy_mwh: schedule.terminal_energy,
            terminal_node: input.area.nodes[schedule.terminal_node].node_id.clone(),
            revenue_usd: breakdown.revenue,
            transport_cost_usd: breakdown.transport_cost,
            degradation_cost_usd: breakdown.degradation_cost,
            objective_usd: breakdown.objective,
            usage_mwh: breakdown.usage_mwh,
        }
    }
}

/// Fixed ordering of the day model's variables, derivable from the instance
/// dimensions alone so extraction never needs the built model.
///
/// Block order: discharge, charge, energy, travel, parked, arrive, depart, aux.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarLayout {
    nodes: usize,
    intervals: usize,
}

impl VarLayout {
    pub fn new(nodes: usize, intervals: usize) -> Self {
        VarLayout { nodes, intervals }
    }

    pub fn for_input(input: &DayInput) -> Self {
        Self::new(input.node_count(), input.intervals())
    }

    fn nh(&self) -> usize {
        self.nodes * self.intervals
    }

    pub fn discharge(&self, n: usize, h: usize) -> VarId {
        VarId(n * self.intervals + h)
    }

    pub fn charge(&self, n: usize, h: usize) -> VarId {
        VarId(self.nh() + n * self.intervals + h)
    }

    /// Energy at the end of 0-based interval `h`.
    pub fn energy(&self, h: usize) -> VarId {
        VarId(2 * self.nh() + h)
    }

    pub fn travel(&self, n: usize, m: usize, h: usize) -> VarId {
        VarId(2 * self.nh() + self.intervals + (n * self.nodes + m) * self.intervals + h)
    }

    pub fn parked(&self, n: usize, h: usize) -> VarId {
        VarId(self.block_after_travel() + n * self.intervals + h)
    }

    pub fn arrive(&self, n: usize, h: usize) -> VarId {
        VarId(self.block_after_travel() + self.nh() + n * self.intervals + h)
    }

    pub fn depart(&self, n: usize, h: usize) -> VarId {
        VarId(self.block_after_travel() + 2 * self.nh() + n * self.intervals + h)
    }

    pub fn aux(&self, n: usize, h: usize) -> VarId {
        VarId(self.block_after_travel() + 3 * self.nh() + n * self.intervals + h)
    }

    fn block_after_travel(&self) -> usize {
        2 * self.nh() + self.intervals + self.nodes * self.nodes * self.intervals
    }

    pub fn total_vars(&self) -> usize {
        self.block_after_travel() + 4 * self.nh()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{flat_prices, small_area, test_asset, test_costs};

    #[test]
    fn layout_is_dense_and_disjoint() {
        let layout = VarLayout::new(3, 8);
        let mut seen = vec![false; layout.total_vars()];
        let mut mark = |id: VarId| {
            assert!(!seen[id.index()], "overlapping id {}", id.index());
            seen[id.index()] = true;
        };
        for n in 0..3 {
            for h in 0..8 {
                mark(layout.discharge(n, h));
                mark(layout.charge(n, h));
                mark(layout.parked(n, h));
                mark(layout.arrive(n, h));
                mark(layout.depart(n, h));
                mark(layout.aux(n, h));
                for m in 0..3 {
                    mark(layout.travel(n, m, h));
                }
            }
        }
        for h in 0..8 {
            mark(layout.energy(h));
        }
        assert!(seen.iter().all(|&s| s), "layout leaves gaps");
    }

    #[test]
    fn day_input_rejects_bad_boundaries() {
        let grid = TimeGrid::with_intervals(4).unwrap();
        let area = small_area(2, &grid, 1);
        let prices = flat_prices(&area, &grid, 10.0);
        let asset = test_asset();
        let costs = test_costs();
        assert!(
            DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 99.0, 0).is_err(),
            "E0 above capacity must be rejected"
        );
        assert!(DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 0.0, 5).is_err());
        assert!(DayInput::new(&area, &prices, &asset, &costs, &grid, 0, 0.0, 0).is_err());
        assert!(DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 0.0, 0).is_ok());
    }

    #[test]
    fn degradation_coefficient_divides_by_discount() {
        let grid = TimeGrid::with_intervals(4).unwrap();
        let area = small_area(1, &grid, 1);
        let prices = flat_prices(&area, &grid, 10.0);
        let asset = test_asset();
        let costs = test_costs();
        let day1 = DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 0.0, 0).unwrap();
        let day400 = DayInput::new(&area, &prices, &asset, &costs, &grid, 400, 0.0, 0).unwrap();
        assert_eq!(day1.degradation_coefficient(), 50.0);
        assert!((day400.degradation_coefficient() - 50.0 * 1.07).abs() < 1e-9);
    }
}
