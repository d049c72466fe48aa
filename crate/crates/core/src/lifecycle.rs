//! Rolling daily optimization over the asset's life: the terminal storage
//! state and location of each day seed the next, usage accumulates against
//! the throughput budget, and discounted daily profits sum to the life-cycle
//! revenue. Also: the stationary single-node baseline and real-time price
//! settlement of day-ahead schedules.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{discount_factor, CostParams, Money, StorageAsset, TimeGrid};
use crate::ingest::{CaseArea, MarketDay};
use crate::model::{
    build_day_model, extract_schedule, DailySchedule, DayInput, ModelError, ObjectiveBreakdown,
};
use crate::solve::{MipBackend, SolutionStatus, SolveError, SolverOptions};

#[derive(Debug, Error)]
pub enum LifecycleError {
    #[error("no price days supplied")]
    EmptyPriceFile,
    #[error("day {day}: {source}")]
    Day {
        day: u32,
        #[source]
        source: ModelError,
    },
    #[error("day {day}: solver returned {status:?}")]
    DayNotSolved { day: u32, status: SolutionStatus },
    #[error("day {day}: {source}")]
    Solver {
        day: u32,
        #[source]
        source: SolveError,
    },
    #[error("usage stalled at zero on day {day}; the throughput budget would never be reached")]
    NonTerminating { day: u32 },
    #[error("real-time price matrix is {got_nodes}x{got_intervals}, expected {expected_nodes}x{expected_intervals}")]
    RealTimeDimensions {
        expected_nodes: usize,
        expected_intervals: usize,
        got_nodes: usize,
        got_intervals: usize,
    },
    #[error("no real-time prices for date {0}")]
    MissingRealTimePrices(String),
}

/// One simulated day in the ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub day_index: u32,
    /// Optimal objective f* (revenue minus transport minus degradation charge).
    pub objective: Money,
    /// Degradation charge at the discounted coefficient.
    pub degradation_cost: Money,
    pub usage_mwh: f64,
    /// delta_t * (f* + C_DEG): the degradation charge is an opportunity cost,
    /// added back before discounting.
    pub discounted_profit: Money,
    pub initial_energy_mwh: f64,
    pub initial_node: String,
    pub terminal_energy_mwh: f64,
    pub terminal_node: String,
}

/// Full life-cycle accounting: per-day records up to the termination day `T`,
/// the largest day count whose cumulative usage stays within the budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleLedger {
    pub per_day: Vec<DayRecord>,
    pub cumulative_usage_mwh: f64,
    pub termination_day: u32,
    pub lifecycle_revenue: Money,
    /// Usage of day T+1, the first day excluded by the budget (when the
    /// simulation ran that far).
    pub first_excluded_usage_mwh: Option<f64>,
}

/// JSON summary emitted next to the ledger CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub lifecycle_revenue_usd: Money,
    pub termination_day: u32,
    pub total_usage_mwh: f64,
}

impl LifecycleLedger {
    pub fn summary(&self) -> LedgerSummary {
        LedgerSummary {
            lifecycle_revenue_usd: self.lifecycle_revenue,
            termination_day: self.termination_day,
            total_usage_mwh: self.cumulative_usage_mwh,
        }
    }

    /// Write the per-day CSV:
    /// `day,objective_usd,degradation_usd,usage_mwh,discounted_profit_usd,terminal_energy_mwh,terminal_node`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            day: u32,
            objective_usd: f64,
            degradation_usd: f64,
            usage_mwh: f64,
            discounted_profit_usd: f64,
            terminal_energy_mwh: f64,
            terminal_node: &'a str,
        }
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.per_day {
            w.serialize(Row {
                day: r.day_index,
                objective_usd: r.objective.value(),
                degradation_usd: r.degradation_cost.value(),
                usage_mwh: r.usage_mwh,
                discounted_profit_usd: r.discounted_profit.value(),
                terminal_energy_mwh: r.terminal_energy_mwh,
                terminal_node: &r.terminal_node,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Simulate the asset's whole life over `area`, recycling `price_days`
/// (day `t` uses `price_days[(t-1) mod len]`). Day 1 starts empty at the
/// area center; later days carry the previous terminal state.
pub fn simulate_lifecycle(
    area: &CaseArea,
    price_days: &[MarketDay],
    asset: &StorageAsset,
    costs: &CostParams,
    grid: &TimeGrid,
    backend: &dyn MipBackend,
    options: &SolverOptions,
) -> Result<LifecycleLedger, LifecycleError> {
    simulate_lifecycle_with(area, price_days, asset, costs, grid, backend, options, |_, _| {})
}

/// As [`simulate_lifecycle`], invoking `on_day` with each included day's
/// schedule (for flow aggregation or settlement).
#[allow(clippy::too_many_arguments)]
pub fn simulate_lifecycle_with(
    area: &CaseArea,
    price_days: &[MarketDay],
    asset: &StorageAsset,
    costs: &CostParams,
    grid: &TimeGrid,
    backend: &dyn MipBackend,
    options: &SolverOptions,
    mut on_day: impl FnMut(u32, &DailySchedule),
) -> Result<LifecycleLedger, LifecycleError> {
    if price_days.is_empty() {
        return Err(LifecycleError::EmptyPriceFile);
    }
    let budget = asset.lifecycle_usage_limit_mwh;
    let mut energy = 0.0_f64;
    let mut node = area.center_index();
    let mut cumulative = 0.0_f64;
    let mut revenue = Money::ZERO;
    let mut per_day: Vec<DayRecord> = Vec::new();
    let first_excluded;

    // Identical (price day, discount year, carry-over state) inputs produce
    // identical models; reuse their solutions. This is what makes
    // multi-decade flat-price runs cheap.
    type CacheKey = (usize, u32, u64, usize);
    let mut cache: HashMap<CacheKey, (DailySchedule, ObjectiveBreakdown)> = HashMap::new();

    let mut day: u32 = 1;
    loop {
        let day_mod = ((day - 1) as usize) % price_days.len();
        let kappa = (day - 1) / crate::domain::DAYS_PER_YEAR;
        let key = (day_mod, kappa, energy.to_bits(), node);

        let (schedule, breakdown) = match cache.get(&key) {
            Some(hit) => hit.clone(),
            None => {
                let solved = solve_one_day(
                    area,
                    &price_days[day_mod],
                    asset,
                    costs,
                    grid,
                    day,
                    energy,
                    node,
                    backend,
                    options,
                )?;
                cache.insert(key, solved.clone());
                solved
            }
        };

        let usage = breakdown.usage_mwh;
        if cumulative + usage > budget {
            first_excluded = Some(usage);
            break;
        }
        if usage <= 0.0 {
            return Err(LifecycleError::NonTerminating { day });
        }
        let delta = discount_factor(day, costs.discount_rate).expect("day >= 1");
        let discounted_profit =
            Money::new(delta * (breakdown.objective.value() + breakdown.degradation_cost.value()));
        on_day(day, &schedule);
        per_day.push(DayRecord {
            day_index: day,
            objective: breakdown.objective,
            degradation_cost: breakdown.degradation_cost,
            usage_mwh: usage,
            discounted_profit,
            initial_energy_mwh: energy,
            initial_node: area.nodes[node].node_id.clone(),
            terminal_energy_mwh: schedule.terminal_energy,
            terminal_node: area.nodes[schedule.terminal_node].node_id.clone(),
        });
        cumulative += usage;
        revenue = revenue + discounted_profit;
        energy = schedule.terminal_energy;
        node = schedule.terminal_node;
        day += 1;
    }

    Ok(LifecycleLedger {
        termination_day: per_day.len() as u32,
        per_day,
        cumulative_usage_mwh: cumulative,
        lifecycle_revenue: revenue,
        first_excluded_usage_mwh: first_excluded,
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_one_day(
    area: &CaseArea,
    prices: &MarketDay,
    asset: &StorageAsset,
    costs: &CostParams,
    grid: &TimeGrid,
    day: u32,
    energy: f64,
    node: usize,
    backend: &dyn MipBackend,
    options: &SolverOptions,
) -> Result<(DailySchedule, ObjectiveBreakdown), LifecycleError> {
    let input = DayInput::new(area, prices, asset, costs, grid, day, energy, node)
        .map_err(|source| LifecycleError::Day { day, source })?;
    let model = build_day_model(&input);
    let solution = backend
        .solve(&model, options)
        .map_err(|source| LifecycleError::Solver { day, source })?;
    if solution.status != SolutionStatus::Optimal {
        return Err(LifecycleError::DayNotSolved {
            day,
            status: solution.status,
        });
    }
    extract_schedule(&input, &solution.assignment)
        .map_err(|source| LifecycleError::Day { day, source })
}

/// Settlement of one scheduled day against real-time prices: the schedule is
/// unchanged, only the price applied to the committed injections differs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettlementEntry {
    pub day_ahead_revenue: Money,
    pub real_time_revenue: Money,
    /// real-time minus day-ahead.
    pub difference: Money,
}

/// Revenue of a fixed schedule under a price matrix `[node][interval]`.
fn schedule_revenue(schedule: &DailySchedule, prices: &[Vec<f64>], interval_hours: f64) -> f64 {
    let mut revenue = 0.0;
    for (n, row) in prices.iter().enumerate() {
        for (h, price) in row.iter().enumerate() {
            revenue += price * (schedule.discharge[n][h] - schedule.charge[n][h]) * interval_hours;
        }
    }
    revenue
}

/// Evaluate a day-ahead schedule at real-time prices.
pub fn realtime_settlement(
    schedule: &DailySchedule,
    input: &DayInput,
    rt_prices: &[Vec<f64>],
) -> Result<SettlementEntry, LifecycleError> {
    let nodes = input.node_count();
    let intervals = input.intervals();
    if rt_prices.len() != nodes || rt_prices.iter().any(|r| r.len() != intervals) {
        return Err(LifecycleError::RealTimeDimensions {
            expected_nodes: nodes,
            expected_intervals: intervals,
            got_nodes: rt_prices.len(),
            got_intervals: rt_prices.first().map_or(0, |r| r.len()),
        });
    }
    let dh = input.grid.interval_hours();
    let day_ahead = schedule_revenue(schedule, &input.prices.day_ahead, dh);
    let real_time = schedule_revenue(schedule, rt_prices, dh);
    Ok(SettlementEntry {
        day_ahead_revenue: Money::new(day_ahead),
        real_time_revenue: Money::new(real_time),
        difference: Money::new(real_time - day_ahead),
    })
}

/// Stationary baseline: one full life-cycle simulation per member node, with
/// the asset pinned to that node.
#[derive(Debug, Clone)]
pub struct SessBaseline {
    /// Ledgers keyed by node id, in area node order.
    pub per_node: Vec<(String, LifecycleLedger)>,
    pub best_node: String,
}

impl SessBaseline {
    pub fn best_ledger(&self) -> &LifecycleLedger {
        &self
            .per_node
            .iter()
            .find(|(id, _)| *id == self.best_node)
            .expect("best node is always present")
            .1
    }
}

/// Run the single-node baseline for every node in the area. Nodes are
/// independent and simulated in parallel.
pub fn sess_baseline(
    area: &CaseArea,
    price_days: &[MarketDay],
    asset: &StorageAsset,
    costs: &CostParams,
    grid: &TimeGrid,
    backend: &dyn MipBackend,
    options: &SolverOptions,
) -> Result<SessBaseline, LifecycleError> {
    let results: Vec<(String, LifecycleLedger)> = (0..area.node_count())
        .into_par_iter()
        .map(|i| {
            let node = &area.nodes[i];
            let single = CaseArea::single_node(node, grid);
            let days: Vec<MarketDay> = price_days.iter().map(|d| d.select_rows(&[i])).collect();
            simulate_lifecycle(&single, &days, asset, costs, grid, backend, options)
                .map(|ledger| (node.node_id.clone(), ledger))
        })
        .collect::<Result<_, _>>()?;
    let best_node = results
        .iter()
        .max_by(|a, b| {
            a.1.lifecycle_revenue
                .partial_cmp(&b.1.lifecycle_revenue)
                .unwrap()
                .then_with(|| b.0.cmp(&a.0))
        })
        .expect("area has at least one node")
        .0
        .clone();
    Ok(SessBaseline {
        per_node: results,
        best_node,
    })
}
