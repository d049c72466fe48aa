//! Exhaustive dynamic program over a state-of-charge grid, used as an
//! independent optimum for small day instances.
//!
//! States are (interval, parked node, SoC grid level). Parked intervals pick
//! any grid-aligned charge/discharge move within power limits; departures are
//! atomic: they consume the minimal feasible travel duration and land on the
//! arrival interval, which is itself a parked interval with its own move
//! (immediate re-departure on arrival is not possible, matching the MILP's
//! arrival/departure budget).
//!
//! When the exactness condition holds (no self-discharge, grid-aligned
//! initial energy, and full-power charge/discharge both moving a whole
//! number of grid levels) the DP optimum equals the MILP optimum; otherwise
//! the result is flagged as a lower bound only.

use thiserror::Error;

use crate::model::{objective_of, DailySchedule, DayInput, ObjectiveBreakdown};

/// Largest node count the oracle accepts.
pub const MAX_ORACLE_NODES: usize = 3;
/// Largest interval count the oracle accepts.
pub const MAX_ORACLE_INTERVALS: usize = 32;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("instance too large for the oracle: {nodes} nodes x {intervals} intervals (max {MAX_ORACLE_NODES} x {MAX_ORACLE_INTERVALS})")]
    TooLarge { nodes: usize, intervals: usize },
    #[error("oracle requires at least 2 SoC levels (got {0})")]
    TooFewLevels(usize),
    #[error("oracle requires zero self-discharge (got {0})")]
    SelfDischargeUnsupported(f64),
    #[error("oracle requires positive energy capacity")]
    DegenerateCapacity,
    #[error("initial energy {energy} MWh is not on the {step} MWh SoC grid")]
    OffGridInitialEnergy { energy: f64, step: f64 },
}

/// Oracle result: the best trajectory found, its recomputed breakdown, and
/// whether the value is exact or only a lower bound on the true optimum.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub objective: f64,
    pub schedule: DailySchedule,
    pub breakdown: ObjectiveBreakdown,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Choice {
    /// Stay parked and move `0` SoC levels (idle), charge (`> 0`), or
    /// discharge (`< 0`).
    Move(i32),
    /// Depart toward `dest`, travel `duration` intervals, then make
    /// `arrival_move` during the arrival interval.
    Depart {
        dest: usize,
        duration: usize,
        arrival_move: i32,
    },
}

/// Exact dynamic program for instances with at most [`MAX_ORACLE_NODES`]
/// nodes and [`MAX_ORACLE_INTERVALS`] intervals. `soc_levels` is the number
/// of grid points spanning `[0, E_MAX]`.
pub fn dp_oracle(input: &DayInput, soc_levels: usize) -> Result<OracleSolution, OracleError> {
    let n_nodes = input.node_count();
    let intervals = input.intervals();
    if n_nodes > MAX_ORACLE_NODES || intervals > MAX_ORACLE_INTERVALS {
        return Err(OracleError::TooLarge {
            nodes: n_nodes,
            intervals,
        });
    }
    if soc_levels < 2 {
        return Err(OracleError::TooFewLevels(soc_levels));
    }
    if input.asset.self_discharge != 0.0 {
        return Err(OracleError::SelfDischargeUnsupported(
            input.asset.self_discharge,
        ));
    }
    let e_max = input.asset.energy_capacity_mwh;
    if !(e_max > 0.0) {
        return Err(OracleError::DegenerateCapacity);
    }

    let step = e_max / (soc_levels - 1) as f64;
    let dh = input.grid.interval_hours();
    let eta = input.asset.efficiency;
    let p_max = input.asset.power_capacity_mw;
    let deg = input.degradation_coefficient();
    let transport_per_interval = input.costs.transport_cost_usd_per_hour * dh;
    let prices = &input.prices.day_ahead;
    let tensor = &input.area.travel_intervals;

    let start_level_f = input.initial_energy / step;
    let start_level = start_level_f.round() as usize;
    if (start_level_f - start_level as f64).abs() > 1e-9 {
        return Err(OracleError::OffGridInitialEnergy {
            energy: input.initial_energy,
            step,
        });
    }

    // Whole grid levels movable at full power in one interval.
    let charge_levels_f = eta * p_max * dh / step;
    let discharge_levels_f = p_max * dh / (eta * step);
    let max_charge_levels = (charge_levels_f + 1e-9).floor() as i64;
    let max_discharge_levels = (discharge_levels_f + 1e-9).floor() as i64;
    let aligned = |x: f64| (x - x.round()).abs() <= 1e-9 * x.max(1.0);
    let exact = aligned(charge_levels_f) && aligned(discharge_levels_f);

    // Reward of moving `j` levels while parked at `node` during `interval`
    // (market revenue minus the degradation charge on the throughput).
    let move_reward = |node: usize, interval: usize, j: i32| -> f64 {
        let price = prices[node][interval];
        match j.cmp(&0) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => {
                let charged_mwh = j as f64 * step / eta; // grid-side energy
                -(price + deg) * charged_mwh
            }
            std::cmp::Ordering::Less => {
                let discharged_mwh = (-j) as f64 * step * eta;
                (price - deg) * discharged_mwh
            }
        }
    };

    // Minimal feasible travel duration departing `from -> to` at `start`:
    // the smallest d >= 1 with d >= H[to-arrival interval] and the arrival
    // interval still inside the day.
    let min_duration = |from: usize, to: usize, start: usize| -> Option<usize> {
        (1..intervals)
            .take_while(|d| start + d < intervals)
            .find(|&d| d >= tensor.get(from, to, start + d) as usize)
    };

    let idx = |h: usize, node: usize, level: usize| (h * n_nodes + node) * soc_levels + level;
    let mut value = vec![f64::NEG_INFINITY; (intervals + 1) * n_nodes * soc_levels];
    let mut choice = vec![Choice::Move(0); (intervals + 1) * n_nodes * soc_levels];
    for node in 0..n_nodes {
        for level in 0..soc_levels {
            value[idx(intervals, node, level)] = 0.0;
        }
    }

    let feasible_moves = |level: usize| -> std::ops::RangeInclusive<i32> {
        let down = (level as i64).min(max_discharge_levels) as i32;
        let up = ((soc_levels - 1 - level) as i64).min(max_charge_levels) as i32;
        -down..=up
    };

    for h in (0..intervals).rev() {
        for node in 0..n_nodes {
            for level in 0..soc_levels {
                // Idle first so that ties resolve toward doing nothing.
                let mut best = value[idx(h + 1, node, level)];
                let mut best_choice = Choice::Move(0);
                for j in feasible_moves(level) {
                    if j == 0 {
                        continue;
                    }
                    let v = move_reward(node, h, j)
                        + value[idx(h + 1, node, (level as i32 + j) as usize)];
                    if v > best {
                        best = v;
                        best_choice = Choice::Move(j);
                    }
                }
                for dest in 0..n_nodes {
                    if dest == node {
                        continue;
                    }
                    let Some(duration) = min_duration(node, dest, h) else {
                        continue;
                    };
                    let arrival = h + duration;
                    let travel_cost = transport_per_interval * duration as f64;
                    for j in feasible_moves(level) {
                        let v = -travel_cost
                            + move_reward(dest, arrival, j)
                            + value[idx(arrival + 1, dest, (level as i32 + j) as usize)];
                        if v > best {
                            best = v;
                            best_choice = Choice::Depart {
                                dest,
                                duration,
                                arrival_move: j,
                            };
                        }
                    }
                }
                value[idx(h, node, level)] = best;
                choice[idx(h, node, level)] = best_choice;
            }
        }
    }

    // Replay the argmax trajectory into a schedule.
    let mut schedule = DailySchedule::idle(input);
    for row in &mut schedule.parked {
        row.fill(0);
    }
    let mut h = 0usize;
    let mut node = input.initial_node;
    let mut level = start_level;
    let apply_move = |schedule: &mut DailySchedule, node: usize, h: usize, j: i32| {
        schedule.parked[node][h] = 1;
        if j > 0 {
            schedule.charge[node][h] = j as f64 * step / (eta * dh);
        } else if j < 0 {
            schedule.discharge[node][h] = (-j) as f64 * step * eta / dh;
        }
    };
    while h < intervals {
        match choice[idx(h, node, level)] {
            Choice::Move(j) => {
                apply_move(&mut schedule, node, h, j);
                level = (level as i32 + j) as usize;
                h += 1;
            }
            Choice::Depart {
                dest,
                duration,
                arrival_move,
            } => {
                schedule.depart[node][h] = 1;
                schedule.aux[dest][h] = 1;
                for t in h..h + duration {
                    schedule.travel[node][dest][t] = 1;
                }
                let arrival = h + duration;
                schedule.arrive[dest][arrival] = 1;
                apply_move(&mut schedule, dest, arrival, arrival_move);
                level = (level as i32 + arrival_move) as usize;
                node = dest;
                h = arrival + 1;
            }
        }
    }
    schedule.terminal_node = node;

    // Rebuild the energy trace from the replayed powers.
    let mut energy = input.initial_energy;
    schedule.energy_trace.clear();
    schedule.energy_trace.push(energy);
    for t in 0..intervals {
        let net: f64 = (0..n_nodes)
            .map(|n| schedule.charge[n][t] * eta * dh - schedule.discharge[n][t] * dh / eta)
            .sum();
        energy += net;
        schedule.energy_trace.push(energy);
    }
    schedule.terminal_energy = energy;

    let breakdown = objective_of(&schedule, input);
    debug_assert!(
        (breakdown.objective.value()
            - (value[idx(0, input.initial_node, start_level)]
                - deg * input.asset.calendar_usage_mwh_per_day))
            .abs()
            < 1e-6,
        "DP value disagrees with recomputed objective"
    );

    Ok(OracleSolution {
        objective: breakdown.objective.value(),
        schedule,
        breakdown,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{CostParams, TimeGrid};
    use crate::model::validate_schedule;
    use crate::testutil::{flat_prices, lossless_asset, prices_from, small_area, test_costs};

    #[test]
    fn rejects_oversized_instances() {
        let grid = TimeGrid::with_intervals(96).unwrap();
        let area = small_area(2, &grid, 1);
        let prices = flat_prices(&area, &grid, 10.0);
        let asset = lossless_asset(1.0, 4.0);
        let costs = test_costs();
        let input =
            crate::model::DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 0.0, 0).unwrap();
        assert!(matches!(
            dp_oracle(&input, 5),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn constant_prices_stay_idle() {
        let grid = TimeGrid::with_intervals(16).unwrap();
        let area = small_area(2, &grid, 1);
        let prices = flat_prices(&area, &grid, 45.0);
        let asset = lossless_asset(3.0, 2.0);
        let costs = test_costs();
        let input =
            crate::model::DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 0.0, 0).unwrap();
        let sol = dp_oracle(&input, 3).unwrap();
        assert!(sol.exact);
        // No profitable action: the objective is the calendar charge alone.
        assert!((sol.objective - (-50.0 * 1.0)).abs() < 1e-9, "got {}", sol.objective);
        assert_eq!(sol.schedule.terminal_node, 0);
        assert_eq!(sol.breakdown.usage_mwh, 1.0);
        assert!(validate_schedule(&sol.schedule, &input).is_empty());
    }

    /// Two nodes, $0 at A and $100 at B all day, 1-interval travel,
    /// E_MAX = P_MAX * dh: charge once at A, move, sell everything at B.
    #[test]
    fn two_node_spread_closed_form() {
        let grid = TimeGrid::with_intervals(16).unwrap();
        let area = small_area(2, &grid, 1);
        let prices = prices_from(&area, &grid, |n, _| if n == 0 { 0.0 } else { 100.0 });
        let dh = grid.interval_hours();
        let asset = lossless_asset(1.0 * dh, 1.0); // E_MAX = P_MAX * dh exactly
        // c_DEG tuned so one trip beats idling but a second round trip loses.
        let costs = CostParams {
            transport_cost_usd_per_hour: 20.0,
            degradation_cost_usd_per_mwh: 35.0,
            discount_rate: 0.07,
        };
        let input =
            crate::model::DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 0.0, 0).unwrap();
        let sol = dp_oracle(&input, 2).unwrap();
        assert!(sol.exact);
        let e_max = asset.energy_capacity_mwh;
        let expected = 100.0 * e_max
            - costs.transport_cost_usd_per_hour * dh
            - 35.0 * (1.0 + 2.0 * e_max);
        assert!(
            (sol.objective - expected).abs() < 1e-9,
            "objective {} vs closed form {expected}",
            sol.objective
        );
        assert_eq!(sol.schedule.terminal_node, 1);
        assert!(validate_schedule(&sol.schedule, &input).is_empty());
    }

    #[test]
    fn single_node_two_price_cycle() {
        // One node, cheap early, expensive late: one full cycle.
        let grid = TimeGrid::with_intervals(8).unwrap();
        let area = small_area(1, &grid, 1);
        let prices = prices_from(&area, &grid, |_, h| if h < 4 { 0.0 } else { 100.0 });
        let dh = grid.interval_hours();
        let asset = lossless_asset(4.0 * dh, 4.0);
        let costs = CostParams {
            transport_cost_usd_per_hour: 20.0,
            degradation_cost_usd_per_mwh: 10.0,
            discount_rate: 0.0,
        };
        let input =
            crate::model::DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 0.0, 0).unwrap();
        let sol = dp_oracle(&input, 2).unwrap();
        // Charge E_MAX at $0, discharge at $100: 100*E - 10*(1 + 2E).
        let e = asset.energy_capacity_mwh;
        let expected = 100.0 * e - 10.0 * (1.0 + 2.0 * e);
        assert!((sol.objective - expected).abs() < 1e-9);
        assert!(validate_schedule(&sol.schedule, &input).is_empty());
    }

    #[test]
    fn inexact_efficiency_is_flagged() {
        let grid = TimeGrid::with_intervals(8).unwrap();
        let area = small_area(1, &grid, 1);
        let prices = flat_prices(&area, &grid, 10.0);
        let mut asset = lossless_asset(1.0, 4.0 / 3.0);
        asset.efficiency = 0.95;
        let costs = test_costs();
        let input =
            crate::model::DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 0.0, 0).unwrap();
        let sol = dp_oracle(&input, 2).unwrap();
        assert!(!sol.exact);
    }

    #[test]
    fn off_grid_initial_energy_rejected() {
        let grid = TimeGrid::with_intervals(8).unwrap();
        let area = small_area(1, &grid, 1);
        let prices = flat_prices(&area, &grid, 10.0);
        let asset = lossless_asset(3.0, 1.0);
        let costs = test_costs();
        let input =
            crate::model::DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 0.1, 0).unwrap();
        assert!(matches!(
            dp_oracle(&input, 4),
            Err(OracleError::OffGridInitialEnergy { .. })
        ));
    }
}
