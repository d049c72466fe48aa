//! Turning a solver assignment back into a typed schedule, and recomputing
//! the objective from raw decisions independently of any solver value.

use crate::domain::Money;
use crate::model::{
    DailySchedule, DayInput, ModelError, ObjectiveBreakdown, VarLayout, BINARY_TOLERANCE,
};

fn round_binary(value: f64, name: impl Fn() -> String) -> Result<u8, ModelError> {
    let rounded = value.round();
    if (value - rounded).abs() > BINARY_TOLERANCE || !(0.0..=1.0).contains(&rounded) {
        return Err(ModelError::NonIntegralBinary { var: name(), value });
    }
    Ok(rounded as u8)
}

/// Decode an assignment in [`VarLayout`] order into a `DailySchedule` and its
/// recomputed `ObjectiveBreakdown`.
///
/// Binaries must be within `BINARY_TOLERANCE` of 0/1. The energy trace is
/// recomputed from the storage balance rather than read from the energy
/// variables, and negative power noise is clamped to zero.
pub fn extract_schedule(
    input: &DayInput,
    assignment: &[f64],
) -> Result<(DailySchedule, ObjectiveBreakdown), ModelError> {
    let layout = VarLayout::for_input(input);
    if assignment.len() != layout.total_vars() {
        return Err(ModelError::AssignmentLength {
            expected: layout.total_vars(),
            got: assignment.len(),
        });
    }
    let n_nodes = input.node_count();
    let intervals = input.intervals();

    let power = |id: crate::solve::mip::VarId| assignment[id.index()].max(0.0);
    let discharge: Vec<Vec<f64>> = (0..n_nodes)
        .map(|n| (0..intervals).map(|h| power(layout.discharge(n, h))).collect())
        .collect();
    let charge: Vec<Vec<f64>> = (0..n_nodes)
        .map(|n| (0..intervals).map(|h| power(layout.charge(n, h))).collect())
        .collect();

    let mut travel = vec![vec![vec![0u8; intervals]; n_nodes]; n_nodes];
    for n in 0..n_nodes {
        for m in 0..n_nodes {
            for h in 0..intervals {
                travel[n][m][h] = round_binary(assignment[layout.travel(n, m, h).index()], || {
                    format!("travel[{n}][{m}][{h}]")
                })?;
            }
        }
    }
    let grab = |name: &str,
                id: fn(&VarLayout, usize, usize) -> crate::solve::mip::VarId|
     -> Result<Vec<Vec<u8>>, ModelError> {
        (0..n_nodes)
            .map(|n| {
                (0..intervals)
                    .map(|h| {
                        round_binary(assignment[id(&layout, n, h).index()], || {
                            format!("{name}[{n}][{h}]")
                        })
                    })
                    .collect()
            })
            .collect()
    };
    let parked = grab("parked", VarLayout::parked)?;
    let arrive = grab("arrive", VarLayout::arrive)?;
    let depart = grab("depart", VarLayout::depart)?;
    let aux = grab("aux", VarLayout::aux)?;

    // Recompute the energy trace from the balance equation.
    let dh = input.grid.interval_hours();
    let eta = input.asset.efficiency;
    let rho = input.asset.self_discharge;
    let mut energy_trace = Vec::with_capacity(intervals + 1);
    let mut energy = input.initial_energy;
    energy_trace.push(energy);
    for h in 0..intervals {
        let net: f64 = (0..n_nodes)
            .map(|n| charge[n][h] * eta * dh - discharge[n][h] * dh / eta)
            .sum();
        energy = (1.0 - rho) * energy + net;
        energy_trace.push(energy);
    }

    let terminal_candidates: Vec<usize> = (0..n_nodes)
        .filter(|&n| parked[n][intervals - 1] == 1)
        .collect();
    let terminal_node = match terminal_candidates.as_slice() {
        [only] => *only,
        _ => return Err(ModelError::NoTerminalNode),
    };

    let schedule = DailySchedule {
        discharge,
        charge,
        travel,
        parked,
        arrive,
        depart,
        aux,
        terminal_energy: *energy_trace.last().unwrap(),
        terminal_node,
        energy_trace,
    };
    let breakdown = objective_of(&schedule, input);
    Ok((schedule, breakdown))
}

/// Recompute revenue, transport cost, degradation cost, usage, and the
/// objective from a schedule's raw decision data.
pub fn objective_of(schedule: &DailySchedule, input: &DayInput) -> ObjectiveBreakdown {
    let n_nodes = input.node_count();
    let intervals = input.intervals();
    let dh = input.grid.interval_hours();
    let prices = &input.prices.day_ahead;

    let mut revenue = 0.0;
    let mut cycling_mwh = 0.0;
    let mut travel_intervals = 0u64;
    for n in 0..n_nodes {
        for h in 0..intervals {
            revenue += prices[n][h] * (schedule.discharge[n][h] - schedule.charge[n][h]) * dh;
            cycling_mwh += (schedule.discharge[n][h] + schedule.charge[n][h]) * dh;
            for m in 0..n_nodes {
                travel_intervals += schedule.travel[n][m][h] as u64;
            }
        }
    }
    let transport_cost =
        input.costs.transport_cost_usd_per_hour * dh * travel_intervals as f64;
    let usage_mwh = input.asset.calendar_usage_mwh_per_day + cycling_mwh;
    let degradation_cost = input.degradation_coefficient() * usage_mwh;

    ObjectiveBreakdown {
        revenue: Money::new(revenue),
        transport_cost: Money::new(transport_cost),
        degradation_cost: Money::new(degradation_cost),
        objective: Money::new(revenue - transport_cost - degradation_cost),
        usage_mwh,
    }
}
