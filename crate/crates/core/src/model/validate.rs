//! Independent feasibility audit of a schedule against every constraint
//! family, by direct evaluation on the raw decision data.

use std::fmt;

use crate::model::{DailySchedule, DayInput, FEASIBILITY_TOLERANCE};

/// Constraint family a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintFamily {
    BinaryDomain,
    EnergyBalance,
    EnergyBounds,
    DischargeCoupling,
    ChargeCoupling,
    LocationExclusivity,
    ArrivalDepartureBalance,
    ArrivalDepartureBudget,
    DepartureTravelLink,
    ArrivalTravelLink,
    ArrivalAuxBudget,
    TravelDuration,
    SelfTravel,
    TerminalTravel,
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ConstraintFamily::BinaryDomain => "binary domain",
            ConstraintFamily::EnergyBalance => "energy balance",
            ConstraintFamily::EnergyBounds => "energy bounds",
            ConstraintFamily::DischargeCoupling => "discharge/location coupling",
            ConstraintFamily::ChargeCoupling => "charge/location coupling",
            ConstraintFamily::LocationExclusivity => "location exclusivity",
            ConstraintFamily::ArrivalDepartureBalance => "arrival/departure balance",
            ConstraintFamily::ArrivalDepartureBudget => "arrival/departure budget",
            ConstraintFamily::DepartureTravelLink => "departure-travel link",
            ConstraintFamily::ArrivalTravelLink => "arrival-travel link",
            ConstraintFamily::ArrivalAuxBudget => "arrival/aux budget",
            ConstraintFamily::TravelDuration => "travel duration",
            ConstraintFamily::SelfTravel => "self travel",
            ConstraintFamily::TerminalTravel => "travel at final interval",
        };
        f.write_str(name)
    }
}

/// One violated constraint, with its indices and residual magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub h: Option<usize>,
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if let Some(n) = self.n {
            write!(f, " n={n}")?;
        }
        if let Some(m) = self.m {
            write!(f, " m={m}")?;
        }
        if let Some(h) = self.h {
            write!(f, " h={h}")?;
        }
        write!(f, " residual={:.3e}", self.residual)
    }
}

struct Audit {
    violations: Vec<Violation>,
}

impl Audit {
    fn flag(
        &mut self,
        family: ConstraintFamily,
        n: Option<usize>,
        m: Option<usize>,
        h: Option<usize>,
        residual: f64,
    ) {
        self.violations.push(Violation {
            family,
            n,
            m,
            h,
            residual,
        });
    }

    /// Record a violation when `residual` (amount by which <= 0 fails) is
    /// beyond tolerance.
    fn check_le(
        &mut self,
        family: ConstraintFamily,
        n: Option<usize>,
        m: Option<usize>,
        h: Option<usize>,
        residual: f64,
    ) {
        if residual > FEASIBILITY_TOLERANCE {
            self.flag(family, n, m, h, residual);
        }
    }

    fn check_eq(
        &mut self,
        family: ConstraintFamily,
        n: Option<usize>,
        m: Option<usize>,
        h: Option<usize>,
        residual: f64,
    ) {
        if residual.abs() > FEASIBILITY_TOLERANCE {
            self.flag(family, n, m, h, residual);
        }
    }
}

/// Check every constraint family; an empty result means the schedule is
/// feasible for `input` at `FEASIBILITY_TOLERANCE`.
///
/// Dimension agreement between `schedule` and `input` is a precondition.
pub fn validate_schedule(schedule: &DailySchedule, input: &DayInput) -> Vec<Violation> {
    let n_nodes = input.node_count();
    let intervals = input.intervals();
    assert_eq!(schedule.parked.len(), n_nodes, "schedule/input node mismatch");
    assert!(
        schedule.parked.iter().all(|row| row.len() == intervals),
        "schedule/input interval mismatch"
    );
    assert_eq!(schedule.energy_trace.len(), intervals + 1);

    let dh = input.grid.interval_hours();
    let eta = input.asset.efficiency;
    let rho = input.asset.self_discharge;
    let p_max = input.asset.power_capacity_mw;
    let e_max = input.asset.energy_capacity_mwh;
    let tensor = &input.area.travel_intervals;
    let mut audit = Audit {
        violations: Vec::new(),
    };

    // Binary domain for all indicator matrices.
    for n in 0..n_nodes {
        for h in 0..intervals {
            for (bin, value) in [
                (&schedule.parked, schedule.parked[n][h]),
                (&schedule.arrive, schedule.arrive[n][h]),
                (&schedule.depart, schedule.depart[n][h]),
                (&schedule.aux, schedule.aux[n][h]),
            ] {
                let _ = bin;
                if value > 1 {
                    audit.flag(
                        ConstraintFamily::BinaryDomain,
                        Some(n),
                        None,
                        Some(h),
                        value as f64 - 1.0,
                    );
                }
            }
            for m in 0..n_nodes {
                if schedule.travel[n][m][h] > 1 {
                    audit.flag(
                        ConstraintFamily::BinaryDomain,
                        Some(n),
                        Some(m),
                        Some(h),
                        schedule.travel[n][m][h] as f64 - 1.0,
                    );
                }
            }
        }
    }

    // Self travel is structurally impossible.
    for n in 0..n_nodes {
        for h in 0..intervals {
            if schedule.travel[n][n][h] != 0 {
                audit.flag(ConstraintFamily::SelfTravel, Some(n), Some(n), Some(h), 1.0);
            }
        }
    }

    // Energy balance and bounds along the recomputed trace.
    audit.check_eq(
        ConstraintFamily::EnergyBalance,
        None,
        None,
        Some(0),
        schedule.energy_trace[0] - input.initial_energy,
    );
    for h in 0..intervals {
        let net: f64 = (0..n_nodes)
            .map(|n| schedule.charge[n][h] * eta * dh - schedule.discharge[n][h] * dh / eta)
            .sum();
        let expected = (1.0 - rho) * schedule.energy_trace[h] + net;
        audit.check_eq(
            ConstraintFamily::EnergyBalance,
            None,
            None,
            Some(h),
            schedule.energy_trace[h + 1] - expected,
        );
        let e = schedule.energy_trace[h + 1];
        audit.check_le(ConstraintFamily::EnergyBounds, None, None, Some(h), -e);
        audit.check_le(ConstraintFamily::EnergyBounds, None, None, Some(h), e - e_max);
    }

    // Power bounds and location coupling.
    for n in 0..n_nodes {
        for h in 0..intervals {
            let parked = schedule.parked[n][h] as f64;
            let dis = schedule.discharge[n][h];
            let cha = schedule.charge[n][h];
            audit.check_le(ConstraintFamily::DischargeCoupling, Some(n), None, Some(h), -dis);
            audit.check_le(
                ConstraintFamily::DischargeCoupling,
                Some(n),
                None,
                Some(h),
                dis - parked * p_max,
            );
            audit.check_le(ConstraintFamily::ChargeCoupling, Some(n), None, Some(h), -cha);
            audit.check_le(
                ConstraintFamily::ChargeCoupling,
                Some(n),
                None,
                Some(h),
                cha - parked * p_max,
            );
        }
    }

    // Exclusivity: sum_n omega + sum_{n,m} gamma <= 1.
    for h in 0..intervals {
        let parked: u32 = (0..n_nodes).map(|n| schedule.parked[n][h] as u32).sum();
        let traveling: u32 = (0..n_nodes)
            .flat_map(|n| (0..n_nodes).map(move |m| (n, m)))
            .map(|(n, m)| schedule.travel[n][m][h] as u32)
            .sum();
        audit.check_le(
            ConstraintFamily::LocationExclusivity,
            None,
            None,
            Some(h),
            parked as f64 + traveling as f64 - 1.0,
        );
    }

    // alpha - beta = omega_h - omega_{h-1}, with the initial position at h-1=start.
    for n in 0..n_nodes {
        for h in 0..intervals {
            let prev = if h == 0 {
                (n == input.initial_node) as i32
            } else {
                schedule.parked[n][h - 1] as i32
            };
            let lhs = schedule.arrive[n][h] as i32 - schedule.depart[n][h] as i32;
            let rhs = schedule.parked[n][h] as i32 - prev;
            audit.check_eq(
                ConstraintFamily::ArrivalDepartureBalance,
                Some(n),
                None,
                Some(h),
                (lhs - rhs) as f64,
            );
        }
    }

    // sum_n (alpha + beta) <= 1.
    for h in 0..intervals {
        let total: u32 = (0..n_nodes)
            .map(|n| schedule.arrive[n][h] as u32 + schedule.depart[n][h] as u32)
            .sum();
        audit.check_le(
            ConstraintFamily::ArrivalDepartureBudget,
            None,
            None,
            Some(h),
            total as f64 - 1.0,
        );
    }

    // sum_m gamma_nmh >= beta_nh.
    for n in 0..n_nodes {
        for h in 0..intervals {
            let outbound: u32 = (0..n_nodes).map(|m| schedule.travel[n][m][h] as u32).sum();
            audit.check_le(
                ConstraintFamily::DepartureTravelLink,
                Some(n),
                None,
                Some(h),
                schedule.depart[n][h] as f64 - outbound as f64,
            );
        }
    }

    // alpha_mh - theta_mh = sum_n (gamma_nm(h-1) - gamma_nmh).
    for m in 0..n_nodes {
        for h in 0..intervals {
            let drop: i32 = (0..n_nodes)
                .map(|n| {
                    let before = if h == 0 {
                        0
                    } else {
                        schedule.travel[n][m][h - 1] as i32
                    };
                    before - schedule.travel[n][m][h] as i32
                })
                .sum();
            let lhs = schedule.arrive[m][h] as i32 - schedule.aux[m][h] as i32;
            audit.check_eq(
                ConstraintFamily::ArrivalTravelLink,
                None,
                Some(m),
                Some(h),
                (lhs - drop) as f64,
            );
        }
    }

    // sum_n (alpha + theta) <= 1.
    for h in 0..intervals {
        let total: u32 = (0..n_nodes)
            .map(|n| schedule.arrive[n][h] as u32 + schedule.aux[n][h] as u32)
            .sum();
        audit.check_le(
            ConstraintFamily::ArrivalAuxBudget,
            None,
            None,
            Some(h),
            total as f64 - 1.0,
        );
    }

    // gamma_nmh >= gamma_nm(h-1) - gamma_nm(h-H_nmh).
    for n in 0..n_nodes {
        for m in 0..n_nodes {
            if n == m {
                continue;
            }
            for h in 1..intervals {
                let lookback = tensor.get(n, m, h) as usize;
                let past = if h >= lookback {
                    schedule.travel[n][m][h - lookback] as i32
                } else {
                    0
                };
                let lhs = schedule.travel[n][m][h] as i32;
                let rhs = schedule.travel[n][m][h - 1] as i32 - past;
                audit.check_le(
                    ConstraintFamily::TravelDuration,
                    Some(n),
                    Some(m),
                    Some(h),
                    (rhs - lhs) as f64,
                );
            }
        }
    }

    // No travel in progress at the final interval.
    let final_travel: u32 = (0..n_nodes)
        .flat_map(|n| (0..n_nodes).map(move |m| (n, m)))
        .map(|(n, m)| schedule.travel[n][m][intervals - 1] as u32)
        .sum();
    audit.check_eq(
        ConstraintFamily::TerminalTravel,
        None,
        None,
        Some(intervals - 1),
        final_travel as f64,
    );

    audit.violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::TimeGrid;
    use crate::model::{DailySchedule, DayInput};
    use crate::testutil::{flat_prices, small_area, test_asset, test_costs};

    fn two_node_input<'a>(
        area: &'a crate::ingest::CaseArea,
        prices: &'a crate::ingest::MarketDay,
        asset: &'a crate::domain::StorageAsset,
        costs: &'a crate::domain::CostParams,
        grid: &'a TimeGrid,
    ) -> DayInput<'a> {
        DayInput::new(area, prices, asset, costs, grid, 1, 0.0, 0).unwrap()
    }

    #[test]
    fn idle_schedule_is_feasible() {
        let grid = TimeGrid::with_intervals(8).unwrap();
        let area = small_area(2, &grid, 1);
        let prices = flat_prices(&area, &grid, 30.0);
        let asset = test_asset();
        let costs = test_costs();
        let input = two_node_input(&area, &prices, &asset, &costs, &grid);
        let violations = validate_schedule(&DailySchedule::idle(&input), &input);
        assert!(violations.is_empty(), "unexpected: {violations:?}");
    }

    #[test]
    fn charging_while_traveling_is_flagged() {
        let grid = TimeGrid::with_intervals(8).unwrap();
        let area = small_area(2, &grid, 1);
        let prices = flat_prices(&area, &grid, 30.0);
        let asset = test_asset();
        let costs = test_costs();
        let input = two_node_input(&area, &prices, &asset, &costs, &grid);
        let mut schedule = DailySchedule::idle(&input);
        // claim to charge at node 1 while parked at node 0
        schedule.charge[1][2] = 1.0;
        let violations = validate_schedule(&schedule, &input);
        assert!(violations
            .iter()
            .any(|v| v.family == ConstraintFamily::ChargeCoupling && v.n == Some(1)));
    }

    #[test]
    fn short_travel_is_flagged() {
        let grid = TimeGrid::with_intervals(8).unwrap();
        let area = small_area(2, &grid, 3); // 3-interval minimum
        let prices = flat_prices(&area, &grid, 30.0);
        let asset = test_asset();
        let costs = test_costs();
        let input = two_node_input(&area, &prices, &asset, &costs, &grid);
        let mut schedule = DailySchedule::idle(&input);
        // 1-interval hop 0 -> 1 despite a 3-interval requirement
        schedule.parked[0] = vec![1, 0, 0, 0, 0, 0, 0, 0];
        schedule.parked[1] = vec![0, 0, 1, 1, 1, 1, 1, 1];
        schedule.travel[0][1][1] = 1;
        schedule.depart[0][1] = 1;
        schedule.arrive[1][2] = 1;
        schedule.terminal_node = 1;
        let violations = validate_schedule(&schedule, &input);
        assert!(
            violations
                .iter()
                .any(|v| v.family == ConstraintFamily::TravelDuration),
            "expected a travel-duration violation, got {violations:?}"
        );
    }

    #[test]
    fn energy_overflow_is_flagged() {
        let grid = TimeGrid::with_intervals(8).unwrap();
        let area = small_area(1, &grid, 1);
        let prices = flat_prices(&area, &grid, 30.0);
        let asset = test_asset();
        let costs = test_costs();
        let input = DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 0.0, 0).unwrap();
        let mut schedule = DailySchedule::idle(&input);
        // charge at full power for the whole day: blows through E_MAX
        for h in 0..8 {
            schedule.charge[0][h] = asset.power_capacity_mw;
        }
        let mut energy = 0.0;
        schedule.energy_trace = vec![0.0];
        for h in 0..8 {
            energy += schedule.charge[0][h] * asset.efficiency * grid.interval_hours();
            schedule.energy_trace.push(energy);
            let _ = h;
        }
        schedule.terminal_energy = energy;
        let violations = validate_schedule(&schedule, &input);
        assert!(violations
            .iter()
            .any(|v| v.family == ConstraintFamily::EnergyBounds));
    }

    #[test]
    fn teleporting_is_flagged() {
        let grid = TimeGrid::with_intervals(8).unwrap();
        let area = small_area(2, &grid, 1);
        let prices = flat_prices(&area, &grid, 30.0);
        let asset = test_asset();
        let costs = test_costs();
        let input = two_node_input(&area, &prices, &asset, &costs, &grid);
        let mut schedule = DailySchedule::idle(&input);
        // swap parking from node 0 to node 1 with no travel or indicators
        schedule.parked[0] = vec![1, 1, 1, 1, 0, 0, 0, 0];
        schedule.parked[1] = vec![0, 0, 0, 0, 1, 1, 1, 1];
        schedule.terminal_node = 1;
        let violations = validate_schedule(&schedule, &input);
        assert!(violations
            .iter()
            .any(|v| v.family == ConstraintFamily::ArrivalDepartureBalance));
    }
}
