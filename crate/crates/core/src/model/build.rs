//! Construction of the daily MILP from a `DayInput`.
//!
//! Decision variables per interval `h` (0-based internally):
//! discharge/charge power per node, stored energy, and binary indicators for
//! traveling between node pairs, parking, arrival, departure, and an
//! auxiliary arrival-consistency flag. Self-travel slots exist in the layout
//! but are pinned to zero.

use crate::model::{DayInput, VarLayout};
use crate::solve::mip::{ModelInstance, Sense, VarId};

/// Build the day's MILP. The objective maximizes market revenue minus
/// transport cost minus the discounted-degradation opportunity cost; the
/// calendar-usage part of that cost enters as a constant offset.
pub fn build_day_model(input: &DayInput) -> ModelInstance {
    let n_nodes = input.node_count();
    let intervals = input.intervals();
    let layout = VarLayout::for_input(input);
    let grid = input.grid;
    let dh = grid.interval_hours();
    let asset = input.asset;
    let p_max = asset.power_capacity_mw;
    let e_max = asset.energy_capacity_mwh;
    let eta = asset.efficiency;
    let rho = asset.self_discharge;
    let deg = input.degradation_coefficient();
    let transport_per_interval = input.costs.transport_cost_usd_per_hour * dh;
    let prices = &input.prices.day_ahead;
    let tensor = &input.area.travel_intervals;

    let mut model = ModelInstance::new();

    // Variables, in layout order.
    for n in 0..n_nodes {
        for h in 0..intervals {
            let id = model.add_continuous(0.0, p_max, prices[n][h] * dh - deg * dh);
            debug_assert_eq!(id, layout.discharge(n, h));
        }
    }
    for n in 0..n_nodes {
        for h in 0..intervals {
            let id = model.add_continuous(0.0, p_max, -prices[n][h] * dh - deg * dh);
            debug_assert_eq!(id, layout.charge(n, h));
        }
    }
    for h in 0..intervals {
        let id = model.add_continuous(0.0, e_max, 0.0);
        debug_assert_eq!(id, layout.energy(h));
    }
    for n in 0..n_nodes {
        for m in 0..n_nodes {
            for h in 0..intervals {
                let id = if n == m {
                    model.add_binary_fixed_zero()
                } else {
                    model.add_binary(-transport_per_interval)
                };
                debug_assert_eq!(id, layout.travel(n, m, h));
            }
        }
    }
    for n in 0..n_nodes {
        for h in 0..intervals {
            let id = model.add_binary(0.0);
            debug_assert_eq!(id, layout.parked(n, h));
        }
    }
    for n in 0..n_nodes {
        for h in 0..intervals {
            let id = model.add_binary(0.0);
            debug_assert_eq!(id, layout.arrive(n, h));
        }
    }
    for n in 0..n_nodes {
        for h in 0..intervals {
            let id = model.add_binary(0.0);
            debug_assert_eq!(id, layout.depart(n, h));
        }
    }
    for n in 0..n_nodes {
        for h in 0..intervals {
            let id = model.add_binary(0.0);
            debug_assert_eq!(id, layout.aux(n, h));
        }
    }
    debug_assert_eq!(model.num_vars(), layout.total_vars());

    // Calendar usage is charged regardless of the schedule.
    model.add_objective_offset(-deg * input.asset.calendar_usage_mwh_per_day);

    // Energy balance: E_h = (1-rho) E_{h-1} + sum_n (eta dh CHA - dh/eta DIS).
    for h in 0..intervals {
        let mut terms: Vec<(VarId, f64)> = vec![(layout.energy(h), 1.0)];
        for n in 0..n_nodes {
            terms.push((layout.charge(n, h), -eta * dh));
            terms.push((layout.discharge(n, h), dh / eta));
        }
        if h == 0 {
            model.add_constraint(terms, Sense::Eq, (1.0 - rho) * input.initial_energy);
        } else {
            terms.push((layout.energy(h - 1), -(1.0 - rho)));
            model.add_constraint(terms, Sense::Eq, 0.0);
        }
    }

    // Power only while parked: P <= omega * P_MAX, each direction.
    for n in 0..n_nodes {
        for h in 0..intervals {
            model.add_constraint(
                vec![(layout.discharge(n, h), 1.0), (layout.parked(n, h), -p_max)],
                Sense::Le,
                0.0,
            );
            model.add_constraint(
                vec![(layout.charge(n, h), 1.0), (layout.parked(n, h), -p_max)],
                Sense::Le,
                0.0,
            );
        }
    }

    // At most one place at a time: sum_n omega + sum_{n,m} gamma <= 1.
    for h in 0..intervals {
        let mut terms: Vec<(VarId, f64)> = Vec::with_capacity(n_nodes + n_nodes * n_nodes);
        for n in 0..n_nodes {
            terms.push((layout.parked(n, h), 1.0));
            for m in 0..n_nodes {
                terms.push((layout.travel(n, m, h), 1.0));
            }
        }
        model.add_constraint(terms, Sense::Le, 1.0);
    }

    // Arrival/departure track parking changes: alpha - beta = omega_h - omega_{h-1}.
    for n in 0..n_nodes {
        for h in 0..intervals {
            let mut terms = vec![
                (layout.arrive(n, h), 1.0),
                (layout.depart(n, h), -1.0),
                (layout.parked(n, h), -1.0),
            ];
            let rhs = if h == 0 {
                // omega at h-1 is the initial position constant.
                if n == input.initial_node {
                    -1.0
                } else {
                    0.0
                }
            } else {
                terms.push((layout.parked(n, h - 1), 1.0));
                0.0
            };
            model.add_constraint(terms, Sense::Eq, rhs);
        }
    }

    // No simultaneous arrival and departure: sum_n (alpha + beta) <= 1.
    for h in 0..intervals {
        let terms = (0..n_nodes)
            .flat_map(|n| [(layout.arrive(n, h), 1.0), (layout.depart(n, h), 1.0)])
            .collect();
        model.add_constraint(terms, Sense::Le, 1.0);
    }

    // Departure implies travel from that node: sum_m gamma_nmh >= beta_nh.
    for n in 0..n_nodes {
        for h in 0..intervals {
            let mut terms: Vec<(VarId, f64)> = (0..n_nodes)
                .map(|m| (layout.travel(n, m, h), 1.0))
                .collect();
            terms.push((layout.depart(n, h), -1.0));
            model.add_constraint(terms, Sense::Ge, 0.0);
        }
    }

    // Arrival fires exactly when inbound travel ends:
    // alpha_mh - theta_mh = sum_n (gamma_nm(h-1) - gamma_nmh).
    for m in 0..n_nodes {
        for h in 0..intervals {
            let mut terms = vec![(layout.arrive(m, h), 1.0), (layout.aux(m, h), -1.0)];
            for n in 0..n_nodes {
                terms.push((layout.travel(n, m, h), 1.0));
                if h > 0 {
                    terms.push((layout.travel(n, m, h - 1), -1.0));
                }
            }
            model.add_constraint(terms, Sense::Eq, 0.0);
        }
    }

    // sum_n (alpha + theta) <= 1.
    for h in 0..intervals {
        let terms = (0..n_nodes)
            .flat_map(|n| [(layout.arrive(n, h), 1.0), (layout.aux(n, h), 1.0)])
            .collect();
        model.add_constraint(terms, Sense::Le, 1.0);
    }

    // Minimum travel duration: gamma_nmh >= gamma_nm(h-1) - gamma_nm(h-H_nmh),
    // with gamma at negative indices treated as 0.
    for n in 0..n_nodes {
        for m in 0..n_nodes {
            if n == m {
                continue;
            }
            for h in 1..intervals {
                let lookback = tensor.get(n, m, h) as usize;
                if lookback == 1 {
                    // the h-1 terms cancel; the constraint is vacuous
                    continue;
                }
                let mut terms = vec![
                    (layout.travel(n, m, h), 1.0),
                    (layout.travel(n, m, h - 1), -1.0),
                ];
                if h >= lookback {
                    terms.push((layout.travel(n, m, h - lookback), 1.0));
                }
                model.add_constraint(terms, Sense::Ge, 0.0);
            }
        }
    }

    // The day ends parked: no travel in progress at the final interval.
    let terms = (0..n_nodes)
        .flat_map(|n| (0..n_nodes).map(move |m| (layout.travel(n, m, intervals - 1), 1.0)))
        .collect();
    model.add_constraint(terms, Sense::Eq, 0.0);

    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::TimeGrid;
    use crate::model::DayInput;
    use crate::testutil::{flat_prices, small_area, test_asset, test_costs};

    fn build(n: usize, intervals: usize) -> ModelInstance {
        let grid = TimeGrid::with_intervals(intervals).unwrap();
        let area = small_area(n, &grid, 1);
        let prices = flat_prices(&area, &grid, 10.0);
        let asset = test_asset();
        let costs = test_costs();
        let input = DayInput::new(&area, &prices, &asset, &costs, &grid, 1, 0.0, 0).unwrap();
        build_day_model(&input)
    }

    #[test]
    fn binary_count_matches_layout() {
        // gamma contributes |nodes|^2 * H, the four indicator families 4 * |nodes| * H.
        let model = build(2, 96);
        assert_eq!(model.num_binary_vars(), 4 * 96 + 4 * 2 * 96);
        assert_eq!(model.num_continuous_vars(), 2 * 2 * 96 + 96);
    }

    #[test]
    fn single_node_model_has_no_real_travel() {
        let model = build(1, 96);
        // The only gamma slots are self-loops, pinned at zero.
        let free_binaries = model
            .vars()
            .iter()
            .filter(|v| v.kind == crate::solve::mip::VarKind::Binary && v.upper > 0.0)
            .count();
        assert_eq!(free_binaries, 4 * 96);
    }

    #[test]
    fn constraint_count_linear_in_intervals() {
        let c4 = build(3, 4).num_constraints() as i64;
        let c8 = build(3, 8).num_constraints() as i64;
        let c12 = build(3, 12).num_constraints() as i64;
        assert_eq!(c8 - c4, c12 - c8, "constraint growth must be linear in H");
    }
}
