//! Nodal-price congestion analytics: dyad detection between nearby nodes,
//! exceedance frequencies, monthly distributions, and correlation of
//! frequency series.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{haversine_miles, Node};

#[derive(Debug, Error, PartialEq)]
pub enum CongestionError {
    #[error("series lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least {min} points (got {got})")]
    SeriesTooShort { min: usize, got: usize },
    #[error("correlation undefined: a series has zero variance")]
    ZeroVariance,
    #[error("month index {0} outside 1..=12")]
    MonthIndexOutOfRange(u32),
    #[error("node `{0}` has no price series")]
    MissingPrices(String),
}

type Result<T> = std::result::Result<T, CongestionError>;

/// A pair of nearby nodes with frequent large price differences.
/// `node_a` is always lexicographically before `node_b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadRecord {
    pub node_a: String,
    pub node_b: String,
    pub distance_miles: f64,
    pub exceedance_hours: u32,
    pub threshold_usd_per_mwh: f64,
}

/// Detection thresholds; defaults follow the reference analysis
/// (pairs closer than 20 miles, price gap above $100/MWh, more than 50 hours).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadThresholds {
    pub distance_miles: f64,
    pub price_usd_per_mwh: f64,
    pub hours: u32,
}

impl Default for DyadThresholds {
    fn default() -> Self {
        DyadThresholds {
            distance_miles: 20.0,
            price_usd_per_mwh: 100.0,
            hours: 50,
        }
    }
}

/// Hours where |a - b| strictly exceeds `threshold`.
pub fn exceedance_hours(a: &[f64], b: &[f64], threshold: f64) -> Result<u32> {
    if a.len() != b.len() {
        return Err(CongestionError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .filter(|(x, y)| (*x - *y).abs() > threshold)
        .count() as u32)
}

/// All unordered node pairs closer than the distance threshold whose price
/// difference exceeds the price threshold for more than the hour threshold,
/// sorted by exceedance frequency (descending; ties by node ids).
///
/// `hourly_prices[i]` is node `i`'s hourly series; all series must cover the
/// same hours.
pub fn congestion_dyads(
    nodes: &[Node],
    hourly_prices: &[Vec<f64>],
    thresholds: &DyadThresholds,
) -> Result<Vec<DyadRecord>> {
    if hourly_prices.len() < nodes.len() {
        return Err(CongestionError::MissingPrices(
            nodes[hourly_prices.len()].node_id.clone(),
        ));
    }
    let mut records = Vec::new();
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let distance = haversine_miles(&nodes[i], &nodes[j]);
            if distance >= thresholds.distance_miles {
                continue;
            }
            let hours =
                exceedance_hours(&hourly_prices[i], &hourly_prices[j], thresholds.price_usd_per_mwh)?;
            if hours <= thresholds.hours {
                continue;
            }
            let (a, b) = if nodes[i].node_id <= nodes[j].node_id {
                (&nodes[i], &nodes[j])
            } else {
                (&nodes[j], &nodes[i])
            };
            records.push(DyadRecord {
                node_a: a.node_id.clone(),
                node_b: b.node_id.clone(),
                distance_miles: distance,
                exceedance_hours: hours,
                threshold_usd_per_mwh: thresholds.price_usd_per_mwh,
            });
        }
    }
    records.sort_by(|x, y| {
        y.exceedance_hours
            .cmp(&x.exceedance_hours)
            .then_with(|| x.node_a.cmp(&y.node_a))
            .then_with(|| x.node_b.cmp(&y.node_b))
    });
    Ok(records)
}

/// Exceedance counts split by calendar month. `month_labels[h]` in 1..=12
/// assigns hour `h` to its month.
pub fn monthly_exceedance(
    a: &[f64],
    b: &[f64],
    threshold: f64,
    month_labels: &[u32],
) -> Result<[u32; 12]> {
    if a.len() != b.len() {
        return Err(CongestionError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if month_labels.len() != a.len() {
        return Err(CongestionError::LengthMismatch {
            a: a.len(),
            b: month_labels.len(),
        });
    }
    let mut counts = [0u32; 12];
    for ((x, y), &month) in a.iter().zip(b).zip(month_labels) {
        if !(1..=12).contains(&month) {
            return Err(CongestionError::MonthIndexOutOfRange(month));
        }
        if (x - y).abs() > threshold {
            counts[(month - 1) as usize] += 1;
        }
    }
    Ok(counts)
}

/// Arithmetic mean of monthly counts across several pairs.
pub fn average_monthly(counts: &[[u32; 12]]) -> [f64; 12] {
    let mut mean = [0.0; 12];
    if counts.is_empty() {
        return mean;
    }
    for row in counts {
        for (m, c) in row.iter().enumerate() {
            mean[m] += *c as f64;
        }
    }
    for v in &mut mean {
        *v /= counts.len() as f64;
    }
    mean
}

/// Pearson product-moment correlation of two equal-length series.
pub fn frequency_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CongestionError::LengthMismatch {
            a: x.len(),
            b: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(CongestionError::SeriesTooShort {
            min: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CongestionError::ZeroVariance);
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Mean of each consecutive `points_per_hour` block, for aligning sub-hourly
/// price grids to the hourly analysis. A trailing partial block is averaged
/// over its actual size.
pub fn hourly_mean(series: &[f64], points_per_hour: usize) -> Vec<f64> {
    assert!(points_per_hour > 0);
    series
        .chunks(points_per_hour)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

/// CSV rendering of a dyad list: `node_a,node_b,distance_miles,exceedance_hours`.
pub fn dyads_to_csv(records: &[DyadRecord]) -> String {
    let mut out = String::from("node_a,node_b,distance_miles,exceedance_hours\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{:.3},{}\n",
            r.node_a, r.node_b, r.distance_miles, r.exceedance_hours
        ));
    }
    out
}

/// CSV rendering of labeled monthly rows with one column per month.
pub fn monthly_table_to_csv(rows: &[(String, [f64; 12])]) -> String {
    let mut out = String::from("pair");
    for m in 1..=12 {
        out.push_str(&format!(",m{m:02}"));
    }
    out.push('\n');
    for (label, counts) in rows {
        out.push_str(label);
        for c in counts {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    out
}
