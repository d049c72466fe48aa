//! Core value types shared by every other module: the intraday time grid,
//! the storage asset, cost parameters, and money/discount arithmetic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Days per accounting year for discounting purposes.
pub const DAYS_PER_YEAR: u32 = 365;

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("day index must be >= 1 (got 0)")]
    ZeroDayIndex,
    #[error("{name} must be {requirement} (got {value})")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("intervals_per_day * interval_hours must equal 24 (got {0})")]
    GridNotOneDay(f64),
    #[error("money amount must be finite (got {0})")]
    NonFiniteMoney(f64),
}

/// Intraday time discretization: `intervals_per_day` intervals of
/// `interval_hours` hours each, spanning exactly 24 hours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    intervals_per_day: usize,
    interval_hours: f64,
}

impl TimeGrid {
    /// 96 intervals of 15 minutes.
    pub fn quarter_hourly() -> Self {
        Self::new(96, 0.25).unwrap()
    }

    pub fn new(intervals_per_day: usize, interval_hours: f64) -> Result<Self, DomainError> {
        if intervals_per_day < 1 {
            return Err(DomainError::OutOfRange {
                name: "intervals_per_day",
                requirement: ">= 1",
                value: intervals_per_day as f64,
            });
        }
        if !(interval_hours > 0.0) {
            return Err(DomainError::OutOfRange {
                name: "interval_hours",
                requirement: "> 0",
                value: interval_hours,
            });
        }
        let day = intervals_per_day as f64 * interval_hours;
        if (day - 24.0).abs() > 1e-9 {
            return Err(DomainError::GridNotOneDay(day));
        }
        Ok(Self {
            intervals_per_day,
            interval_hours,
        })
    }

    /// Grid with `intervals_per_day` equal intervals covering 24 hours.
    pub fn with_intervals(intervals_per_day: usize) -> Result<Self, DomainError> {
        Self::new(intervals_per_day, 24.0 / intervals_per_day as f64)
    }

    pub fn intervals_per_day(&self) -> usize {
        self.intervals_per_day
    }

    pub fn interval_hours(&self) -> f64 {
        self.interval_hours
    }
}

/// Physical and degradation parameters of one storage unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageAsset {
    /// Usable energy capacity in MWh.
    pub energy_capacity_mwh: f64,
    /// Charge/discharge power capacity in MW.
    pub power_capacity_mw: f64,
    /// One-way charge/discharge efficiency, in (0, 1].
    pub efficiency: f64,
    /// Self-discharge fraction per interval, in [0, 1).
    pub self_discharge: f64,
    /// Calendar degradation in MWh-throughput per day.
    pub calendar_usage_mwh_per_day: f64,
    /// Total MWh-throughput budget over the asset's life.
    pub lifecycle_usage_limit_mwh: f64,
}

impl StorageAsset {
    pub fn validate(&self) -> Result<(), DomainError> {
        check_nonneg("energy_capacity_mwh", self.energy_capacity_mwh)?;
        check_nonneg("power_capacity_mw", self.power_capacity_mw)?;
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(DomainError::OutOfRange {
                name: "efficiency",
                requirement: "in (0, 1]",
                value: self.efficiency,
            });
        }
        if !(self.self_discharge >= 0.0 && self.self_discharge < 1.0) {
            return Err(DomainError::OutOfRange {
                name: "self_discharge",
                requirement: "in [0, 1)",
                value: self.self_discharge,
            });
        }
        check_nonneg("calendar_usage_mwh_per_day", self.calendar_usage_mwh_per_day)?;
        check_nonneg("lifecycle_usage_limit_mwh", self.lifecycle_usage_limit_mwh)?;
        Ok(())
    }
}

/// Cost coefficients for transport, degradation, and discounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Transportation cost in $/hour of travel.
    pub transport_cost_usd_per_hour: f64,
    /// Marginal degradation cost in $/MWh-throughput.
    pub degradation_cost_usd_per_mwh: f64,
    /// Annual discount rate as a fraction.
    pub discount_rate: f64,
}

impl CostParams {
    pub fn validate(&self) -> Result<(), DomainError> {
        check_nonneg("transport_cost_usd_per_hour", self.transport_cost_usd_per_hour)?;
        check_nonneg("degradation_cost_usd_per_mwh", self.degradation_cost_usd_per_mwh)?;
        check_nonneg("discount_rate", self.discount_rate)?;
        Ok(())
    }
}

fn check_nonneg(name: &'static str, value: f64) -> Result<(), DomainError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(DomainError::OutOfRange {
            name,
            requirement: ">= 0 and finite",
            value,
        })
    }
}

/// A dollar amount. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Money(f64);

impl Money {
    pub const ZERO: Money = Money(0.0);

    /// Panics on NaN/infinite input; use `TryFrom<f64>` for fallible paths.
    pub fn new(amount: f64) -> Self {
        assert!(amount.is_finite(), "money amount must be finite");
        Money(amount)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Money {
    type Error = DomainError;

    fn try_from(amount: f64) -> Result<Self, Self::Error> {
        if amount.is_finite() {
            Ok(Money(amount))
        } else {
            Err(DomainError::NonFiniteMoney(amount))
        }
    }
}

impl From<Money> for f64 {
    fn from(m: Money) -> f64 {
        m.0
    }
}

impl std::ops::Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money::new(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money::new(self.0 - rhs.0)
    }
}

impl std::ops::Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money::new(-self.0)
    }
}

impl std::ops::Mul<f64> for Money {
    type Output = Money;
    fn mul(self, rhs: f64) -> Money {
        Money::new(self.0 * rhs)
    }
}

impl std::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, |a, b| a + b)
    }
}

impl std::fmt::Display for Money {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 < 0.0 {
            write!(f, "-${:.2}", -self.0)
        } else {
            write!(f, "${:.2}", self.0)
        }
    }
}

/// Exponential discount factor for a 1-based day index.
///
/// The year number of day `t` is `floor((t - 1) / 365)`, so the entire first
/// operating year is undiscounted and the factor is non-increasing in `t`.
pub fn discount_factor(day_index: u32, rate: f64) -> Result<f64, DomainError> {
    if day_index == 0 {
        return Err(DomainError::ZeroDayIndex);
    }
    check_nonneg("discount_rate", rate)?;
    let year = (day_index - 1) / DAYS_PER_YEAR;
    Ok((1.0 + rate).powi(-(year as i32)))
}

/// Convert full equivalent cycles to MWh-throughput.
///
/// One cycle moves `energy_capacity` MWh in and `energy_capacity` MWh out, so
/// throughput is `cycles * 2 * energy_capacity` (charge plus discharge).
pub fn cycles_to_throughput(cycles: f64, energy_capacity_mwh: f64) -> Result<f64, DomainError> {
    if !(cycles > 0.0) {
        return Err(DomainError::OutOfRange {
            name: "cycles",
            requirement: "> 0",
            value: cycles,
        });
    }
    if !(energy_capacity_mwh > 0.0) {
        return Err(DomainError::OutOfRange {
            name: "energy_capacity_mwh",
            requirement: "> 0",
            value: energy_capacity_mwh,
        });
    }
    Ok(cycles * 2.0 * energy_capacity_mwh)
}
