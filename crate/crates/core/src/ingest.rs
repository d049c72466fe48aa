//! Loading and validation of price files, node geodata, and travel-time
//! tensors, plus case-area construction around a center node.
//!
//! All inputs are UTF-8 CSV with `.` decimal points:
//! - prices:  `node_id,date,interval,price_usd_per_mwh[,rt_price_usd_per_mwh]`
//! - nodes:   `node_id,latitude,longitude`
//! - travel:  `from_node,to_node,interval,minutes`
//!
//! Node ordering is ascending `node_id` everywhere; all downstream variable
//! indexing and reports rely on that order being stable.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::TimeGrid;

/// Mean Earth radius in miles.
pub const EARTH_RADIUS_MILES: f64 = 3958.8;
/// Mean Earth radius in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: String, column: &'static str },
    #[error("{path} line {line}: cannot parse {field} from `{value}`")]
    Parse {
        path: String,
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("price gap: {node},{date},{interval}")]
    Gap {
        node: String,
        date: String,
        interval: usize,
    },
    #[error("duplicate price cell: {node},{date},{interval}")]
    DuplicateCell {
        node: String,
        date: String,
        interval: usize,
    },
    #[error("interval {interval} out of range for a {intervals_per_day}-interval day")]
    IntervalOutOfRange {
        interval: i64,
        intervals_per_day: usize,
    },
    #[error("node `{node}`: latitude {lat} / longitude {lon} out of range")]
    InvalidCoordinate { node: String, lat: f64, lon: f64 },
    #[error("duplicate node_id `{0}`")]
    DuplicateNode(String),
    #[error("unknown center node `{0}`")]
    UnknownCenter(String),
    #[error("unknown node `{0}` referenced by input")]
    UnknownNode(String),
    #[error("travel speed must be > 0 (got {0})")]
    NonPositiveSpeed(f64),
    #[error("negative travel duration {minutes} min for {from}->{to}")]
    NegativeDuration {
        from: String,
        to: String,
        minutes: f64,
    },
    #[error("travel profile row with from == to (`{0}`); self-routes are fixed at zero")]
    SelfRoute(String),
    #[error("price table does not cover node `{0}`")]
    NodeWithoutPrices(String),
}

type Result<T> = std::result::Result<T, IngestError>;

/// A grid access node with its coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub node_id: String,
    pub latitude: f64,
    pub longitude: f64,
}

impl Node {
    pub fn new(node_id: impl Into<String>, latitude: f64, longitude: f64) -> Result<Self> {
        let node_id = node_id.into();
        if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
            return Err(IngestError::InvalidCoordinate {
                node: node_id,
                lat: latitude,
                lon: longitude,
            });
        }
        Ok(Node {
            node_id,
            latitude,
            longitude,
        })
    }
}

/// Travel durations in whole intervals, indexed `[from][to][interval]`.
///
/// Diagonal entries are always 0 and off-diagonal entries are always >= 1.
/// The tensor is not required to satisfy the triangle inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TravelTensor {
    nodes: usize,
    intervals: usize,
    data: Vec<u32>,
}

impl TravelTensor {
    fn zeroed(nodes: usize, intervals: usize) -> Self {
        TravelTensor {
            nodes,
            intervals,
            data: vec![0; nodes * nodes * intervals],
        }
    }

    /// Constant tensor: every distinct pair takes `ticks` intervals (min 1).
    pub fn uniform(nodes: usize, intervals: usize, ticks: u32) -> Self {
        Self::from_fn(nodes, intervals, |_, _, _| ticks)
    }

    /// Build from a duration function over `(from, to, interval)`. The
    /// diagonal is forced to 0 and off-diagonal values are floored at 1.
    pub fn from_fn(
        nodes: usize,
        intervals: usize,
        mut duration: impl FnMut(usize, usize, usize) -> u32,
    ) -> Self {
        let mut t = Self::zeroed(nodes, intervals);
        for n in 0..nodes {
            for m in 0..nodes {
                if n == m {
                    continue;
                }
                for h in 0..intervals {
                    t.set(n, m, h, duration(n, m, h).max(1));
                }
            }
        }
        t
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Duration in intervals from `n` to `m` when departing during interval
    /// `h` (0-based).
    pub fn get(&self, n: usize, m: usize, h: usize) -> u32 {
        self.data[(n * self.nodes + m) * self.intervals + h]
    }

    fn set(&mut self, n: usize, m: usize, h: usize, value: u32) {
        self.data[(n * self.nodes + m) * self.intervals + h] = value;
    }

    /// True when every (n, m) duration is the same for all intervals.
    pub fn is_time_invariant(&self) -> bool {
        (0..self.nodes).all(|n| {
            (0..self.nodes).all(|m| {
                let first = self.get(n, m, 0);
                (1..self.intervals).all(|h| self.get(n, m, h) == first)
            })
        })
    }
}

/// A circular operating area: center node, radius, member nodes in ascending
/// `node_id` order, and the travel tensor between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseArea {
    pub center: Node,
    pub radius_miles: f64,
    pub nodes: Vec<Node>,
    pub travel_intervals: TravelTensor,
}

impl CaseArea {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, node_id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.node_id == node_id)
    }

    pub fn center_index(&self) -> usize {
        self.node_index(&self.center.node_id)
            .expect("center is always a member node")
    }

    /// Degenerate single-node area used for stationary-storage baselines.
    pub fn single_node(node: &Node, grid: &TimeGrid) -> CaseArea {
        CaseArea {
            center: node.clone(),
            radius_miles: 0.0,
            nodes: vec![node.clone()],
            travel_intervals: TravelTensor::zeroed(1, grid.intervals_per_day()),
        }
    }
}

/// Day-ahead (and optionally real-time) prices for one calendar date,
/// `[node][interval]` in $/MWh. Node order is the owning table's order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketDay {
    pub date: String,
    pub day_ahead: Vec<Vec<f64>>,
    pub real_time: Option<Vec<Vec<f64>>>,
}

impl MarketDay {
    /// Project the day onto a subset of node rows (by row index).
    pub fn select_rows(&self, rows: &[usize]) -> MarketDay {
        let pick = |m: &Vec<Vec<f64>>| rows.iter().map(|&r| m[r].clone()).collect();
        MarketDay {
            date: self.date.clone(),
            day_ahead: pick(&self.day_ahead),
            real_time: self.real_time.as_ref().map(pick),
        }
    }
}

/// All loaded price days plus the node universe they cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceTable {
    pub node_ids: Vec<String>,
    pub days: Vec<MarketDay>,
}

impl PriceTable {
    /// Restrict every day to the given area's nodes, in area node order.
    pub fn project(&self, area: &CaseArea) -> Result<Vec<MarketDay>> {
        let rows: Vec<usize> = area
            .nodes
            .iter()
            .map(|n| {
                self.node_ids
                    .iter()
                    .position(|id| *id == n.node_id)
                    .ok_or_else(|| IngestError::NodeWithoutPrices(n.node_id.clone()))
            })
            .collect::<Result<_>>()?;
        Ok(self.days.iter().map(|d| d.select_rows(&rows)).collect())
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn column_index(
    headers: &csv::StringRecord,
    name: &'static str,
    path: &Path,
) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| IngestError::MissingColumn {
            path: path.display().to_string(),
            column: name,
        })
}

fn parse_f64(raw: &str, path: &Path, line: u64, field: &'static str) -> Result<f64> {
    let value: f64 = raw
        .trim()
        .parse()
        .map_err(|_| IngestError::Parse {
            path: path.display().to_string(),
            line,
            field,
            value: raw.to_string(),
        })?;
    // "NaN" and "inf" parse successfully but are not valid prices/durations.
    if !value.is_finite() {
        return Err(IngestError::Parse {
            path: path.display().to_string(),
            line,
            field,
            value: raw.to_string(),
        });
    }
    Ok(value)
}

/// Load the price CSV into a complete table: one `MarketDay` per date, every
/// (node, interval) cell present and finite, days sorted by date label.
pub fn load_prices(path: impl AsRef<Path>, grid: &TimeGrid) -> Result<PriceTable> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|source| IngestError::Csv {
            path: path.display().to_string(),
            source,
        })?
        .clone();
    let col_node = column_index(&headers, "node_id", path)?;
    let col_date = column_index(&headers, "date", path)?;
    let col_interval = column_index(&headers, "interval", path)?;
    let col_price = column_index(&headers, "price_usd_per_mwh", path)?;
    let col_rt = headers.iter().position(|h| h == "rt_price_usd_per_mwh");

    let intervals = grid.intervals_per_day();
    // (date, node) -> per-interval cells
    let mut cells: BTreeMap<(String, String), Vec<Option<(f64, Option<f64>)>>> = BTreeMap::new();

    for record in reader.records() {
        let record = record.map_err(|source| IngestError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let node = record.get(col_node).unwrap_or("").trim().to_string();
        let date = record.get(col_date).unwrap_or("").trim().to_string();
        let raw_interval = record.get(col_interval).unwrap_or("");
        let interval: i64 =
            raw_interval
                .trim()
                .parse()
                .map_err(|_| IngestError::Parse {
                    path: path.display().to_string(),
                    line,
                    field: "interval",
                    value: raw_interval.to_string(),
                })?;
        if interval < 0 || interval as usize >= intervals {
            return Err(IngestError::IntervalOutOfRange {
                interval,
                intervals_per_day: intervals,
            });
        }
        let price = parse_f64(record.get(col_price).unwrap_or(""), path, line, "price_usd_per_mwh")?;
        let rt = match col_rt {
            Some(c) => Some(parse_f64(
                record.get(c).unwrap_or(""),
                path,
                line,
                "rt_price_usd_per_mwh",
            )?),
            None => None,
        };

        let slot = cells
            .entry((date.clone(), node.clone()))
            .or_insert_with(|| vec![None; intervals]);
        let h = interval as usize;
        if slot[h].is_some() {
            return Err(IngestError::DuplicateCell {
                node,
                date,
                interval: h,
            });
        }
        slot[h] = Some((price, rt));
    }

    // Node universe: every node_id seen anywhere in the file.
    let mut node_ids: Vec<String> = cells.keys().map(|(_, n)| n.clone()).collect();
    node_ids.sort();
    node_ids.dedup();
    let mut dates: Vec<String> = cells.keys().map(|(d, _)| d.clone()).collect();
    dates.sort();
    dates.dedup();

    let mut days = Vec::with_capacity(dates.len());
    for date in &dates {
        let mut day_ahead = Vec::with_capacity(node_ids.len());
        let mut real_time = col_rt.map(|_| Vec::with_capacity(node_ids.len()));
        for node in &node_ids {
            let slot = cells.get(&(date.clone(), node.clone())).ok_or_else(|| {
                IngestError::Gap {
                    node: node.clone(),
                    date: date.clone(),
                    interval: 0,
                }
            })?;
            let mut da_row = Vec::with_capacity(intervals);
            let mut rt_row = Vec::with_capacity(intervals);
            for (h, cell) in slot.iter().enumerate() {
                match cell {
                    Some((p, rt)) => {
                        da_row.push(*p);
                        if let Some(rt_rows) = real_time.as_ref() {
                            let _ = rt_rows;
                            rt_row.push(rt.expect("rt column present for all rows"));
                        }
                    }
                    None => {
                        return Err(IngestError::Gap {
                            node: node.clone(),
                            date: date.clone(),
                            interval: h,
                        })
                    }
                }
            }
            day_ahead.push(da_row);
            if let Some(rt_rows) = real_time.as_mut() {
                rt_rows.push(rt_row);
            }
        }
        days.push(MarketDay {
            date: date.clone(),
            day_ahead,
            real_time,
        });
    }

    Ok(PriceTable { node_ids, days })
}

/// Load the nodes CSV; node ids must be unique and coordinates in range.
pub fn load_nodes(path: impl AsRef<Path>) -> Result<Vec<Node>> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|source| IngestError::Csv {
            path: path.display().to_string(),
            source,
        })?
        .clone();
    let col_id = column_index(&headers, "node_id", path)?;
    let col_lat = column_index(&headers, "latitude", path)?;
    let col_lon = column_index(&headers, "longitude", path)?;

    let mut nodes: Vec<Node> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| IngestError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let id = record.get(col_id).unwrap_or("").trim().to_string();
        let lat = parse_f64(record.get(col_lat).unwrap_or(""), path, line, "latitude")?;
        let lon = parse_f64(record.get(col_lon).unwrap_or(""), path, line, "longitude")?;
        if nodes.iter().any(|n| n.node_id == id) {
            return Err(IngestError::DuplicateNode(id));
        }
        nodes.push(Node::new(id, lat, lon)?);
    }
    nodes.sort_by(|a, b| a.node_id.cmp(&b.node_id));
    Ok(nodes)
}

/// Great-circle distance in miles (mean Earth radius 3958.8 mi).
pub fn haversine_miles(a: &Node, b: &Node) -> f64 {
    haversine(a, b, EARTH_RADIUS_MILES)
}

/// Great-circle distance in kilometers (mean Earth radius 6371.0 km).
pub fn haversine_km(a: &Node, b: &Node) -> f64 {
    haversine(a, b, EARTH_RADIUS_KM)
}

fn haversine(a: &Node, b: &Node, radius: f64) -> f64 {
    let lat1 = a.latitude.to_radians();
    let lat2 = b.latitude.to_radians();
    let dlat = (b.latitude - a.latitude).to_radians();
    let dlon = (b.longitude - a.longitude).to_radians();
    let s = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * radius * s.sqrt().atan2((1.0 - s).sqrt())
}

/// Build a time-invariant travel tensor from straight-line distances at a
/// constant speed, plus a fixed installation allowance.
///
/// Durations round up to whole intervals and are floored at 1 for `n != m`.
pub fn build_travel_tensor(
    nodes: &[Node],
    speed_kmh: f64,
    grid: &TimeGrid,
    install_intervals: u32,
) -> Result<TravelTensor> {
    if !(speed_kmh > 0.0) {
        return Err(IngestError::NonPositiveSpeed(speed_kmh));
    }
    let count = nodes.len();
    let intervals = grid.intervals_per_day();
    let mut tensor = TravelTensor::zeroed(count, intervals);
    for n in 0..count {
        for m in 0..count {
            if n == m {
                continue;
            }
            let hours = haversine_km(&nodes[n], &nodes[m]) / speed_kmh;
            let ticks = (hours / grid.interval_hours()).ceil() as u32 + install_intervals;
            let ticks = ticks.max(1);
            for h in 0..intervals {
                tensor.set(n, m, h, ticks);
            }
        }
    }
    Ok(tensor)
}

/// Overlay a time-dependent travel profile (minutes per departure interval)
/// on a static tensor. Cells absent from the file keep the static value.
pub fn load_travel_profile(
    path: impl AsRef<Path>,
    nodes: &[Node],
    grid: &TimeGrid,
    fallback: &TravelTensor,
) -> Result<TravelTensor> {
    let path = path.as_ref();
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|source| IngestError::Csv {
            path: path.display().to_string(),
            source,
        })?
        .clone();
    let col_from = column_index(&headers, "from_node", path)?;
    let col_to = column_index(&headers, "to_node", path)?;
    let col_interval = column_index(&headers, "interval", path)?;
    let col_minutes = column_index(&headers, "minutes", path)?;

    let index_of = |id: &str| -> Result<usize> {
        nodes
            .iter()
            .position(|n| n.node_id == id)
            .ok_or_else(|| IngestError::UnknownNode(id.to_string()))
    };

    let mut tensor = fallback.clone();
    let minutes_per_interval = grid.interval_hours() * 60.0;
    for record in reader.records() {
        let record = record.map_err(|source| IngestError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let from = record.get(col_from).unwrap_or("").trim().to_string();
        let to = record.get(col_to).unwrap_or("").trim().to_string();
        if from == to {
            return Err(IngestError::SelfRoute(from));
        }
        let n = index_of(&from)?;
        let m = index_of(&to)?;
        let raw_interval = record.get(col_interval).unwrap_or("");
        let interval: i64 = raw_interval
            .trim()
            .parse()
            .map_err(|_| IngestError::Parse {
                path: path.display().to_string(),
                line,
                field: "interval",
                value: raw_interval.to_string(),
            })?;
        if interval < 0 || interval as usize >= grid.intervals_per_day() {
            return Err(IngestError::IntervalOutOfRange {
                interval,
                intervals_per_day: grid.intervals_per_day(),
            });
        }
        let minutes = parse_f64(record.get(col_minutes).unwrap_or(""), path, line, "minutes")?;
        if minutes < 0.0 {
            return Err(IngestError::NegativeDuration { from, to, minutes });
        }
        let ticks = ((minutes / minutes_per_interval).ceil() as u32).max(1);
        tensor.set(n, m, interval as usize, ticks);
    }
    Ok(tensor)
}

/// Select the case area centered at `center_id`: every node within
/// `radius_miles` (inclusive), ordered by ascending `node_id`, with a travel
/// tensor built at `speed_kmh`.
pub fn select_case_area(
    all_nodes: &[Node],
    center_id: &str,
    radius_miles: f64,
    speed_kmh: f64,
    grid: &TimeGrid,
    install_intervals: u32,
) -> Result<CaseArea> {
    let center = all_nodes
        .iter()
        .find(|n| n.node_id == center_id)
        .ok_or_else(|| IngestError::UnknownCenter(center_id.to_string()))?
        .clone();
    let mut nodes: Vec<Node> = all_nodes
        .iter()
        .filter(|n| haversine_miles(&center, n) <= radius_miles)
        .cloned()
        .collect();
    nodes.sort_by(|a, b| a.node_id.cmp(&b.node_id));
    let travel_intervals = build_travel_tensor(&nodes, speed_kmh, grid, install_intervals)?;
    Ok(CaseArea {
        center,
        radius_miles,
        nodes,
        travel_intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn grid96() -> TimeGrid {
        TimeGrid::quarter_hourly()
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn full_price_csv(nodes: &[&str], dates: &[&str], intervals: usize) -> String {
        let mut s = String::from("node_id,date,interval,price_usd_per_mwh\n");
        for date in dates {
            for node in nodes {
                for h in 0..intervals {
                    s.push_str(&format!("{node},{date},{h},{}\n", 10.0 + h as f64));
                }
            }
        }
        s
    }

    #[test]
    fn load_prices_complete_file() {
        let csv = full_price_csv(&["A", "B"], &["2018-01-01"], 96);
        let f = write_temp(&csv);
        let table = load_prices(f.path(), &grid96()).unwrap();
        assert_eq!(table.node_ids, vec!["A", "B"]);
        assert_eq!(table.days.len(), 1);
        let day = &table.days[0];
        assert_eq!(day.day_ahead.len(), 2);
        assert_eq!(day.day_ahead[0].len(), 96);
        assert!(day.real_time.is_none());
    }

    #[test]
    fn load_prices_reports_gap() {
        let mut csv = String::from("node_id,date,interval,price_usd_per_mwh\n");
        for h in 0..96 {
            csv.push_str(&format!("B,2018-01-01,{h},10\n"));
        }
        for h in 0..95 {
            // node A misses interval 95
            csv.push_str(&format!("A,2018-01-01,{h},10\n"));
        }
        let f = write_temp(&csv);
        let err = load_prices(f.path(), &grid96()).unwrap_err();
        assert_eq!(err.to_string(), "price gap: A,2018-01-01,95");
    }

    #[test]
    fn load_prices_rejects_nan() {
        let csv = "node_id,date,interval,price_usd_per_mwh\nA,2018-01-01,0,NaN\n";
        let f = write_temp(csv);
        let err = load_prices(f.path(), &grid96()).unwrap_err();
        assert!(matches!(err, IngestError::Parse { .. }), "got {err}");
    }

    #[test]
    fn load_prices_rejects_duplicate_cell() {
        let csv =
            "node_id,date,interval,price_usd_per_mwh\nA,2018-01-01,0,10\nA,2018-01-01,0,11\n";
        let f = write_temp(csv);
        let err = load_prices(f.path(), &grid96()).unwrap_err();
        assert!(matches!(err, IngestError::DuplicateCell { .. }), "got {err}");
    }

    #[test]
    fn load_prices_negative_allowed_and_sorted_dates() {
        let grid = TimeGrid::with_intervals(2).unwrap();
        let csv = "node_id,date,interval,price_usd_per_mwh\n\
                   A,2018-01-02,0,-12.5\nA,2018-01-02,1,3\n\
                   A,2018-01-01,0,1\nA,2018-01-01,1,2\n";
        let f = write_temp(csv);
        let table = load_prices(f.path(), &grid).unwrap();
        assert_eq!(table.days[0].date, "2018-01-01");
        assert_eq!(table.days[1].day_ahead[0][0], -12.5);
    }

    #[test]
    fn load_prices_realtime_column() {
        let grid = TimeGrid::with_intervals(2).unwrap();
        let csv = "node_id,date,interval,price_usd_per_mwh,rt_price_usd_per_mwh\n\
                   A,2018-01-01,0,10,11\nA,2018-01-01,1,20,19\n";
        let f = write_temp(csv);
        let table = load_prices(f.path(), &grid).unwrap();
        let rt = table.days[0].real_time.as_ref().unwrap();
        assert_eq!(rt[0], vec![11.0, 19.0]);
    }

    #[test]
    fn reload_is_deterministic() {
        let csv = full_price_csv(&["B", "A", "C"], &["2018-01-02", "2018-01-01"], 96);
        let f = write_temp(&csv);
        let first = serde_json::to_string(&load_prices(f.path(), &grid96()).unwrap()).unwrap();
        let second = serde_json::to_string(&load_prices(f.path(), &grid96()).unwrap()).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn haversine_identical_points() {
        let p = Node::new("P", 37.0, -122.0).unwrap();
        assert_eq!(haversine_miles(&p, &p), 0.0);
    }

    #[test]
    fn haversine_one_degree_longitude_at_equator() {
        let a = Node::new("A", 0.0, 0.0).unwrap();
        let b = Node::new("B", 0.0, 1.0).unwrap();
        let d = haversine_miles(&a, &b);
        assert!((d - 69.09).abs() < 0.05, "got {d}");
    }

    #[test]
    fn haversine_symmetry() {
        let pairs = [
            (37.77, -122.42, 32.72, -117.16),
            (40.0, -100.0, -33.0, 151.0),
            (0.1, 0.2, -0.3, 0.4),
        ];
        for (lat1, lon1, lat2, lon2) in pairs {
            let a = Node::new("a", lat1, lon1).unwrap();
            let b = Node::new("b", lat2, lon2).unwrap();
            assert!((haversine_miles(&a, &b) - haversine_miles(&b, &a)).abs() < 1e-9);
        }
    }

    /// Place a node `km` kilometers east of the origin along the equator.
    fn node_km_east(id: &str, km: f64) -> Node {
        let deg = km / EARTH_RADIUS_KM * 180.0 / std::f64::consts::PI;
        Node::new(id, 0.0, deg).unwrap()
    }

    #[test]
    fn travel_tensor_short_hop_is_one_interval() {
        let nodes = [node_km_east("A", 0.0), node_km_east("B", 5.0)];
        let t = build_travel_tensor(&nodes, 40.0, &grid96(), 0).unwrap();
        assert_eq!(t.get(0, 1, 0), 1);
        assert_eq!(t.get(1, 0, 0), 1);
    }

    #[test]
    fn travel_tensor_rounds_up() {
        // 25 km at 40 km/h is 0.625 h = 2.5 intervals -> 3
        let nodes = [node_km_east("A", 0.0), node_km_east("B", 25.0)];
        let t = build_travel_tensor(&nodes, 40.0, &grid96(), 0).unwrap();
        assert_eq!(t.get(0, 1, 7), 3);
    }

    #[test]
    fn travel_tensor_diagonal_zero() {
        let nodes = [node_km_east("A", 0.0), node_km_east("B", 25.0)];
        let t = build_travel_tensor(&nodes, 40.0, &grid96(), 2).unwrap();
        for h in 0..96 {
            assert_eq!(t.get(0, 0, h), 0);
            assert_eq!(t.get(1, 1, h), 0);
        }
        // install allowance applies off-diagonal
        assert_eq!(t.get(0, 1, 0), 5);
    }

    #[test]
    fn travel_tensor_rejects_zero_speed() {
        let nodes = [node_km_east("A", 0.0)];
        assert!(build_travel_tensor(&nodes, 0.0, &grid96(), 0).is_err());
    }

    #[test]
    fn travel_profile_overlays_and_falls_back() {
        let nodes = [node_km_east("A", 0.0), node_km_east("B", 5.0)];
        let fallback = build_travel_tensor(&nodes, 40.0, &grid96(), 0).unwrap();
        let csv = "from_node,to_node,interval,minutes\nA,B,4,20\nA,B,5,15\n";
        let f = write_temp(csv);
        let t = load_travel_profile(f.path(), &nodes, &grid96(), &fallback).unwrap();
        assert_eq!(t.get(0, 1, 4), 2); // ceil(20/15)
        assert_eq!(t.get(0, 1, 5), 1); // exactly one interval
        assert_eq!(t.get(0, 1, 6), fallback.get(0, 1, 6)); // untouched
        assert_eq!(t.get(1, 0, 4), fallback.get(1, 0, 4)); // reverse direction untouched
        assert!(!t.is_time_invariant());
    }

    #[test]
    fn travel_profile_rejects_negative_minutes() {
        let nodes = [node_km_east("A", 0.0), node_km_east("B", 5.0)];
        let fallback = build_travel_tensor(&nodes, 40.0, &grid96(), 0).unwrap();
        let csv = "from_node,to_node,interval,minutes\nA,B,0,-1\n";
        let f = write_temp(csv);
        let err = load_travel_profile(f.path(), &nodes, &grid96(), &fallback).unwrap_err();
        assert!(matches!(err, IngestError::NegativeDuration { .. }));
    }

    /// Node at a given distance in miles north of a center.
    fn node_miles_north(id: &str, center_lat: f64, miles: f64) -> Node {
        let deg = miles / EARTH_RADIUS_MILES * 180.0 / std::f64::consts::PI;
        Node::new(id, center_lat + deg, 0.0).unwrap()
    }

    #[test]
    fn case_area_distance_filter() {
        let all = vec![
            Node::new("CTR", 35.0, 0.0).unwrap(),
            node_miles_north("N05", 35.0, 5.0),
            node_miles_north("N15", 35.0, 15.0),
            node_miles_north("N25", 35.0, 25.0),
        ];
        let area = select_case_area(&all, "CTR", 10.0, 40.0, &grid96(), 0).unwrap();
        let ids: Vec<&str> = area.nodes.iter().map(|n| n.node_id.as_str()).collect();
        assert_eq!(ids, vec!["CTR", "N05"]);
        assert_eq!(area.center.node_id, "CTR");
    }

    #[test]
    fn case_area_zero_radius_keeps_center_only() {
        let all = vec![
            Node::new("CTR", 35.0, 0.0).unwrap(),
            node_miles_north("N05", 35.0, 5.0),
        ];
        let area = select_case_area(&all, "CTR", 0.0, 40.0, &grid96(), 0).unwrap();
        assert_eq!(area.node_count(), 1);
        assert_eq!(area.center_index(), 0);
    }

    #[test]
    fn case_area_unknown_center() {
        let all = vec![Node::new("CTR", 35.0, 0.0).unwrap()];
        assert!(matches!(
            select_case_area(&all, "NOPE", 10.0, 40.0, &grid96(), 0),
            Err(IngestError::UnknownCenter(_))
        ));
    }

    #[test]
    fn price_table_projection() {
        let grid = TimeGrid::with_intervals(2).unwrap();
        let csv = "node_id,date,interval,price_usd_per_mwh\n\
                   A,2018-01-01,0,1\nA,2018-01-01,1,2\n\
                   B,2018-01-01,0,3\nB,2018-01-01,1,4\n\
                   C,2018-01-01,0,5\nC,2018-01-01,1,6\n";
        let f = write_temp(csv);
        let table = load_prices(f.path(), &grid).unwrap();
        let area = CaseArea {
            center: Node::new("C", 0.0, 0.0).unwrap(),
            radius_miles: 1.0,
            nodes: vec![
                Node::new("A", 0.0, 0.0).unwrap(),
                Node::new("C", 0.0, 0.0).unwrap(),
            ],
            travel_intervals: TravelTensor::zeroed(2, 2),
        };
        let days = table.project(&area).unwrap();
        assert_eq!(days[0].day_ahead, vec![vec![1.0, 2.0], vec![5.0, 6.0]]);
    }

    #[test]
    fn nodes_csv_roundtrip_and_duplicates() {
        let csv = "node_id,latitude,longitude\nB,35.0,-120.0\nA,34.0,-119.0\n";
        let f = write_temp(csv);
        let nodes = load_nodes(f.path()).unwrap();
        assert_eq!(nodes[0].node_id, "A"); // sorted
        let dup = "node_id,latitude,longitude\nA,35.0,-120.0\nA,34.0,-119.0\n";
        let f2 = write_temp(dup);
        assert!(matches!(
            load_nodes(f2.path()),
            Err(IngestError::DuplicateNode(_))
        ));
    }

    #[test]
    fn node_coordinate_bounds() {
        assert!(Node::new("X", 91.0, 0.0).is_err());
        assert!(Node::new("X", 0.0, 181.0).is_err());
        assert!(Node::new("X", -90.0, 180.0).is_ok());
    }
}
