//! Scenario JSON files, result records and CSV tables.
//!
//! Rationals cross file boundaries as exact `"num/den"` strings; decimal
//! companions are for display only.
//!
//! CSV columns, in order: `n, c, n_d, route, avg_risk, avg_risk_decimal,
//! worst_risk, worst_risk_decimal, avg_wait, heuristic_tag, multiplicity`.
//! `avg_wait` is empty for geometry-free rows (sweeps).

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MotionModel;
use crate::model::{CustomerSite, Point, Scenario, SiteId, VendorSite};
use crate::privacy::{to_f64, Rational};
use crate::search::{Evaluation, ParetoFront, SweepCell};

pub const FORMAT_VERSION: u32 = 1;
pub const UNITS: &str = "meters";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VendorRecord {
    pub id: SiteId,
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub decoy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomerRecord {
    pub id: SiteId,
    pub x: f64,
    pub y: f64,
    pub vendor_id: SiteId,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionRecord {
    pub speed_mps: f64,
    pub stop_duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub format_version: u32,
    pub name: String,
    pub units: String,
    pub vendors: Vec<VendorRecord>,
    pub customers: Vec<CustomerRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<MotionRecord>,
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        ScenarioFile {
            format_version: FORMAT_VERSION,
            name: s.name().to_string(),
            units: UNITS.to_string(),
            vendors: s
                .vendors()
                .iter()
                .map(|v| VendorRecord {
                    id: v.id,
                    x: v.position.x,
                    y: v.position.y,
                    decoy: v.decoy,
                })
                .collect(),
            customers: s
                .customers()
                .iter()
                .map(|c| CustomerRecord {
                    id: c.id,
                    x: c.position.x,
                    y: c.position.y,
                    vendor_id: c.vendor_id,
                })
                .collect(),
            motion: s.motion().map(|m| MotionRecord {
                speed_mps: m.speed,
                stop_duration_s: m.stop_duration,
            }),
        }
    }
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::InvalidScenario(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.units != UNITS {
            return Err(Error::InvalidScenario(format!(
                "units must be {UNITS:?}, got {:?}",
                self.units
            )));
        }
        let vendors = self
            .vendors
            .into_iter()
            .map(|v| VendorSite {
                id: v.id,
                position: Point::new(v.x, v.y),
                decoy: v.decoy,
            })
            .collect();
        let customers = self
            .customers
            .into_iter()
            .map(|c| CustomerSite {
                id: c.id,
                position: Point::new(c.x, c.y),
                vendor_id: c.vendor_id,
            })
            .collect();
        let scenario = Scenario::new(self.name, vendors, customers)?;
        Ok(match self.motion {
            Some(m) => {
                let motion = MotionModel {
                    speed: m.speed_mps,
                    stop_duration: m.stop_duration_s,
                };
                motion.validate()?;
                scenario.with_motion(motion)
            }
            None => scenario,
        })
    }
}

pub fn scenario_to_json(scenario: &Scenario) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ScenarioFile::from(scenario))?;
    s.push('\n');
    Ok(s)
}

pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    serde_json::from_str::<ScenarioFile>(text)?.into_scenario()
}

pub fn save_scenario(path: &Path, scenario: &Scenario) -> Result<()> {
    fs::write(path, scenario_to_json(scenario)?)?;
    Ok(())
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    scenario_from_json(&fs::read_to_string(path)?)
}

/// `"num/den"`, always with a denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((num, den)) => {
            let num: i128 = num.trim().parse().map_err(|_| bad())?;
            let den: i128 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok(Rational::new(num, den))
        }
        None => s.parse().map(Rational::from_integer).map_err(|_| bad()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalValue {
    pub exact: String,
    pub decimal: f64,
}

impl From<&Rational> for RationalValue {
    fn from(r: &Rational) -> Self {
        RationalValue {
            exact: format_rational(r),
            decimal: to_f64(r),
        }
    }
}

impl RationalValue {
    pub fn value(&self) -> Result<Rational> {
        parse_rational(&self.exact)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub vendor: String,
    pub customer: String,
    pub risk: RationalValue,
    pub wait_s: f64,
}

/// A route with its objectives, ready for JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub route: String,
    pub orders: Vec<OrderRecord>,
    pub avg_risk: RationalValue,
    pub worst_risk: RationalValue,
    pub avg_wait_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heuristic_tag: Option<String>,
    /// Set for heuristic routes: false when the ordering search was greedy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_instantiation: Option<bool>,
}

impl ResultRecord {
    pub fn new(e: &Evaluation, scenario: &Scenario) -> Self {
        ResultRecord {
            route: e.route.to_string(),
            orders: (0..scenario.order_count())
                .map(|o| {
                    let (v, a) = scenario.order_stops(o);
                    OrderRecord {
                        vendor: v.to_string(),
                        customer: a.to_string(),
                        risk: RationalValue::from(&e.risks.risks[o]),
                        wait_s: e.waits[o],
                    }
                })
                .collect(),
            avg_risk: RationalValue::from(&e.risks.average),
            worst_risk: RationalValue::from(&e.risks.worst_case),
            avg_wait_s: e.avg_wait,
            heuristic_tag: e.heuristic.clone(),
            exact_instantiation: None,
        }
    }
}

/// One CSV line; field names are the column headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: usize,
    pub c: usize,
    pub n_d: usize,
    pub route: String,
    pub avg_risk: String,
    pub avg_risk_decimal: f64,
    pub worst_risk: String,
    pub worst_risk_decimal: f64,
    pub avg_wait: Option<f64>,
    pub heuristic_tag: Option<String>,
    pub multiplicity: Option<u64>,
}

impl ResultRow {
    pub fn from_evaluation(e: &Evaluation, capacity: usize, decoys: usize, multiplicity: Option<u64>) -> Self {
        ResultRow {
            n: e.risks.risks.len(),
            c: capacity,
            n_d: decoys,
            route: e.route.to_string(),
            avg_risk: format_rational(&e.risks.average),
            avg_risk_decimal: to_f64(&e.risks.average),
            worst_risk: format_rational(&e.risks.worst_case),
            worst_risk_decimal: to_f64(&e.risks.worst_case),
            avg_wait: Some(e.avg_wait),
            heuristic_tag: e.heuristic.clone(),
            multiplicity,
        }
    }

    pub fn from_sweep(cell: &SweepCell) -> Self {
        ResultRow {
            n: cell.orders,
            c: cell.capacity,
            n_d: cell.decoys,
            route: cell.route.to_string(),
            avg_risk: format_rational(&cell.min_avg_risk),
            avg_risk_decimal: to_f64(&cell.min_avg_risk),
            worst_risk: format_rational(&cell.worst_risk),
            worst_risk_decimal: to_f64(&cell.worst_risk),
            avg_wait: None,
            heuristic_tag: None,
            multiplicity: Some(cell.multiplicity),
        }
    }
}

/// Rows for a front, in front order (ascending wait).
pub fn front_rows(front: &ParetoFront, capacity: usize, decoy_budget: usize) -> Vec<ResultRow> {
    front
        .points
        .iter()
        .map(|p| ResultRow::from_evaluation(&p.evaluation, capacity, decoy_budget, Some(p.multiplicity)))
        .collect()
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
