//! Planar geography: distances, the wait-time model and scenario generators.
//!
//! Generators draw from `ChaCha8Rng::seed_from_u64(seed)` (the `rand_chacha`
//! stream cipher RNG) in a fixed order: real vendors `1..=n`, then decoys,
//! then customers `1..=n`, each site drawing its own coordinates before the
//! next. Uniform disc sampling uses `r = R·sqrt(u)`, `θ = 2πu'`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_nodes, Node, Point, Route, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionModel {
    /// Meters per second.
    pub speed: f64,
    /// Seconds spent at every stop.
    pub stop_duration: f64,
}

impl Default for MotionModel {
    fn default() -> Self {
        MotionModel {
            speed: 20.0,
            stop_duration: 60.0,
        }
    }
}

impl MotionModel {
    /// 1 m/s with instantaneous stops, so wait time equals distance.
    pub const fn distance_proxy() -> Self {
        MotionModel {
            speed: 1.0,
            stop_duration: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "speed must be positive, got {}",
                self.speed
            )));
        }
        if !(self.stop_duration.is_finite() && self.stop_duration >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stop duration must be non-negative, got {}",
                self.stop_duration
            )));
        }
        Ok(())
    }
}

/// Symmetric Euclidean distances over the scenario site layout
/// `[vendors by order, customers by order, decoys]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }
}

pub fn distance_matrix(scenario: &Scenario) -> DistanceMatrix {
    let size = scenario.site_count();
    let pos: Vec<Point> = (0..size).map(|s| scenario.site_position(s)).collect();
    let mut data = vec![0.0; size * size];
    for i in 0..size {
        for j in i + 1..size {
            let d = pos[i].distance(&pos[j]);
            data[i * size + j] = d;
            data[j * size + i] = d;
        }
    }
    DistanceMatrix { size, data }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaitReport {
    /// `W(i)` in seconds, indexed by order.
    pub waits: Vec<f64>,
    pub average: f64,
}

/// Arrival time at every customer. The clock starts at the first stop; each
/// completed stop adds its service time and each leg adds distance / speed.
pub(crate) fn node_waits(nodes: &[Node], n: usize, dist: &DistanceMatrix, motion: &MotionModel) -> WaitReport {
    let mut waits = vec![0.0; n];
    let mut clock = 0.0;
    let mut prev: Option<usize> = None;
    for &node in nodes {
        let site = node.site(n);
        if let Some(p) = prev {
            clock += dist.get(p, site) / motion.speed;
        }
        if let Node::Drop(o) = node {
            waits[o] = clock;
        }
        clock += motion.stop_duration;
        prev = Some(site);
    }
    let average = waits.iter().sum::<f64>() / n as f64;
    WaitReport { waits, average }
}

/// Total leg time of a route, excluding service time.
pub(crate) fn node_travel(nodes: &[Node], n: usize, dist: &DistanceMatrix) -> f64 {
    nodes.windows(2).map(|w| dist.get(w[0].site(n), w[1].site(n))).sum()
}

pub fn wait_times(route: &Route, scenario: &Scenario, motion: &MotionModel) -> Result<WaitReport> {
    motion.validate()?;
    let nodes = scenario.compile(route)?;
    let n = scenario.order_count();
    if let Some(v) = check_nodes(&nodes, n, scenario.decoy_count(), None) {
        return Err(Error::InvalidRoute(v));
    }
    Ok(node_waits(&nodes, n, &distance_matrix(scenario), motion))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    /// Every site uniform in the `extent × extent` square.
    Uniform,
    /// Vendors in one disc, customers in another.
    TwoClusters,
    /// Vendors in a central disc, customers on a surrounding annulus.
    HubSpoke,
    /// Sites along a horizontal corridor, alternating sides of the axis.
    Linear,
}

impl Topology {
    pub const ALL: [Topology; 4] = [
        Topology::Uniform,
        Topology::TwoClusters,
        Topology::HubSpoke,
        Topology::Linear,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Topology::Uniform => "uniform",
            Topology::TwoClusters => "two_clusters",
            Topology::HubSpoke => "hub_spoke",
            Topology::Linear => "linear",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "uniform" => Ok(Topology::Uniform),
            "two_clusters" => Ok(Topology::TwoClusters),
            "hub_spoke" => Ok(Topology::HubSpoke),
            "linear" => Ok(Topology::Linear),
            _ => Err(Error::Parse(format!("unknown topology {s:?}"))),
        }
    }
}

/// Optional shape parameters; unset fields default relative to the extent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TopologyParams {
    /// Center distance between the two clusters (default `extent / 2`).
    pub separation: Option<f64>,
    /// Radius of each cluster disc (default `separation / 5`); must be below
    /// `separation / 4` so clusters never interleave.
    pub cluster_radius: Option<f64>,
    /// Radius of the vendor hub (default `0.1 · extent`).
    pub hub_radius: Option<f64>,
    /// Inner and outer radius of the customer ring (defaults `0.3`, `0.5 · extent`).
    pub ring_inner: Option<f64>,
    pub ring_outer: Option<f64>,
    /// Full corridor width around the axis (default `0.05 · extent`).
    pub corridor_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub topology: Topology,
    pub orders: usize,
    pub decoys: usize,
    pub seed: u64,
    pub extent: f64,
    pub params: TopologyParams,
}

impl GeneratorConfig {
    pub fn new(topology: Topology, orders: usize, decoys: usize, seed: u64) -> Self {
        GeneratorConfig {
            topology,
            orders,
            decoys,
            seed,
            extent: 10_000.0,
            params: TopologyParams::default(),
        }
    }
}

fn in_disc(rng: &mut ChaCha8Rng, center: Point, radius: f64) -> Point {
    in_ring(rng, center, 0.0, radius)
}

fn in_ring(rng: &mut ChaCha8Rng, center: Point, inner: f64, outer: f64) -> Point {
    let u: f64 = rng.random();
    let theta = TAU * rng.random::<f64>();
    let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
    Point::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// `(rng, site index, is_vendor) -> position`
type SiteSampler = Box<dyn FnMut(&mut ChaCha8Rng, usize, bool) -> Point>;

/// Generates a scenario; a pure function of the configuration.
pub fn generate(config: &GeneratorConfig) -> Result<Scenario> {
    let GeneratorConfig {
        topology,
        orders: n,
        decoys,
        seed,
        extent,
        params,
    } = *config;
    if n == 0 {
        return Err(Error::InvalidParameter("at least one order is required".into()));
    }
    let extent = positive("extent", extent)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = Point::new(extent / 2.0, extent / 2.0);
    let total = 2 * n + decoys;
    // sites are drawn vendors, decoys, customers; `is_vendor` selects the side
    let mut draw: SiteSampler = match topology {
        Topology::Uniform => {
            Box::new(move |rng, _, _| Point::new(rng.random::<f64>() * extent, rng.random::<f64>() * extent))
        }
        Topology::TwoClusters => {
            let sep = positive("separation", params.separation.unwrap_or(extent / 2.0))?;
            let radius = positive("cluster radius", params.cluster_radius.unwrap_or(sep / 5.0))?;
            if 4.0 * radius >= sep {
                return Err(Error::InvalidParameter(format!(
                    "cluster radius {radius} must be below separation/4 = {}",
                    sep / 4.0
                )));
            }
            let vc = Point::new(center.x - sep / 2.0, center.y);
            let cc = Point::new(center.x + sep / 2.0, center.y);
            Box::new(move |rng, _, vendor| in_disc(rng, if vendor { vc } else { cc }, radius))
        }
        Topology::HubSpoke => {
            let hub = positive("hub radius", params.hub_radius.unwrap_or(0.1 * extent))?;
            let inner = positive("ring inner radius", params.ring_inner.unwrap_or(0.3 * extent))?;
            let outer = positive("ring outer radius", params.ring_outer.unwrap_or(0.5 * extent))?;
            if !(hub <= inner && inner < outer) {
                return Err(Error::InvalidParameter(
                    "hub spoke radii must satisfy hub <= inner < outer".into(),
                ));
            }
            Box::new(move |rng, _, vendor| {
                if vendor {
                    in_disc(rng, center, hub)
                } else {
                    in_ring(rng, center, inner, outer)
                }
            })
        }
        Topology::Linear => {
            let width = positive("corridor width", params.corridor_width.unwrap_or(0.05 * extent))?;
            Box::new(move |rng, k, _| {
                let x = rng.random::<f64>() * extent;
                let side = if k % 2 == 0 { 1.0 } else { -1.0 };
                let offset = rng.random::<f64>() * width / 2.0;
                Point::new(x, center.y + side * offset)
            })
        }
    };
    let mut sites = Vec::with_capacity(total);
    for k in 0..total {
        sites.push(draw(&mut rng, k, k < n + decoys));
    }
    let name = format!("{topology}-n{n}-d{decoys}-seed{seed}");
    Scenario::from_positions(name, &sites[..n], &sites[n + decoys..], &sites[n..n + decoys])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureConfig {
    /// `v1` diagonally opposite `a1`; aggregation is both more private and faster.
    Diagonal,
    /// `v1` adjacent to `a1`; privacy costs wait time.
    Adjacent,
}

/// Two orders on the corners of a unit square, with the distance-proxy
/// motion model attached.
pub fn unit_square_fixture(config: FixtureConfig) -> Scenario {
    let p = Point::new;
    let (vendors, customers) = match config {
        FixtureConfig::Diagonal => ([p(0.0, 0.0), p(1.0, 0.0)], [p(1.0, 1.0), p(0.0, 1.0)]),
        FixtureConfig::Adjacent => ([p(0.0, 0.0), p(1.0, 1.0)], [p(1.0, 0.0), p(0.0, 1.0)]),
    };
    let name = match config {
        FixtureConfig::Diagonal => "unit-square-diagonal",
        FixtureConfig::Adjacent => "unit-square-adjacent",
    };
    Scenario::from_positions(name, &vendors, &customers, &[])
        .expect("fixture is well formed")
        .with_motion(MotionModel::distance_proxy())
}
