//! Scenarios, routes, drone specifications and route structure.
//!
//! A scenario holds `n` orders and `n_d` decoy vendors. Order `i` pairs the
//! real vendor `v_i` with the customer `a_i`; orders are indexed by ascending
//! customer id. Stops are written as tokens: `v<id>` for a real vendor,
//! `d<id>` for a decoy vendor and `a<id>` for a customer.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MotionModel;

pub type SiteId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VendorSite {
    pub id: SiteId,
    pub position: Point,
    pub decoy: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CustomerSite {
    pub id: SiteId,
    pub position: Point,
    pub vendor_id: SiteId,
}

/// One stop of a route.
///
/// The derived ordering (vendors, then decoys, then customers, each by id)
/// is the lexicographic order used for every tie-break in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stop {
    Vendor(SiteId),
    Decoy(SiteId),
    Customer(SiteId),
}

impl Stop {
    pub fn is_customer(&self) -> bool {
        matches!(self, Stop::Customer(_))
    }

    pub fn id(&self) -> SiteId {
        match *self {
            Stop::Vendor(id) | Stop::Decoy(id) | Stop::Customer(id) => id,
        }
    }
}

impl fmt::Display for Stop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stop::Vendor(id) => write!(f, "v{id}"),
            Stop::Decoy(id) => write!(f, "d{id}"),
            Stop::Customer(id) => write!(f, "a{id}"),
        }
    }
}

impl FromStr for Stop {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let kind = chars.next().ok_or_else(|| Error::Parse("empty stop token".into()))?;
        let id: SiteId = chars
            .as_str()
            .parse()
            .map_err(|_| Error::Parse(format!("bad stop token {s:?}")))?;
        match kind {
            'v' | 'V' => Ok(Stop::Vendor(id)),
            'd' | 'D' => Ok(Stop::Decoy(id)),
            'a' | 'A' => Ok(Stop::Customer(id)),
            _ => Err(Error::Parse(format!("bad stop token {s:?}"))),
        }
    }
}

/// An ordered sequence of stops.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Route(pub Vec<Stop>);

impl Route {
    pub fn new(stops: Vec<Stop>) -> Self {
        Route(stops)
    }

    pub fn stops(&self) -> &[Stop] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, stop) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{stop}")?;
        }
        Ok(())
    }
}

impl FromStr for Route {
    type Err = Error;

    /// Parses comma-separated tokens, tolerating whitespace and an optional
    /// pair of enclosing brackets.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix('[').unwrap_or(s);
        let s = s.strip_suffix(']').unwrap_or(s);
        if s.trim().is_empty() {
            return Ok(Route::default());
        }
        s.split(',').map(str::parse).collect::<Result<Vec<_>>>().map(Route)
    }
}

impl From<Vec<Stop>> for Route {
    fn from(stops: Vec<Stop>) -> Self {
        Route(stops)
    }
}

/// Compact stop representation used by the hot loops: order and decoy
/// indices instead of site ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Node {
    Pickup(usize),
    Decoy(usize),
    Drop(usize),
}

impl Node {
    /// Position of this stop in the site layout of [`Scenario::site_position`].
    pub(crate) fn site(self, n: usize) -> usize {
        match self {
            Node::Pickup(o) => o,
            Node::Drop(o) => n + o,
            Node::Decoy(k) => 2 * n + k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Order {
    vendor: usize,
    customer: usize,
}

/// A delivery scenario: real and decoy vendors plus customers.
#[derive(Debug, Clone)]
pub struct Scenario {
    name: String,
    vendors: Vec<VendorSite>,
    customers: Vec<CustomerSite>,
    motion: Option<MotionModel>,
    orders: Vec<Order>,
    decoys: Vec<usize>,
    vendor_lookup: HashMap<SiteId, usize>,
    decoy_lookup: HashMap<SiteId, usize>,
    customer_lookup: HashMap<SiteId, usize>,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.vendors == other.vendors
            && self.customers == other.customers
            && self.motion == other.motion
    }
}

impl Scenario {
    pub fn new(name: impl Into<String>, vendors: Vec<VendorSite>, customers: Vec<CustomerSite>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if customers.is_empty() {
            return bad("a scenario needs at least one customer".into());
        }
        let mut vendor_pos = HashMap::new();
        for (i, v) in vendors.iter().enumerate() {
            if vendor_pos.insert(v.id, i).is_some() {
                return bad(format!("duplicate vendor id {}", v.id));
            }
            if !(v.position.x.is_finite() && v.position.y.is_finite()) {
                return bad(format!("vendor {} has a non-finite position", v.id));
            }
        }
        let mut customer_order: Vec<usize> = (0..customers.len()).collect();
        customer_order.sort_by_key(|&i| customers[i].id);
        let mut orders = Vec::with_capacity(customers.len());
        let mut vendor_lookup = HashMap::new();
        let mut customer_lookup = HashMap::new();
        for (o, &ci) in customer_order.iter().enumerate() {
            let c = &customers[ci];
            if customer_lookup.insert(c.id, o).is_some() {
                return bad(format!("duplicate customer id {}", c.id));
            }
            if !(c.position.x.is_finite() && c.position.y.is_finite()) {
                return bad(format!("customer {} has a non-finite position", c.id));
            }
            let Some(&vi) = vendor_pos.get(&c.vendor_id) else {
                return bad(format!("customer {} references unknown vendor {}", c.id, c.vendor_id));
            };
            if vendors[vi].decoy {
                return bad(format!("customer {} references decoy vendor {}", c.id, c.vendor_id));
            }
            if vendor_lookup.insert(c.vendor_id, o).is_some() {
                return bad(format!(
                    "vendor {} is referenced by more than one customer",
                    c.vendor_id
                ));
            }
            orders.push(Order {
                vendor: vi,
                customer: ci,
            });
        }
        let mut decoys: Vec<usize> = (0..vendors.len()).filter(|&i| vendors[i].decoy).collect();
        decoys.sort_by_key(|&i| vendors[i].id);
        let real = vendors.len() - decoys.len();
        if real != orders.len() {
            return bad(format!(
                "{real} real vendors but {} customers; every real vendor needs exactly one customer",
                orders.len()
            ));
        }
        let decoy_lookup = decoys.iter().enumerate().map(|(k, &vi)| (vendors[vi].id, k)).collect();
        Ok(Scenario {
            name: name.into(),
            vendors,
            customers,
            motion: None,
            orders,
            decoys,
            vendor_lookup,
            decoy_lookup,
            customer_lookup,
        })
    }

    /// `n` orders and `n_d` decoys, all co-located at the origin. Vendor and
    /// customer ids are `1..=n`; decoys take ids `n+1..=n+n_d`. Useful when only
    /// route structure matters.
    pub fn abstract_orders(n: usize, decoys: usize) -> Result<Self> {
        let origin = Point::default();
        Self::from_positions("abstract", &vec![origin; n], &vec![origin; n], &vec![origin; decoys])
    }

    /// Builds a scenario with the conventional ids: order `i` (1-based) is
    /// `v_i`/`a_i`, decoys are numbered after the real vendors.
    pub fn from_positions(
        name: impl Into<String>,
        vendors: &[Point],
        customers: &[Point],
        decoys: &[Point],
    ) -> Result<Self> {
        if vendors.len() != customers.len() {
            return Err(Error::InvalidScenario("vendor and customer counts differ".into()));
        }
        let n = vendors.len() as SiteId;
        let mut vsites: Vec<VendorSite> = vendors
            .iter()
            .enumerate()
            .map(|(i, &p)| VendorSite {
                id: i as SiteId + 1,
                position: p,
                decoy: false,
            })
            .collect();
        vsites.extend(decoys.iter().enumerate().map(|(k, &p)| VendorSite {
            id: n + k as SiteId + 1,
            position: p,
            decoy: true,
        }));
        let csites = customers
            .iter()
            .enumerate()
            .map(|(i, &p)| CustomerSite {
                id: i as SiteId + 1,
                position: p,
                vendor_id: i as SiteId + 1,
            })
            .collect();
        Scenario::new(name, vsites, csites)
    }

    pub fn with_motion(mut self, motion: MotionModel) -> Self {
        self.motion = Some(motion);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vendors(&self) -> &[VendorSite] {
        &self.vendors
    }

    pub fn customers(&self) -> &[CustomerSite] {
        &self.customers
    }

    pub fn motion(&self) -> Option<MotionModel> {
        self.motion
    }

    /// Number of orders `n`.
    pub fn order_count(&self) -> usize {
        self.orders.len()
    }

    /// Number of decoy vendors `n_d`.
    pub fn decoy_count(&self) -> usize {
        self.decoys.len()
    }

    /// Total vendor count `m = n + n_d`.
    pub fn vendor_count(&self) -> usize {
        self.vendors.len()
    }

    /// Vendor and customer stop for order `o` (0-based).
    pub fn order_stops(&self, o: usize) -> (Stop, Stop) {
        let ord = self.orders[o];
        (
            Stop::Vendor(self.vendors[ord.vendor].id),
            Stop::Customer(self.customers[ord.customer].id),
        )
    }

    pub fn decoy_stop(&self, k: usize) -> Stop {
        Stop::Decoy(self.vendors[self.decoys[k]].id)
    }

    /// All vendor-side stops in posterior column order: real vendors by order
    /// index, then decoys by id.
    pub fn vendor_columns(&self) -> Vec<Stop> {
        (0..self.order_count())
            .map(|o| self.order_stops(o).0)
            .chain((0..self.decoy_count()).map(|k| self.decoy_stop(k)))
            .collect()
    }

    /// Position of a site in the layout `[vendors by order, customers by order, decoys]`.
    pub fn site_position(&self, site: usize) -> Point {
        let n = self.order_count();
        if site < n {
            self.vendors[self.orders[site].vendor].position
        } else if site < 2 * n {
            self.customers[self.orders[site - n].customer].position
        } else {
            self.vendors[self.decoys[site - 2 * n]].position
        }
    }

    pub fn site_count(&self) -> usize {
        2 * self.order_count() + self.decoy_count()
    }

    pub fn stop_position(&self, stop: Stop) -> Result<Point> {
        Ok(self.site_position(self.node_of(stop)?.site(self.order_count())))
    }

    pub(crate) fn node_of(&self, stop: Stop) -> Result<Node> {
        let found = match stop {
            Stop::Vendor(id) => self.vendor_lookup.get(&id).map(|&o| Node::Pickup(o)),
            Stop::Decoy(id) => self.decoy_lookup.get(&id).map(|&k| Node::Decoy(k)),
            Stop::Customer(id) => self.customer_lookup.get(&id).map(|&o| Node::Drop(o)),
        };
        found.ok_or(Error::UnknownStop(stop))
    }

    pub(crate) fn stop_of(&self, node: Node) -> Stop {
        match node {
            Node::Pickup(o) => self.order_stops(o).0,
            Node::Drop(o) => self.order_stops(o).1,
            Node::Decoy(k) => self.decoy_stop(k),
        }
    }

    pub(crate) fn compile(&self, route: &Route) -> Result<Vec<Node>> {
        route.stops().iter().map(|&s| self.node_of(s)).collect()
    }

    pub(crate) fn route_of(&self, nodes: &[Node]) -> Route {
        Route(nodes.iter().map(|&nd| self.stop_of(nd)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroneSpec {
    /// Unit payloads the drone can carry at once.
    pub capacity: usize,
    /// Meters per second.
    pub speed: f64,
    /// Seconds spent at every stop.
    pub stop_duration: f64,
}

impl DroneSpec {
    /// A drone with the default motion model (20 m/s, 60 s per stop).
    pub fn new(capacity: usize) -> Self {
        Self::with_motion(capacity, MotionModel::default())
    }

    pub fn with_motion(capacity: usize, motion: MotionModel) -> Self {
        DroneSpec {
            capacity,
            speed: motion.speed,
            stop_duration: motion.stop_duration,
        }
    }

    pub fn motion(&self) -> MotionModel {
        MotionModel {
            speed: self.speed,
            stop_duration: self.stop_duration,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.capacity == 0 {
            return Err(Error::InvalidParameter("capacity must be at least 1".into()));
        }
        self.motion().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// A customer is visited before its vendor.
    Precedence,
    /// More real payloads aboard than the drone can carry.
    Capacity,
    /// A stop is visited twice.
    Duplicate,
    /// Some customer or real vendor is never visited.
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Index of the first offending stop; the route length for `Incomplete`.
    pub index: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::Precedence => "customer visited before its vendor",
            ViolationKind::Capacity => "capacity exceeded",
            ViolationKind::Duplicate => "stop visited twice",
            ViolationKind::Incomplete => "route does not visit every order",
        };
        write!(f, "{what} at stop index {}", self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationResult {
    Valid,
    Invalid(Violation),
}

impl ValidationResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidationResult::Valid)
    }

    pub fn violation(&self) -> Option<Violation> {
        match *self {
            ValidationResult::Valid => None,
            ValidationResult::Invalid(v) => Some(v),
        }
    }
}

/// Checks precedence, completeness and (when `capacity` is given) the
/// real-payload capacity. Decoys carry nothing physical.
pub(crate) fn check_nodes(nodes: &[Node], n: usize, decoys: usize, capacity: Option<usize>) -> Option<Violation> {
    let mut picked = vec![false; n];
    let mut dropped = vec![false; n];
    let mut decoy_used = vec![false; decoys];
    let mut aboard = 0usize;
    let violation = |kind, index| Some(Violation { kind, index });
    for (index, &node) in nodes.iter().enumerate() {
        match node {
            Node::Pickup(o) => {
                if picked[o] {
                    return violation(ViolationKind::Duplicate, index);
                }
                picked[o] = true;
                aboard += 1;
                if capacity.is_some_and(|c| aboard > c) {
                    return violation(ViolationKind::Capacity, index);
                }
            }
            Node::Decoy(k) => {
                if decoy_used[k] {
                    return violation(ViolationKind::Duplicate, index);
                }
                decoy_used[k] = true;
            }
            Node::Drop(o) => {
                if dropped[o] {
                    return violation(ViolationKind::Duplicate, index);
                }
                if !picked[o] {
                    return violation(ViolationKind::Precedence, index);
                }
                dropped[o] = true;
                aboard -= 1;
            }
        }
    }
    if dropped.iter().all(|&d| d) {
        None
    } else {
        violation(ViolationKind::Incomplete, nodes.len())
    }
}

/// Checks precedence, completeness and capacity of `route`.
///
/// Unknown ids are an error; rule violations are reported in the result.
pub fn validate_route(route: &Route, scenario: &Scenario, drone: &DroneSpec) -> Result<ValidationResult> {
    let nodes = scenario.compile(route)?;
    Ok(
        match check_nodes(
            &nodes,
            scenario.order_count(),
            scenario.decoy_count(),
            Some(drone.capacity),
        ) {
            None => ValidationResult::Valid,
            Some(v) => ValidationResult::Invalid(v),
        },
    )
}

/// A vendor run followed by a customer run. Vendor runs may contain decoys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub vendors: Vec<Stop>,
    pub customers: Vec<Stop>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunDecomposition {
    pub runs: Vec<Run>,
}

impl RunDecomposition {
    pub fn flatten(&self) -> Route {
        Route(
            self.runs
                .iter()
                .flat_map(|r| r.vendors.iter().chain(r.customers.iter()).copied())
                .collect(),
        )
    }
}

/// Splits a route into maximal alternating vendor and customer runs.
///
/// Only the last customer run may be empty (trailing decoy stops).
pub fn decompose_runs(route: &Route) -> Result<RunDecomposition> {
    let stops = route.stops();
    if let Some(first) = stops.first() {
        if first.is_customer() {
            return Err(Error::InvalidRoute(Violation {
                kind: ViolationKind::Precedence,
                index: 0,
            }));
        }
    }
    let mut runs: Vec<Run> = Vec::new();
    for &stop in stops {
        let start_new = match runs.last() {
            None => true,
            Some(run) => !stop.is_customer() && !run.customers.is_empty(),
        };
        if start_new {
            runs.push(Run {
                vendors: Vec::new(),
                customers: Vec::new(),
            });
        }
        let run = runs.last_mut().expect("a run was just pushed");
        if stop.is_customer() {
            run.customers.push(stop);
        } else {
            run.vendors.push(stop);
        }
    }
    Ok(RunDecomposition { runs })
}

/// One group of a route template: an unordered set of 1-based order numbers,
/// visited at their vendors or at their customers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Group {
    Vendors(Vec<usize>),
    Customers(Vec<usize>),
}

impl Group {
    pub fn members(&self) -> &[usize] {
        match self {
            Group::Vendors(m) | Group::Customers(m) => m,
        }
    }

    pub fn is_vendors(&self) -> bool {
        matches!(self, Group::Vendors(_))
    }
}

/// A route with free orderings inside each group (parentheses notation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteTemplate {
    groups: Vec<Group>,
}

impl RouteTemplate {
    /// Drops empty groups and checks that vendor and customer groups
    /// alternate, starting with vendors.
    pub fn new(groups: Vec<Group>) -> Result<Self> {
        let groups: Vec<Group> = groups.into_iter().filter(|g| !g.members().is_empty()).collect();
        for (i, g) in groups.iter().enumerate() {
            if g.is_vendors() != (i % 2 == 0) {
                return Err(Error::InvalidParameter(
                    "template groups must alternate vendors and customers, starting with vendors".into(),
                ));
            }
        }
        Ok(RouteTemplate { groups })
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    /// Number of orders mentioned by the template.
    pub fn order_count(&self) -> usize {
        self.groups
            .iter()
            .filter(|g| !g.is_vendors())
            .map(|g| g.members().len())
            .sum()
    }

    /// Largest number of orders aboard at once.
    pub fn required_capacity(&self) -> usize {
        let mut aboard = 0usize;
        let mut peak = 0;
        for g in &self.groups {
            match g {
                Group::Vendors(m) => {
                    aboard += m.len();
                    peak = peak.max(aboard);
                }
                Group::Customers(m) => aboard = aboard.saturating_sub(m.len()),
            }
        }
        peak
    }

    /// Flattens in listed order, mapping abstract order `j` to scenario order
    /// `labels[j - 1]` (0-based).
    pub fn flatten_with(&self, scenario: &Scenario, labels: &[usize]) -> Result<Route> {
        let n = scenario.order_count();
        let mut stops = Vec::new();
        for g in &self.groups {
            for &j in g.members() {
                let o = j
                    .checked_sub(1)
                    .and_then(|j| labels.get(j).copied())
                    .filter(|&o| o < n)
                    .ok_or_else(|| Error::InvalidParameter(format!("template order {j} not in scenario")))?;
                let (v, a) = scenario.order_stops(o);
                stops.push(if g.is_vendors() { v } else { a });
            }
        }
        Ok(Route(stops))
    }

    /// Flattens in listed order with the identity order mapping.
    pub fn flatten(&self, scenario: &Scenario) -> Result<Route> {
        let labels: Vec<usize> = (0..scenario.order_count()).collect();
        self.flatten_with(scenario, &labels)
    }
}

impl fmt::Display for RouteTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let prefix = if g.is_vendors() { 'v' } else { 'a' };
            let m = g.members();
            if m.len() > 1 {
                f.write_str("(")?;
            }
            for (k, j) in m.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{prefix}{j}")?;
            }
            if m.len() > 1 {
                f.write_str(")")?;
            }
        }
        f.write_str("]")
    }
}
