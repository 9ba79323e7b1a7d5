//! Exhaustive route enumeration, evaluation and Pareto fronts.
//!
//! Routes are generated depth first, trying stops in ascending [`Stop`](crate::model::Stop)
//! order, so the stream is lexicographically sorted. Parallel work is split
//! by route prefix; every reduction (front merge, minimum) is order
//! independent, so results do not depend on scheduling.

use std::cmp::Ordering;
use std::ops::RangeInclusive;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{distance_matrix, node_waits, DistanceMatrix, MotionModel};
use crate::model::{check_nodes, DroneSpec, Node, Route, Scenario};
use crate::privacy::{node_risks, Rational, RiskReport};

/// Largest order count accepted for exhaustive enumeration.
pub const MAX_ENUM_ORDERS: usize = 7;
/// Largest decoy budget accepted for exhaustive enumeration.
pub const MAX_ENUM_DECOYS: usize = 3;

const PREFIX_DEPTH: usize = 2;

/// Number of routes when capacity does not bind: `(2n)!/2^n` interleavings,
/// times the ways to insert up to `budget` distinct decoys out of `decoys`.
pub fn unconstrained_route_count(n: usize, decoys: usize, budget: usize) -> f64 {
    let base: f64 = (1..=n).map(|i| (2 * i - 1) as f64 * i as f64).product();
    let inserts: f64 = (0..=budget.min(decoys))
        .map(|u| {
            let arrangements: f64 = (0..u).map(|j| (decoys - j) as f64).product();
            let positions: f64 = (1..=u).map(|j| (2 * n + j) as f64 / j as f64).product();
            arrangements * positions
        })
        .sum();
    base * inserts
}

/// The set of valid routes for a scenario, drone capacity and decoy budget.
#[derive(Debug, Clone)]
pub struct RouteSpace {
    orders: usize,
    decoys: usize,
    capacity: usize,
    budget: usize,
    /// Candidate stops sorted by [`Stop`](crate::model::Stop) order.
    candidates: Vec<Node>,
}

impl RouteSpace {
    /// Enumeration space with the size guards applied.
    pub fn new(scenario: &Scenario, drone: &DroneSpec, decoy_budget: usize) -> Result<Self> {
        let n = scenario.order_count();
        if n > MAX_ENUM_ORDERS || decoy_budget > MAX_ENUM_DECOYS {
            return Err(Error::GuardExceeded {
                what: "route enumeration",
                detail: format!(
                    "n={n}, decoy budget {decoy_budget}; limits are n <= {MAX_ENUM_ORDERS}, budget <= {MAX_ENUM_DECOYS}"
                ),
                estimate: unconstrained_route_count(n, scenario.decoy_count(), decoy_budget),
            });
        }
        Self::unguarded(scenario, drone, decoy_budget)
    }

    /// Same as [`RouteSpace::new`] without the enumeration guard; sampling
    /// never enumerates so it works at any size.
    pub fn unguarded(scenario: &Scenario, drone: &DroneSpec, decoy_budget: usize) -> Result<Self> {
        drone.validate()?;
        let n = scenario.order_count();
        let decoys = scenario.decoy_count();
        if decoy_budget > decoys {
            return Err(Error::InvalidParameter(format!(
                "decoy budget {decoy_budget} exceeds the {decoys} decoys in the scenario"
            )));
        }
        if n > 64 || decoys > 64 {
            return Err(Error::InvalidParameter(
                "at most 64 orders and 64 decoys are supported".into(),
            ));
        }
        let mut candidates: Vec<Node> = (0..n)
            .flat_map(|o| [Node::Pickup(o), Node::Drop(o)])
            .chain((0..decoys).map(Node::Decoy))
            .collect();
        candidates.sort_by_key(|&nd| scenario.stop_of(nd));
        Ok(RouteSpace {
            orders: n,
            decoys,
            capacity: drone.capacity,
            budget: decoy_budget,
            candidates,
        })
    }

    pub fn order_count(&self) -> usize {
        self.orders
    }

    /// Count estimate ignoring capacity (exact when `capacity >= n`).
    pub fn estimate(&self) -> f64 {
        unconstrained_route_count(self.orders, self.decoys, self.budget)
    }

    fn walker(&self, prefix: &[usize]) -> Walker {
        Walker::new(self.clone(), prefix)
    }

    /// All feasible prefixes of length `depth` (or shorter complete routes
    /// cannot occur because every route has at least `2n` stops).
    fn prefixes(&self, depth: usize) -> Vec<Vec<usize>> {
        let depth = depth.min(2 * self.orders);
        let mut out = Vec::new();
        let mut w = self.walker(&[]);
        w.collect_prefixes(depth, &mut out);
        out
    }

    /// Lexicographically ordered stream of routes, as scenario stops.
    pub fn routes<'s>(&self, scenario: &'s Scenario) -> Routes<'s> {
        Routes {
            walker: self.walker(&[]),
            scenario,
        }
    }

    /// Folds every route in parallel. `fold` sees the route as compact nodes
    /// plus its candidate-rank sequence (lexicographic key); `merge` must be
    /// associative and commutative.
    pub(crate) fn par_fold<A, F, M>(&self, init: impl Fn() -> A + Sync, fold: F, merge: M) -> A
    where
        A: Send,
        F: Fn(&mut A, &[Node], &[usize]) + Sync,
        M: Fn(A, A) -> A + Sync + Send,
    {
        self.prefixes(PREFIX_DEPTH)
            .into_par_iter()
            .map(|prefix| {
                let mut acc = init();
                let mut w = self.walker(&prefix);
                while w.advance() {
                    fold(&mut acc, &w.nodes, &w.ranks);
                }
                acc
            })
            .reduce(&init, &merge)
    }

    /// Counts routes in parallel.
    pub fn count(&self) -> u64 {
        self.par_fold(|| 0u64, |acc, _, _| *acc += 1, |a, b| a + b)
    }

    /// A random valid route: each step picks uniformly among the feasible
    /// next stops. Not uniform over routes. Routes end at the last drop.
    pub fn sample<R: Rng + ?Sized>(&self, scenario: &Scenario, rng: &mut R) -> Route {
        let mut w = self.walker(&[]);
        let mut options = Vec::new();
        while !w.complete() {
            options.clear();
            options.extend((0..self.candidates.len()).filter(|&c| w.feasible(c)));
            let pick = options[rng.random_range(0..options.len())];
            w.push(pick);
        }
        scenario.route_of(&w.nodes)
    }
}

/// Iterative depth-first walker over candidate ranks.
struct Walker {
    space: RouteSpace,
    ranks: Vec<usize>,
    nodes: Vec<Node>,
    cursor: Vec<usize>,
    picked: u64,
    dropped: u64,
    used_decoys: u64,
    aboard: usize,
    floor: usize,
    pending: bool,
    done: bool,
}

impl Walker {
    fn new(space: RouteSpace, prefix: &[usize]) -> Self {
        let mut w = Walker {
            space,
            ranks: Vec::new(),
            nodes: Vec::new(),
            cursor: vec![0],
            picked: 0,
            dropped: 0,
            used_decoys: 0,
            aboard: 0,
            floor: prefix.len(),
            pending: false,
            done: false,
        };
        for &c in prefix {
            debug_assert!(w.feasible(c));
            w.push(c);
        }
        w.pending = w.complete();
        w
    }

    fn all_dropped(&self) -> u64 {
        if self.space.orders == 64 {
            u64::MAX
        } else {
            (1u64 << self.space.orders) - 1
        }
    }

    fn complete(&self) -> bool {
        self.dropped == self.all_dropped()
    }

    fn feasible(&self, c: usize) -> bool {
        match self.space.candidates[c] {
            Node::Pickup(o) => self.picked & (1 << o) == 0 && self.aboard < self.space.capacity,
            Node::Drop(o) => self.picked & (1 << o) != 0 && self.dropped & (1 << o) == 0,
            Node::Decoy(k) => {
                self.used_decoys & (1 << k) == 0 && (self.used_decoys.count_ones() as usize) < self.space.budget
            }
        }
    }

    fn push(&mut self, c: usize) {
        let node = self.space.candidates[c];
        match node {
            Node::Pickup(o) => {
                self.picked |= 1 << o;
                self.aboard += 1;
            }
            Node::Drop(o) => {
                self.dropped |= 1 << o;
                self.aboard -= 1;
            }
            Node::Decoy(k) => self.used_decoys |= 1 << k,
        }
        self.ranks.push(c);
        self.nodes.push(node);
        self.cursor.truncate(self.ranks.len());
        self.cursor.push(0);
    }

    fn pop(&mut self) {
        self.ranks.pop();
        match self.nodes.pop().expect("pop on a non-empty path") {
            Node::Pickup(o) => {
                self.picked &= !(1 << o);
                self.aboard -= 1;
            }
            Node::Drop(o) => {
                self.dropped &= !(1 << o);
                self.aboard += 1;
            }
            Node::Decoy(k) => self.used_decoys &= !(1 << k),
        }
        self.cursor.truncate(self.ranks.len() + 1);
    }

    /// Moves to the next complete route; false when exhausted.
    fn advance(&mut self) -> bool {
        if self.pending {
            self.pending = false;
            return true;
        }
        if self.done {
            return false;
        }
        loop {
            let depth = self.ranks.len();
            let mut found = None;
            while self.cursor[depth] < self.space.candidates.len() {
                let c = self.cursor[depth];
                self.cursor[depth] += 1;
                if self.feasible(c) {
                    found = Some(c);
                    break;
                }
            }
            match found {
                Some(c) => {
                    self.push(c);
                    if self.complete() {
                        return true;
                    }
                }
                None => {
                    if depth == self.floor {
                        self.done = true;
                        return false;
                    }
                    self.pop();
                }
            }
        }
    }

    fn collect_prefixes(&mut self, depth: usize, out: &mut Vec<Vec<usize>>) {
        if self.ranks.len() == depth {
            out.push(self.ranks.clone());
            return;
        }
        for c in 0..self.space.candidates.len() {
            if self.feasible(c) {
                self.push(c);
                self.collect_prefixes(depth, out);
                self.pop();
            }
        }
    }
}

/// Iterator over every valid route in lexicographic order.
pub struct Routes<'s> {
    walker: Walker,
    scenario: &'s Scenario,
}

impl Iterator for Routes<'_> {
    type Item = Route;

    fn next(&mut self) -> Option<Route> {
        self.walker
            .advance()
            .then(|| self.scenario.route_of(&self.walker.nodes))
    }
}

/// Streams every valid route using at most `decoy_budget` decoys, in
/// lexicographic order.
pub fn enumerate_routes<'s>(scenario: &'s Scenario, drone: &DroneSpec, decoy_budget: usize) -> Result<Routes<'s>> {
    Ok(RouteSpace::new(scenario, drone, decoy_budget)?.routes(scenario))
}

/// A route with its privacy and wait objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub route: Route,
    pub risks: RiskReport,
    /// `W(i)` in seconds, by order.
    pub waits: Vec<f64>,
    pub avg_wait: f64,
    pub heuristic: Option<String>,
}

impl Evaluation {
    pub fn avg_risk(&self) -> Rational {
        self.risks.average
    }

    pub fn worst_risk(&self) -> Rational {
        self.risks.worst_case
    }
}

fn evaluate_nodes(
    nodes: &[Node],
    scenario: &Scenario,
    dist: &DistanceMatrix,
    motion: &MotionModel,
) -> Result<Evaluation> {
    let n = scenario.order_count();
    let risks = RiskReport::from_risks(node_risks(nodes, n)?)?;
    let waits = node_waits(nodes, n, dist, motion);
    Ok(Evaluation {
        route: scenario.route_of(nodes),
        risks,
        waits: waits.waits,
        avg_wait: waits.average,
        heuristic: None,
    })
}

/// Risk and wait objectives of a valid route.
pub fn evaluate(route: &Route, scenario: &Scenario, drone: &DroneSpec) -> Result<Evaluation> {
    drone.validate()?;
    let nodes = scenario.compile(route)?;
    let n = scenario.order_count();
    if let Some(v) = check_nodes(&nodes, n, scenario.decoy_count(), Some(drone.capacity)) {
        return Err(Error::InvalidRoute(v));
    }
    evaluate_nodes(&nodes, scenario, &distance_matrix(scenario), &drone.motion())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RiskObjective {
    #[default]
    Average,
    Worst,
}

impl RiskObjective {
    pub fn name(&self) -> &'static str {
        match self {
            RiskObjective::Average => "avg-risk",
            RiskObjective::Worst => "worst-risk",
        }
    }

    fn of(&self, risks: &RiskReport) -> Rational {
        match self {
            RiskObjective::Average => risks.average,
            RiskObjective::Worst => risks.worst_case,
        }
    }
}

/// `(risk, wait)`; `a` dominates `b` if no worse in both and better in one.
pub fn dominates(a: (Rational, f64), b: (Rational, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    /// Lexicographically smallest route with this objective vector.
    pub evaluation: Evaluation,
    /// Number of routes sharing the objective vector.
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    pub objective: RiskObjective,
    /// Sorted by ascending wait.
    pub points: Vec<FrontPoint>,
    /// Routes examined.
    pub routes_evaluated: u64,
}

impl ParetoFront {
    pub fn objective_of(&self, e: &Evaluation) -> (Rational, f64) {
        (self.objective.of(&e.risks), e.avg_wait)
    }

    /// True if some front point is at least as good in both objectives.
    pub fn covers(&self, e: &Evaluation) -> bool {
        let target = self.objective_of(e);
        self.points.iter().any(|p| {
            let q = self.objective_of(&p.evaluation);
            q.0 <= target.0 && q.1 <= target.1
        })
    }
}

struct Candidate {
    risk: Rational,
    wait: f64,
    ranks: Vec<usize>,
    nodes: Vec<Node>,
    multiplicity: u64,
}

#[derive(Default)]
struct FrontAcc {
    points: Vec<Candidate>,
    seen: u64,
}

impl FrontAcc {
    fn offer(&mut self, risk: Rational, wait: f64, ranks: &[usize], nodes: &[Node], multiplicity: u64) {
        for p in &mut self.points {
            if p.risk == risk && p.wait == wait {
                p.multiplicity += multiplicity;
                if ranks < p.ranks.as_slice() {
                    p.ranks = ranks.to_vec();
                    p.nodes = nodes.to_vec();
                }
                return;
            }
            if dominates((p.risk, p.wait), (risk, wait)) {
                return;
            }
        }
        self.points.retain(|p| !dominates((risk, wait), (p.risk, p.wait)));
        self.points.push(Candidate {
            risk,
            wait,
            ranks: ranks.to_vec(),
            nodes: nodes.to_vec(),
            multiplicity,
        });
    }

    fn merge(mut self, other: FrontAcc) -> FrontAcc {
        self.seen += other.seen;
        for c in other.points {
            self.offer(c.risk, c.wait, &c.ranks, &c.nodes, c.multiplicity);
        }
        self
    }
}

/// The exact non-dominated set over every valid route.
pub fn pareto_front(
    scenario: &Scenario,
    drone: &DroneSpec,
    objective: RiskObjective,
    decoy_budget: usize,
) -> Result<ParetoFront> {
    let space = RouteSpace::new(scenario, drone, decoy_budget)?;
    let dist = distance_matrix(scenario);
    let motion = drone.motion();
    let n = scenario.order_count();
    let acc = space.par_fold(
        FrontAcc::default,
        |acc, nodes, ranks| {
            acc.seen += 1;
            // every enumerated route is within guard sizes, so no overflow
            let risks = RiskReport::from_risks(node_risks(nodes, n).expect("small routes fit i128")).expect("n >= 1");
            let wait = node_waits(nodes, n, &dist, &motion).average;
            acc.offer(objective.of(&risks), wait, ranks, nodes, 1);
        },
        FrontAcc::merge,
    );
    let mut points = acc
        .points
        .into_iter()
        .map(|c| {
            Ok(FrontPoint {
                evaluation: evaluate_nodes(&c.nodes, scenario, &dist, &motion)?,
                multiplicity: c.multiplicity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        a.evaluation
            .avg_wait
            .partial_cmp(&b.evaluation.avg_wait)
            .unwrap_or(Ordering::Equal)
            .then_with(|| {
                objective
                    .of(&a.evaluation.risks)
                    .cmp(&objective.of(&b.evaluation.risks))
            })
    });
    Ok(ParetoFront {
        objective,
        points,
        routes_evaluated: acc.seen,
    })
}

/// One cell of the minimum-average-risk table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub orders: usize,
    pub capacity: usize,
    pub decoys: usize,
    pub min_avg_risk: Rational,
    /// Worst-case risk of `route`.
    pub worst_risk: Rational,
    /// Lexicographically smallest route attaining the minimum, on the
    /// abstract scenario with ids `1..=n` and decoys after them.
    pub route: Route,
    /// Number of routes attaining the minimum.
    pub multiplicity: u64,
    pub routes_evaluated: u64,
}

struct MinAcc {
    best: Option<(Rational, Vec<usize>, Vec<Node>)>,
    multiplicity: u64,
    seen: u64,
}

impl MinAcc {
    fn offer(&mut self, value: Rational, ranks: &[usize], nodes: &[Node], multiplicity: u64) {
        match &mut self.best {
            Some((v, r, nd)) if *v == value => {
                self.multiplicity += multiplicity;
                if ranks < r.as_slice() {
                    *r = ranks.to_vec();
                    *nd = nodes.to_vec();
                }
            }
            Some((v, _, _)) if *v < value => {}
            _ => {
                self.best = Some((value, ranks.to_vec(), nodes.to_vec()));
                self.multiplicity = multiplicity;
            }
        }
    }
}

/// Minimum average risk over all routes for one `(n, c, n_d)` cell. Only
/// route structure matters, so no geometry is involved.
pub fn min_avg_risk(orders: usize, capacity: usize, decoys: usize) -> Result<SweepCell> {
    let scenario = Scenario::abstract_orders(orders, decoys)?;
    let space = RouteSpace::new(&scenario, &DroneSpec::new(capacity), decoys)?;
    let acc = space.par_fold(
        || MinAcc {
            best: None,
            multiplicity: 0,
            seen: 0,
        },
        |acc, nodes, ranks| {
            acc.seen += 1;
            let risks = node_risks(nodes, orders).expect("small routes fit i128");
            let avg = crate::privacy::average_risk(&risks).expect("n >= 1");
            acc.offer(avg, ranks, nodes, 1);
        },
        |mut a, b| {
            a.seen += b.seen;
            if let Some((v, r, nd)) = b.best {
                a.offer(v, &r, &nd, b.multiplicity);
            }
            a
        },
    );
    let (min_avg_risk, _, nodes) = acc.best.expect("every cell has at least one route");
    let risks = RiskReport::from_risks(node_risks(&nodes, orders)?)?;
    Ok(SweepCell {
        orders,
        capacity,
        decoys,
        min_avg_risk,
        worst_risk: risks.worst_case,
        route: scenario.route_of(&nodes),
        multiplicity: acc.multiplicity,
        routes_evaluated: acc.seen,
    })
}

/// Minimum average risk for every cell of the grid, in `(n, c, n_d)` order.
pub fn min_avg_risk_sweep(
    orders: RangeInclusive<usize>,
    capacities: RangeInclusive<usize>,
    decoys: RangeInclusive<usize>,
) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    for n in orders {
        for c in capacities.clone() {
            for d in decoys.clone() {
                cells.push(min_avg_risk(n, c, d)?);
            }
        }
    }
    Ok(cells)
}
