//! Route templates with known privacy risk: k-l split, k-reversal and
//! c-stuffing, their closed-form risks, and instantiation into concrete
//! travel-efficient routes.

use std::fmt;

use num_traits::Pow;

use crate::error::{Error, Result};
use crate::geometry::{distance_matrix, node_travel, DistanceMatrix};
use crate::model::{DroneSpec, Group, Node, Route, RouteTemplate, Scenario};
use crate::privacy::{Rational, RiskReport};
use crate::search::{evaluate, Evaluation};

/// Largest number of within-group orderings searched exhaustively.
pub const EXACT_SEARCH_LIMIT: u64 = 1_000_000;
/// Largest order count for which relabeling tries every order assignment.
pub const RELABEL_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeuristicParams {
    /// A `k`-tuple followed by an `l`-tuple, `k + l = n`.
    Split { n: usize, k: usize, l: usize },
    /// The aggregated route with the last `k` vendors and first `k` customers exchanged.
    Reversal { n: usize, k: usize },
    /// Keep `c` items aboard: after `c` pickups alternate one drop and one pickup.
    Stuffing { n: usize, c: usize },
}

impl HeuristicParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            HeuristicParams::Split { n, k, l } => {
                if k == 0 || l == 0 || k + l != n {
                    return bad(format!("split needs k, l >= 1 and k + l = n (n={n}, k={k}, l={l})"));
                }
            }
            HeuristicParams::Reversal { n, k } => {
                if n == 0 || n < 2 * k {
                    return bad(format!("reversal needs n >= 1 and n >= 2k (n={n}, k={k})"));
                }
            }
            HeuristicParams::Stuffing { n, c } => {
                if c == 0 || c > n {
                    return bad(format!("stuffing needs 1 <= c <= n (n={n}, c={c})"));
                }
            }
        }
        Ok(())
    }

    pub fn order_count(&self) -> usize {
        match *self {
            HeuristicParams::Split { n, .. }
            | HeuristicParams::Reversal { n, .. }
            | HeuristicParams::Stuffing { n, .. } => n,
        }
    }

    pub fn required_capacity(&self) -> usize {
        match *self {
            HeuristicParams::Split { k, l, .. } => k.max(l),
            HeuristicParams::Reversal { n, k } => n - k,
            HeuristicParams::Stuffing { c, .. } => c,
        }
    }

    pub fn template(&self) -> Result<RouteTemplate> {
        match *self {
            HeuristicParams::Split { n, k, l } => split_template(n, k, l),
            HeuristicParams::Reversal { n, k } => reversal_template(n, k),
            HeuristicParams::Stuffing { n, c } => stuffing_template(n, c),
        }
    }

    /// Every valid parameter set for `n` orders that fits in `capacity`.
    pub fn all_within(n: usize, capacity: usize) -> Vec<HeuristicParams> {
        let mut out = Vec::new();
        for k in 1..n {
            out.push(HeuristicParams::Split { n, k, l: n - k });
        }
        for k in 0..=n / 2 {
            out.push(HeuristicParams::Reversal { n, k });
        }
        for c in 1..=n {
            out.push(HeuristicParams::Stuffing { n, c });
        }
        out.retain(|p| p.validate().is_ok() && p.required_capacity() <= capacity);
        out
    }
}

impl fmt::Display for HeuristicParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            HeuristicParams::Split { k, l, .. } => write!(f, "split(k={k},l={l})"),
            HeuristicParams::Reversal { k, .. } => write!(f, "reversal(k={k})"),
            HeuristicParams::Stuffing { c, .. } => write!(f, "stuffing(c={c})"),
        }
    }
}

fn span(from: usize, to: usize) -> Vec<usize> {
    (from..=to).collect()
}

/// `[(v_{1:k}), (a_{1:k}), (v_{k+1:n}), (a_{k+1:n})]`
pub fn split_template(n: usize, k: usize, l: usize) -> Result<RouteTemplate> {
    HeuristicParams::Split { n, k, l }.validate()?;
    RouteTemplate::new(vec![
        Group::Vendors(span(1, k)),
        Group::Customers(span(1, k)),
        Group::Vendors(span(k + 1, n)),
        Group::Customers(span(k + 1, n)),
    ])
}

/// `[(v_{1:n-k}), (a_{1:k}), (v_{n-k+1:n}), (a_{k+1:n})]`
pub fn reversal_template(n: usize, k: usize) -> Result<RouteTemplate> {
    HeuristicParams::Reversal { n, k }.validate()?;
    RouteTemplate::new(vec![
        Group::Vendors(span(1, n - k)),
        Group::Customers(span(1, k)),
        Group::Vendors(span(n - k + 1, n)),
        Group::Customers(span(k + 1, n)),
    ])
}

/// `[(v_{1:c}), a_1, v_{c+1}, a_2, ..., v_n, (a_{n-c+1:n})]`
pub fn stuffing_template(n: usize, c: usize) -> Result<RouteTemplate> {
    HeuristicParams::Stuffing { n, c }.validate()?;
    let mut groups = vec![Group::Vendors(span(1, c))];
    for j in 1..=n - c {
        groups.push(Group::Customers(vec![j]));
        groups.push(Group::Vendors(vec![c + j]));
    }
    groups.push(Group::Customers(span(n - c + 1, n)));
    RouteTemplate::new(groups)
}

fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(num as i128, den as i128)
}

/// Per-order risks from the closed-form expressions; worst case and average
/// are derived from the vector.
pub fn closed_form_risks(params: &HeuristicParams) -> Result<RiskReport> {
    params.validate()?;
    let risks = match *params {
        HeuristicParams::Split { k, l, .. } => (1..=k)
            .map(|_| ratio(1, k))
            .chain((1..=l).map(|_| ratio(1, l)))
            .collect(),
        HeuristicParams::Reversal { n, k } => (1..=n)
            .map(|i| {
                if i <= k || i > n - k {
                    ratio(1, n - k)
                } else {
                    ratio(n - 2 * k, (n - k) * (n - k))
                }
            })
            .collect(),
        HeuristicParams::Stuffing { n, c } => {
            let b = ratio(c - 1, c);
            (1..=n)
                .map(|i| {
                    let e = (c - 1).min(n - c).min(i - 1).min(n - i);
                    ratio(1, c) * Pow::pow(b, e as u32)
                })
                .collect()
        }
    };
    RiskReport::from_risks(risks)
}

/// Closed-form `(Δ_max, Δ̄)` without building the vector. For stuffing the
/// average is `stuffing_weighted_sum(n, c) / (n·c)`.
pub fn closed_form_summary(params: &HeuristicParams) -> Result<(Rational, Rational)> {
    params.validate()?;
    Ok(match *params {
        HeuristicParams::Split { n, k, l } => (ratio(1, k).max(ratio(1, l)), ratio(2, n)),
        HeuristicParams::Reversal { n, k } => (
            ratio(1, n - k),
            ratio(n * n - 2 * n * k + 2 * k * k, n * (n - k) * (n - k)),
        ),
        HeuristicParams::Stuffing { n, c } => (ratio(1, c), stuffing_weighted_sum(n, c) / ratio(n * c, 1)),
    })
}

/// `2·Σ_{j=0..d} b^j + (n − 2(d+1))·b^d` with `b = (c−1)/c`, `d = min(c−1, n−c)`.
///
/// This is `n·c` times the c-stuffing average risk, not the average itself.
pub fn stuffing_weighted_sum(n: usize, c: usize) -> Rational {
    let b = ratio(c - 1, c);
    let d = (c - 1).min(n - c);
    let geometric: Rational = (0..=d).map(|j| Pow::pow(b, j as u32)).sum();
    let tail = Rational::from_integer(n as i128 - 2 * (d as i128 + 1)) * Pow::pow(b, d as u32);
    Rational::from_integer(2) * geometric + tail
}

/// Large-`n` limit of the c-stuffing average risk: `(1/c)·((c−1)/c)^(c−1)`.
pub fn stuffing_limit(c: usize) -> Rational {
    ratio(1, c) * Pow::pow(ratio(c - 1, c), (c - 1) as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InstantiateOptions {
    /// Also search over which scenario order plays each template order.
    pub relabel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instantiation {
    pub route: Route,
    /// Total leg length in meters.
    pub travel_distance: f64,
    /// False when the nearest-neighbor fallback was used.
    pub exact: bool,
}

fn factorial_product(groups: &[Vec<Node>]) -> u64 {
    groups
        .iter()
        .map(|g| {
            (1..=g.len() as u64)
                .try_fold(1u64, |acc, x| acc.checked_mul(x))
                .unwrap_or(u64::MAX)
        })
        .try_fold(1u64, |acc, x| acc.checked_mul(x))
        .unwrap_or(u64::MAX)
}

struct Search<'a> {
    groups: &'a [Vec<Node>],
    dist: &'a DistanceMatrix,
    n: usize,
    path: Vec<Node>,
    best: Option<(f64, Vec<Node>)>,
}

impl Search<'_> {
    /// Depth-first over stops; members are tried in ascending stop order so
    /// the first route found at a given cost is the lexicographically smallest.
    fn run(&mut self, group: usize, used: u64, cost: f64) {
        if let Some((best, _)) = &self.best {
            if cost >= *best {
                return;
            }
        }
        if group == self.groups.len() {
            self.best = Some((cost, self.path.clone()));
            return;
        }
        let members = &self.groups[group];
        if used.count_ones() as usize == members.len() {
            self.run(group + 1, 0, cost);
            return;
        }
        for (i, &node) in members.iter().enumerate() {
            if used & (1 << i) != 0 {
                continue;
            }
            let leg = self
                .path
                .last()
                .map_or(0.0, |p| self.dist.get(p.site(self.n), node.site(self.n)));
            self.path.push(node);
            self.run(group, used | (1 << i), cost + leg);
            self.path.pop();
        }
    }
}

fn greedy(groups: &[Vec<Node>], dist: &DistanceMatrix, n: usize) -> Vec<Node> {
    let mut path: Vec<Node> = Vec::new();
    for members in groups {
        let mut left = members.clone();
        while !left.is_empty() {
            // ties keep the earliest member, i.e. the smallest stop
            let pick = match path.last() {
                None => 0,
                Some(p) => {
                    let d = |nd: &Node| dist.get(p.site(n), nd.site(n));
                    (0..left.len()).fold(0, |best, i| if d(&left[i]) < d(&left[best]) { i } else { best })
                }
            };
            path.push(left.remove(pick));
        }
    }
    path
}

fn instantiate_labeled(
    template: &RouteTemplate,
    scenario: &Scenario,
    dist: &DistanceMatrix,
    labels: &[usize],
) -> Result<(Vec<Node>, f64, bool)> {
    let n = scenario.order_count();
    let flat = template.flatten_with(scenario, labels)?;
    let mut nodes = scenario.compile(&flat)?.into_iter();
    let mut groups: Vec<Vec<Node>> = template
        .groups()
        .iter()
        .map(|g| nodes.by_ref().take(g.members().len()).collect())
        .collect();
    for g in &mut groups {
        g.sort_by_key(|&nd| scenario.stop_of(nd));
    }
    let exact = factorial_product(&groups) <= EXACT_SEARCH_LIMIT;
    let path = if exact {
        let mut search = Search {
            groups: &groups,
            dist,
            n,
            path: Vec::with_capacity(2 * n),
            best: None,
        };
        search.run(0, 0, 0.0);
        search.best.expect("at least one ordering exists").1
    } else {
        greedy(&groups, dist, n)
    };
    let travel = node_travel(&path, n, dist);
    Ok((path, travel, exact))
}

/// Lexicographic successor of a permutation; false at the last one.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len())
        .rev()
        .find(|&j| v[j] > v[i - 1])
        .expect("a larger element exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Chooses within-group orderings that minimize total travel.
///
/// The search is exhaustive when the product of group-size factorials is at
/// most [`EXACT_SEARCH_LIMIT`]; otherwise each group is ordered by nearest
/// neighbor from the previous stop and the result is marked approximate.
/// Ties go to the lexicographically smallest route.
pub fn instantiate_template(
    template: &RouteTemplate,
    scenario: &Scenario,
    drone: &DroneSpec,
    options: InstantiateOptions,
) -> Result<Instantiation> {
    drone.validate()?;
    let n = scenario.order_count();
    if template.order_count() != n {
        return Err(Error::InvalidParameter(format!(
            "template covers {} orders, scenario has {n}",
            template.order_count()
        )));
    }
    let needed = template.required_capacity();
    if needed > drone.capacity {
        return Err(Error::InvalidParameter(format!(
            "template needs capacity {needed}, drone has {}",
            drone.capacity
        )));
    }
    let dist = distance_matrix(scenario);
    let mut labels: Vec<usize> = (0..n).collect();
    if options.relabel && n > RELABEL_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "relabeling is limited to {RELABEL_LIMIT} orders, scenario has {n}"
        )));
    }
    let mut best: Option<(Route, f64, bool)> = None;
    loop {
        let (path, travel, exact) = instantiate_labeled(template, scenario, &dist, &labels)?;
        let route = scenario.route_of(&path);
        let better = match &best {
            None => true,
            Some((r, t, _)) => travel < *t || (travel == *t && route < *r),
        };
        if better {
            best = Some((route, travel, exact));
        }
        if !options.relabel || !next_permutation(&mut labels) {
            break;
        }
    }
    let (route, travel_distance, exact) = best.expect("identity labeling always runs");
    Ok(Instantiation {
        route,
        travel_distance,
        exact,
    })
}

/// An instantiated heuristic with its objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicPoint {
    pub params: HeuristicParams,
    pub instantiation: Instantiation,
    /// `heuristic` is set to the parameter tag.
    pub evaluation: Evaluation,
}

/// Instantiates `params` on the scenario and evaluates the resulting route.
pub fn evaluate_heuristic(
    params: &HeuristicParams,
    scenario: &Scenario,
    drone: &DroneSpec,
    options: InstantiateOptions,
) -> Result<HeuristicPoint> {
    let instantiation = instantiate_template(&params.template()?, scenario, drone, options)?;
    let mut evaluation = evaluate(&instantiation.route, scenario, drone)?;
    evaluation.heuristic = Some(params.to_string());
    Ok(HeuristicPoint {
        params: *params,
        instantiation,
        evaluation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{unit_square_fixture, FixtureConfig, MotionModel};
    use crate::model::Point;
    use crate::privacy::privacy_risks;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn templates_render() {
        assert_eq!(
            split_template(6, 3, 3).unwrap().to_string(),
            "[(v1,v2,v3), (a1,a2,a3), (v4,v5,v6), (a4,a5,a6)]"
        );
        assert_eq!(split_template(2, 1, 1).unwrap().to_string(), "[v1, a1, v2, a2]");
        assert_eq!(
            split_template(3, 2, 1).unwrap().to_string(),
            "[(v1,v2), (a1,a2), v3, a3]"
        );
        assert_eq!(
            reversal_template(6, 1).unwrap().to_string(),
            "[(v1,v2,v3,v4,v5), a1, v6, (a2,a3,a4,a5,a6)]"
        );
        assert_eq!(
            reversal_template(4, 0).unwrap().to_string(),
            "[(v1,v2,v3,v4), (a1,a2,a3,a4)]"
        );
        assert_eq!(
            reversal_template(3, 1).unwrap().to_string(),
            "[(v1,v2), a1, v3, (a2,a3)]"
        );
        assert_eq!(
            stuffing_template(3, 2).unwrap().to_string(),
            "[(v1,v2), a1, v3, (a2,a3)]"
        );
        assert_eq!(stuffing_template(3, 3).unwrap().to_string(), "[(v1,v2,v3), (a1,a2,a3)]");
        assert_eq!(
            stuffing_template(5, 2).unwrap().to_string(),
            "[(v1,v2), a1, v3, a2, v4, a3, v5, (a4,a5)]"
        );
    }

    #[test]
    fn parameter_violations() {
        assert!(split_template(4, 0, 4).is_err());
        assert!(split_template(4, 2, 1).is_err());
        assert!(reversal_template(3, 2).is_err());
        assert!(stuffing_template(3, 0).is_err());
        assert!(stuffing_template(3, 4).is_err());
    }

    #[test]
    fn closed_form_spot_values() {
        let split = closed_form_risks(&HeuristicParams::Split { n: 6, k: 3, l: 3 }).unwrap();
        assert_eq!(split.risks, vec![r(1, 3); 6]);
        assert_eq!((split.worst_case, split.average), (r(1, 3), r(1, 3)));

        let rev = closed_form_risks(&HeuristicParams::Reversal { n: 6, k: 1 }).unwrap();
        assert_eq!(rev.risks[0], r(1, 5));
        assert_eq!(rev.risks[5], r(1, 5));
        assert!(rev.risks[1..5].iter().all(|x| *x == r(4, 25)));
        assert_eq!(rev.average, r(13, 75));

        let stuff = closed_form_risks(&HeuristicParams::Stuffing { n: 3, c: 2 }).unwrap();
        assert_eq!(stuff.risks, vec![r(1, 2), r(1, 4), r(1, 2)]);
        assert_eq!(stuff.worst_case, r(1, 2));
    }

    #[test]
    fn closed_forms_agree_with_the_engine_on_small_cases() {
        let sc = Scenario::abstract_orders(6, 0).unwrap();
        for p in HeuristicParams::all_within(6, 6) {
            let route = p.template().unwrap().flatten(&sc).unwrap();
            assert_eq!(
                privacy_risks(&route, &sc).unwrap(),
                closed_form_risks(&p).unwrap(),
                "{p}"
            );
        }
    }

    #[test]
    fn stuffing_sum_is_n_c_times_the_average() {
        for n in 1..=8 {
            for c in 1..=n {
                let avg = closed_form_risks(&HeuristicParams::Stuffing { n, c }).unwrap().average;
                assert_eq!(stuffing_weighted_sum(n, c), avg * ratio(n * c, 1));
            }
        }
        assert_eq!(stuffing_limit(3), r(4, 27));
    }

    #[test]
    fn required_capacity_matches_template() {
        for n in 1..=7 {
            for p in HeuristicParams::all_within(n, n) {
                assert_eq!(p.required_capacity(), p.template().unwrap().required_capacity(), "{p}");
            }
        }
    }

    #[test]
    fn next_permutation_walks_all() {
        let mut v = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(v, vec![3, 2, 1, 0]);
    }

    #[test]
    fn aggregation_on_diagonal_square_picks_the_low_wait_flattening() {
        let sc = unit_square_fixture(FixtureConfig::Diagonal);
        let drone = DroneSpec::with_motion(2, MotionModel::distance_proxy());
        let t = reversal_template(2, 0).unwrap();
        let inst = instantiate_template(&t, &sc, &drone, InstantiateOptions::default()).unwrap();
        assert_eq!(inst.route.to_string(), "v1,v2,a1,a2");
        assert!(inst.exact);
        assert_eq!(inst.travel_distance, 3.0);
    }

    #[test]
    fn co_located_ties_resolve_to_identity() {
        let sc = Scenario::abstract_orders(4, 0).unwrap();
        let t = reversal_template(4, 0).unwrap();
        let inst = instantiate_template(&t, &sc, &DroneSpec::new(4), InstantiateOptions::default()).unwrap();
        assert_eq!(inst.route.to_string(), "v1,v2,v3,v4,a1,a2,a3,a4");
        assert_eq!(inst.travel_distance, 0.0);
    }

    #[test]
    fn insufficient_capacity_is_refused() {
        let sc = Scenario::abstract_orders(4, 0).unwrap();
        let t = reversal_template(4, 0).unwrap();
        assert!(instantiate_template(&t, &sc, &DroneSpec::new(3), InstantiateOptions::default()).is_err());
    }

    #[test]
    fn large_groups_fall_back_to_greedy() {
        let pts: Vec<Point> = (0..10).map(|i| Point::new(i as f64 * 100.0, 0.0)).collect();
        let cust: Vec<Point> = (0..10).map(|i| Point::new(i as f64 * 100.0, 500.0)).collect();
        let sc = Scenario::from_positions("line", &pts, &cust, &[]).unwrap();
        let t = reversal_template(10, 0).unwrap();
        let inst = instantiate_template(&t, &sc, &DroneSpec::new(10), InstantiateOptions::default()).unwrap();
        assert!(!inst.exact);
        let base = privacy_risks(&t.flatten(&sc).unwrap(), &sc).unwrap();
        assert_eq!(privacy_risks(&inst.route, &sc).unwrap(), base);
    }

    #[test]
    fn relabeling_never_travels_further() {
        let sc = crate::geometry::generate(&crate::geometry::GeneratorConfig::new(
            crate::geometry::Topology::Uniform,
            5,
            0,
            9,
        ))
        .unwrap();
        let t = split_template(5, 3, 2).unwrap();
        let drone = DroneSpec::new(3);
        let plain = instantiate_template(&t, &sc, &drone, InstantiateOptions::default()).unwrap();
        let relabeled = instantiate_template(&t, &sc, &drone, InstantiateOptions { relabel: true }).unwrap();
        assert!(relabeled.travel_distance <= plain.travel_distance);
        // the risk multiset is a property of the template only
        let mut a = privacy_risks(&plain.route, &sc).unwrap().risks;
        let mut b = privacy_risks(&relabeled.route, &sc).unwrap().risks;
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }
}
