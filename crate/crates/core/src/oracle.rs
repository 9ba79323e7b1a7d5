//! Brute-force third-party observer.
//!
//! The observer knows the stop sequence but not which item leaves the drone
//! at each customer. At every drop it branches uniformly over the items it
//! believes are aboard (real pickups and one phantom item per decoy stop).
//! A world is one complete branch history; its probability is the product of
//! the branch weights.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{check_nodes, Node, Route, Scenario, Stop};
use crate::privacy::Rational;

/// Largest `n + decoys used` the oracle accepts; the work grows factorially.
pub const MAX_ORACLE_ITEMS: usize = 10;

/// One hypothesis of which item was dropped at every customer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverWorld {
    /// `(customer, source vendor or decoy)` in the order customers are visited.
    pub assignment: Vec<(Stop, Stop)>,
    pub probability: Rational,
}

/// `p_{a_i}(v_j | r)`: rows are orders, columns are vendors (real vendors by
/// order index, then decoys).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosteriorMatrix {
    customers: Vec<Stop>,
    vendors: Vec<Stop>,
    entries: Vec<Rational>,
}

impl PosteriorMatrix {
    pub fn rows(&self) -> usize {
        self.customers.len()
    }

    pub fn columns(&self) -> usize {
        self.vendors.len()
    }

    pub fn customers(&self) -> &[Stop] {
        &self.customers
    }

    pub fn vendors(&self) -> &[Stop] {
        &self.vendors
    }

    pub fn get(&self, row: usize, col: usize) -> Rational {
        self.entries[row * self.columns() + col]
    }

    pub fn row(&self, row: usize) -> &[Rational] {
        let m = self.columns();
        &self.entries[row * m..(row + 1) * m]
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        (0..self.rows()).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<Rational> {
        (0..self.columns())
            .map(|j| (0..self.rows()).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn is_row_stochastic(&self) -> bool {
        self.row_sums().iter().all(|s| *s == Rational::from_integer(1))
    }

    /// Row- and column-stochastic; only meaningful for square matrices.
    pub fn is_doubly_stochastic(&self) -> bool {
        self.rows() == self.columns()
            && self.is_row_stochastic()
            && self.column_sums().iter().all(|s| *s == Rational::from_integer(1))
    }
}

/// Item column for a pickup stop: real orders first, then decoys.
fn item_of(node: Node, n: usize) -> Option<usize> {
    match node {
        Node::Pickup(o) => Some(o),
        Node::Decoy(k) => Some(n + k),
        Node::Drop(_) => None,
    }
}

fn prepare(route: &Route, scenario: &Scenario) -> Result<Vec<Node>> {
    let nodes = scenario.compile(route)?;
    let n = scenario.order_count();
    if let Some(v) = check_nodes(&nodes, n, scenario.decoy_count(), None) {
        return Err(Error::InvalidRoute(v));
    }
    let items = nodes.iter().filter(|nd| !matches!(nd, Node::Drop(_))).count();
    if items > MAX_ORACLE_ITEMS {
        let branches = (1..=items).map(|k| k as f64).product::<f64>();
        return Err(Error::GuardExceeded {
            what: "observer enumeration",
            detail: format!("{items} items aboard over the route, limit {MAX_ORACLE_ITEMS}"),
            estimate: branches,
        });
    }
    Ok(nodes)
}

/// Walks every branch history, calling `leaf` with the per-order item
/// assignment and the number of equally likely siblings along the path.
fn branch(
    nodes: &[Node],
    n: usize,
    aboard: &mut Vec<usize>,
    assignment: &mut Vec<usize>,
    fan_out: u128,
    leaf: &mut dyn FnMut(&[usize], u128),
) {
    let Some((&node, rest)) = nodes.split_first() else {
        leaf(assignment, fan_out);
        return;
    };
    match node {
        Node::Drop(o) => {
            let k = aboard.len();
            for slot in 0..k {
                let item = aboard.swap_remove(slot);
                assignment[o] = item;
                branch(rest, n, aboard, assignment, fan_out * k as u128, leaf);
                aboard.push(item);
                let last = aboard.len() - 1;
                aboard.swap(slot, last);
            }
        }
        pickup => {
            aboard.push(item_of(pickup, n).expect("pickup node"));
            branch(rest, n, aboard, assignment, fan_out, leaf);
            aboard.pop();
        }
    }
}

/// All observer worlds, with identical assignments merged.
pub fn enumerate_worlds(route: &Route, scenario: &Scenario) -> Result<Vec<ObserverWorld>> {
    let nodes = prepare(route, scenario)?;
    let n = scenario.order_count();
    let mut merged: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    let mut aboard = Vec::new();
    let mut assignment = vec![usize::MAX; n];
    branch(&nodes, n, &mut aboard, &mut assignment, 1, &mut |a, fan_out| {
        *merged.entry(a.to_vec()).or_insert_with(Rational::zero) += Rational::new(1, fan_out as i128);
    });

    let columns = scenario.vendor_columns();
    let visit_order: Vec<usize> = nodes
        .iter()
        .filter_map(|nd| match nd {
            Node::Drop(o) => Some(*o),
            _ => None,
        })
        .collect();
    Ok(merged
        .into_iter()
        .map(|(a, probability)| ObserverWorld {
            assignment: visit_order
                .iter()
                .map(|&o| (scenario.order_stops(o).1, columns[a[o]]))
                .collect(),
            probability,
        })
        .collect())
}

/// Marginalizes the observer worlds into `p_{a_i}(v_j | r)`.
pub fn posterior_matrix(route: &Route, scenario: &Scenario) -> Result<PosteriorMatrix> {
    let nodes = prepare(route, scenario)?;
    let n = scenario.order_count();
    let vendors = scenario.vendor_columns();
    let m = vendors.len();

    // Every drop fans out over the same number of items on every path, so
    // each leaf carries the same weight 1/total and integer counts suffice.
    let mut counts = vec![0u128; n * m];
    let mut total = 0u128;
    let mut aboard = Vec::new();
    let mut assignment = vec![usize::MAX; n];
    branch(&nodes, n, &mut aboard, &mut assignment, 1, &mut |a, fan_out| {
        total = fan_out;
        for (o, &item) in a.iter().enumerate() {
            counts[o * m + item] += 1;
        }
    });
    let entries = counts
        .iter()
        .map(|&c| Rational::new(c as i128, total as i128))
        .collect();
    Ok(PosteriorMatrix {
        customers: (0..n).map(|o| scenario.order_stops(o).1).collect(),
        vendors,
        entries,
    })
}

/// The probability of the correct match for every order: the diagonal.
pub fn risks_from_posterior(p: &PosteriorMatrix) -> Vec<Rational> {
    (0..p.rows()).map(|i| p.get(i, i)).collect()
}
