//! Exact per-order privacy risk of a route.
//!
//! The risk of order `i` is the probability that an observer who sees only
//! the stop sequence matches customer `a_i` to its true vendor `v_i`. It is
//! computed run by run: at a customer run that starts with `n_pl` apparent
//! items aboard, every customer whose item is aboard gets factor `1/n_pl`, and
//! every item still aboard afterwards survives with factor `left/n_pl`.
//! Decoy stops add a phantom item that is counted in `n_pl` but never removed.

use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, One, ToPrimitive};

use crate::error::{Error, Result};
use crate::model::{check_nodes, Node, Route, Scenario};

/// Exact rational used for every probability in the crate.
pub type Rational = num_rational::Ratio<i128>;

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Per-order risks with the route-level worst case and average.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiskReport {
    /// `Δ(i)` indexed by order (ascending customer id).
    pub risks: Vec<Rational>,
    pub worst_case: Rational,
    pub average: Rational,
}

impl RiskReport {
    pub fn from_risks(risks: Vec<Rational>) -> Result<Self> {
        let worst_case = worst_case_risk(&risks)?;
        let average = average_risk(&risks)?;
        Ok(RiskReport {
            risks,
            worst_case,
            average,
        })
    }
}

pub fn worst_case_risk(risks: &[Rational]) -> Result<Rational> {
    risks.iter().max().copied().ok_or(Error::EmptyRisks)
}

pub fn average_risk(risks: &[Rational]) -> Result<Rational> {
    if risks.is_empty() {
        return Err(Error::EmptyRisks);
    }
    let sum = risks
        .iter()
        .try_fold(Rational::from_integer(0), |acc, r| acc.checked_add(r))
        .ok_or(Error::Overflow("average risk"))?;
    sum.checked_div(&Rational::from_integer(risks.len() as i128))
        .ok_or(Error::Overflow("average risk"))
}

/// Risk vector of a route that is already known to satisfy precedence and
/// completeness.
pub(crate) fn node_risks(nodes: &[Node], n: usize) -> Result<Vec<Rational>> {
    let overflow = || Error::Overflow("privacy risk");
    let mut risk = vec![Rational::one(); n];
    let mut aboard: Vec<usize> = Vec::with_capacity(n);
    let mut phantoms = 0usize;
    let mut i = 0;
    while i < nodes.len() {
        while let Some(&node) = nodes.get(i) {
            match node {
                Node::Pickup(o) => aboard.push(o),
                Node::Decoy(_) => phantoms += 1,
                Node::Drop(_) => break,
            }
            i += 1;
        }
        let n_pl = aboard.len() + phantoms;
        let share = Rational::new(1, n_pl as i128);
        while let Some(&Node::Drop(o)) = nodes.get(i) {
            risk[o] = risk[o].checked_mul(&share).ok_or_else(overflow)?;
            let pos = aboard.iter().position(|&x| x == o).expect("precedence was checked");
            aboard.swap_remove(pos);
            i += 1;
        }
        let left = aboard.len() + phantoms;
        if left != n_pl {
            let survive = Rational::new(left as i128, n_pl as i128);
            for &o in &aboard {
                risk[o] = risk[o].checked_mul(&survive).ok_or_else(overflow)?;
            }
        }
    }
    Ok(risk)
}

/// Computes `Δ(i)` for every order, plus `Δ_max` and `Δ̄`.
///
/// Capacity is not checked here; callers validate against their drone.
pub fn privacy_risks(route: &Route, scenario: &Scenario) -> Result<RiskReport> {
    let nodes = scenario.compile(route)?;
    let n = scenario.order_count();
    if let Some(v) = check_nodes(&nodes, n, scenario.decoy_count(), None) {
        return Err(Error::InvalidRoute(v));
    }
    RiskReport::from_risks(node_risks(&nodes, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    fn risks(route: &str, n: usize, decoys: usize) -> RiskReport {
        let sc = Scenario::abstract_orders(n, decoys).unwrap();
        privacy_risks(&route.parse().unwrap(), &sc).unwrap()
    }

    #[test]
    fn worked_example() {
        let rep = risks("v1,v2,a2,v3,a3,a1", 3, 0);
        assert_eq!(rep.risks, vec![r(1, 4), r(1, 2), r(1, 2)]);
        assert_eq!(rep.average, r(5, 12));
        assert_eq!(rep.worst_case, r(1, 2));
    }

    #[test]
    fn sequential_route_is_fully_identifiable() {
        let rep = risks("v1,a1,v2,a2,v3,a3,v4,a4", 4, 0);
        assert!(rep.risks.iter().all(|x| *x == Rational::one()));
    }

    #[test]
    fn adding_an_order_at_capacity_two() {
        let rep = risks("v1,v2,a2,v3,a1,v4,a3,a4", 4, 0);
        assert_eq!(rep.risks, vec![r(1, 4), r(1, 2), r(1, 4), r(1, 2)]);
        assert_eq!(rep.average, r(3, 8));
    }

    #[test]
    fn aggregation_of_five() {
        let rep = risks("v1,v2,v3,v4,v5,a1,a2,a3,a4,a5", 5, 0);
        assert!(rep.risks.iter().all(|x| *x == r(1, 5)));
    }

    #[test]
    fn one_decoy_halves_a_single_order() {
        // decoy ids follow the real vendors, so the only decoy is d2
        let rep = risks("v1,d2,a1", 1, 1);
        assert_eq!(rep.risks, vec![r(1, 2)]);
    }

    #[test]
    fn decoy_phantom_survives_later_runs() {
        let rep = risks("v1,d3,a1,v2,a2", 2, 1);
        assert_eq!(rep.risks, vec![r(1, 2), r(1, 2)]);
    }

    #[test]
    fn pickup_narrative_from_three_aboard() {
        // three aboard and a drop at a2: Δ(2) = 1/3, survivors carry 2/3
        let rep = risks("v1,v2,v3,a2,v4,a1,a3,a4", 4, 0);
        assert_eq!(rep.risks[1], r(1, 3));
        assert_eq!(rep.risks[0], r(2, 3) * r(1, 3));
        assert_eq!(rep.risks[2], r(2, 3) * r(1, 3));
        assert_eq!(rep.risks[3], r(1, 3));
    }

    #[test]
    fn telescoping_within_a_customer_run() {
        let rep = risks("v1,v2,v3,v4,a3,a1,a4,a2", 4, 0);
        assert!(rep.risks.iter().all(|x| *x == r(1, 4)));
    }

    #[test]
    fn measures() {
        assert_eq!(worst_case_risk(&[r(1, 4), r(1, 2), r(1, 2)]).unwrap(), r(1, 2));
        assert_eq!(worst_case_risk(&[r(1, 7); 7]).unwrap(), r(1, 7));
        assert_eq!(worst_case_risk(&[r(1, 1)]).unwrap(), r(1, 1));
        assert_eq!(average_risk(&[r(1, 4), r(1, 2), r(1, 2)]).unwrap(), r(5, 12));
        assert_eq!(average_risk(&[r(1, 4), r(1, 2), r(1, 4), r(1, 2)]).unwrap(), r(3, 8));
        assert_eq!(average_risk(&[r(1, 1), r(1, 1)]).unwrap(), r(1, 1));
        assert!(matches!(worst_case_risk(&[]), Err(Error::EmptyRisks)));
        assert!(matches!(average_risk(&[]), Err(Error::EmptyRisks)));
    }

    #[test]
    fn invalid_routes_are_rejected() {
        let sc = Scenario::abstract_orders(2, 0).unwrap();
        assert!(matches!(
            privacy_risks(&"a1,v1,v2,a2".parse().unwrap(), &sc),
            Err(Error::InvalidRoute(_))
        ));
        assert!(matches!(
            privacy_risks(&"v1,a1".parse().unwrap(), &sc),
            Err(Error::InvalidRoute(_))
        ));
    }
}
