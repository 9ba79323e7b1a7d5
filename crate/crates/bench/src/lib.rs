//! Workloads shared by the benchmarks.

use privroute::{generate, stuffing_template, GeneratorConfig, Route, Scenario, Topology};

/// Abstract scenario with the c-stuffing route over it.
pub fn stuffing_workload(n: usize, c: usize) -> (Scenario, Route) {
    let scenario = Scenario::abstract_orders(n, 0).expect("n >= 1");
    let route = stuffing_template(n, c)
        .and_then(|t| t.flatten(&scenario))
        .expect("1 <= c <= n");
    (scenario, route)
}

pub fn uniform_map(n: usize, decoys: usize, seed: u64) -> Scenario {
    generate(&GeneratorConfig::new(Topology::Uniform, n, decoys, seed)).expect("valid generator config")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workloads_are_valid() {
        let (scenario, route) = stuffing_workload(20, 4);
        assert_eq!(route.len(), 40);
        assert!(privroute::privacy_risks(&route, &scenario).is_ok());
        assert_eq!(uniform_map(5, 1, 0).order_count(), 5);
    }
}
