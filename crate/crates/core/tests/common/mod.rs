#![allow(dead_code)]

use std::collections::BTreeSet;

use privroute::{Route, Stop};

fn permute(items: &mut Vec<Stop>, k: usize, visit: &mut dyn FnMut(&[Stop])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

fn feasible(stops: &[Stop], capacity: usize) -> bool {
    let mut picked = BTreeSet::new();
    let mut aboard = 0usize;
    for s in stops {
        match *s {
            Stop::Vendor(i) => {
                picked.insert(i);
                aboard += 1;
                if aboard > capacity {
                    return false;
                }
            }
            Stop::Customer(i) => {
                if !picked.contains(&i) {
                    return false;
                }
                aboard -= 1;
            }
            Stop::Decoy(_) => {}
        }
    }
    true
}

fn subsets(pool: &[Stop], size: usize) -> Vec<Vec<Stop>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &first) in pool.iter().enumerate() {
        for mut rest in subsets(&pool[i + 1..], size - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every valid route of the abstract scenario (orders `1..=n`, decoys
/// `n+1..=n+decoys`), found by filtering all permutations of every stop
/// multiset.
pub fn naive_routes(n: usize, decoys: usize, budget: usize, capacity: usize) -> BTreeSet<Route> {
    let pool: Vec<Stop> = (1..=decoys as u32).map(|k| Stop::Decoy(n as u32 + k)).collect();
    let mut out = BTreeSet::new();
    for u in 0..=budget.min(decoys) {
        for chosen in subsets(&pool, u) {
            let mut items: Vec<Stop> = (1..=n as u32)
                .flat_map(|i| [Stop::Vendor(i), Stop::Customer(i)])
                .chain(chosen)
                .collect();
            permute(&mut items, 0, &mut |p| {
                if feasible(p, capacity) {
                    out.insert(Route(p.to_vec()));
                }
            });
        }
    }
    out
}

/// Same count without materializing routes.
pub fn naive_count(n: usize, decoys: usize, budget: usize, capacity: usize) -> u64 {
    let pool: Vec<Stop> = (1..=decoys as u32).map(|k| Stop::Decoy(n as u32 + k)).collect();
    let mut count = 0u64;
    for u in 0..=budget.min(decoys) {
        for chosen in subsets(&pool, u) {
            let mut items: Vec<Stop> = (1..=n as u32)
                .flat_map(|i| [Stop::Vendor(i), Stop::Customer(i)])
                .chain(chosen)
                .collect();
            permute(&mut items, 0, &mut |p| count += feasible(p, capacity) as u64);
        }
    }
    count
}
