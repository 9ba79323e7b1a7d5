//! Privacy risk of drone delivery routes under a third-party observer.
//!
//! An observer who sees every stop of a delivery drone, but not what is
//! handed over, tries to match each customer to the vendor its package came
//! from. This crate computes that matching probability exactly
//! ([`privacy::privacy_risks`]), checks it against a brute-force observer
//! ([`oracle`]), builds routes with known risk ([`heuristics`]), and maps the
//! privacy/wait-time trade-off by exhaustive enumeration ([`search`]).
//!
//! ```
//! use privroute::{privacy_risks, Rational, Scenario};
//!
//! let scenario = Scenario::abstract_orders(3, 0).unwrap();
//! let route = "v1,v2,a2,v3,a3,a1".parse().unwrap();
//! let report = privacy_risks(&route, &scenario).unwrap();
//! assert_eq!(report.average, Rational::new(5, 12));
//! ```

pub mod error;
pub mod geometry;
pub mod heuristics;
pub mod io;
pub mod model;
pub mod oracle;
pub mod privacy;
pub mod search;

pub use error::{Error, Result};
pub use geometry::{
    distance_matrix, generate, unit_square_fixture, wait_times, FixtureConfig, GeneratorConfig, MotionModel, Topology,
    TopologyParams, WaitReport,
};
pub use heuristics::{
    closed_form_risks, evaluate_heuristic, instantiate_template, reversal_template, split_template, stuffing_template,
    HeuristicParams, HeuristicPoint, InstantiateOptions, Instantiation,
};
pub use model::{
    decompose_runs, validate_route, CustomerSite, DroneSpec, Group, Point, Route, RouteTemplate, RunDecomposition,
    Scenario, SiteId, Stop, ValidationResult, VendorSite, Violation, ViolationKind,
};
pub use oracle::{enumerate_worlds, posterior_matrix, risks_from_posterior, ObserverWorld, PosteriorMatrix};
pub use privacy::{average_risk, privacy_risks, worst_case_risk, Rational, RiskReport};
pub use search::{
    enumerate_routes, evaluate, min_avg_risk, min_avg_risk_sweep, pareto_front, Evaluation, ParetoFront, RiskObjective,
    RouteSpace, SweepCell,
};
