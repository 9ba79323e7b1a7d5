//! Reference values the library must reproduce, printed as ok/FAIL lines.

use privroute::heuristics::{closed_form_summary, stuffing_limit};
use privroute::io::format_rational;
use privroute::privacy::to_f64;
use privroute::{
    closed_form_risks, enumerate_worlds, evaluate, posterior_matrix, privacy_risks, unit_square_fixture, DroneSpec,
    Error, FixtureConfig, HeuristicParams, MotionModel, Rational, Result, Route, Scenario,
};

struct Check {
    name: String,
    passed: bool,
    detail: String,
}

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn route(s: &str) -> Result<Route> {
    s.parse()
}

fn worked_example(out: &mut Vec<Check>) -> Result<()> {
    let scenario = Scenario::abstract_orders(3, 0)?;
    let route = route("v1,v2,a2,v3,a3,a1")?;
    let report = privacy_risks(&route, &scenario)?;
    out.push(Check {
        name: "worked example risks".into(),
        passed: report.risks == [r(1, 4), r(1, 2), r(1, 2)] && report.average == r(5, 12),
        detail: format!(
            "avg {} max {}",
            format_rational(&report.average),
            format_rational(&report.worst_case)
        ),
    });
    let worlds = enumerate_worlds(&route, &scenario)?;
    let p = posterior_matrix(&route, &scenario)?;
    let rows_ok = p.row(0) == [r(1, 4), r(1, 4), r(1, 2)]
        && p.row(1) == [r(1, 2), r(1, 2), r(0, 1)]
        && p.row(2) == [r(1, 4), r(1, 4), r(1, 2)];
    out.push(Check {
        name: "worked example observer".into(),
        passed: worlds.len() == 4 && worlds.iter().all(|w| w.probability == r(1, 4)) && rows_ok,
        detail: format!("{} worlds", worlds.len()),
    });
    Ok(())
}

fn unit_square(out: &mut Vec<Check>) -> Result<()> {
    let drone = DroneSpec::with_motion(2, MotionModel::distance_proxy());
    let rows = [
        (
            "diagonal v1,a1,v2,a2",
            FixtureConfig::Diagonal,
            "v1,a1,v2,a2",
            r(1, 1),
            [1.414, 3.828, 2.621],
        ),
        (
            "diagonal v1,v2,a1,a2",
            FixtureConfig::Diagonal,
            "v1,v2,a1,a2",
            r(1, 2),
            [2.0, 3.0, 2.5],
        ),
        (
            "adjacent v1,a1,v2,a2",
            FixtureConfig::Adjacent,
            "v1,a1,v2,a2",
            r(1, 1),
            [1.0, 3.0, 2.0],
        ),
        (
            "adjacent v1,v2,a1,a2",
            FixtureConfig::Adjacent,
            "v1,v2,a1,a2",
            r(1, 2),
            [2.414, 3.828, 3.121],
        ),
    ];
    for (name, config, stops, risk, waits) in rows {
        let e = evaluate(&route(stops)?, &unit_square_fixture(config), &drone)?;
        let got = [e.waits[0], e.waits[1], e.avg_wait];
        out.push(Check {
            name: format!("unit square {name}"),
            passed: e.risks.risks == [risk, risk] && got.iter().zip(waits).all(|(g, w)| (g - w).abs() < 1e-3),
            detail: format!(
                "risk {} waits {:.3} {:.3} avg {:.3}",
                format_rational(&risk),
                got[0],
                got[1],
                got[2]
            ),
        });
    }
    Ok(())
}

fn heuristic_forms(out: &mut Vec<Check>) -> Result<()> {
    let mut total = 0;
    let mut bad = Vec::new();
    for n in 1..=10 {
        let scenario = Scenario::abstract_orders(n, 0)?;
        for p in (1..=n)
            .flat_map(|k| {
                [
                    HeuristicParams::Split { n, k, l: n - k },
                    HeuristicParams::Stuffing { n, c: k },
                ]
            })
            .chain((0..=n / 2).map(|k| HeuristicParams::Reversal { n, k }))
        {
            if p.validate().is_err() {
                continue;
            }
            total += 1;
            let engine = privacy_risks(&p.template()?.flatten(&scenario)?, &scenario)?;
            let (worst, avg) = closed_form_summary(&p)?;
            if closed_form_risks(&p)?.risks != engine.risks || worst != engine.worst_case || avg != engine.average {
                bad.push(format!("{p} n={n}"));
            }
        }
    }
    out.push(Check {
        name: "heuristic closed forms, n <= 10".into(),
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{total} parameter sets")
        } else {
            bad.join(", ")
        },
    });
    let reversal = closed_form_summary(&HeuristicParams::Reversal { n: 6, k: 1 })?.1;
    out.push(Check {
        name: "reversal n=6 k=1 average".into(),
        passed: reversal == r(13, 75),
        detail: format_rational(&reversal),
    });
    let (_, stuffing) = closed_form_summary(&HeuristicParams::Stuffing { n: 500, c: 3 })?;
    let limit = stuffing_limit(3);
    let gap = (to_f64(&stuffing) - to_f64(&limit)).abs() / to_f64(&limit);
    out.push(Check {
        name: "stuffing c=3 n=500 near 4/27".into(),
        passed: gap < 0.01,
        detail: format!("{:.6} (relative gap {gap:.4})", to_f64(&stuffing)),
    });
    Ok(())
}

pub fn run() -> Result<()> {
    let mut checks = Vec::new();
    worked_example(&mut checks)?;
    unit_square(&mut checks)?;
    heuristic_forms(&mut checks)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    if failed > 0 {
        return Err(Error::InvalidScenario(format!("{failed} reference checks failed")));
    }
    Ok(())
}
