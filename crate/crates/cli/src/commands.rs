//! Subcommand bodies. Each returns a [`Report`] holding both renderings and
//! the exit code, so `--json` and text output always agree.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use ncball::automorphisms::{poincare_bergman, BallAutomorphism};
use ncball::freeholo::schwarz_pick_check;
use ncball::metrics::{delta, harnack_dominated, kernel_metric, omega, HarnackOptions, HarnackVerdict};
use ncball::tuples::{classify, joint_spectral_radius};
use ncball::{verify as suites, Enclosure, Execution, MetricOptions};

use crate::error::{CliError, EXIT_NUMERICAL, EXIT_OK, EXIT_PROPERTY};
use crate::io::{read_json, read_tuple, MapDocument, TupleDocument};
use crate::GlobalArgs;

/// Required accuracy of each `disk` sample.
pub const DISK_TOL: f64 = 1e-8;
const DISK_BISECTIONS: usize = 200;

pub struct Report {
    pub text: String,
    pub json: Value,
    pub code: i32,
}

#[derive(Clone, Copy, Debug)]
pub enum Metric {
    Delta,
    Omega,
    KernelMetric,
}

fn options(g: &GlobalArgs) -> Result<MetricOptions, CliError> {
    if !(g.tol.is_finite() && g.tol > 0.0) {
        return Err(CliError::Malformed(format!("--tol must be positive, got {}", g.tol)));
    }
    if g.mmax == 0 {
        return Err(CliError::Malformed("--mmax must be positive".into()));
    }
    Ok(MetricOptions { tol: g.tol, m_max: g.mmax, ..MetricOptions::default() })
}

/// Infinite ends are written as JSON `null`.
fn enclosure_json(e: &Enclosure) -> Value {
    json!({
        "lower": e.lower,
        "upper": e.upper.is_finite().then_some(e.upper),
        "mid": e.mid(),
        "width": e.width().is_finite().then_some(e.width()),
        "m_used": e.m_used,
        "converged": e.converged,
    })
}

fn enclosure_text(name: &str, e: &Enclosure) -> String {
    format!(
        "{name} lower={} upper={} mid={} width={} m_used={} converged={}\n",
        e.lower,
        e.upper,
        e.mid(),
        e.width(),
        e.m_used,
        e.converged
    )
}

fn complex_json(z: &[Complex64]) -> Value {
    z.iter().map(|c| json!([c.re, c.im])).collect()
}

pub fn metric(which: Metric, a: &Path, b: &Path, g: &GlobalArgs) -> Result<Report, CliError> {
    let opts = options(g)?;
    let (a, b) = (read_tuple(a)?, read_tuple(b)?);
    let (name, e) = match which {
        Metric::Delta => ("delta", delta(&a, &b, &opts)?),
        Metric::Omega => ("omega", omega(&a, &b, &opts)?),
        Metric::KernelMetric => ("d_H", kernel_metric(&a, &b, &opts)?),
    };
    Ok(Report {
        text: enclosure_text(name, &e),
        json: json!({ "quantity": name, "enclosure": enclosure_json(&e) }),
        code: if e.converged { EXIT_OK } else { EXIT_NUMERICAL },
    })
}

pub fn spectral_radius(x: &Path, kmax: usize) -> Result<Report, CliError> {
    if kmax < 4 {
        return Err(CliError::Malformed("--kmax must be at least 4".into()));
    }
    let x = read_tuple(x)?;
    let jsr = joint_spectral_radius(&x, kmax);
    let member = classify(&x);
    let text = format!(
        "spectral_radius={} converged={} steps={} row_norm={} membership={:?}\n",
        jsr.estimate, jsr.converged, jsr.steps, member.row_norm, member.tag
    );
    let json = json!({
        "spectral_radius": jsr.estimate,
        "converged": jsr.converged,
        "steps": jsr.steps,
        "last_three": jsr.last_three,
        "row_norm": member.row_norm,
        "membership": format!("{:?}", member.tag),
    });
    Ok(Report { text, json, code: EXIT_OK })
}

/// Verdicts are results: a refutation still exits 0.
pub fn harnack(a: &Path, b: &Path, c: f64, levels: usize, r_grid: Vec<f64>) -> Result<Report, CliError> {
    let (a, b) = (read_tuple(a)?, read_tuple(b)?);
    let opts = HarnackOptions { r_grid, m_max: levels, ..HarnackOptions::default() };
    let cert = harnack_dominated(&a, &b, c, &opts)?;
    let (text, verdict) = match &cert.verdict {
        HarnackVerdict::DominatedUpTo { m, r_grid } => (
            format!("verdict=DominatedUpTo c={} m={m} r_grid={r_grid:?}\n", cert.c),
            json!({ "verdict": "DominatedUpTo", "m": m, "r_grid": r_grid }),
        ),
        HarnackVerdict::Refuted { m, r, witness, value } => (
            format!("verdict=Refuted c={} m={m} r={r} value={value}\nwitness={}\n", cert.c, complex_json(witness)),
            json!({ "verdict": "Refuted", "m": m, "r": r, "value": value, "witness": complex_json(witness) }),
        ),
    };
    let mut json = verdict;
    json["c"] = json!(cert.c);
    Ok(Report { text, json, code: EXIT_OK })
}

pub fn auto_apply(unitary: &Path, lambda: &Path, x: &Path) -> Result<Report, CliError> {
    let u = read_json::<TupleDocument>(unitary)?.to_matrix()?;
    let lambda = read_json::<TupleDocument>(lambda)?.to_lambda()?;
    let xdoc: TupleDocument = read_json(x)?;
    let psi = BallAutomorphism::new(u, lambda)?;
    let image = psi.apply(&xdoc.to_tuple()?)?;
    let doc = TupleDocument::from_tuple(&image, xdoc.label.map(|l| format!("psi({l})")));
    let json = serde_json::to_value(&doc).expect("tuple documents serialize");
    let text = serde_json::to_string_pretty(&doc).expect("tuple documents serialize") + "\n";
    Ok(Report { text, json, code: EXIT_OK })
}

pub fn schwarz_pick(f: &Path, x: &Path, y: &Path, g: &GlobalArgs) -> Result<Report, CliError> {
    let opts = options(g)?;
    let f = read_json::<MapDocument>(f)?.to_map()?;
    let (x, y) = (read_tuple(x)?, read_tuple(y)?);
    let rep = schwarz_pick_check(&f, &x, &y, &opts)?;
    let code = if !rep.holds {
        EXIT_PROPERTY
    } else if !(rep.lhs.converged && rep.rhs.converged) {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    };
    let text = enclosure_text("lhs", &rep.lhs) + &enclosure_text("rhs", &rep.rhs) + &format!("holds={}\n", rep.holds);
    let json = json!({ "lhs": enclosure_json(&rep.lhs), "rhs": enclosure_json(&rep.rhs), "holds": rep.holds });
    Ok(Report { text, json, code })
}

fn unit_direction(rng: &mut ChaCha8Rng) -> [Complex64; 2] {
    loop {
        let mut g = || Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
        let u = [g(), g()];
        let norm = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
        if norm > 1e-12 {
            return [u[0] / norm, u[1] / norm];
        }
    }
}

/// Point at Poincaré–Bergman distance `rho` from `z` along the ray `z + t u`.
///
/// Hyperbolic balls about `z` are convex and contain `z`, so the distance is
/// increasing in `t` on `[0, t_exit)` and bisection applies.
fn point_on_ray(z: &[Complex64; 2], u: &[Complex64; 2], rho: f64) -> Result<([Complex64; 2], f64), CliError> {
    let zu = (z[0] * u[0].conj() + z[1] * u[1].conj()).re;
    let zz = z[0].norm_sqr() + z[1].norm_sqr();
    let t_exit = -zu + (zu * zu + 1.0 - zz).sqrt();
    let at = |t: f64| [z[0] + u[0] * t, z[1] + u[1] * t];
    let (mut lo, mut hi) = (0.0, t_exit);
    let mut best = (*z, 0.0);
    for _ in 0..DISK_BISECTIONS {
        let t = 0.5 * (lo + hi);
        if t <= lo || t >= hi {
            break;
        }
        let w = at(t);
        let dist = poincare_bergman(z, &w)?;
        if (dist - rho).abs() < (best.1 - rho).abs() {
            best = (w, dist);
        }
        if (dist - rho).abs() <= DISK_TOL * 1e-2 {
            break;
        }
        if dist < rho {
            lo = t;
        } else {
            hi = t;
        }
    }
    if (best.1 - rho).abs() > DISK_TOL {
        return Err(CliError::Numerical(format!(
            "radius {rho} is not resolvable in double precision along this ray (best {})",
            best.1
        )));
    }
    Ok(best)
}

pub fn disk(center: &Path, rho: f64, samples: usize, seed: u64) -> Result<Report, CliError> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(CliError::Malformed(format!("--radius must be positive, got {rho}")));
    }
    if samples == 0 {
        return Err(CliError::Malformed("--samples must be positive".into()));
    }
    let z = read_tuple(center)?
        .as_scalar()
        .filter(|z| z.len() == 2)
        .ok_or_else(|| CliError::Malformed("center must be a point of C^2 (n = 2, dim = 1)".into()))?;
    let z = [z[0], z[1]];
    if z[0].norm_sqr() + z[1].norm_sqr() >= 1.0 {
        return Err(CliError::Malformed("center must lie in the open unit ball".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::from("w_re1,w_im1,w_re2,w_im2,achieved_distance\n");
    let mut rows = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (w, dist) = point_on_ray(&z, &unit_direction(&mut rng), rho)?;
        writeln!(text, "{},{},{},{},{}", w[0].re, w[0].im, w[1].re, w[1].im, dist).expect("string write");
        rows.push(json!({ "w": complex_json(&w), "achieved_distance": dist }));
    }
    Ok(Report { text, json: json!({ "center": complex_json(&z), "radius": rho, "points": rows }), code: EXIT_OK })
}

pub fn verify(suite: &str, seed: u64, trials: usize) -> Result<Report, CliError> {
    let outcomes = suites::run(suite, seed, trials, Execution::Parallel).ok_or_else(|| {
        CliError::Malformed(format!("unknown suite {suite:?}; expected all or one of {:?}", suites::SUITES))
    })?;
    let mut text = String::new();
    let mut props = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        write!(text, "{}/{}: {}/{} passed", o.suite, o.name, o.trials - o.failures, o.trials).expect("string write");
        if let Some((s, msg)) = &o.first_failure {
            write!(text, "; first failure at seed {s}: {msg}").expect("string write");
        }
        text.push('\n');
        props.push(json!({
            "suite": o.suite,
            "name": o.name,
            "trials": o.trials,
            "failures": o.failures,
            "first_failure": o.first_failure.as_ref().map(|(s, m)| json!({ "seed": s, "message": m })),
        }));
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    writeln!(text, "{passed}/{} properties passed", outcomes.len()).expect("string write");
    let code = if passed == outcomes.len() { EXIT_OK } else { EXIT_PROPERTY };
    Ok(Report { text, json: json!({ "properties": props, "passed": passed, "total": outcomes.len() }), code })
}
