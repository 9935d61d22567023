//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the test harness so the lines show up in `cargo test`
//! output. A criterion that is not met prints FAIL and the suite carries
//! on; the process fails only if a criterion could not be evaluated at all.

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use srpsim::cli::fmt_value;
use srpsim::dynamics::{compute_gate_unitary, propagate_density, IntegratorConfig};
use srpsim::model::{build_decay_channels, build_hamiltonian, mhz, ModelVariant, PhysicalParams};
use srpsim::observables::{cz, gate_fidelity_unitary};
use srpsim::quantum::{DensityMatrix, Level, StateVector, C64};
use srpsim::scenarios::{catalog, run_scenario, Report};
use srpsim::Result;

type Criterion = fn() -> Result<Verdict>;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { passed, detail: detail.into() })
}

fn timed(name: &str) -> Result<(Report, Duration)> {
    let t = Instant::now();
    let r = run_scenario(name, &[])?;
    Ok((r, t.elapsed()))
}

fn metric(r: &Report, name: &str) -> f64 {
    r.metric(name).unwrap_or(f64::NAN)
}

/// All listed checks of a report, with their measured values.
fn checks(r: &Report, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in r.checks.iter().filter(|c| names.contains(&c.check.metric.as_str())) {
        ok &= c.passed;
        parts.push(format!("{}={} ({})", c.check.metric, fmt_value(c.measured.unwrap_or(f64::NAN)), c.check.requirement()));
    }
    ok &= parts.len() == names.len();
    (ok, parts.join(", "))
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn fig2_params(omega_mhz: f64) -> PhysicalParams {
    let j = mhz(50.0);
    PhysicalParams::new().with("Omega", mhz(omega_mhz)).with("Omega_s", mhz(1.0)).with("J", j).with("Delta", SQRT_2 * j)
}

fn fast() -> IntegratorConfig {
    IntegratorConfig::rk4().with_divisor(160.0)
}

fn c1_freezing() -> Result<Verdict> {
    let (r, dt) = timed("fig2_srp")?;
    let (ok, d) = checks(&r, &["min_P00", "min_P01", "min_P10"]);
    let fast_enough = dt < Duration::from_secs(60);
    verdict(ok && fast_enough, format!("{d}, runtime {:.1}s (< 60s)", dt.as_secs_f64()))
}

fn c2_timing() -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (om, target, tol) in [(0.02, 17.68, 0.05), (0.06, 5.89, 0.02), (0.089, 3.97, 0.02)] {
        let tg = std::f64::consts::PI / (SQRT_2 * mhz(om));
        let h = build_hamiltonian(ModelVariant::FullSrp, &fig2_params(om))?;
        let u11 = compute_gate_unitary(&h, tg, &fast())?[(3, 3)];
        let good = (tg - target).abs() <= tol && (u11 - C64::new(-1.0, 0.0)).norm() <= 0.05;
        ok &= good;
        parts.push(format!("Omega/2pi={om}: t_g={tg:.4} (target {target} ± {tol}), U11={:.4}{:+.4}i", u11.re, u11.im));
    }
    verdict(ok, parts.join("; "))
}

fn c3_ideal_fidelity() -> Result<Verdict> {
    let (r, _) = timed("fig6_optimal_omega")?;
    let f = metric(&r, "F_ref");
    verdict(
        f >= 0.9990 && (f - 0.9994).abs() <= 0.0005,
        format!("F(Omega/2pi=0.089)={f:.6} (>= 0.9990, target 0.9994 ± 0.0005); scan optimum {:.6} at {:.4} MHz", metric(&r, "F_max"), metric(&r, "Omega_opt_MHz")),
    )
}

fn c4_table() -> Result<Verdict> {
    let (r, dt) = timed("table1_decay")?;
    let names: Vec<String> = r.checks.iter().map(|c| c.check.metric.clone()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let (ok, d) = checks(&r, &refs);
    let fast_enough = dt < Duration::from_secs(600);
    verdict(ok && fast_enough && refs.len() == 8, format!("state fidelity of CZ|++>: {d}; runtime {:.0}s (< 600s)", dt.as_secs_f64()))
}

fn c5_robustness() -> Result<Verdict> {
    let (a, _) = timed("fig3a_srp_deviation")?;
    let (b, _) = timed("fig3b_antiblockade_deviation")?;
    let (ok_a, da) = checks(&a, &["min_fidelity_window"]);
    let (ok_b, db) = checks(&b, &["peak_deltaJ_MHz", "width_ratio"]);
    verdict(
        ok_a && ok_b,
        format!(
            "{da} [F(-2.25)={:.6}, F(+1.7)={:.6}]; antiblockade {db}",
            metric(&a, "fidelity_window_lo"),
            metric(&a, "fidelity_window_hi")
        ),
    )
}

fn c6_double_excitation() -> Result<Verdict> {
    let (r, _) = timed("fig5_double_excitation")?;
    let (ok, d) = checks(&r, &["max_pair_low", "max_pair_high"]);
    verdict(ok, format!("per pair state: {d}"))
}

fn c7_ground_blockade() -> Result<Verdict> {
    let (r, _) = timed("fig8_ground_blockade")?;
    let (ok, d) = checks(&r, &["F_final", "Pe_max", "P11_max"]);
    verdict(ok, d)
}

fn c8_dissipative() -> Result<Verdict> {
    let (r, _) = timed("fig9_dissipative")?;
    let (ok, d) = checks(&r, &["F_final", "stationarity"]);
    verdict(ok, d)
}

fn c9_engineered() -> Result<Verdict> {
    let (r, _) = timed("appA_engineered_decay")?;
    let (ok, d) = checks(
        &r,
        &["rate0_rel_err", "rate1_rel_err", "rate0_rel_err_alt", "rate1_rel_err_alt", "total_rate_over_2pi_MHz"],
    );
    verdict(ok, d)
}

fn c10_recycling() -> Result<Verdict> {
    let (a, _) = timed("fig13_recycling")?;
    let (b, _) = timed("fig11_full_steady")?;
    let (ok_a, da) = checks(&a, &["max_dev_after"]);
    let (ok_b, db) = checks(&b, &["spread_window"]);
    verdict(ok_a && ok_b, format!("recycling {da}; branching {db}"))
}

fn c11_properties() -> Result<Verdict> {
    let mut parts = Vec::new();

    // Hermitian Hamiltonians for every catalog model.
    let mut herm: f64 = 0.0;
    for s in catalog() {
        let h = build_hamiltonian(s.variant, &s.params)?;
        for t in [0.0, 0.37, 1.1, 13.0] {
            herm = herm.max(h.evaluate(t).hermiticity_defect());
        }
    }
    parts.push(format!("Hermiticity defect {herm:.1e}"));

    // Trace and positivity after a dissipative run.
    let s = catalog().into_iter().find(|s| s.name == "fig11_full_steady").unwrap();
    let h = build_hamiltonian(s.variant, &s.params)?;
    let ch = build_decay_channels(s.variant, &s.params)?;
    let sp = h.space().clone();
    let rho0 = DensityMatrix::pure(&StateVector::basis(&sp, &[Level::G1, Level::G1])?);
    let rho = propagate_density(&h, &ch, &rho0, 20.0, &IntegratorConfig::rk4())?;
    let trace_err = (rho.trace() - C64::new(1.0, 0.0)).norm();
    let min_eig = rho.min_eigenvalue();
    parts.push(format!("trace error {trace_err:.1e}, min eigenvalue {min_eig:.1e}"));

    // Step halving.
    let p = fig2_params(0.02);
    let h = build_hamiltonian(ModelVariant::FullSrp, &p)?;
    let tg = std::f64::consts::PI / (SQRT_2 * mhz(0.02));
    let u1 = compute_gate_unitary(&h, tg, &IntegratorConfig::rk4().with_divisor(160.0))?;
    let u2 = compute_gate_unitary(&h, tg, &IntegratorConfig::rk4().with_divisor(320.0))?;
    let halving = max_abs(&(&u1 - &u2));
    parts.push(format!("step-halving change {halving:.1e}"));

    // Oracle agreement.
    let r = run_scenario("fig2_srp", &[])?;
    let oracle = metric(&r, "oracle_dev_max");
    parts.push(format!("oracle deviation {oracle:.1e}"));

    // Global phase.
    let phase = C64::from_polar(1.0, 0.731);
    let f0 = gate_fidelity_unitary(&u1, &cz())?;
    let f1 = gate_fidelity_unitary(&(u1.clone() * phase), &cz())?;
    let f2 = gate_fidelity_unitary(&u1, &(cz() * phase))?;
    let phase_err = (f0 - f1).abs().max((f0 - f2).abs());
    parts.push(format!("phase sensitivity {phase_err:.1e}"));

    let ok = herm < 1e-12
        && trace_err < 1e-10
        && min_eig > -1e-10
        && halving < 1e-6
        && oracle <= 0.02
        && phase_err < 1e-12;
    verdict(ok, parts.join(", "))
}

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("blockade freezing", c1_freezing),
        ("gate timing", c2_timing),
        ("ideal gate fidelity", c3_ideal_fidelity),
        ("dissipative gate table", c4_table),
        ("distance robustness", c5_robustness),
        ("double-excitation suppression", c6_double_excitation),
        ("ground-state blockade", c7_ground_blockade),
        ("dissipative steady state", c8_dissipative),
        ("engineered decay rates", c9_engineered),
        ("recycling and branching", c10_recycling),
        ("property suite", c11_properties),
    ];
    let start = Instant::now();
    let mut passed = 0;
    let mut errors = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match f() {
            Ok(v) => {
                passed += usize::from(v.passed);
                println!(
                    "criterion {:>2} {name}: {} [{:.1}s] {}",
                    i + 1,
                    if v.passed { "PASS" } else { "FAIL" },
                    t.elapsed().as_secs_f64(),
                    v.detail
                );
            }
            Err(e) => {
                errors += 1;
                println!("criterion {:>2} {name}: FAIL (error: {e})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {passed}/{} criteria pass, {errors} could not be evaluated, {:.0}s total",
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if errors > 0 {
        std::process::exit(1);
    }
}
