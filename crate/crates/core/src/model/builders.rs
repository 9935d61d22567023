use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use super::dressed::DressedState;
use super::hamiltonian::{DriveCoefficient, HamiltonianSpec};
use super::params::PhysicalParams;
use super::variant::ModelVariant;
use crate::error::{Error, Result};
use crate::quantum::{transition_operator, HilbertSpace, Level, Level::*, Operator, StateVector};

/// Build the Hamiltonian of `variant` from `p`.
///
/// Drive coefficients follow the interaction-picture convention
/// `c(t) = A e^{i(ωt + φ)}` on the lowering-type operator, closed with its
/// Hermitian conjugate.
pub fn build_hamiltonian(variant: ModelVariant, p: &PhysicalParams) -> Result<HamiltonianSpec> {
    p.validate()?;
    let space = variant.space()?;
    let ctx = variant.name();
    let mut h = HamiltonianSpec::new(space.clone());
    match variant {
        ModelVariant::FullSrp => full_srp(&mut h, p, ctx)?,
        ModelVariant::FullWithDefect => {
            full_srp(&mut h, p, ctx)?;
            let delta = p.require("delta_defect", ctx)?;
            let op = pair_projector(&space, [P1, P2])? + pair_projector(&space, [P2, P1])?;
            h.add_hermitian("defect", op, delta)?;
        }
        ModelVariant::FullDissipative | ModelVariant::RecyclingFull => {
            full_srp(&mut h, p, ctx)?;
            weak_ground_drive(&mut h, p, ctx)?;
        }
        ModelVariant::IntermediateEffective => intermediate(&mut h, p, ctx)?,
        ModelVariant::EffectiveSrp => pump_11(&mut h, p, ctx)?,
        ModelVariant::VdwComparison => {
            let omega = p.require("Omega", ctx)?;
            let omega_s = p.require("Omega_s", ctx)?;
            let delta = p.require("Delta", ctx)?;
            for site in 0..2 {
                h.add_closed(
                    &format!("omega_site{}", site + 1),
                    transition_operator(&space, site, R, G1)?,
                    DriveCoefficient::constant(omega),
                )?;
                h.add_closed(
                    &format!("dressing_site{}", site + 1),
                    transition_operator(&space, site, R, G0)?,
                    DriveCoefficient::oscillating(omega_s, delta, 0.0),
                )?;
            }
            h.add_hermitian("vdw", pair_projector(&space, [R, R])?, p.require("U_vdw", ctx)?)?;
        }
        ModelVariant::Antiblockade => antiblockade(&mut h, p, ctx)?,
        ModelVariant::GroundBlockadeEffective | ModelVariant::EffectiveDissipative => {
            weak_ground_drive(&mut h, p, ctx)?;
            pump_11(&mut h, p, ctx)?;
        }
        ModelVariant::GroundBlockadeSubspace => {
            let omega_w = p.require("Omega_w", ctx)?;
            let op = pair_transition(&space, [G0, G0], [G0, G1])? + pair_transition(&space, [G0, G0], [G1, G0])?;
            h.add_closed("omega_w", op, DriveCoefficient::constant(omega_w))?;
        }
        ModelVariant::EngineeredDecaySingleAtom => {
            let omega_p = p.require("Omega_p", ctx)?;
            h.add_closed(
                "omega_p",
                transition_operator(&space, 0, AShort, R)?,
                DriveCoefficient::constant(omega_p),
            )?;
        }
    }
    Ok(h)
}

/// The static Förster exchange `J |rr>(<p'p''| + <p''p'|) + h.c.` on a space
/// with the pair levels.
pub fn exchange_operator(space: &Arc<HilbertSpace>) -> Result<Operator> {
    Ok(pair_transition(space, [R, R], [P1, P2])? + pair_transition(space, [R, R], [P2, P1])?)
}

fn full_srp(h: &mut HamiltonianSpec, p: &PhysicalParams, ctx: &str) -> Result<()> {
    let space = h.space().clone();
    let omega = p.require("Omega", ctx)?;
    let (red, blue) = (p.red(ctx)?, p.blue(ctx)?);
    let delta = p.require("Delta", ctx)?;
    let j = p.require("J", ctx)?;
    for site in 0..2 {
        let n = site + 1;
        h.add_closed(
            &format!("omega_site{n}"),
            transition_operator(&space, site, R, G1)?,
            DriveCoefficient::constant(omega),
        )?;
        h.add_closed(
            &format!("red_site{n}"),
            transition_operator(&space, site, R, G0)?,
            DriveCoefficient::oscillating(red, -delta, 0.0),
        )?;
        // atom 2 carries the extra π phase on the blue drive
        h.add_closed(
            &format!("blue_site{n}"),
            transition_operator(&space, site, R, G0)?,
            DriveCoefficient::oscillating(blue, delta, site as f64 * PI),
        )?;
    }
    h.add_closed("exchange", exchange_operator(&space)?, DriveCoefficient::constant(j))
}

fn weak_ground_drive(h: &mut HamiltonianSpec, p: &PhysicalParams, ctx: &str) -> Result<()> {
    let space = h.space().clone();
    let omega_w = p.require("Omega_w", ctx)?;
    for site in 0..2 {
        h.add_closed(
            &format!("omega_w_site{}", site + 1),
            transition_operator(&space, site, G1, G0)?,
            DriveCoefficient::constant(omega_w),
        )?;
    }
    Ok(())
}

fn pump_11(h: &mut HamiltonianSpec, p: &PhysicalParams, ctx: &str) -> Result<()> {
    let space = h.space().clone();
    let omega = p.require("Omega", ctx)?;
    let op = pair_transition(&space, [G1, G1], [R, G1])? + pair_transition(&space, [G1, G1], [G1, R])?;
    h.add_closed("pump_11", op, DriveCoefficient::constant(omega))
}

fn intermediate(h: &mut HamiltonianSpec, p: &PhysicalParams, ctx: &str) -> Result<()> {
    let space = h.space().clone();
    let omega = p.require("Omega", ctx)?;
    let omega_s = p.require("Omega_s", ctx)?;
    pump_11(h, p, ctx)?;
    let t0 = DressedState::T0.on(&space)?;
    let s0 = DressedState::S0.on(&space)?;
    let e_plus = DressedState::EPlus.on(&space)?;
    let e_minus = DressedState::EMinus.on(&space)?;
    let k01 = StateVector::basis(&space, &[G0, G1])?;
    let k10 = StateVector::basis(&space, &[G1, G0])?;
    let c = omega * FRAC_1_SQRT_2;
    let from_01 = Operator::outer(&k01, &t0)? - Operator::outer(&k01, &s0)?;
    let from_10 = Operator::outer(&k10, &t0)? + Operator::outer(&k10, &s0)?;
    h.add_closed("omega_01", from_01, DriveCoefficient::constant(c))?;
    h.add_closed("omega_10", from_10, DriveCoefficient::constant(c))?;
    h.add_closed("dressing_t0", Operator::outer(&t0, &e_minus)?, DriveCoefficient::constant(omega_s))?;
    h.add_closed("dressing_s0", Operator::outer(&s0, &e_plus)?, DriveCoefficient::constant(-omega_s))
}

/// Both atoms driven on |1> <-> |r> at detuning Δ; the doubly excited
/// manifold is reached by a two-photon resonance when 2Δ = √2 J.
///
/// The single-atom light shift Ω_s²/Δ is cancelled per atom with
/// `stark_single/2 · (|1><1| - |0><0|)` (default Ω_s²/Δ), leaving all four
/// computational states and the resonant pair state degenerate;
/// `stark_pair` adds a residual shift on |11>.
fn antiblockade(h: &mut HamiltonianSpec, p: &PhysicalParams, ctx: &str) -> Result<()> {
    let space = h.space().clone();
    let omega_s = p.require("Omega_s", ctx)?;
    let delta = p.require("Delta", ctx)?;
    let j = p.require("J", ctx)?;
    if delta == 0.0 {
        return Err(Error::InvalidParameter {
            param: "Delta".into(),
            reason: "antiblockade drive needs a nonzero detuning".into(),
        });
    }
    for site in 0..2 {
        h.add_closed(
            &format!("drive_site{}", site + 1),
            transition_operator(&space, site, R, G1)?,
            DriveCoefficient::oscillating(omega_s, -delta, 0.0),
        )?;
    }
    h.add_closed("exchange", exchange_operator(&space)?, DriveCoefficient::constant(j))?;
    let single = p.stark_single.unwrap_or(omega_s * omega_s / delta);
    for site in 0..2 {
        let z = transition_operator(&space, site, G1, G1)? - transition_operator(&space, site, G0, G0)?;
        h.add_hermitian(&format!("stark_site{}", site + 1), z, 0.5 * single)?;
    }
    if let Some(pair) = p.stark_pair {
        h.add_hermitian("stark_pair", pair_projector(&space, [G1, G1])?, pair)?;
    }
    Ok(())
}

pub(crate) fn pair_transition(space: &Arc<HilbertSpace>, to: [Level; 2], from: [Level; 2]) -> Result<Operator> {
    Operator::basis_transition(space, &to, &from)
}

pub(crate) fn pair_projector(space: &Arc<HilbertSpace>, state: [Level; 2]) -> Result<Operator> {
    Operator::basis_transition(space, &state, &state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::mhz;
    use crate::quantum::C64;
    use std::f64::consts::SQRT_2;

    fn fig2() -> PhysicalParams {
        let j = mhz(50.0);
        PhysicalParams::new()
            .with("Omega", mhz(0.02))
            .with("Omega_s", mhz(1.0))
            .with("J", j)
            .with("Delta", SQRT_2 * j)
    }

    fn all_params() -> PhysicalParams {
        fig2()
            .with("delta_defect", mhz(8.5))
            .with("U_vdw", mhz(50.0))
            .with("Omega_w", mhz(0.005))
            .with("Omega_p", 1.354)
            .with("Gamma", 38.93)
    }

    #[test]
    fn exchange_elements() {
        let p = fig2();
        let h = build_hamiltonian(ModelVariant::FullSrp, &p).unwrap().evaluate(0.0);
        let j = p.j.unwrap();
        assert_eq!(h.element(&[R, R], &[P1, P2]).unwrap(), C64::new(j, 0.0));
        assert_eq!(h.element(&[R, R], &[P2, P1]).unwrap(), C64::new(j, 0.0));
    }

    #[test]
    fn blue_phase_on_second_atom() {
        let p = fig2();
        let h = build_hamiltonian(ModelVariant::FullSrp, &p).unwrap();
        let b1 = h.term("blue_site1").unwrap().coefficient.eval(0.0);
        let b2 = h.term("blue_site2").unwrap().coefficient.eval(0.0);
        let omega_b = p.omega_s.unwrap();
        assert!((b1 - C64::new(omega_b, 0.0)).norm() < 1e-12);
        assert!((b2 - C64::new(-omega_b, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn effective_srp_couplings() {
        let p = fig2();
        let h = build_hamiltonian(ModelVariant::EffectiveSrp, &p).unwrap().evaluate(0.0);
        let om = C64::new(p.omega.unwrap(), 0.0);
        assert_eq!(h.element(&[R, G1], &[G1, G1]).unwrap(), om);
        assert_eq!(h.element(&[G1, R], &[G1, G1]).unwrap(), om);
        let ground = [[G0, G0], [G0, G1], [G1, G0], [G1, G1]];
        for a in &ground {
            for b in &ground {
                assert_eq!(h.element(a, b).unwrap(), C64::new(0.0, 0.0));
            }
        }
        assert_eq!(h.nnz(), 4);
    }

    #[test]
    fn every_variant_hermitian() {
        let p = all_params();
        for v in ModelVariant::ALL {
            let h = build_hamiltonian(v, &p).unwrap();
            for t in [0.0, 0.37, 5.0] {
                assert!(h.evaluate(t).hermiticity_defect() < 1e-12, "{v} at t={t}");
            }
        }
    }

    #[test]
    fn missing_parameter_named() {
        let err = build_hamiltonian(ModelVariant::FullSrp, &PhysicalParams::new().with("Omega", 1.0)).unwrap_err();
        assert!(matches!(err, Error::MissingParameter { .. }));
        let err = build_hamiltonian(ModelVariant::VdwComparison, &fig2()).unwrap_err();
        match err {
            Error::MissingParameter { param, .. } => assert_eq!(param, "U_vdw"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn defect_zero_equals_full() {
        let p = fig2().with("delta_defect", 0.0);
        let a = build_hamiltonian(ModelVariant::FullSrp, &p).unwrap();
        let b = build_hamiltonian(ModelVariant::FullWithDefect, &p).unwrap();
        for t in [0.0, 0.123, 2.5] {
            assert_eq!(a.evaluate(t), b.evaluate(t));
        }
    }

    #[test]
    fn defect_block_eigenvalues() {
        let p = fig2().with("delta_defect", mhz(8.5));
        let (j, d) = (p.j.unwrap(), p.delta_defect.unwrap());
        let h = build_hamiltonian(ModelVariant::FullWithDefect, &p).unwrap().static_part();
        let space = h.space().clone();
        // symmetric pair sector {|rr>, (|p'p''> + |p''p'>)/√2}
        let rr = StateVector::basis(&space, &[R, R]).unwrap();
        let sym = StateVector::superposition(
            &space,
            &[(C64::new(1.0, 0.0), &[P1, P2]), (C64::new(1.0, 0.0), &[P2, P1])],
        )
        .unwrap();
        let basis = [&rr, &sym];
        let mut block = nalgebra::Matrix2::<f64>::zeros();
        for (a, va) in basis.iter().enumerate() {
            for (b, vb) in basis.iter().enumerate() {
                let hv = h.apply(vb).unwrap();
                block[(a, b)] = va.data().dotc(&hv).re;
            }
        }
        let mut eig: Vec<f64> = block.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let root = (8.0 * j * j + d * d).sqrt();
        assert!((eig[0] - (d - root) / 2.0).abs() < 1e-9);
        assert!((eig[1] - (d + root) / 2.0).abs() < 1e-9);
        // antisymmetric pair combination decouples from |rr>
        let anti = StateVector::superposition(
            &space,
            &[(C64::new(1.0, 0.0), &[P1, P2]), (C64::new(-1.0, 0.0), &[P2, P1])],
        )
        .unwrap();
        assert!(rr.data().dotc(&h.apply(&anti).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn omega_zero_decouples_frozen_states() {
        let p = fig2().with("Omega", 0.0);
        let h = build_hamiltonian(ModelVariant::FullSrp, &p).unwrap();
        for t in [0.0, 0.01, 0.3, 7.7] {
            let ht = h.evaluate(t);
            for (to, from) in [
                ([R, G1], [G1, G1]),
                ([G1, R], [G1, G1]),
                ([G0, R], [G0, G1]),
                ([R, G0], [G1, G0]),
            ] {
                assert_eq!(ht.element(&to, &from).unwrap(), C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn antiblockade_two_photon_resonance() {
        // Δ/2π = 25√2 MHz, J/2π = 50 MHz gives 2Δ = √2 J
        let delta = mhz(25.0 * SQRT_2);
        let j = mhz(50.0);
        assert!((2.0 * delta - SQRT_2 * j).abs() < 1e-9);
        let p = PhysicalParams::new()
            .with("Omega_s", mhz(2f64.powf(-0.25)))
            .with("Delta", delta)
            .with("J", j);
        let h = build_hamiltonian(ModelVariant::Antiblockade, &p).unwrap();
        // Ω_s²/Δ reproduces the pumping gate's 2π×0.02 MHz scale
        let om = p.omega_s.unwrap();
        assert!((om * om / delta - mhz(0.02)).abs() < 1e-12);
        assert!(h.evaluate(1.3).is_hermitian(1e-12));
    }

    #[test]
    fn exchange_dressed_energies() {
        let space = ModelVariant::FullSrp.space().unwrap();
        let j = mhz(50.0);
        let hdd = exchange_operator(&space).unwrap();
        let hdd = &hdd + &hdd.adjoint();
        let hdd = hdd.scale_re(j);
        for (state, sign) in [(DressedState::EPlus, 1.0), (DressedState::EMinus, -1.0)] {
            let v = state.on(&space).unwrap();
            let e = v.data().dotc(&hdd.apply(&v).unwrap());
            assert!((e.re - sign * SQRT_2 * j).abs() < 1e-9 && e.im.abs() < 1e-12);
        }
    }

    #[test]
    fn dressing_block_eigenstates() {
        // with Ω = 0 only the Ω_s block of the intermediate model survives
        let p = fig2().with("Omega", 0.0);
        let h = build_hamiltonian(ModelVariant::IntermediateEffective, &p).unwrap().evaluate(0.0);
        let space = h.space().clone();
        let omega_s = p.omega_s.unwrap();
        for state in [DressedState::AlphaPlus, DressedState::AlphaMinus, DressedState::BetaPlus, DressedState::BetaMinus] {
            let v = state.on(&space).unwrap();
            let hv = h.apply(&v).unwrap();
            let e = v.data().dotc(&hv);
            let residual = (&hv - v.data() * e).norm();
            assert!(residual < 1e-10, "{}", state.name());
            assert!((e.norm() - omega_s).abs() < 1e-9);
        }
    }

    proptest::proptest! {
        #[test]
        fn hermitian_at_random_times(t in 0.0f64..50.0) {
            let p = all_params();
            for v in ModelVariant::ALL {
                let h = build_hamiltonian(v, &p).unwrap();
                proptest::prop_assert!(h.evaluate(t).hermiticity_defect() < 1e-12);
            }
        }
    }
}
