use std::f64::consts::TAU;

use nanophonon::dynamics::{
    evolve, make_dissipators, propagate_columns, thermal_state, DissipationConfig, Dissipator, EvolveOptions, Frame,
    PulseSchedule, State,
};
use nanophonon::operators::{c, destroy, ket_bra, kron, nv, Mat, TimeOp, C64};
use nanophonon::{DriveConfig, HilbertSpace, Path, StepControl};
use proptest::prelude::*;

const GAMMA: f64 = TAU * 15e6;

fn opts(n_samples: usize) -> EvolveOptions {
    EvolveOptions {
        n_samples,
        leak_tol: 1.0,
        ..EvolveOptions::default()
    }
}

fn density(hs: &HilbertSpace, levels: &[usize], n: usize) -> State {
    let i = hs.index(levels, n);
    State::Density(ket_bra(hs.dim(), i, i))
}

#[test]
fn free_evolution_leaves_state_unchanged() {
    let hs = HilbertSpace::new(2, 2, 4).unwrap();
    let mut rho = Mat::zeros(hs.dim(), hs.dim());
    let (a, b) = (hs.index(&[0, 1], 1), hs.index(&[1, 0], 2));
    rho[(a, a)] = c(0.5);
    rho[(b, b)] = c(0.5);
    rho[(a, b)] = C64::new(0.2, 0.3);
    rho[(b, a)] = C64::new(0.2, -0.3);
    let s0 = State::Density(rho.clone());
    let traj = evolve(&s0, &TimeOp::new(), &[], &PulseSchedule::empty(), 1e-6, &hs, &opts(5)).unwrap();
    assert!((traj.final_state.density() - rho).norm() < 1e-14);
}

#[test]
fn collective_channel_decays_at_twice_gamma() {
    let hs = HilbertSpace::new(3, 1, 4).unwrap();
    let down = ket_bra(3, nv::GP, nv::THIRD) + ket_bra(3, nv::GM, nv::THIRD);
    let l = Dissipator::constant(hs.nv_op(0, &down), GAMMA);
    let t = 20e-9;
    let s0 = density(&hs, &[nv::THIRD], 0);
    let traj = evolve(&s0, &TimeOp::new(), &[l], &PulseSchedule::empty(), t, &hs, &opts(11)).unwrap();
    for (i, &ti) in traj.times.iter().enumerate() {
        let pe = traj.population(i, "x").unwrap();
        let pp = traj.population(i, "p").unwrap();
        let pm = traj.population(i, "m").unwrap();
        assert!((pe - (-2.0 * GAMMA * ti).exp()).abs() < 1e-8, "t = {ti}: {pe}");
        assert!((pp - pm).abs() < 1e-12);
        assert!((pe + pp + pm - 1.0).abs() < 1e-9);
    }
}

#[test]
fn single_phonon_decays_at_mode_rate() {
    let hs = HilbertSpace::new(2, 1, 4).unwrap();
    let kappa = 2e6;
    let l = Dissipator::constant(hs.destroy(), kappa);
    let t = 1e-6;
    let traj = evolve(
        &density(&hs, &[0], 1),
        &TimeOp::new(),
        &[l],
        &PulseSchedule::empty(),
        t,
        &hs,
        &opts(11),
    )
    .unwrap();
    for (i, &ti) in traj.times.iter().enumerate() {
        assert!((traj.n_mean[i] - (-kappa * ti).exp()).abs() < 1e-8);
    }
}

#[test]
fn thermal_state_is_stationary_under_mode_bath() {
    let f = 40;
    let hs = HilbertSpace::new(2, 1, f).unwrap();
    let (kappa, n_th) = (1e6, 0.5);
    let a = hs.destroy();
    let ls = [
        Dissipator::constant(a.adjoint(), kappa * n_th),
        Dissipator::constant(a.clone(), kappa * (n_th + 1.0)),
    ];
    let nv0 = ket_bra(2, 0, 0);
    let rho = kron(&nv0, &thermal_state(f, n_th));
    let traj = evolve(
        &State::Density(rho.clone()),
        &TimeOp::new(),
        &ls,
        &PulseSchedule::empty(),
        3.0 / kappa,
        &hs,
        &opts(3),
    )
    .unwrap();
    // Truncation only perturbs the top level, whose weight is (1/3)^39.
    assert!((traj.final_state.density() - rho).norm() < 1e-10);
    assert!((traj.n_mean[2] - n_th).abs() < 1e-10);
}

#[test]
fn infinite_q_disables_mode_relaxation() {
    let d = DriveConfig::design(2e-3, TAU * 1e12, 0.05, 0.05, 1.0, Path::DoublePath, 2, true).unwrap();
    let hs = HilbertSpace::new(3, 2, 4).unwrap();
    let cfg = DissipationConfig::new(GAMMA, f64::INFINITY, 0.3);
    let ls = make_dissipators(&d, &hs, &cfg, Frame::Lab).unwrap();
    let a = hs.destroy();
    let mode: Vec<_> = ls
        .iter()
        .filter(|l| {
            let m = l.op.at(0.0);
            (&m - &a).norm() < 1e-12 || (&m - a.adjoint()).norm() < 1e-12
        })
        .collect();
    assert_eq!(mode.len(), 2);
    assert!(mode.iter().all(|l| l.rate == 0.0));

    let finite = make_dissipators(&d, &hs, &DissipationConfig::new(GAMMA, 1e4, 0.3), Frame::Lab).unwrap();
    let rates: Vec<f64> = finite.iter().filter(|l| l.rate != GAMMA).map(|l| l.rate).collect();
    let base = d.nu / 1e4;
    assert!(rates.iter().any(|r| (r - base * 0.3).abs() < 1e-6 * base));
    assert!(rates.iter().any(|r| (r - base * 1.3).abs() < 1e-6 * base));
}

#[test]
fn effective_decay_scales_with_detuning_ratio_squared() {
    // Halving kappa1 halves the excited-state admixture amplitude, so the
    // induced decay rate drops fourfold up to higher orders in kappa1.
    let hs = HilbertSpace::new(2, 1, 4).unwrap();
    let rate = |k1: f64| {
        let d = DriveConfig::design(2e-3, TAU * 1e12, k1, 0.05, 1.0, Path::DoublePath, 1, true).unwrap();
        let ls = make_dissipators(
            &d,
            &hs,
            &DissipationConfig::new(GAMMA, f64::INFINITY, 0.0),
            Frame::EffectiveI,
        )
        .unwrap();
        ls.iter()
            .filter(|l| l.rate == GAMMA)
            .map(|l| l.op.terms.iter().map(|(m, _)| m.norm_squared()).sum::<f64>() * l.rate)
            .sum::<f64>()
    };
    let r = rate(0.05) / rate(0.025);
    assert!((r - 4.0).abs() < 0.1, "{r}");
}

fn hermitian(n: usize, re: &[f64], im: &[f64]) -> Mat {
    let mut h = Mat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        h[(i, i)] = c(re[k]);
        k += 1;
        for j in i + 1..n {
            h[(i, j)] = C64::new(re[k], im[k]);
            h[(j, i)] = C64::new(re[k], -im[k]);
            k += 1;
        }
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ket_and_density_runs_agree(
        re in prop::collection::vec(-1.0f64..1.0, 36),
        im in prop::collection::vec(-1.0f64..1.0, 36),
        w in -1.0f64..1.0,
    ) {
        let hs = HilbertSpace::new(2, 1, 4).unwrap();
        let n = hs.dim();
        let mut h = TimeOp::new();
        h.add(hermitian(n, &re, &im) * c(TAU * 1e6), 0.0);
        let x = kron(&nv::sx(2), &destroy(4)) * c(TAU * 3e5);
        h.add_hc(x, TAU * 1e6 * w);
        let mut ket = nalgebra::DVector::zeros(n);
        ket[hs.index(&[0], 0)] = C64::new(0.6, 0.0);
        ket[hs.index(&[1], 1)] = C64::new(0.0, 0.8);
        let o = EvolveOptions { control: StepControl::tight(), ..opts(3) };
        let t = 0.7e-6;
        let a = evolve(&State::Ket(ket.clone()), &h, &[], &PulseSchedule::empty(), t, &hs, &o).unwrap();
        let b = evolve(&State::Density(&ket * ket.adjoint()), &h, &[], &PulseSchedule::empty(), t, &hs, &o).unwrap();
        prop_assert!(a.trace_drift < 1e-9 && b.trace_drift < 1e-9);
        prop_assert!((a.final_state.density() - b.final_state.density()).norm() < 1e-8);

        let u = propagate_columns(&h, &hs.identity(), t, &StepControl::tight()).unwrap();
        prop_assert!((u.adjoint() * &u - hs.identity()).norm() < 1e-8);
        let via_u = &u * &ket;
        prop_assert!((&via_u * via_u.adjoint() - a.final_state.density()).norm() < 1e-8);
    }

    #[test]
    fn dissipative_runs_stay_physical(
        rates in prop::collection::vec(0.0f64..3e6, 3),
        n0 in 0usize..3,
    ) {
        let hs = HilbertSpace::new(3, 1, 4).unwrap();
        let ls = vec![
            Dissipator::constant(hs.nv_op(0, &ket_bra(3, nv::GP, nv::THIRD)), rates[0]),
            Dissipator::constant(hs.nv_op(0, &ket_bra(3, nv::GM, nv::THIRD)), rates[1]),
            Dissipator::constant(hs.destroy(), rates[2]),
        ];
        let mut h = TimeOp::new();
        h.add_hc(hs.nv_op(0, &ket_bra(3, nv::THIRD, nv::GP)) * c(TAU * 2e5), 0.0);
        let s0 = density(&hs, &[nv::GP], n0);
        let traj = evolve(&s0, &h, &ls, &PulseSchedule::empty(), 1e-6, &hs, &opts(5)).unwrap();
        let rho = traj.final_state.density();
        prop_assert!(traj.trace_drift < 1e-8);
        prop_assert!((&rho - rho.adjoint()).norm() < 1e-10);
        let min = ((&rho + rho.adjoint()) * c(0.5)).symmetric_eigen().eigenvalues.min();
        prop_assert!(min > -1e-9, "{}", min);
        // Phonon number only decreases without pumping.
        prop_assert!(traj.n_mean.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }
}
