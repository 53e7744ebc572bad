use approx::assert_abs_diff_eq;
use cfsupp::channels::{
    amp_channel, bell_phi_plus, depolarizing, loss_channel, noisy_bell, qubit_damping, thermal_channel, BosonicNoise,
    DampingKind, Factor, KrausChannel,
};
use cfsupp::fock::{coherent_ket, max_abs};
use cfsupp::hybrid::{min_eigenvalue, HybridLayout};
use cfsupp::{CMat, Complex64, FockOperator, FockSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn random_state(dim: usize, rng: &mut ChaCha20Rng) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

fn mode(ch: &KrausChannel, s: FockSpace, rho: &CMat) -> CMat {
    ch.apply_to(rho, HybridLayout::new(s, 0).unwrap(), Factor::Mode)
        .unwrap()
}

fn by_hand(kraus: &[CMat], rho: &CMat) -> CMat {
    kraus
        .iter()
        .map(|k| k * rho * k.adjoint())
        .fold(CMat::zeros(2, 2), |a, b| a + b)
}

#[test]
fn single_photon_loss() {
    let s = FockSpace::new(4).unwrap();
    let one = s.projector(&s.ket(1).unwrap()).unwrap();
    let out = mode(&loss_channel(0.05, s, 3).unwrap(), s, &one);
    assert_abs_diff_eq!(out[(0, 0)].re, 0.05, epsilon = 1e-15);
    assert_abs_diff_eq!(out[(1, 1)].re, 0.95, epsilon = 1e-15);
    assert_abs_diff_eq!(out.trace().re, 1.0, epsilon = 1e-15);
}

#[test]
fn loss_keeps_coherent_states_coherent() {
    let s = FockSpace::new(40).unwrap();
    let k = coherent_ket(s, c(1.0)).unwrap();
    let out = mode(&loss_channel(0.1, s, 12).unwrap(), s, &(&k * k.adjoint()));
    let target = coherent_ket(s, c(0.9f64.sqrt())).unwrap();
    let f = target.dotc(&(&out * &target)).re;
    assert_abs_diff_eq!(f, 1.0, epsilon = 1e-10);
}

#[test]
fn amplifier_on_vacuum() {
    let s = FockSpace::new(60).unwrap();
    let vac = s.projector(&s.vacuum()).unwrap();
    let out = mode(&amp_channel(1.025, s, 12).unwrap(), s, &vac);
    let n = FockOperator::number(s).expectation(&out).unwrap().re;
    assert_abs_diff_eq!(n, 0.025, epsilon = 1e-9);
}

#[test]
fn parameter_maps() {
    let gl = BosonicNoise::Thermal { eta: 0.05, nbar: 0.5 }.gain_loss().unwrap();
    assert_abs_diff_eq!(gl.gain, 1.025, epsilon = 1e-15);
    assert_abs_diff_eq!(gl.loss, 0.075 / 1.025, epsilon = 1e-15);
    assert_abs_diff_eq!(gl.loss, 0.0731707, epsilon = 1e-7);

    let gl = BosonicNoise::Gdn { eta: 0.05 }.gain_loss().unwrap();
    assert_abs_diff_eq!(gl.gain, 20.0, epsilon = 1e-12);
    assert_abs_diff_eq!(gl.loss, 0.05, epsilon = 1e-15);
}

#[test]
fn zero_temperature_thermal_is_loss() {
    let s = FockSpace::new(20).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let mut rho = CMat::zeros(20, 20);
    rho.view_mut((0, 0), (8, 8)).copy_from(&random_state(8, &mut rng));
    let a = mode(&thermal_channel(0.05, 0.0, s).unwrap(), s, &rho);
    let b = mode(&loss_channel(0.05, s, 12).unwrap(), s, &rho);
    assert!(max_abs(&(a - b)) < 1e-10);
}

#[test]
fn composite_damping_is_amplitude_then_phase_in_either_order() {
    let p: f64 = 0.3;
    let sp = c(p.sqrt());
    let k0 = CMat::from_diagonal(&cfsupp::CVec::from_vec(vec![c(1.0), c((1.0 - p).sqrt())]));
    let amp = [k0.clone(), CMat::from_row_slice(2, 2, &[c(0.0), sp, c(0.0), c(0.0)])];
    let ph = [k0, CMat::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), sp])];
    let composite = qubit_damping(p, DampingKind::Composite).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for _ in 0..20 {
        let rho = random_state(2, &mut rng);
        let got = composite.apply_register(&rho, 0, 1).unwrap();
        let amp_first = by_hand(&ph, &by_hand(&amp, &rho));
        let ph_first = by_hand(&amp, &by_hand(&ph, &rho));
        assert!(max_abs(&(&got - amp_first)) < 1e-12);
        assert!(max_abs(&(&got - ph_first)) < 1e-12);
    }
}

#[test]
fn zero_strength_qubit_channels_are_identity() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let rho = random_state(2, &mut rng);
    for kind in [DampingKind::Amplitude, DampingKind::Phase, DampingKind::Composite] {
        let out = qubit_damping(0.0, kind).unwrap().apply_register(&rho, 0, 1).unwrap();
        assert!(max_abs(&(out - &rho)) < 1e-15);
    }
    let out = depolarizing(0.0).unwrap().apply_register(&rho, 0, 1).unwrap();
    assert!(max_abs(&(out - &rho)) < 1e-15);
}

#[test]
fn full_depolarizing_mixes() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let rho = random_state(2, &mut rng);
    let out = depolarizing(0.75).unwrap().apply_register(&rho, 0, 1).unwrap();
    assert!(max_abs(&(out - CMat::identity(2, 2) * c(0.5))) < 1e-15);
}

#[test]
fn noisy_bell_pair() {
    assert!(max_abs(&(noisy_bell(0.0).unwrap() - bell_phi_plus())) < 1e-15);
    for p in [0.05, 0.3, 0.7, 1.0] {
        let ch = qubit_damping(p, DampingKind::Composite).unwrap();
        let brute = ch
            .apply_register(&ch.apply_register(&bell_phi_plus(), 0, 2).unwrap(), 1, 2)
            .unwrap();
        let m = noisy_bell(p).unwrap();
        assert!(max_abs(&(&m - brute)) < 1e-12);
        assert_abs_diff_eq!(m.trace().re, 1.0, epsilon = 1e-15);
        assert!(min_eigenvalue(&m) > -1e-12);
    }
}

#[test]
fn channels_are_trace_preserving_on_safe_levels() {
    let s = FockSpace::new(60).unwrap();
    for noise in [
        BosonicNoise::Loss { eta: 0.1 },
        BosonicNoise::Thermal { eta: 0.05, nbar: 0.5 },
        BosonicNoise::Thermal { eta: 0.1, nbar: 1.0 },
    ] {
        let ch = noise.channel(s).unwrap();
        assert!(ch.cptp_defect() < 1e-8, "{noise:?}: {}", ch.cptp_defect());
    }
}
