use proptest::prelude::*;
use semiclassical::field::{spectral_forward, spectral_inverse};
use semiclassical::norms::{norm, young_convolution_check, NormKind};
use semiclassical::potentials::{mollify_v1, Mode};
use semiclassical::schrodinger::{coherent_state, Envelope, PhaseSpaceGaussian};
use semiclassical::wigner::{smooth, wigner_mixed, wigner_pure};
use semiclassical::{
    derive_eta, Complex64, FourierPotential, GridSpec, PhaseSpaceField, SemiclassicalParams,
    Wavefunction,
};

fn blob_field(grid: &GridSpec, blobs: &[(f64, f64, f64, f64, f64)]) -> PhaseSpaceField {
    let axes = grid.axes().to_vec();
    let parts: Vec<PhaseSpaceGaussian> = blobs
        .iter()
        .map(|&(x, k, sx, sk, _)| PhaseSpaceGaussian::mixed(&[x, k], &[sx, sk]).unwrap())
        .collect();
    PhaseSpaceField::from_fn(grid.clone(), |z| {
        parts
            .iter()
            .zip(blobs)
            .map(|(g, b)| b.4 * g.eval_periodic(z, &axes))
            .sum()
    })
    .unwrap()
}

fn blobs() -> impl Strategy<Value = Vec<(f64, f64, f64, f64, f64)>> {
    prop::collection::vec(
        (
            -2.0..2.0f64,
            -2.0..2.0f64,
            0.6..1.5f64,
            0.6..1.5f64,
            -1.0..1.0f64,
        ),
        1..4,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fourier_round_trip(b in blobs()) {
        let g = GridSpec::default_1d(64).unwrap();
        let w = blob_field(&g, &b);
        let back = spectral_inverse(&spectral_forward(&w).unwrap()).unwrap();
        let scale = w.max_abs().max(1e-300);
        for (a, c) in w.values().iter().zip(back.values()) {
            prop_assert!((a - c).abs() < 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn parseval(b in blobs()) {
        let g = GridSpec::default_1d(64).unwrap();
        let w = blob_field(&g, &b);
        let l2 = norm(&w, NormKind::L2).unwrap();
        prop_assert!((norm(&w, NormKind::Sobolev(0)).unwrap() - l2).abs() <= 1e-12 * l2.max(1e-300));
        let x02 = norm(&w, NormKind::Xmp { m: 0.0, p: 2.0 }).unwrap();
        prop_assert!((x02 - l2).abs() <= 1e-12 * l2.max(1e-300));
    }

    #[test]
    fn norms_are_homogeneous(b in blobs(), c in -5.0..5.0f64, m in -2i32..3) {
        let g = GridSpec::default_1d(64).unwrap();
        let w = blob_field(&g, &b);
        let a = norm(&w, NormKind::Sobolev(m)).unwrap();
        let s = norm(&w.scaled(c), NormKind::Sobolev(m)).unwrap();
        prop_assert!((s - c.abs() * a).abs() <= 1e-12 * s.max(1e-300));
    }

    #[test]
    fn sobolev_scale_is_ordered(b in blobs()) {
        let g = GridSpec::default_1d(64).unwrap();
        let w = blob_field(&g, &b);
        let v: Vec<f64> = (-2..=0).map(|m| norm(&w, NormKind::Sobolev(m)).unwrap()).collect();
        prop_assert!(v[0] <= v[1] && v[1] <= v[2]);
    }

    #[test]
    fn young_inequality_holds(b in blobs(), kernel in prop::collection::vec(-3.0..3.0f64, 1..17)) {
        let g = GridSpec::default_1d(64).unwrap();
        let w = blob_field(&g, &b);
        for kind in [NormKind::L2, NormKind::Sobolev(-1), NormKind::Sobolev(1), NormKind::Sobolev(2)] {
            let (lhs, rhs) = young_convolution_check(&kernel, &w, kind).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-10), "{:?}: {} > {}", kind, lhs, rhs);
        }
    }

    #[test]
    fn smoothing_keeps_mass_and_shrinks_l2(b in blobs(), eps in 0.01..0.5f64) {
        let g = GridSpec::default_1d(64).unwrap();
        let w = blob_field(&g, &b);
        let p = SemiclassicalParams::husimi(1, eps).unwrap();
        let ws = smooth(&w, &p).unwrap();
        prop_assert!((ws.mass() - w.mass()).abs() < 1e-12);
        prop_assert!(ws.l2_norm() <= w.l2_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn eta_grows_with_epsilon(e1 in 1e-4..0.5f64, e2 in 1e-4..0.5f64, sx in 0.3..3.0f64, sk in 0.3..3.0f64) {
        let (a, b) = (e1.min(e2), e1.max(e2));
        prop_assert!(derive_eta(1, a, sx, sk).unwrap() <= derive_eta(1, b, sx, sk).unwrap());
        let p = SemiclassicalParams::new(1, a, sx, sk).unwrap();
        prop_assert!(p.eta_prime > p.eta && p.eta >= a);
    }

    #[test]
    fn mollifiers_compose(a in 0.0..0.2f64, b in 0.0..0.2f64, x in -3.0..3.0f64, s in 0.2..3.0f64) {
        let v = FourierPotential::atomic(1, vec![Mode::new_1d(s, 0.4, 0.1), Mode::new_1d(-s, 0.4, -0.1), Mode::new_1d(2.0 * s, 0.2, 0.0), Mode::new_1d(-2.0 * s, 0.2, 0.0)]).unwrap();
        let twice = mollify_v1(&mollify_v1(&v, a).unwrap(), b).unwrap();
        let once = mollify_v1(&v, a + b).unwrap();
        prop_assert!((twice.value(&[x]) - once.value(&[x])).abs() < 1e-13);
    }

    #[test]
    fn wigner_is_real_with_unit_mass(x0 in -1.0..1.0f64, k0 in -0.5..0.5f64, eps in 0.05..0.2f64) {
        let g = GridSpec::new(1, (-4.0, 4.0), 512, (-2.0, 2.0), 128).unwrap();
        let p = SemiclassicalParams::husimi(1, eps).unwrap();
        let u = coherent_state(&[x0], &[k0], &p, Envelope::Gaussian, &g.spatial()).unwrap();
        let w = wigner_pure(&u, &p, &g).unwrap();
        prop_assert!((w.mass() - 1.0).abs() < 1e-10);
        prop_assert!((w.l2_norm() - eps.powf(-0.5)).abs() < 1e-8 * eps.powf(-0.5));
    }
}

#[test]
fn husimi_of_cat_state_is_nonnegative() {
    let g = GridSpec::new(1, (-2.0, 2.0), 256, (-2.0, 2.0), 256).unwrap();
    let eps = 0.05;
    let p = SemiclassicalParams::husimi(1, eps).unwrap();
    let a = coherent_state(&[-0.6], &[0.0], &p, Envelope::Gaussian, &g.spatial()).unwrap();
    let b = coherent_state(&[0.6], &[0.3], &p, Envelope::Gaussian, &g.spatial()).unwrap();
    let cat: Vec<Complex64> = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x + y)
        .collect();
    let cat = Wavefunction::new(g.spatial(), cat)
        .unwrap()
        .normalized()
        .unwrap();
    let w = wigner_pure(&cat, &p, &g).unwrap();
    assert!(
        w.min() < -0.1 * w.max(),
        "interference fringes should be negative"
    );
    let h = smooth(&w, &p).unwrap();
    assert!(h.min() > -1e-10 * h.max(), "{}", h.min());
    // narrower smoothing than critical leaves negative values
    let sub = SemiclassicalParams::new(1, eps, 0.5, 0.5).unwrap();
    assert!(smooth(&w, &sub).unwrap().min() < 0.0);
}

#[test]
fn mixture_is_weighted_sum() {
    use semiclassical::schrodinger::MixedStateEnsemble;
    let g = GridSpec::new(1, (-2.0, 2.0), 128, (-2.0, 2.0), 128).unwrap();
    let p = SemiclassicalParams::husimi(1, 0.1).unwrap();
    let a = coherent_state(&[-0.5], &[0.0], &p, Envelope::Gaussian, &g.spatial()).unwrap();
    let b = coherent_state(&[0.5], &[0.2], &p, Envelope::Gaussian, &g.spatial()).unwrap();
    let ens = MixedStateEnsemble::new(vec![(0.25, a.clone()), (0.75, b.clone())]).unwrap();
    let mixed = wigner_mixed(&ens, &p, &g).unwrap();
    let wa = wigner_pure(&a, &p, &g).unwrap();
    let wb = wigner_pure(&b, &p, &g).unwrap();
    let direct = wa.scaled(0.25).add(&wb.scaled(0.75)).unwrap();
    assert!(mixed.sub(&direct).unwrap().max_abs() < 1e-12 * direct.max_abs());
}
