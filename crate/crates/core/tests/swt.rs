use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavecast::swt::{dmey, iswt_reconstruct, meyer_auxiliary, swt_decompose, swt_decompose_padded, FilterPair};

/// Published 62-tap discrete Meyer lowpass (reconstruction order: the
/// trailing zero sits at the end).
const REFERENCE_DMEY: [f64; 62] = [
    -1.009999956941423e-12,
    8.519459636796214e-9,
    -1.11194495260295e-8,
    -1.0798819539621958e-8,
    6.066975741351135e-8,
    -1.0866516536735883e-7,
    8.200680650386481e-8,
    1.1783004497663934e-7,
    -5.506340565252278e-7,
    1.1307947017916706e-6,
    -1.489549216497156e-6,
    7.367572885903746e-7,
    3.20544191334478e-6,
    -1.6312699734552807e-5,
    6.554305930575149e-5,
    -0.0006011502343516092,
    -0.002704672124643725,
    0.002202534100911002,
    0.006045814097323304,
    -0.006387718318497156,
    -0.011061496392513451,
    0.015270015130934803,
    0.017423434103729693,
    -0.03213079399021176,
    -0.024348745906078023,
    0.0637390243228016,
    0.030655091960824263,
    -0.13284520043559757,
    -0.035087555656258346,
    0.44459300275757724,
    0.7445855923188063,
    0.44459300275757724,
    -0.035087555656258346,
    -0.13284520043559757,
    0.030655091960824263,
    0.0637390243228016,
    -0.024348745906078023,
    -0.03213079399021176,
    0.017423434103729693,
    0.015270015130934803,
    -0.011061496392513451,
    -0.006387718318497156,
    0.006045814097323304,
    0.002202534100911002,
    -0.002704672124643725,
    -0.0006011502343516092,
    6.554305930575149e-5,
    -1.6312699734552807e-5,
    3.20544191334478e-6,
    7.367572885903746e-7,
    -1.489549216497156e-6,
    1.1307947017916706e-6,
    -5.506340565252278e-7,
    1.1783004497663934e-7,
    8.200680650386481e-8,
    -1.0866516536735883e-7,
    6.066975741351135e-8,
    -1.0798819539621958e-8,
    -1.11194495260295e-8,
    8.519459636796214e-9,
    -1.009999956941423e-12,
    0.0,
];

fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Circular convolution with the filter upsampled by explicit zero insertion.
fn dilated_filter(x: &[f64], taps: &[f64], center: usize, stride: usize) -> Vec<f64> {
    let mut up = vec![0.0; (taps.len() - 1) * stride + 1];
    for (k, &h) in taps.iter().enumerate() {
        up[k * stride] = h;
    }
    let n = x.len() as i64;
    let c = (center * stride) as i64;
    (0..n)
        .map(|i| {
            up.iter()
                .enumerate()
                .map(|(m, &h)| h * x[(i + c - m as i64).rem_euclid(n) as usize])
                .sum()
        })
        .collect()
}

fn naive_swt(x: &[f64], levels: usize, f: &FilterPair) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut approx = x.to_vec();
    let mut details = Vec::new();
    for j in 0..levels {
        details.push(dilated_filter(&approx, &f.highpass, f.center(), 1 << j));
        approx = dilated_filter(&approx, &f.lowpass, f.center(), 1 << j);
    }
    (approx, details)
}

/// Random orthonormal lowpass from a two-channel rotation lattice:
/// `[H; G] <- R(theta) [H; z^-2 G]`, starting from a single rotation.
fn random_orthonormal_filter(rng: &mut ChaCha8Rng) -> FilterPair {
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    let (mut h, mut g) = (vec![theta.cos(), theta.sin()], vec![-theta.sin(), theta.cos()]);
    for _ in 0..2 {
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let (c, s) = (theta.cos(), theta.sin());
        let len = h.len() + 2;
        let mut nh = vec![0.0; len];
        let mut ng = vec![0.0; len];
        for k in 0..h.len() {
            nh[k] += c * h[k];
            ng[k] -= s * h[k];
            nh[k + 2] += s * g[k];
            ng[k + 2] += c * g[k];
        }
        (h, g) = (nh, ng);
    }
    FilterPair::from_lowpass("lattice", h)
}

#[test]
fn matches_dilated_convolution_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let meyer = dmey().unwrap();
    let random = random_orthonormal_filter(&mut rng);
    for filters in [FilterPair::haar(), meyer, random] {
        for n in [32, 96, 256] {
            let x = random_signal(&mut rng, n);
            let levels = 5;
            let fast = swt_decompose(&x, levels, &filters).unwrap();
            let (approx, details) = naive_swt(&x, levels, &filters);
            assert!(max_diff(&fast.approx, &approx) < 1e-10, "{} n={n}", filters.name);
            for (a, b) in fast.details.iter().zip(&details) {
                assert!(max_diff(a, b) < 1e-10, "{} n={n}", filters.name);
            }
        }
    }
}

#[test]
fn lattice_filters_reconstruct() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..5 {
        let f = random_orthonormal_filter(&mut rng);
        let h = &f.lowpass;
        for m in 0..h.len() / 2 {
            let dot: f64 = h[..h.len() - 2 * m].iter().zip(&h[2 * m..]).map(|(a, b)| a * b).sum();
            assert!((dot - if m == 0 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        let x = random_signal(&mut rng, 128);
        let y = iswt_reconstruct(&swt_decompose(&x, 4, &f).unwrap(), &f).unwrap();
        assert!(max_diff(&x, &y) < 1e-12);
    }
}

#[test]
fn reconstruction_of_unpadded_lengths() {
    let f = dmey().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [1, 31, 100, 333, 1000] {
        let x = random_signal(&mut rng, n);
        let c = swt_decompose_padded(&x, 5, &f).unwrap();
        assert_eq!(c.padded_length() % 32, 0);
        let y = iswt_reconstruct(&c, &f).unwrap();
        assert_eq!(y.len(), n);
        assert!(max_diff(&x, &y) < 1e-6, "n={n}");
    }
}

#[test]
fn energy_is_preserved_across_levels() {
    // |H|^2 + |G|^2 = 2 at every frequency, so each level splits twice the
    // energy of its input
    let f = dmey().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = random_signal(&mut rng, 512);
    let c = swt_decompose(&x, 5, &f).unwrap();
    let e = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
    let mut total = e(&c.approx) / 32.0;
    for (j, d) in c.details.iter().enumerate() {
        total += e(d) / f64::from(1u32 << (j + 1));
    }
    assert!((total - e(&x)).abs() < 1e-8 * e(&x), "{total} vs {}", e(&x));
}

#[test]
fn reference_taps_deviation() {
    let ours = dmey().unwrap();
    let reference = FilterPair::from_lowpass("reference", REFERENCE_DMEY.to_vec());
    // the published taps are themselves slightly non-orthonormal
    let ref_defect = reference.orthonormality_defect();
    // align centres: ours is symmetric about tap 31, the reference about tap 30
    let shifted: Vec<f64> = std::iter::once(0.0).chain(REFERENCE_DMEY[..61].iter().copied()).collect();
    let deviation = max_diff(&ours.lowpass, &shifted);
    println!(
        "dmey: max tap deviation from the published filter {deviation:.3e}; \
         orthonormality defect ours {:.3e}, published {ref_defect:.3e}",
        ours.orthonormality_defect()
    );
    assert!(deviation < 2e-3, "{deviation}");
    assert!(ours.orthonormality_defect() < ref_defect.max(1e-10));
}

#[test]
fn auxiliary_polynomial_identities() {
    for i in 0..=1000 {
        let a = i as f64 / 1000.0;
        assert!((meyer_auxiliary(a) + meyer_auxiliary(1.0 - a) - 1.0).abs() < 1e-12);
    }
    assert_eq!(meyer_auxiliary(-0.5), 0.0);
    assert_eq!(meyer_auxiliary(1.5), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let f = FilterPair::haar();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_signal(&mut rng, 64);
        let y = random_signal(&mut rng, 64);
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (cx, cy, cz) = (
            swt_decompose(&x, 3, &f).unwrap(),
            swt_decompose(&y, 3, &f).unwrap(),
            swt_decompose(&z, 3, &f).unwrap(),
        );
        let combine = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(u, v)| a * u + b * v).collect() };
        prop_assert!(max_diff(&cz.approx, &combine(&cx.approx, &cy.approx)) < 1e-10);
        for j in 0..3 {
            prop_assert!(max_diff(&cz.details[j], &combine(&cx.details[j], &cy.details[j])) < 1e-10);
        }
    }

    #[test]
    fn shift_equivariant(seed in any::<u64>(), k in 0usize..128) {
        let f = dmey().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_signal(&mut rng, 128);
        let mut rotated = x.clone();
        rotated.rotate_right(k);
        let c = swt_decompose(&x, 5, &f).unwrap();
        let r = swt_decompose(&rotated, 5, &f).unwrap();
        let rot = |v: &[f64]| { let mut w = v.to_vec(); w.rotate_right(k); w };
        prop_assert!(max_diff(&r.approx, &rot(&c.approx)) < 1e-12);
        for j in 0..5 {
            prop_assert!(max_diff(&r.details[j], &rot(&c.details[j])) < 1e-12);
        }
    }

    #[test]
    fn constant_signal_has_no_detail(level in -100.0f64..100.0, n in 1usize..200) {
        let f = dmey().unwrap();
        let c = swt_decompose_padded(&vec![level; n], 5, &f).unwrap();
        for d in &c.details {
            prop_assert!(d.iter().all(|v| v.abs() < 1e-9 * (1.0 + level.abs())));
        }
        prop_assert!(c.approx.iter().all(|v| (v - level * 2f64.powf(2.5)).abs() < 1e-9 * (1.0 + level.abs())));
    }
}
