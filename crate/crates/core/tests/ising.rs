use std::collections::BTreeMap;

use mdi_core::ising::{
    build_ising, build_transform, decode, read_ising_text, to_aux, CouplingProblem, SearchSpace,
    SpinVector, TransformKind,
};
use mdi_core::mimo::{ml_objective, rayleigh_instance, real_expand, QamConstellation, RealMimoInstance};
use mdi_core::numerics::{Matrix, RngStream};
use mdi_core::Error;
use proptest::prelude::*;
use rand::Rng;

/// `T` written out block by block: `[I I … I]` (2K blocks) or the legacy
/// `[I I]` / `[2I I I]`.
fn reference_t(kind: TransformKind, k: u32, nt: usize) -> Matrix {
    let blocks: Vec<f64> = match (kind, k) {
        (TransformKind::Degenerate, k) => vec![1.0; 2 * k as usize],
        (TransformKind::Legacy, 1) => vec![1.0, 1.0],
        (TransformKind::Legacy, _) => vec![2.0, 1.0, 1.0],
    };
    let n = 2 * nt;
    let mut t = Matrix::zeros(n, n * blocks.len());
    for (b, w) in blocks.iter().enumerate() {
        for r in 0..n {
            t[(r, b * n + r)] = *w;
        }
    }
    t
}

fn random_spins<R: Rng>(rng: &mut R, n: usize) -> SpinVector {
    SpinVector::new((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()).unwrap()
}

fn instance(seed: u64, nt: usize, order: usize, snr: f64) -> RealMimoInstance {
    let q = QamConstellation::new(order).unwrap();
    real_expand(&rayleigh_instance(RngStream::new(seed, 0), nt, nt, q, snr).unwrap())
}

fn kinds() -> impl Strategy<Value = (TransformKind, u32)> {
    prop::sample::select(vec![
        (TransformKind::Degenerate, 1),
        (TransformKind::Degenerate, 2),
        (TransformKind::Degenerate, 3),
        (TransformKind::Legacy, 1),
        (TransformKind::Legacy, 2),
    ])
}

fn all_spins(n: usize) -> impl Iterator<Item = SpinVector> {
    (0..1u64 << n).map(move |c| SpinVector::from_index(n, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn energy_identity((kind, k) in kinds(), seed in any::<u64>(), nt in 1usize..5, snr in 0.0f64..25.0) {
        let inst = instance(seed, nt, 16, snr);
        let mut rng = RngStream::new(seed, 1).rng();
        let q = inst.constellation;
        let guess: Vec<f64> = (0..2 * nt).map(|_| q.level(rng.random_range(0..q.side()))).collect();
        let t = build_transform(kind, k, nt).unwrap();
        let p = build_ising(&inst, &guess, &t).unwrap();
        let tm = reference_t(kind, k, nt);
        let r = inst.residual(&guess);
        for _ in 0..5 {
            let s = random_spins(&mut rng, t.width());
            let hts = inst.h.matvec(&tm.matvec(&s.to_f64()));
            let direct: f64 = r.iter().zip(&hts).map(|(a, b)| (a - b).powi(2)).sum();
            let ising = p.energy(&s) + p.constant();
            prop_assert!((ising - direct).abs() <= 1e-9 * direct.max(1.0), "{} vs {}", ising, direct);
            // the auxiliary form with s_a = +1 reproduces the same energy
            let mut with_aux = s.as_slice().to_vec();
            with_aux.push(1);
            let aux = to_aux(&p).energy(&SpinVector::new(with_aux).unwrap());
            prop_assert!((aux - p.energy(&s)).abs() <= 1e-9 * direct.max(1.0));
        }
    }

    #[test]
    fn coefficients_match_kronecker_form((kind, k) in kinds(), seed in any::<u64>(), nt in 1usize..4) {
        let inst = instance(seed, nt, 4, 10.0);
        let guess = vec![1.0; 2 * nt];
        let t = build_transform(kind, k, nt).unwrap();
        let p = build_ising(&inst, &guess, &t).unwrap();
        let tm = reference_t(kind, k, nt);
        prop_assert_eq!(t.matrix(), tm.clone());
        let tgt = tm.transpose().matmul(&inst.h.gram()).matmul(&tm);
        let j = p.couplings();
        for a in 0..t.width() {
            for b in 0..t.width() {
                let want = if a == b { 0.0 } else { -tgt[(a, b)] };
                prop_assert!((j[(a, b)] - want).abs() <= 1e-12 * tgt.max_abs());
            }
        }
        let h_want: Vec<f64> = tm.tr_matvec(&inst.h.tr_matvec(&inst.residual(&guess))).iter().map(|v| 2.0 * v).collect();
        for (a, b) in p.biases().iter().zip(&h_want) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        let c_want = inst.residual(&guess).iter().map(|v| v * v).sum::<f64>() + tgt.trace();
        prop_assert!((p.constant() - c_want).abs() <= 1e-9 * c_want);
    }

    #[test]
    fn lifted_apply_matches_dense((kind, k) in kinds(), seed in any::<u64>(), nt in 1usize..4) {
        let inst = instance(seed, nt, 16, 12.0);
        let guess = vec![-1.0; 2 * nt];
        let t = build_transform(kind, k, nt).unwrap();
        let aux = to_aux(&build_ising(&inst, &guess, &t).unwrap());
        let dense = CouplingProblem::from_matrix(aux.matrix()).unwrap();
        let n = aux.n_spins();
        let mut rng = RngStream::new(seed, 2).rng();
        const L: usize = 4;
        let x: Vec<f64> = (0..n * L).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (mut a, mut b) = (vec![0.0; n * L], vec![0.0; n * L]);
        let mut scratch = Vec::new();
        aux.apply_lanes::<L>(&x, &mut a, &mut scratch);
        dense.apply_lanes::<L>(&x, &mut b, &mut scratch);
        for l in 0..L {
            let lane: Vec<f64> = (0..n).map(|i| x[i * L + l]).collect();
            let single = aux.matrix().matvec(&lane);
            let mut one = vec![0.0; n];
            aux.apply(&lane, &mut one);
            for i in 0..n {
                prop_assert!((a[i * L + l] - single[i]).abs() <= 1e-10 * single[i].abs().max(1.0));
                prop_assert!((b[i * L + l] - single[i]).abs() <= 1e-10 * single[i].abs().max(1.0));
                // lane layout must not change the arithmetic
                prop_assert_eq!(a[i * L + l], one[i]);
            }
        }
        let m = aux.matrix();
        prop_assert!(m.is_symmetric(0.0));
        prop_assert!(m.diagonal().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn aux_energy_has_z2_symmetry(seed in any::<u64>(), k in 1u32..3) {
        let inst = instance(seed, 2, 16, 8.0);
        let t = build_transform(TransformKind::Degenerate, k, 2).unwrap();
        let aux = to_aux(&build_ising(&inst, &[1.0, -3.0, 3.0, 1.0], &t).unwrap());
        let mut rng = RngStream::new(seed, 3).rng();
        let s = random_spins(&mut rng, aux.n_spins());
        prop_assert_eq!(aux.energy(&s), aux.energy(&s.negated()));
    }
}

#[test]
fn range_and_degeneracy_exhaustive() {
    for (kind, k) in [
        (TransformKind::Degenerate, 1),
        (TransformKind::Degenerate, 2),
        (TransformKind::Legacy, 1),
        (TransformKind::Legacy, 2),
    ] {
        let t = build_transform(kind, k, 1).unwrap();
        let mut counts: BTreeMap<(i64, i64), u64> = BTreeMap::new();
        for s in all_spins(t.width()) {
            let d = t.apply(&s);
            *counts.entry((d[0] as i64, d[1] as i64)).or_default() += 1;
        }
        let values = SearchSpace { radius: k }.values();
        let want: Vec<(i64, i64)> = values
            .iter()
            .flat_map(|&a| values.iter().map(move |&b| (a, b)))
            .collect();
        assert_eq!(counts.keys().copied().collect::<Vec<_>>(), want, "{kind:?} K={k}");
        if kind == TransformKind::Degenerate {
            let binom = |n: u64, r: u64| (0..r).fold(1u64, |acc, i| acc * (n - i) / (i + 1));
            for (&(a, b), &c) in &counts {
                let per = |d: i64| binom(2 * u64::from(k), (i64::from(k) + d / 2) as u64);
                assert_eq!(c, per(a) * per(b));
            }
        }
    }
    // legacy K=2 has two preimages of 0 per dimension
    let t = build_transform(TransformKind::Legacy, 2, 1).unwrap();
    let zeros = all_spins(6).filter(|s| t.apply(s) == vec![0.0, 0.0]).count();
    assert_eq!(zeros, 4);
}

#[test]
fn transform_examples_and_errors() {
    let t = build_transform(TransformKind::Degenerate, 2, 1).unwrap();
    assert_eq!(t.matrix().cols(), 8);
    assert_eq!(t.width(), 8);
    assert_eq!(SearchSpace { radius: 2 }.values(), vec![-4, -2, 0, 2, 4]);
    assert!(build_transform(TransformKind::Degenerate, 0, 1).is_err());
    assert!(matches!(
        build_transform(TransformKind::Legacy, 3, 1),
        Err(Error::UnsupportedTransform(_))
    ));
    for (kind, k) in [
        (TransformKind::Degenerate, 1),
        (TransformKind::Degenerate, 3),
        (TransformKind::Legacy, 1),
        (TransformKind::Legacy, 2),
    ] {
        let t = build_transform(kind, k, 3).unwrap();
        assert!(t.apply(&t.zero_correction_spins()).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn identity_channel_coupling_pattern() {
    let q = QamConstellation::new(4).unwrap();
    let inst = RealMimoInstance::new(Matrix::identity(2), vec![1.0, 1.0], None, q, 0.0).unwrap();
    let t = build_transform(TransformKind::Degenerate, 1, 1).unwrap();
    let p = build_ising(&inst, &[1.0, 1.0], &t).unwrap();
    // 1_{2×2} ⊗ I₂ with the diagonal removed, negated
    let want = Matrix::from_rows(&[
        vec![0.0, 0.0, -1.0, 0.0],
        vec![0.0, 0.0, 0.0, -1.0],
        vec![-1.0, 0.0, 0.0, 0.0],
        vec![0.0, -1.0, 0.0, 0.0],
    ])
    .unwrap();
    assert_eq!(p.couplings(), want);
    // perfect guess: no bias, and every Ts = 0 pattern is a ground state
    assert!(p.biases().iter().all(|&h| h == 0.0));
    let min = all_spins(4).map(|s| p.energy(&s)).fold(f64::INFINITY, f64::min);
    for s in all_spins(4) {
        if t.apply(&s).iter().all(|&v| v == 0.0) {
            assert_eq!(p.energy(&s), min);
        }
    }
    let aux = to_aux(&p);
    let s = SpinVector::new(vec![1, -1, 1, 1, 1]).unwrap();
    let mut flipped = s.as_slice().to_vec();
    flipped[4] = -1;
    assert_eq!(aux.energy(&s), aux.energy(&SpinVector::new(flipped).unwrap()));
}

#[test]
fn aux_ground_state_decodes_to_original_ground_state() {
    for seed in 0..40 {
        let (nt, k) = if seed % 2 == 0 { (1, 2) } else { (2, 1) };
        let inst = instance(seed, nt, 16, 10.0);
        let guess = inst.constellation.quantize_vec(&vec![0.0; 2 * nt]);
        let t = build_transform(TransformKind::Degenerate, k, nt).unwrap();
        let p = build_ising(&inst, &guess, &t).unwrap();
        let aux = to_aux(&p);
        assert!(aux.n_spins() <= 12);
        let best_original = all_spins(p.n_spins())
            .map(|s| p.energy(&s))
            .fold(f64::INFINITY, f64::min);
        let best_aux = all_spins(aux.n_spins())
            .min_by(|a, b| aux.energy(a).total_cmp(&aux.energy(b)))
            .unwrap();
        let decoded = best_aux.from_aux();
        assert!((aux.energy(&best_aux) - best_original).abs() <= 1e-9 * best_original.abs().max(1.0));
        assert!((p.energy(&decoded) - best_original).abs() <= 1e-9 * best_original.abs().max(1.0));
    }
}

#[test]
fn decode_examples() {
    let q = QamConstellation::new(16).unwrap();
    let inst = real_expand(&rayleigh_instance(RngStream::new(50, 0), 2, 2, q, f64::INFINITY).unwrap());
    let t = build_transform(TransformKind::Degenerate, 1, 2).unwrap();
    let guess = vec![3.0, -1.0, 1.0, -3.0];
    let c = decode(&guess, &t, &t.zero_correction_spins(), &inst).unwrap();
    assert_eq!(c.symbols, guess);

    // all spins up pushes +2 in every coordinate; +3 clamps at +3
    let up = SpinVector::all_up(t.width());
    let c = decode(&guess, &t, &up, &inst).unwrap();
    assert_eq!(c.symbols, vec![3.0, 1.0, 3.0, -1.0]);

    let mut rng = RngStream::new(50, 1).rng();
    for _ in 0..50 {
        let s = random_spins(&mut rng, t.width());
        let c = decode(&guess, &t, &s, &inst).unwrap();
        let d = reference_t(TransformKind::Degenerate, 1, 2).matvec(&s.to_f64());
        let sym: Vec<f64> = guess.iter().zip(&d).map(|(g, d)| (g + d).clamp(-3.0, 3.0)).collect();
        assert_eq!(c.symbols, sym);
        assert_eq!(c.objective, ml_objective(&inst, &sym).unwrap());
    }
    assert!(decode(&guess, &t, &SpinVector::all_up(3), &inst).is_err());
}

#[test]
fn text_dump_round_trips() {
    let inst = instance(60, 2, 16, 10.0);
    let t = build_transform(TransformKind::Degenerate, 2, 2).unwrap();
    let p = build_ising(&inst, &[1.0, 1.0, -1.0, 3.0], &t).unwrap();
    let mut buf = Vec::new();
    p.write_text(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next(), Some("16"));
    let (j, h) = read_ising_text(buf.as_slice()).unwrap();
    assert_eq!(j, p.couplings());
    assert_eq!(h, p.biases());
    assert!(read_ising_text("2\n0 5 1.0\n".as_bytes()).is_err());
}

#[test]
fn spin_vector_validation() {
    assert!(SpinVector::new(vec![1, 0]).is_err());
    assert_eq!(SpinVector::from_signs(&[0.0, -0.5, 2.0]).as_slice(), &[1, -1, 1]);
    let s = SpinVector::new(vec![1, -1, -1]).unwrap();
    assert_eq!(s.from_aux().as_slice(), &[-1, 1]);
}
