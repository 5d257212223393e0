use mdi_core::cim::CimParams;
use mdi_core::linear::{mmse, mmse_sic};
use mdi_core::mdi::{allocate_anneals, di_detect, mdi_detect, mdi_detect_real, MdiConfig};
use mdi_core::mimo::{
    bit_error_count, ml_objective, ml_oracle, rayleigh_instance, real_expand, QamConstellation, RealMimoInstance,
};
use mdi_core::numerics::{Matrix, RngStream};
use mdi_core::radius::{
    estimate_radius, radius_from_gamma, soundness_check, within_radius, RadiusHeuristic,
};
use mdi_core::Error;
use proptest::prelude::*;

fn qam(m: usize) -> QamConstellation {
    QamConstellation::new(m).unwrap()
}

fn real(seed: u64, id: u64, nt: usize, order: usize, snr: f64) -> RealMimoInstance {
    real_expand(&rayleigh_instance(RngStream::new(seed, id), nt, nt, qam(order), snr).unwrap())
}

fn truth(inst: &RealMimoInstance) -> &[f64] {
    inst.x.as_deref().unwrap()
}

#[test]
fn mmse_never_beats_oracle() {
    let (mut oracle_bits, mut mmse_bits) = (0, 0);
    for i in 0..1000 {
        let inst = real(80, i, 4, 16, 25.0);
        let ml = ml_oracle(&inst).unwrap();
        let est = mmse(&inst).unwrap();
        assert!(ml_objective(&inst, &ml).unwrap() <= est.objective);
        assert_eq!(est.objective, ml_objective(&inst, &est.quantized).unwrap());
        assert!(est.quantized.iter().all(|&v| inst.constellation.contains(v)));
        oracle_bits += bit_error_count(truth(&inst), &ml, &inst.constellation).unwrap();
        mmse_bits += bit_error_count(truth(&inst), &est.quantized, &inst.constellation).unwrap();
    }
    assert!(oracle_bits <= mmse_bits, "{oracle_bits} > {mmse_bits}");
}

#[test]
fn sic_improves_on_mmse_at_8x8() {
    let n = 10_000;
    let q = qam(16);
    let (mut diffs, mut sic_not_worse) = (Vec::with_capacity(n), 0);
    for i in 0..n as u64 {
        let inst = real(81, i, 8, 16, 15.0);
        let m = mmse(&inst).unwrap();
        let s = mmse_sic(&inst).unwrap();
        if s.objective <= m.objective {
            sic_not_worse += 1;
        }
        let bm = bit_error_count(truth(&inst), &m.quantized, &q).unwrap() as f64;
        let bs = bit_error_count(truth(&inst), &s.quantized, &q).unwrap() as f64;
        diffs.push(bs - bm);
    }
    // paired one-sided test at 99%: the upper bound of mean(sic − mmse) is below 0
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let upper = mean + 2.3263478740408408 * (var / n as f64).sqrt();
    assert!(upper < 0.0, "mean {mean}, upper {upper}");
    assert!(sic_not_worse >= n * 9 / 10, "{sic_not_worse}/{n}");
}

#[test]
fn noiseless_square_channels_are_recovered() {
    for i in 0..100 {
        let inst = real(82, i, 4, 64, f64::INFINITY);
        assert_eq!(mmse(&inst).unwrap().quantized, truth(&inst));
        assert_eq!(mmse_sic(&inst).unwrap().quantized, truth(&inst));
    }
}

#[test]
fn linear_detectors_are_deterministic() {
    let inst = real(83, 0, 6, 16, 9.0);
    assert_eq!(mmse(&inst).unwrap(), mmse(&inst).unwrap());
    assert_eq!(mmse_sic(&inst).unwrap(), mmse_sic(&inst).unwrap());
}

#[test]
fn min_heuristic_is_sound() {
    for i in 0..1000 {
        let inst = real(84, i, 2, 4, 10.0);
        let guess = mmse(&inst).unwrap().quantized;
        let est = estimate_radius(&inst, &guess, RadiusHeuristic::Min).unwrap();
        assert!(soundness_check(&inst, &guess, est.radius).unwrap(), "instance {i}");
    }
    // the bound holds for any lattice guess, not only good ones
    let q = qam(16);
    for i in 0..200 {
        let inst = real(85, i, 2, 16, 5.0);
        let guess = q.quantize_vec(&[-3.0, 3.0, 1.0, -1.0]);
        let est = estimate_radius(&inst, &guess, RadiusHeuristic::Min).unwrap();
        assert!(soundness_check(&inst, &guess, est.radius).unwrap(), "instance {i}");
    }
}

#[test]
fn mean_heuristic_rarely_wrong_at_high_snr() {
    let n = 300;
    let wrong = (0..n)
        .filter(|&i| {
            let inst = real(86, i, 4, 16, 20.0);
            let guess = mmse_sic(&inst).unwrap().quantized;
            let est = estimate_radius(&inst, &guess, RadiusHeuristic::Mean).unwrap();
            !soundness_check(&inst, &guess, est.radius).unwrap()
        })
        .count();
    assert!(wrong * 20 < n as usize, "{wrong}/{n}");
}

#[test]
fn high_snr_guesses_are_skipped() {
    let n = 1000;
    let skipped = (0..n)
        .filter(|&i| {
            let inst = real(87, i, 4, 4, 30.0);
            let guess = mmse_sic(&inst).unwrap().quantized;
            estimate_radius(&inst, &guess, RadiusHeuristic::Mean).unwrap().skipped
        })
        .count();
    assert!(skipped * 100 >= 95 * n as usize, "{skipped}/{n}");
}

#[test]
fn radius_examples() {
    assert_eq!(radius_from_gamma(5.0, &qam(64)), 2);
    assert_eq!(radius_from_gamma(100.0, &qam(16)), 3);
    assert_eq!(radius_from_gamma(6.0, &qam(16)), 3);
    assert_eq!(radius_from_gamma(5.99, &qam(16)), 2);
    assert_eq!(radius_from_gamma(1.99, &qam(16)), 0);
    let inst = real(88, 0, 3, 16, f64::INFINITY);
    let est = estimate_radius(&inst, truth(&inst), RadiusHeuristic::Min).unwrap();
    // the complex and real products round differently, so Γ is only ~0
    assert!(est.gamma < 1e-9);
    assert_eq!((est.radius, est.skipped), (0, true));
    assert!(soundness_check(&inst, truth(&inst), 0).unwrap());
    assert!(within_radius(&[1.0, 3.0], &[-3.0, 3.0], 2));
    assert!(!within_radius(&[1.0, 3.0], &[-3.0, 3.0], 1));

    let zero = RealMimoInstance::new(Matrix::zeros(2, 2), vec![0.0, 0.0], None, qam(4), 0.0).unwrap();
    assert!(matches!(
        estimate_radius(&zero, &[1.0, 1.0], RadiusHeuristic::Mean),
        Err(Error::DegenerateChannel(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn radius_is_monotone_in_lambda(seed in any::<u64>(), nt in 1usize..6, snr in 0.0f64..30.0, order in prop::sample::select(vec![4usize, 16, 64])) {
        let inst = real(seed, 0, nt, order, snr);
        let guess = mmse(&inst).unwrap().quantized;
        let r = |h| estimate_radius(&inst, &guess, h).unwrap();
        let (lo, mid, hi) = (r(RadiusHeuristic::Max), r(RadiusHeuristic::Mean), r(RadiusHeuristic::Min));
        prop_assert!(lo.radius <= mid.radius && mid.radius <= hi.radius);
        prop_assert!(lo.gamma <= mid.gamma && mid.gamma <= hi.gamma);
        prop_assert!(hi.radius <= inst.constellation.omega());
    }

    #[test]
    fn mdi_invariants(seed in any::<u64>(), snr in 4.0f64..20.0, n_s in 1usize..24, r_max in 0u32..4, stages in 1usize..4) {
        let inst = real(seed, 0, 2, 16, snr);
        let cfg = MdiConfig::new(n_s, RadiusHeuristic::Mean, r_max, stages);
        let cim = CimParams { steps: 128, ..CimParams::default() };
        let rep = mdi_detect_real(&inst, &cfg, &cim, RngStream::new(seed, 1)).unwrap();
        prop_assert!(rep.objective <= rep.mmse.objective);
        prop_assert!(rep.objective <= rep.mmse_sic.objective);
        prop_assert_eq!(rep.objective, ml_objective(&inst, &rep.real_symbols).unwrap());
        prop_assert!(rep.real_symbols.iter().all(|&v| inst.constellation.contains(v)));
        let mut prev = [rep.mmse.objective, rep.mmse_sic.objective];
        let mut used = 0;
        for stage in &rep.stages {
            for (t, &p) in prev.iter().enumerate() {
                prop_assert!(stage.best_objectives[t] <= p);
                prop_assert!(stage.radii[t] <= r_max);
            }
            prev = stage.best_objectives;
            prop_assert!(stage.anneals <= n_s);
            prop_assert_eq!(stage.anneals, stage.sub_instances.iter().map(|s| s.anneals).sum::<usize>());
            used += stage.anneals;
        }
        prop_assert_eq!(used, rep.anneals_used);
        prop_assert!(rep.anneals_used <= cfg.total_anneals());
        prop_assert!(rep.stages.len() <= stages);
        prop_assert_eq!(rep.objective, prev[0].min(prev[1]));
    }

    #[test]
    fn allocation_respects_budget(n_s in 1usize..200, r1 in 0u32..9, r2 in 0u32..9) {
        let plan = allocate_anneals(n_s, r1, r2);
        prop_assert_eq!(plan.len(), (r1 + r2) as usize);
        let total: usize = plan.iter().map(|p| p.2).sum();
        if r1 + r2 > 0 {
            prop_assert_eq!(total, n_s);
        }
        // smaller radii never receive fewer anneals
        for w in plan.windows(2) {
            prop_assert!(w[0].1 <= w[1].1 && w[0].2 >= w[1].2);
        }
        if n_s >= (r1 + r2) as usize {
            prop_assert!(plan.iter().all(|p| p.2 >= 1));
        }
    }
}

#[test]
fn noiseless_mdi_skips() {
    let c = rayleigh_instance(RngStream::new(89, 0), 2, 2, qam(4), f64::INFINITY).unwrap();
    let rep = mdi_detect(&c, &MdiConfig::default(), &CimParams::default(), RngStream::new(89, 1)).unwrap();
    assert!(rep.skipped);
    assert_eq!(rep.anneals_used, 0);
    assert_eq!(&rep.symbols, c.transmitted.as_ref().unwrap());
    assert!(rep.objective < 1e-20);
}

#[test]
fn mdi_is_deterministic() {
    let c = rayleigh_instance(RngStream::new(90, 0), 3, 3, qam(16), 8.0).unwrap();
    let cfg = MdiConfig::new(16, RadiusHeuristic::Mean, 3, 3);
    let a = mdi_detect(&c, &cfg, &CimParams::default(), RngStream::new(90, 1)).unwrap();
    let b = mdi_detect(&c, &cfg, &CimParams::default(), RngStream::new(90, 1)).unwrap();
    assert_eq!(a, b);
    assert!(MdiConfig::new(0, RadiusHeuristic::Mean, 3, 3).validate().is_err());
}

#[test]
fn di_keeps_optimal_guess() {
    for i in 0..20 {
        let inst = real(91, i, 2, 16, 10.0);
        let ml = ml_oracle(&inst).unwrap();
        let c = di_detect(&inst, &ml, 1, 16, &CimParams::default(), RngStream::new(91, i)).unwrap();
        assert_eq!(c.symbols, ml);
    }
}

#[test]
fn di_fixes_single_step_error() {
    let q = qam(16);
    let mut recovered = 0;
    for i in 0..200u64 {
        let inst = real(92, i, 4, 16, f64::INFINITY);
        let x = truth(&inst).to_vec();
        let mut guess = x.clone();
        let k = (i % 8) as usize;
        guess[k] = if x[k] + 2.0 <= 3.0 { x[k] + 2.0 } else { x[k] - 2.0 };
        assert!(q.contains(guess[k]));
        let c = di_detect(&inst, &guess, 1, 16, &CimParams::default(), RngStream::new(92, i)).unwrap();
        if c.symbols == x {
            recovered += 1;
        }
    }
    assert!(recovered >= 190, "{recovered}/200");
    let inst = real(92, 0, 2, 16, 10.0);
    assert!(di_detect(&inst, &[1.0; 4], 0, 16, &CimParams::default(), RngStream::new(0, 0)).is_err());
    assert!(di_detect(&inst, &[1.0; 4], 1, 0, &CimParams::default(), RngStream::new(0, 0)).is_err());
}
